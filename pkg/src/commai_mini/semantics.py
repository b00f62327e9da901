"""Membership, production, and brute-force oracle for description languages.

Task strings are plain ``str`` values over the uppercase task alphabet;
strings containing anything else (including lowercase) are members of no
language. Callers that accept swapped-case input normalize before calling
in here.

Membership semantics by description shape:

* ``Single(g)``: nonempty concatenations of ``g`` (the set ``(g)+``).
* ``Disjunction(gs)``: nonempty concatenations of tokens drawn from ``gs``.
* ``Conjunction`` of positives only: some single segmentation into the term
  set uses every term at least once (token-level coverage, not substring
  presence: ``AB and BA`` rejects ``ABAB``).
* ``Conjunction`` with an ``anything`` term: any nonempty string containing
  every positive term as a substring and no negated term anywhere.
* ``Anything``: every nonempty string.

The empty string belongs to no language.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .desc_lang import (
    ALPHABET,
    ALPHABET_SET,
    Anything,
    Conjunction,
    Description,
    Disjunction,
    Negated,
    Positive,
    Single,
)
from .errors import GuardExceeded, ResampleExhausted, Unsatisfiable

RESAMPLE_LIMIT = 1000
MAX_CONJUNCTION_TERMS = 16  # used-terms bitmask guard
DEFAULT_MAX_LEN = 24

ENUM_MAX_ALPHABET = 6
ENUM_MAX_LEN = 10


@dataclass(frozen=True)
class Verdict:
    """Membership answer, with a token segmentation when one proves it."""

    member: bool
    witness: tuple[int, ...] | None = None


def recognize(d: Description, s: str) -> Verdict:
    """Decide whether ``s`` belongs to the language of ``d``.

    Total over all strings: anything outside the uppercase alphabet (or the
    empty string) is simply a non-member.
    """
    if not s or any(c not in ALPHABET_SET for c in s):
        return Verdict(False)
    if isinstance(d, Anything):
        return Verdict(True)
    if isinstance(d, Single):
        witness = _segment_any(s, [d.ngram.text])
        return Verdict(witness is not None, witness)
    if isinstance(d, Disjunction):
        witness = _segment_any(s, [g.text for g in d.ngrams])
        return Verdict(witness is not None, witness)
    positives = [t.ngram.text for t in d.terms if isinstance(t, Positive)]
    negateds = [t.ngram.text for t in d.terms if isinstance(t, Negated)]
    if any(isinstance(t, Anything) for t in d.terms):
        ok = all(p in s for p in positives) and not any(n in s for n in negateds)
        return Verdict(ok)
    witness = _segment_covering(s, positives)
    return Verdict(witness is not None, witness)


def produce(
    d: Description,
    count: int,
    max_len: int = DEFAULT_MAX_LEN,
    rng: random.Random | None = None,
) -> list[str]:
    """Return ``count`` pairwise-distinct member strings of length <= max_len."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if rng is None:
        rng = random.Random()
    _check_quick_unsat(d, count, max_len)

    results: list[str] = []
    seen: set[str] = set()
    for _ in range(RESAMPLE_LIMIT):
        s = _sample_member(d, max_len, rng)
        if s is None or s in seen:
            continue
        if recognize(d, s).member:
            seen.add(s)
            results.append(s)
            if len(results) == count:
                return results
    raise ResampleExhausted(f"could not produce {count} member(s) of {d!r} within {max_len} letters")


def enumerate_language(d: Description, alphabet: str, max_len: int) -> set[str]:
    """Exact member set up to ``max_len`` over ``alphabet``, by exhaustive check.

    This is the testing oracle: it re-derives membership from the definitions
    (naive recursive segmentation, index-based substring scans) and shares no
    code with :func:`recognize`.
    """
    letters = sorted(set(alphabet))
    if len(letters) > ENUM_MAX_ALPHABET or max_len > ENUM_MAX_LEN:
        raise GuardExceeded(f"enumeration guard: <= {ENUM_MAX_ALPHABET} letters, length <= {ENUM_MAX_LEN}")
    members: set[str] = set()
    for length in range(1, max_len + 1):
        for combo in itertools.product(letters, repeat=length):
            s = "".join(combo)
            if _oracle_member(d, s):
                members.add(s)
    return members


def satisfiable(d: Description, max_len: int = DEFAULT_MAX_LEN) -> bool:
    """Whether some member string of length <= max_len exists.

    Segmentation-based shapes are decided exactly from term lengths. For
    conjunctions with ``anything`` the check constructs candidate members with
    a deterministic seeded search, so a False answer for adversarial
    hand-written descriptions is a bounded-search verdict, not a proof.
    """
    if isinstance(d, Anything):
        return max_len >= 1
    if isinstance(d, Single):
        return len(d.ngram.text) <= max_len
    if isinstance(d, Disjunction):
        return min(len(g.text) for g in d.ngrams) <= max_len
    positives = [t.ngram.text for t in d.terms if isinstance(t, Positive)]
    negateds = [t.ngram.text for t in d.terms if isinstance(t, Negated)]
    if not any(isinstance(t, Anything) for t in d.terms):
        return sum(len(p) for p in positives) <= max_len
    # Cheap impossibility: a required substring that itself contains (or
    # equals) a forbidden one can never be present.
    for p in positives:
        if any(n in p for n in negateds):
            return False
    rng = random.Random(0x5EED)
    for _ in range(RESAMPLE_LIMIT):
        if _sample_anything_conj(positives, negateds, max_len, rng) is not None:
            return True
    return False


# ── recognizer internals (dynamic programming) ───────────────────────

def _segment_any(s: str, terms: list[str]) -> tuple[int, ...] | None:
    """Token sequence proving s is a concatenation of terms, or None."""
    n = len(s)
    parent: list[tuple[int, int] | None] = [None] * (n + 1)
    reachable = [False] * (n + 1)
    reachable[0] = True
    for i in range(n):
        if not reachable[i]:
            continue
        for idx, t in enumerate(terms):
            j = i + len(t)
            if j <= n and not reachable[j] and s.startswith(t, i):
                reachable[j] = True
                parent[j] = (i, idx)
    if not reachable[n]:
        return None
    witness: list[int] = []
    pos = n
    while pos > 0:
        prev, idx = parent[pos]  # type: ignore[misc]
        witness.append(idx)
        pos = prev
    witness.reverse()
    return tuple(witness)


def _segment_covering(s: str, terms: list[str]) -> tuple[int, ...] | None:
    """Like _segment_any, but the segmentation must use every term."""
    if len(terms) > MAX_CONJUNCTION_TERMS:
        raise GuardExceeded(f"conjunction limited to {MAX_CONJUNCTION_TERMS} terms")
    n = len(s)
    full = (1 << len(terms)) - 1
    # reach[i] maps used-terms mask -> (prev position, prev mask, term index)
    reach: list[dict[int, tuple[int, int, int]]] = [dict() for _ in range(n + 1)]
    reach[0][0] = (-1, -1, -1)
    for i in range(n):
        if not reach[i]:
            continue
        for idx, t in enumerate(terms):
            j = i + len(t)
            if j > n or not s.startswith(t, i):
                continue
            bit = 1 << idx
            for mask in reach[i]:
                nm = mask | bit
                if nm not in reach[j]:
                    reach[j][nm] = (i, mask, idx)
    if full not in reach[n]:
        return None
    witness: list[int] = []
    pos, mask = n, full
    while pos > 0:
        prev, pmask, idx = reach[pos][mask]
        witness.append(idx)
        pos, mask = prev, pmask
    witness.reverse()
    return tuple(witness)


# ── brute-force oracle internals ─────────────────────────────────────

def _oracle_member(d: Description, s: str) -> bool:
    if not s:
        return False
    if isinstance(d, Anything):
        return True
    if isinstance(d, Single):
        g = d.ngram.text
        return len(s) % len(g) == 0 and s == g * (len(s) // len(g))
    if isinstance(d, Disjunction):
        return _tiles(s, [g.text for g in d.ngrams])
    positives = [t.ngram.text for t in d.terms if isinstance(t, Positive)]
    negateds = [t.ngram.text for t in d.terms if isinstance(t, Negated)]
    if any(isinstance(t, Anything) for t in d.terms):
        return all(_occurs(p, s) for p in positives) and not any(_occurs(x, s) for x in negateds)
    return _tiles_covering(s, positives, frozenset(), frozenset(range(len(positives))))


def _tiles(s: str, terms: list[str]) -> bool:
    if s == "":
        return True
    return any(s.startswith(t) and _tiles(s[len(t):], terms) for t in terms)


def _tiles_covering(s: str, terms: list[str], used: frozenset[int], needed: frozenset[int]) -> bool:
    if s == "":
        return used == needed
    for idx, t in enumerate(terms):
        if s.startswith(t) and _tiles_covering(s[len(t):], terms, used | {idx}, needed):
            return True
    return False


def _occurs(sub: str, s: str) -> bool:
    for i in range(len(s) - len(sub) + 1):
        if s[i:i + len(sub)] == sub:
            return True
    return False


# ── producer internals ───────────────────────────────────────────────

def _check_quick_unsat(d: Description, count: int, max_len: int) -> None:
    """Raise Unsatisfiable for cases decidable from term lengths alone."""
    if isinstance(d, Anything):
        if max_len < 1:
            raise Unsatisfiable("max_len < 1")
        return
    if isinstance(d, Single):
        # members are g, gg, ... so exactly max_len // len(g) of them fit
        if max_len // len(d.ngram.text) < count:
            raise Unsatisfiable(f"only {max_len // len(d.ngram.text)} member(s) fit in {max_len}")
        return
    if isinstance(d, Disjunction):
        fitting = [g.text for g in d.ngrams if len(g.text) <= max_len]
        if not fitting:
            raise Unsatisfiable("no disjunct fits the length cap")
        if count > 1 and len(fitting) == 1 and max_len // len(fitting[0]) < count:
            raise Unsatisfiable("length cap admits fewer distinct members than requested")
        return
    positives = [t.ngram.text for t in d.terms if isinstance(t, Positive)]
    if not any(isinstance(t, Anything) for t in d.terms):
        if sum(len(p) for p in positives) > max_len:
            raise Unsatisfiable("covering all conjunction terms exceeds the length cap")


def _sample_member(d: Description, max_len: int, rng: random.Random) -> str | None:
    if isinstance(d, Anything):
        length = min(max_len, _geometric(rng, mean=4))
        return "".join(rng.choice(ALPHABET) for _ in range(length))
    if isinstance(d, Single):
        return _sample_tiling(rng, [d.ngram.text], max_len, cover=False)
    if isinstance(d, Disjunction):
        return _sample_tiling(rng, [g.text for g in d.ngrams], max_len, cover=False)
    positives = [t.ngram.text for t in d.terms if isinstance(t, Positive)]
    negateds = [t.ngram.text for t in d.terms if isinstance(t, Negated)]
    if any(isinstance(t, Anything) for t in d.terms):
        return _sample_anything_conj(positives, negateds, max_len, rng)
    if len(positives) > MAX_CONJUNCTION_TERMS:
        raise GuardExceeded(f"conjunction limited to {MAX_CONJUNCTION_TERMS} terms")
    return _sample_tiling(rng, positives, max_len, cover=True)


def _sample_tiling(rng: random.Random, terms: list[str], max_len: int, cover: bool) -> str | None:
    min_tokens = len(terms) if cover else 1
    k = max(min_tokens, _geometric(rng, mean=4))
    tokens = list(terms) if cover else []
    while len(tokens) < k:
        tokens.append(rng.choice(terms))
    rng.shuffle(tokens)
    while sum(len(t) for t in tokens) > max_len:
        removable = _removable_index(tokens, cover, min_tokens)
        if removable is None:
            return None
        tokens.pop(removable)
    return "".join(tokens)


def _removable_index(tokens: list[str], cover: bool, min_tokens: int) -> int | None:
    if len(tokens) <= min_tokens:
        return None
    if not cover:
        return len(tokens) - 1
    counts: dict[str, int] = {}
    for t in tokens:
        counts[t] = counts.get(t, 0) + 1
    for i, t in enumerate(tokens):
        if counts[t] > 1:
            return i
    return None


def _sample_anything_conj(
    positives: list[str], negateds: list[str], max_len: int, rng: random.Random
) -> str | None:
    base = sum(len(p) for p in positives)
    budget = max_len - base
    if budget < 0:
        return None
    filler = min(budget, _geometric(rng, mean=6) - 1)
    if not positives:
        filler = max(1, filler)
    cuts = sorted(rng.randint(0, filler) for _ in range(len(positives)))
    segments = []
    prev = 0
    for c in [*cuts, filler]:
        segments.append("".join(rng.choice(ALPHABET) for _ in range(c - prev)))
        prev = c
    order = list(positives)
    rng.shuffle(order)
    parts = [segments[0]]
    for seg, p in zip(segments[1:], order):
        parts.append(p)
        parts.append(seg)
    s = "".join(parts)
    if any(n in s for n in negateds):
        return None
    return s


def _geometric(rng: random.Random, mean: float) -> int:
    """Geometric draw on {1, 2, ...} with the given mean."""
    p = 1.0 / mean
    k = 1
    while rng.random() >= p and k < 512:
        k += 1
    return k
