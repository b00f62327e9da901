"""Procedural generation of task instances.

A :class:`TaskSpec` pins down one task: which set it belongs to, the shape
and size of its descriptions, and the interaction mode. Sampling an
instance draws fresh symbols every time, so the same task exposes the
learner to ever-changing concrete stringsets.

``n_terms`` counts all description terms including an ``anything`` term
(``not X and Y and anything`` has three). The ``shape`` field makes the
operator explicit; for production/induction sets the other fields alone
would not distinguish a two-term disjunction from a two-term conjunction.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from .desc_lang import (
    ALPHABET,
    Anything,
    CaseMode,
    Conjunction,
    Description,
    Disjunction,
    KEYWORDS,
    Negated,
    NGram,
    Positive,
    Single,
    render_description,
    validate_description,
)
from .errors import NoNegativeExists, ResampleExhausted, SpecInvalid
from .semantics import DEFAULT_MAX_LEN, RESAMPLE_LIMIT, produce, recognize, satisfiable

MAX_TERMS = 5


class Mode(enum.Enum):
    RECOGNIZE = "recognize"
    PRODUCE = "produce"
    PRODUCE_TWO = "produce_two"
    DESCRIBE = "describe"


class Shape(enum.Enum):
    SINGLE = "single"
    DISJUNCTION = "disjunction"
    CONJUNCTION = "conjunction"
    ANYTHING = "anything"


@dataclass(frozen=True)
class TaskSpec:
    set_id: int
    mode: Mode
    shape: Shape
    max_ngram_len: int = 5
    n_terms: int = 1
    n_negated: int = 0
    has_anything: bool = False
    case_mode: CaseMode = CaseMode.CANONICAL

    @property
    def n_ngram_terms(self) -> int:
        return self.n_terms - (1 if self.has_anything else 0)

    def validate(self) -> None:
        if not 1 <= self.set_id <= 7:
            raise SpecInvalid(f"set_id {self.set_id} out of range")
        if not 1 <= self.max_ngram_len <= 5:
            raise SpecInvalid("max_ngram_len must be in 1..5")
        if not 1 <= self.n_terms <= MAX_TERMS:
            raise SpecInvalid(f"n_terms must be in 1..{MAX_TERMS}")
        if self.n_negated < 0:
            raise SpecInvalid("n_negated must be >= 0")
        self._validate_shape()
        self._validate_set()

    def _validate_shape(self) -> None:
        if self.shape is Shape.SINGLE:
            ok = self.n_terms == 1 and not self.has_anything and self.n_negated == 0
        elif self.shape is Shape.ANYTHING:
            ok = self.n_terms == 1 and self.has_anything and self.n_negated == 0
        elif self.shape is Shape.DISJUNCTION:
            ok = self.n_terms >= 2 and not self.has_anything and self.n_negated == 0
        else:
            ok = (
                self.n_terms >= 2
                and self.n_ngram_terms >= 1
                and self.n_negated <= self.n_ngram_terms
                and (self.n_negated == 0 or self.has_anything)
            )
        if not ok:
            raise SpecInvalid(f"fields inconsistent with shape {self.shape.value}")

    def _validate_set(self) -> None:
        s = self.set_id
        if s != 6 and self.case_mode is not CaseMode.CANONICAL:
            raise SpecInvalid("swapped case belongs to set 6")
        if s == 1:
            ok = self.shape is Shape.SINGLE and self.mode is Mode.RECOGNIZE
        elif s == 2:
            ok = self.shape in (Shape.DISJUNCTION, Shape.ANYTHING) and self.mode is Mode.RECOGNIZE
        elif s == 3:
            ok = self.shape is Shape.CONJUNCTION and self.n_negated == 0 and self.mode is Mode.RECOGNIZE
        elif s == 4:
            ok = (
                self.shape is Shape.CONJUNCTION
                and self.n_negated >= 1
                and self.has_anything
                and self.mode is Mode.RECOGNIZE
            )
        elif s == 5:
            ok = self.mode is Mode.PRODUCE
        elif s == 6:
            ok = self.mode in (Mode.PRODUCE, Mode.PRODUCE_TWO) and (
                self.mode is Mode.PRODUCE_TWO or self.case_mode is CaseMode.SWAPPED
            )
        else:
            ok = self.mode is Mode.DESCRIBE and self.shape in (
                Shape.SINGLE,
                Shape.DISJUNCTION,
                Shape.ANYTHING,
            )
        if not ok:
            raise SpecInvalid(f"fields inconsistent with set #{s}")

    def to_dict(self) -> dict:
        return {
            "set_id": self.set_id,
            "mode": self.mode.value,
            "shape": self.shape.value,
            "max_ngram_len": self.max_ngram_len,
            "n_terms": self.n_terms,
            "n_negated": self.n_negated,
            "has_anything": self.has_anything,
            "case_mode": self.case_mode.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskSpec":
        spec = cls(
            set_id=int(data["set_id"]),
            mode=Mode(data["mode"]),
            shape=Shape(data["shape"]),
            max_ngram_len=int(data.get("max_ngram_len", 5)),
            n_terms=int(data.get("n_terms", 1)),
            n_negated=int(data.get("n_negated", 0)),
            has_anything=bool(data.get("has_anything", False)),
            case_mode=CaseMode(data.get("case_mode", "canonical")),
        )
        spec.validate()
        return spec


@dataclass(frozen=True)
class TaskInstance:
    spec: TaskSpec
    description: Description
    instance_seed: int
    target: tuple[str, bool] | None = None
    samples: tuple[str, ...] | None = None

    def to_dict(self) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "description": render_description(self.description),
            "instance_seed": self.instance_seed,
        }
        if self.target is not None:
            out["target"] = self.target[0]
            out["label"] = self.target[1]
        if self.samples is not None:
            out["samples"] = list(self.samples)
        return out


def sample_instance(
    spec: TaskSpec,
    rng: random.Random,
    max_len: int = DEFAULT_MAX_LEN,
    alphabet: str = ALPHABET,
) -> TaskInstance:
    """Draw one concrete episode for ``spec``.

    All sampling is driven by a per-instance seed taken from ``rng``, so an
    instance can be reproduced from its seed alone.
    """
    spec.validate()
    instance_seed = rng.getrandbits(64)
    r = random.Random(instance_seed)
    needed = 2 if spec.mode in (Mode.PRODUCE_TWO, Mode.DESCRIBE) else 1
    d = _sample_description(spec, r, max_len, alphabet, needed)

    target: tuple[str, bool] | None = None
    samples: tuple[str, ...] | None = None
    if spec.mode is Mode.RECOGNIZE:
        # bare `anything` has an empty complement, so those instances are
        # always true; everything else is balanced
        label = True if spec.shape is Shape.ANYTHING else r.random() < 0.5
        s = sample_positive(d, r, max_len) if label else sample_negative(d, r, max_len)
        target = (s, label)
    elif spec.mode is Mode.DESCRIBE:
        count = r.randint(2, 5)
        if isinstance(d, Single):
            count = min(count, max_len // len(d.ngram.text))
        samples = tuple(produce(d, count, max_len, r))
    return TaskInstance(spec=spec, description=d, instance_seed=instance_seed, target=target, samples=samples)


def sample_positive(d: Description, rng: random.Random, max_len: int = DEFAULT_MAX_LEN) -> str:
    """A member string of ``d``, at most ``max_len`` letters."""
    return produce(d, 1, max_len, rng)[0]


def sample_negative(d: Description, rng: random.Random, max_len: int = DEFAULT_MAX_LEN) -> str:
    """A nonempty alphabet string that ``d`` rejects.

    Candidates mix near-miss mutations of positive samples (0.5), uniform
    random strings (0.25), and positives of an independently re-lettered
    description (0.25); each candidate is verified against the recognizer.
    For descriptions with negated terms the mutation arm also splices a
    forbidden term into a positive sample, which is what the complement of
    e.g. ``not ABCDE and anything`` actually looks like.
    """
    if isinstance(d, Anything):
        raise NoNegativeExists("every nonempty string matches `anything`")
    negateds = [t.ngram.text for t in d.terms if isinstance(t, Negated)] if isinstance(d, Conjunction) else []
    for _ in range(RESAMPLE_LIMIT):
        u = rng.random()
        if u < 0.5:
            base = sample_positive(d, rng, max_len)
            if negateds and rng.random() < 0.5:
                candidate = _splice(base, rng.choice(negateds), rng, max_len)
            else:
                candidate = _mutate(base, rng, max_len)
        elif u < 0.75:
            length = min(max_len, _length_draw(rng))
            candidate = "".join(rng.choice(ALPHABET) for _ in range(length))
        else:
            other = _reletter(d, rng)
            try:
                candidate = sample_positive(other, rng, max_len)
            except ResampleExhausted:
                continue
        if candidate and len(candidate) <= max_len and not recognize(d, candidate).member:
            return candidate
    raise ResampleExhausted(f"no negative found for {d!r}")


# ── internals ────────────────────────────────────────────────────────

def _sample_description(
    spec: TaskSpec, rng: random.Random, max_len: int, alphabet: str, needed_count: int
) -> Description:
    for _ in range(RESAMPLE_LIMIT):
        grams = _sample_ngrams(spec.n_ngram_terms, spec.max_ngram_len, rng, alphabet)
        if spec.shape is Shape.ANYTHING:
            d: Description = Anything()
        elif spec.shape is Shape.SINGLE:
            d = Single(grams[0])
        elif spec.shape is Shape.DISJUNCTION:
            d = Disjunction(tuple(grams))
        else:
            terms: list = [Negated(x) for x in grams[: spec.n_negated]]
            terms += [Positive(x) for x in grams[spec.n_negated:]]
            if spec.has_anything:
                terms.append(Anything())
            d = Conjunction(tuple(terms))
            negs = grams[: spec.n_negated]
            poss = grams[spec.n_negated:]
            if any(n.text in p.text for n in negs for p in poss):
                continue
        if not _satisfiable_for(d, needed_count, max_len):
            continue
        validate_description(d, spec.max_ngram_len)
        return d
    raise ResampleExhausted(f"could not sample a satisfiable description for {spec!r}")


def _sample_ngrams(count: int, max_ngram_len: int, rng: random.Random, alphabet: str) -> list[NGram]:
    grams: list[NGram] = []
    seen: set[str] = set()
    attempts = 0
    while len(grams) < count:
        attempts += 1
        if attempts > RESAMPLE_LIMIT:
            raise ResampleExhausted("could not sample distinct n-grams")
        length = rng.randint(1, max_ngram_len)
        text = "".join(rng.choice(alphabet) for _ in range(length))
        if text in seen or text.lower() in KEYWORDS:
            continue
        seen.add(text)
        grams.append(NGram(text))
    return grams


def _satisfiable_for(d: Description, count: int, max_len: int) -> bool:
    """Conservatively ensure `count` distinct members fit within max_len."""
    if count <= 1:
        return satisfiable(d, max_len)
    if isinstance(d, Anything):
        return max_len >= 2
    if isinstance(d, Single):
        return max_len // len(d.ngram.text) >= count
    if isinstance(d, Disjunction):
        fitting = [len(g.text) for g in d.ngrams if len(g.text) <= max_len]
        if not fitting:
            return False
        return len(fitting) >= count or max_len // min(fitting) >= count
    positives = [t.ngram.text for t in d.terms if isinstance(t, Positive)]
    if any(isinstance(t, Anything) for t in d.terms):
        # a member of length <= max_len - 1 extends to a second member
        return satisfiable(d, max_len - 1)
    lens = [len(p) for p in positives]
    return sum(lens) + min(lens) <= max_len


def _mutate(s: str, rng: random.Random, max_len: int) -> str:
    ops = ["sub"]
    if len(s) < max_len:
        ops.append("ins")
    if len(s) > 1:
        ops.append("del")
    op = rng.choice(ops)
    i = rng.randrange(len(s))
    if op == "sub":
        c = rng.choice([x for x in ALPHABET if x != s[i]])
        return s[:i] + c + s[i + 1:]
    if op == "ins":
        return s[:i] + rng.choice(ALPHABET) + s[i:]
    return s[:i] + s[i + 1:]


def _splice(s: str, chunk: str, rng: random.Random, max_len: int) -> str:
    if len(s) + len(chunk) > max_len:
        s = s[: max_len - len(chunk)]
    i = rng.randint(0, len(s))
    return s[:i] + chunk + s[i:]


def _reletter(d: Description, rng: random.Random) -> Description:
    """Fresh description of the same structure with newly drawn letters."""
    mapping: dict[NGram, NGram] = {}
    seen: set[str] = set()

    def fresh(g: NGram) -> NGram:
        if g not in mapping:
            for _ in range(RESAMPLE_LIMIT):
                text = "".join(rng.choice(ALPHABET) for _ in range(len(g.text)))
                if text not in seen and text.lower() not in KEYWORDS:
                    seen.add(text)
                    mapping[g] = NGram(text)
                    break
            else:
                mapping[g] = g
        return mapping[g]

    if isinstance(d, Single):
        return Single(fresh(d.ngram))
    if isinstance(d, Disjunction):
        return Disjunction(tuple(fresh(g) for g in d.ngrams))
    if isinstance(d, Conjunction):
        terms = tuple(
            t if isinstance(t, Anything) else type(t)(fresh(t.ngram)) for t in d.terms
        )
        return Conjunction(terms)
    return d


def _length_draw(rng: random.Random) -> int:
    k = 1
    while rng.random() >= 0.25 and k < 64:
        k += 1
    return k
