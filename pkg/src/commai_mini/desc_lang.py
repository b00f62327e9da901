"""Description mini-language: AST, parser, and renderer.

A description names a stringset over the 26-letter task alphabet. The
surface grammar (one token per space-separated word) is::

    description := "anything" | ngram | ngram (" or " ngram)+ | conj (" and " conj)+
    conj        := ngram | "not " ngram | "anything"
    ngram       := [A-Z]{1,N}

Canonical case writes n-grams in uppercase and keywords in lowercase;
swapped case inverts both. Keywords are parsed case-insensitively and are
reserved: an n-gram may never spell ``or``, ``and``, ``not`` or
``anything`` in either case.
"""

from __future__ import annotations

import enum
import string
from dataclasses import dataclass

from .errors import DescriptionSyntaxError, DescriptionValidationError

ALPHABET = string.ascii_uppercase
ALPHABET_SET = frozenset(ALPHABET)
DEFAULT_MAX_NGRAM_LEN = 5

KEYWORD_OR = "or"
KEYWORD_AND = "and"
KEYWORD_NOT = "not"
KEYWORD_ANYTHING = "anything"
KEYWORDS = frozenset({KEYWORD_OR, KEYWORD_AND, KEYWORD_NOT, KEYWORD_ANYTHING})

# Validation reason codes (stable, used in error reporting and tests).
REASON_NEGATION_WITHOUT_ANYTHING = "negation-without-anything"
REASON_MIXED_OPERATORS = "mixed-operators"
REASON_DUPLICATE_TERM = "duplicate-term"
REASON_NGRAM_TOO_LONG = "ngram-too-long"
REASON_EMPTY_DESCRIPTION = "empty-description"


class CaseMode(enum.Enum):
    CANONICAL = "canonical"
    SWAPPED = "swapped"


@dataclass(frozen=True)
class NGram:
    """A contiguous letter block, stored in canonical (uppercase) form."""

    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise DescriptionValidationError(REASON_EMPTY_DESCRIPTION, "empty n-gram")
        if any(c not in ALPHABET_SET for c in self.text):
            raise DescriptionSyntaxError(f"n-gram {self.text!r} has non-alphabet symbols")
        if self.text.lower() in KEYWORDS:
            raise DescriptionSyntaxError(f"n-gram {self.text!r} collides with a reserved keyword")

    def __len__(self) -> int:
        return len(self.text)


@dataclass(frozen=True)
class Positive:
    ngram: NGram


@dataclass(frozen=True)
class Negated:
    ngram: NGram


@dataclass(frozen=True)
class Anything:
    """Matches any nonempty string over the task alphabet."""


ConjTerm = Positive | Negated | Anything


@dataclass(frozen=True)
class Single:
    ngram: NGram


@dataclass(frozen=True)
class Disjunction:
    ngrams: tuple[NGram, ...]


@dataclass(frozen=True)
class Conjunction:
    terms: tuple[ConjTerm, ...]


Description = Single | Disjunction | Conjunction | Anything


def validate_description(d: Description, max_ngram_len: int = DEFAULT_MAX_NGRAM_LEN) -> None:
    """Raise DescriptionValidationError if ``d`` breaks a grammar invariant."""
    for g in _ngrams_of(d):
        if len(g) > max_ngram_len:
            raise DescriptionValidationError(
                REASON_NGRAM_TOO_LONG, f"n-gram {g.text!r} longer than {max_ngram_len}"
            )
    if isinstance(d, (Single, Anything)):
        return
    if isinstance(d, Disjunction):
        if len(d.ngrams) < 2:
            raise DescriptionValidationError(REASON_EMPTY_DESCRIPTION, "disjunction needs >= 2 terms")
        if len(set(d.ngrams)) != len(d.ngrams):
            raise DescriptionValidationError(REASON_DUPLICATE_TERM, "repeated disjunction term")
        return
    if len(d.terms) < 2:
        raise DescriptionValidationError(REASON_EMPTY_DESCRIPTION, "conjunction needs >= 2 terms")
    if sum(1 for t in d.terms if isinstance(t, Anything)) > 1:
        raise DescriptionValidationError(REASON_DUPLICATE_TERM, "repeated anything term")
    ngram_terms = [t for t in d.terms if not isinstance(t, Anything)]
    if len(set(ngram_terms)) != len(ngram_terms):
        raise DescriptionValidationError(REASON_DUPLICATE_TERM, "repeated conjunction term")
    has_negation = any(isinstance(t, Negated) for t in d.terms)
    has_anything = any(isinstance(t, Anything) for t in d.terms)
    if has_negation and not has_anything:
        raise DescriptionValidationError(
            REASON_NEGATION_WITHOUT_ANYTHING, "negated term without an anything term"
        )


def _ngrams_of(d: Description) -> tuple[NGram, ...]:
    if isinstance(d, Single):
        return (d.ngram,)
    if isinstance(d, Disjunction):
        return d.ngrams
    if isinstance(d, Conjunction):
        return tuple(t.ngram for t in d.terms if not isinstance(t, Anything))
    return ()


def parse_description(text: str, max_ngram_len: int = DEFAULT_MAX_NGRAM_LEN) -> Description:
    """Parse description text (the part between ``description:`` and ``;``)."""
    d, _ = parse_description_with_case(text, max_ngram_len)
    return d


def parse_description_with_case(
    text: str, max_ngram_len: int = DEFAULT_MAX_NGRAM_LEN
) -> tuple[Description, CaseMode]:
    """Parse description text and report which case convention it was written in.

    The case mode is read off the n-gram tokens (uppercase = canonical,
    lowercase = swapped); a bare ``anything`` falls back to the keyword's case.
    """
    tokens = text.split()
    if not tokens:
        raise DescriptionValidationError(REASON_EMPTY_DESCRIPTION, "empty description")

    kinds = [_classify(tok) for tok in tokens]
    case_mode = _detect_case(tokens, kinds)

    has_or = any(k == KEYWORD_OR for k in kinds)
    has_and = any(k == KEYWORD_AND for k in kinds)
    has_not = any(k == KEYWORD_NOT for k in kinds)
    if has_or and (has_and or has_not):
        raise DescriptionValidationError(REASON_MIXED_OPERATORS, "description mixes or with and/not")

    d: Description
    if has_or:
        d = Disjunction(tuple(_parse_disjunct(p) for p in _split_on(tokens, kinds, KEYWORD_OR)))
    elif has_and:
        d = Conjunction(tuple(_parse_conj_term(p) for p in _split_on(tokens, kinds, KEYWORD_AND)))
    else:
        term = _parse_conj_term(list(zip(tokens, kinds)))
        if isinstance(term, Anything):
            d = term
        elif isinstance(term, Positive):
            d = Single(term.ngram)
        else:
            # A lone "not X" is not derivable from the grammar; report it as
            # the invariant it breaks rather than a bare syntax error.
            raise DescriptionValidationError(
                REASON_NEGATION_WITHOUT_ANYTHING, "negation requires a conjunction with anything"
            )
    validate_description(d, max_ngram_len)
    return d, case_mode


def render_description(d: Description, case_mode: CaseMode = CaseMode.CANONICAL) -> str:
    """Render ``d`` as description text in the given case convention."""
    swapped = case_mode is CaseMode.SWAPPED

    def kw(word: str) -> str:
        return word.upper() if swapped else word

    def gram(g: NGram) -> str:
        return g.text.lower() if swapped else g.text

    if isinstance(d, Anything):
        return kw(KEYWORD_ANYTHING)
    if isinstance(d, Single):
        return gram(d.ngram)
    if isinstance(d, Disjunction):
        return f" {kw(KEYWORD_OR)} ".join(gram(g) for g in d.ngrams)
    parts = []
    for term in d.terms:
        if isinstance(term, Anything):
            parts.append(kw(KEYWORD_ANYTHING))
        elif isinstance(term, Negated):
            parts.append(f"{kw(KEYWORD_NOT)} {gram(term.ngram)}")
        else:
            parts.append(gram(term.ngram))
    return f" {kw(KEYWORD_AND)} ".join(parts)


# ── parsing internals ────────────────────────────────────────────────

def _classify(token: str) -> str:
    """Return the keyword a token spells, or "ngram" otherwise."""
    low = token.lower()
    if low in KEYWORDS:
        return low
    if token.isupper() or token.islower():
        if all(c in ALPHABET_SET for c in token.upper()):
            return "ngram"
    raise DescriptionSyntaxError(f"unrecognized token {token!r}")


def _detect_case(tokens: list[str], kinds: list[str]) -> CaseMode:
    ngram_tokens = [t for t, k in zip(tokens, kinds) if k == "ngram"]
    if ngram_tokens:
        if all(t.isupper() for t in ngram_tokens):
            return CaseMode.CANONICAL
        if all(t.islower() for t in ngram_tokens):
            return CaseMode.SWAPPED
        raise DescriptionSyntaxError("n-grams mix uppercase and lowercase")
    # Keywords only (bare anything).
    return CaseMode.SWAPPED if all(t.isupper() for t in tokens) else CaseMode.CANONICAL


def _split_on(
    tokens: list[str], kinds: list[str], sep: str
) -> list[list[tuple[str, str]]]:
    parts: list[list[tuple[str, str]]] = [[]]
    for tok, kind in zip(tokens, kinds):
        if kind == sep:
            parts.append([])
        else:
            parts[-1].append((tok, kind))
    for part in parts:
        if not part:
            raise DescriptionSyntaxError(f"dangling {sep!r} operator")
    return parts


def _parse_disjunct(part: list[tuple[str, str]]) -> NGram:
    if len(part) != 1 or part[0][1] != "ngram":
        text = " ".join(t for t, _ in part)
        raise DescriptionSyntaxError(f"disjunction term must be a single n-gram, got {text!r}")
    return NGram(part[0][0].upper())


def _parse_conj_term(part: list[tuple[str, str]]) -> ConjTerm:
    if len(part) == 1:
        tok, kind = part[0]
        if kind == KEYWORD_ANYTHING:
            return Anything()
        if kind == "ngram":
            return Positive(NGram(tok.upper()))
    elif len(part) == 2 and part[0][1] == KEYWORD_NOT and part[1][1] == "ngram":
        return Negated(NGram(part[1][0].upper()))
    text = " ".join(t for t, _ in part)
    raise DescriptionSyntaxError(f"bad conjunction term {text!r}")
