"""Task environment for sub-regular stringset games over a bit-level channel."""

from .desc_lang import (
    Anything,
    CaseMode,
    Conjunction,
    Description,
    Disjunction,
    Negated,
    NGram,
    Positive,
    Single,
    parse_description,
    render_description,
)
from .semantics import Verdict, enumerate_language, produce, recognize, satisfiable

__all__ = [
    "Anything",
    "CaseMode",
    "Conjunction",
    "Description",
    "Disjunction",
    "NGram",
    "Negated",
    "Positive",
    "Single",
    "Verdict",
    "enumerate_language",
    "parse_description",
    "produce",
    "recognize",
    "render_description",
    "satisfiable",
]
