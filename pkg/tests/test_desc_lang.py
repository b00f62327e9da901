"""Parser/renderer tests for the description mini-language."""

import pytest
from hypothesis import given, strategies as st

from commai_mini.desc_lang import (
    Anything,
    CaseMode,
    Conjunction,
    Disjunction,
    Negated,
    NGram,
    Positive,
    Single,
    parse_description,
    parse_description_with_case,
    render_description,
)
from commai_mini.errors import DescriptionSyntaxError, DescriptionValidationError


def g(text):
    return NGram(text)


class TestParse:
    def test_single(self):
        assert parse_description("FJG") == Single(g("FJG"))

    def test_disjunction(self):
        assert parse_description("AB or CD") == Disjunction((g("AB"), g("CD")))

    def test_disjunction_three(self):
        assert parse_description("FAB or GH or MIL") == Disjunction((g("FAB"), g("GH"), g("MIL")))

    def test_bare_anything(self):
        assert parse_description("anything") == Anything()

    def test_conjunction(self):
        assert parse_description("AB and CF") == Conjunction((Positive(g("AB")), Positive(g("CF"))))

    def test_conjunction_with_anything(self):
        assert parse_description("AB and anything") == Conjunction((Positive(g("AB")), Anything()))

    def test_negation(self):
        assert parse_description("not AB and CF and anything") == Conjunction(
            (Negated(g("AB")), Positive(g("CF")), Anything())
        )

    def test_double_negation(self):
        assert parse_description("not AB and not CF and anything") == Conjunction(
            (Negated(g("AB")), Negated(g("CF")), Anything())
        )

    def test_swapped_case_ngrams(self):
        d, mode = parse_description_with_case("ab")
        assert d == Single(g("AB"))
        assert mode is CaseMode.SWAPPED

    def test_swapped_case_full(self):
        d, mode = parse_description_with_case("NOT ab AND cf AND ANYTHING")
        assert d == Conjunction((Negated(g("AB")), Positive(g("CF")), Anything()))
        assert mode is CaseMode.SWAPPED

    def test_canonical_case_reported(self):
        _, mode = parse_description_with_case("AB or CD")
        assert mode is CaseMode.CANONICAL

    def test_bare_anything_case(self):
        assert parse_description_with_case("ANYTHING")[1] is CaseMode.SWAPPED
        assert parse_description_with_case("anything")[1] is CaseMode.CANONICAL

    def test_keywords_case_insensitive(self):
        assert parse_description("AB OR CD") == Disjunction((g("AB"), g("CD")))


class TestParseErrors:
    def test_negation_without_anything(self):
        with pytest.raises(DescriptionValidationError) as e:
            parse_description("not AB and CF")
        assert e.value.reason == "negation-without-anything"

    def test_lone_negation(self):
        with pytest.raises(DescriptionValidationError) as e:
            parse_description("not AB")
        assert e.value.reason == "negation-without-anything"

    def test_mixed_operators(self):
        with pytest.raises(DescriptionValidationError) as e:
            parse_description("AB or CD and EF")
        assert e.value.reason == "mixed-operators"

    def test_duplicate_disjunct(self):
        with pytest.raises(DescriptionValidationError) as e:
            parse_description("AB or AB")
        assert e.value.reason == "duplicate-term"

    def test_duplicate_conjunct(self):
        with pytest.raises(DescriptionValidationError) as e:
            parse_description("AB and AB")
        assert e.value.reason == "duplicate-term"

    def test_double_anything(self):
        with pytest.raises(DescriptionValidationError) as e:
            parse_description("anything and anything")
        assert e.value.reason == "duplicate-term"

    def test_positive_and_negated_same_ngram_is_legal(self):
        # unsatisfiable, but grammatically valid (satisfiability is the
        # semantics module's business)
        d = parse_description("not CF and CF and anything")
        assert d == Conjunction((Negated(g("CF")), Positive(g("CF")), Anything()))

    def test_ngram_too_long(self):
        with pytest.raises(DescriptionValidationError) as e:
            parse_description("ABCDEF")
        assert e.value.reason == "ngram-too-long"

    def test_max_len_configurable(self):
        assert parse_description("ABCDEF", max_ngram_len=6) == Single(g("ABCDEF"))
        with pytest.raises(DescriptionValidationError):
            parse_description("ABC", max_ngram_len=2)

    def test_empty(self):
        with pytest.raises(DescriptionValidationError) as e:
            parse_description("   ")
        assert e.value.reason == "empty-description"

    def test_dangling_operator(self):
        with pytest.raises(DescriptionSyntaxError):
            parse_description("AB or")
        with pytest.raises(DescriptionSyntaxError):
            parse_description("and AB")

    def test_not_anything(self):
        with pytest.raises(DescriptionSyntaxError):
            parse_description("not anything and AB")

    def test_anything_in_disjunction(self):
        with pytest.raises(DescriptionSyntaxError):
            parse_description("AB or anything")

    def test_garbage_token(self):
        with pytest.raises(DescriptionSyntaxError):
            parse_description("AB and C1")
        with pytest.raises(DescriptionSyntaxError):
            parse_description("Ab")

    def test_mixed_ngram_case(self):
        with pytest.raises(DescriptionSyntaxError):
            parse_description("AB or cd")

    def test_keyword_as_ngram_rejected(self):
        with pytest.raises(DescriptionSyntaxError):
            NGram("OR")


class TestRender:
    def test_conjunction_canonical(self):
        d = Conjunction((Positive(g("AB")), Positive(g("CF"))))
        assert render_description(d) == "AB and CF"

    def test_single_swapped(self):
        assert render_description(Single(g("C")), CaseMode.SWAPPED) == "c"

    def test_anything_canonical(self):
        assert render_description(Anything()) == "anything"

    def test_negation_swapped(self):
        d = Conjunction((Negated(g("AB")), Anything()))
        assert render_description(d, CaseMode.SWAPPED) == "NOT ab AND ANYTHING"

    def test_disjunction(self):
        d = Disjunction((g("FAB"), g("GH"), g("MIL")))
        assert render_description(d) == "FAB or GH or MIL"


# ── round-trip property ──────────────────────────────────────────────

ngrams = st.text(alphabet=st.sampled_from("ABCDEFGHIJKLMNOPQRSTUVWXYZ"), min_size=1, max_size=5).filter(
    lambda t: t.lower() not in {"or", "and", "not"}
).map(NGram)


@st.composite
def descriptions(draw):
    shape = draw(st.sampled_from(["single", "disjunction", "conjunction", "anything"]))
    if shape == "anything":
        return Anything()
    if shape == "single":
        return Single(draw(ngrams))
    if shape == "disjunction":
        terms = draw(st.lists(ngrams, min_size=2, max_size=5, unique=True))
        return Disjunction(tuple(terms))
    grams = draw(st.lists(ngrams, min_size=1, max_size=4, unique=True))
    n_neg = draw(st.integers(min_value=0, max_value=len(grams)))
    use_anything = draw(st.booleans()) or n_neg > 0 or len(grams) < 2
    terms = [Negated(x) if i < n_neg else Positive(x) for i, x in enumerate(grams)]
    if use_anything:
        terms.append(Anything())
    return Conjunction(tuple(terms))


@given(descriptions(), st.sampled_from(list(CaseMode)))
def test_roundtrip(d, mode):
    text = render_description(d, mode)
    parsed, detected = parse_description_with_case(text)
    assert parsed == d
    # mode detection matches unless the text carries no n-gram (bare
    # anything renders identically under keyword-case inference)
    assert detected is mode


@given(descriptions())
def test_parse_is_deterministic(d):
    text = render_description(d)
    assert parse_description(text) == parse_description(text)
