"""Task spec validation and instance sampling tests."""

import random

import pytest

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
    render_description,
)
from commai_mini.errors import NoNegativeExists, SpecInvalid
from commai_mini.semantics import recognize
from commai_mini.taskgen import (
    Mode,
    Shape,
    TaskSpec,
    sample_instance,
    sample_negative,
    sample_positive,
)


def spec1(max_ngram_len=3):
    return TaskSpec(set_id=1, mode=Mode.RECOGNIZE, shape=Shape.SINGLE, max_ngram_len=max_ngram_len)


def spec4(n_terms=3, n_negated=1):
    return TaskSpec(
        set_id=4,
        mode=Mode.RECOGNIZE,
        shape=Shape.CONJUNCTION,
        n_terms=n_terms,
        n_negated=n_negated,
        has_anything=True,
    )


class TestSpecValidation:
    def test_set1_ok(self):
        spec1().validate()

    def test_set1_rejects_disjunction(self):
        with pytest.raises(SpecInvalid):
            TaskSpec(set_id=1, mode=Mode.RECOGNIZE, shape=Shape.DISJUNCTION, n_terms=2).validate()

    def test_set2_anything_variant(self):
        TaskSpec(set_id=2, mode=Mode.RECOGNIZE, shape=Shape.ANYTHING, has_anything=True).validate()

    def test_set3_no_negation(self):
        with pytest.raises(SpecInvalid):
            TaskSpec(
                set_id=3,
                mode=Mode.RECOGNIZE,
                shape=Shape.CONJUNCTION,
                n_terms=3,
                n_negated=1,
                has_anything=True,
            ).validate()

    def test_set4_needs_anything(self):
        with pytest.raises(SpecInvalid):
            TaskSpec(
                set_id=4, mode=Mode.RECOGNIZE, shape=Shape.CONJUNCTION, n_terms=2, n_negated=1
            ).validate()

    def test_set5_is_production(self):
        TaskSpec(set_id=5, mode=Mode.PRODUCE, shape=Shape.CONJUNCTION, n_terms=2).validate()
        with pytest.raises(SpecInvalid):
            TaskSpec(set_id=5, mode=Mode.RECOGNIZE, shape=Shape.SINGLE).validate()

    def test_set6_variants(self):
        TaskSpec(set_id=6, mode=Mode.PRODUCE_TWO, shape=Shape.SINGLE).validate()
        TaskSpec(set_id=6, mode=Mode.PRODUCE, shape=Shape.SINGLE, case_mode=CaseMode.SWAPPED).validate()
        with pytest.raises(SpecInvalid):
            TaskSpec(set_id=6, mode=Mode.PRODUCE, shape=Shape.SINGLE).validate()

    def test_swapped_case_only_in_set6(self):
        with pytest.raises(SpecInvalid):
            TaskSpec(set_id=1, mode=Mode.RECOGNIZE, shape=Shape.SINGLE, case_mode=CaseMode.SWAPPED).validate()

    def test_set7_shapes(self):
        TaskSpec(set_id=7, mode=Mode.DESCRIBE, shape=Shape.DISJUNCTION, n_terms=2).validate()
        with pytest.raises(SpecInvalid):
            TaskSpec(set_id=7, mode=Mode.DESCRIBE, shape=Shape.CONJUNCTION, n_terms=2).validate()

    def test_roundtrip_dict(self):
        s = spec4()
        assert TaskSpec.from_dict(s.to_dict()) == s


class TestSampleInstance:
    def test_set1_instance(self):
        inst = sample_instance(spec1(), random.Random(0))
        assert isinstance(inst.description, Single)
        assert len(inst.description.ngram.text) <= 3
        target, label = inst.target
        assert recognize(inst.description, target).member == label

    def test_set4_shape(self):
        inst = sample_instance(spec4(), random.Random(1))
        d = inst.description
        assert isinstance(d, Conjunction)
        assert sum(isinstance(t, Negated) for t in d.terms) == 1
        assert sum(isinstance(t, Anything) for t in d.terms) == 1
        assert len(d.terms) == 3

    def test_set2_anything_always_true(self):
        s = TaskSpec(set_id=2, mode=Mode.RECOGNIZE, shape=Shape.ANYTHING, has_anything=True)
        for seed in range(20):
            inst = sample_instance(s, random.Random(seed))
            assert inst.description == Anything()
            assert inst.target[1] is True

    def test_production_has_no_target(self):
        s = TaskSpec(set_id=5, mode=Mode.PRODUCE, shape=Shape.DISJUNCTION, n_terms=3)
        inst = sample_instance(s, random.Random(2))
        assert inst.target is None and inst.samples is None

    def test_describe_samples(self):
        s = TaskSpec(set_id=7, mode=Mode.DESCRIBE, shape=Shape.DISJUNCTION, n_terms=2)
        for seed in range(20):
            inst = sample_instance(s, random.Random(seed))
            assert 2 <= len(inst.samples) <= 5
            assert len(set(inst.samples)) == len(inst.samples)
            assert all(recognize(inst.description, x).member for x in inst.samples)

    def test_label_soundness(self):
        specs = [
            spec1(),
            TaskSpec(set_id=2, mode=Mode.RECOGNIZE, shape=Shape.DISJUNCTION, n_terms=3),
            TaskSpec(set_id=3, mode=Mode.RECOGNIZE, shape=Shape.CONJUNCTION, n_terms=3),
            spec4(),
        ]
        rng = random.Random(7)
        for s in specs:
            for _ in range(100):
                inst = sample_instance(s, rng)
                target, label = inst.target
                assert recognize(inst.description, target).member == label
                assert 1 <= len(target) <= 24

    def test_label_agrees_with_enumeration_within_guards(self):
        # independent cross-check: when the instance is small enough for the
        # brute-force oracle, the stored label matches exact enumeration
        from commai_mini.semantics import enumerate_language

        rng = random.Random(53)
        checked = 0
        for _ in range(300):
            inst = sample_instance(spec1(max_ngram_len=2), rng)
            target, label = inst.target
            letters = "".join(sorted(set(inst.description.ngram.text) | set(target)))
            if len(letters) > 6 or len(target) > 10:
                continue
            members = enumerate_language(inst.description, letters, len(target))
            assert (target in members) == label
            checked += 1
        assert checked > 50

    def test_balance(self):
        s = TaskSpec(set_id=3, mode=Mode.RECOGNIZE, shape=Shape.CONJUNCTION, n_terms=2)
        rng = random.Random(11)
        labels = [sample_instance(s, rng).target[1] for _ in range(1000)]
        frac = sum(labels) / len(labels)
        assert 0.45 <= frac <= 0.55

    def test_freshness(self):
        rng = random.Random(13)
        descs = {render_description(sample_instance(spec1(1), rng).description) for _ in range(100)}
        assert len(descs) >= 2

    def test_generated_descriptions_parse(self):
        rng = random.Random(17)
        specs = [
            spec4(n_terms=4, n_negated=2),
            TaskSpec(set_id=5, mode=Mode.PRODUCE, shape=Shape.CONJUNCTION, n_terms=3, has_anything=True),
            TaskSpec(set_id=6, mode=Mode.PRODUCE, shape=Shape.SINGLE, case_mode=CaseMode.SWAPPED),
        ]
        for s in specs:
            for _ in range(50):
                d = sample_instance(s, rng).description
                for mode in CaseMode:
                    assert parse_description(render_description(d, mode)) == d

    def test_no_negated_substring_of_positive(self):
        rng = random.Random(19)
        for _ in range(200):
            d = sample_instance(spec4(n_terms=4, n_negated=2), rng).description
            negs = [t.ngram.text for t in d.terms if isinstance(t, Negated)]
            poss = [t.ngram.text for t in d.terms if isinstance(t, Positive)]
            assert not any(n in p for n in negs for p in poss)

    def test_instance_reproducible(self):
        a = sample_instance(spec4(), random.Random(23))
        b = sample_instance(spec4(), random.Random(23))
        assert a == b


class TestNegatives:
    def test_single_negative(self):
        d = Single(NGram("AB"))
        rng = random.Random(29)
        for _ in range(50):
            s = sample_negative(d, rng)
            assert not recognize(d, s).member
            assert s

    def test_negated_description_negative_contains_forbidden(self):
        # the complement of `not AB and anything` is exactly the strings
        # containing AB
        d = Conjunction((Negated(NGram("AB")), Anything()))
        rng = random.Random(31)
        for _ in range(50):
            s = sample_negative(d, rng)
            assert "AB" in s

    def test_long_negated_term_still_finds_negative(self):
        d = Conjunction((Negated(NGram("ABCDE")), Anything()))
        s = sample_negative(d, random.Random(37))
        assert "ABCDE" in s

    def test_anything_has_no_negative(self):
        with pytest.raises(NoNegativeExists):
            sample_negative(Anything(), random.Random(41))

    def test_positive_lengths_capped(self):
        d = Disjunction((NGram("ABCDE"), NGram("K")))
        rng = random.Random(43)
        for _ in range(100):
            assert len(sample_positive(d, rng, max_len=24)) <= 24
