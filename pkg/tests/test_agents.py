"""Baseline agent tests."""

import random

import pytest

from commai_mini.agents import make_agent, oracle_answer, random_answer
from commai_mini.desc_lang import parse_description
from commai_mini.errors import PromptParseError, UnknownAgent
from commai_mini.protocol import decode_answer, encode_message
from commai_mini.semantics import recognize


class TestOracle:
    def test_recognition(self):
        assert oracle_answer("description: AB; verify: ABAB.") == "true."
        assert oracle_answer("description: AB; verify: ABA.") == "false."

    def test_production_is_member(self):
        answer = oracle_answer("description: AB; produce.")
        assert answer.endswith(".")
        d = parse_description("AB")
        assert recognize(d, answer[:-1]).member

    def test_produce_two_distinct_members(self):
        answer = oracle_answer("description: HL and RM and BT; produce two distinct strings.")
        parts = answer.rstrip(".").split(".")
        assert len(parts) == 2 and parts[0] != parts[1]
        d = parse_description("HL and RM and BT")
        assert all(recognize(d, p).member for p in parts)

    def test_swapped_production_lowercase(self):
        answer = oracle_answer("DESCRIPTION: ab; PRODUCE.")
        assert answer[:-1].islower()
        assert recognize(parse_description("AB"), answer[:-1].upper()).member

    def test_describe_minimal_hypothesis(self):
        answer = oracle_answer("samples: ABAB, AB; describe.")
        assert answer in ("AB.", "A or B.")
        d = parse_description(answer[:-1])
        assert all(recognize(d, s).member for s in ("ABAB", "AB"))

    def test_describe_falls_back_when_budget_is_tight(self):
        samples = ", ".join(["ABCDEFGHIJKLMNOPQRSTUVWX"] * 2)
        answer = oracle_answer(f"samples: {samples}; describe.", max_answer_bits=80)
        assert answer == "anything."
        assert len(answer) * 8 <= 80

    def test_deterministic(self):
        prompt = "description: FAB or GH or MIL; produce."
        assert oracle_answer(prompt) == oracle_answer(prompt)

    def test_malformed_prompt(self):
        with pytest.raises(PromptParseError):
            oracle_answer("gibberish")


class TestRandom:
    def test_recognition_is_coinflip(self):
        rng = random.Random(1)
        answers = {random_answer("description: A; verify: A.", rng) for _ in range(50)}
        assert answers == {"true.", "false."}

    def test_always_period_terminated(self):
        rng = random.Random(2)
        for prompt in ["description: A; produce.", "", "samples: AB; describe."]:
            for _ in range(20):
                a = random_answer(prompt, rng)
                assert a.endswith(".")
                # round-trips the codec without partial-byte loss
                decoded = decode_answer(encode_message(a))
                assert decoded.decoded_text == a
                assert decoded.terminated_by == "period"


def test_registry():
    assert make_agent("oracle")("description: A; verify: A.") == "true."
    assert make_agent("random", random.Random(3))("description: A; verify: A.") in ("true.", "false.")
    with pytest.raises(UnknownAgent):
        make_agent("nope")
