"""Built-in baseline learners.

The oracle is the environment's ceiling: it answers every prompt through
the same recognizer/producer the environment judges with, so a fully green
oracle run is the end-to-end self-test of the whole loop. The random agent
is the chance floor.
"""

from __future__ import annotations

import random
from collections.abc import Callable

from .desc_lang import (
    Anything,
    CaseMode,
    Description,
    Disjunction,
    NGram,
    Single,
    render_description,
)
from .errors import UnknownAgent
from .protocol import DEFAULT_MAX_ANSWER_BITS, parse_prompt
from .semantics import DEFAULT_MAX_LEN, produce, recognize
from .taskgen import Mode

AgentFn = Callable[[str], str]


def oracle_answer(prompt: str, max_answer_bits: int = DEFAULT_MAX_ANSWER_BITS) -> str:
    """Answer a prompt perfectly (modulo the honesty of the recognizer).

    Raises PromptParseError on malformed prompts; in a closed loop that
    means the environment itself is broken.
    """
    p = parse_prompt(prompt)
    swapped = p.case_mode is CaseMode.SWAPPED

    def lit(s: str) -> str:
        return s.lower() if swapped else s

    if p.mode is Mode.RECOGNIZE:
        return "true." if recognize(p.description, p.target).member else "false."
    if p.mode is Mode.DESCRIBE:
        hypothesis = _induce_description(p.samples, max_chars=max_answer_bits // 8 - 1)
        return render_description(hypothesis, p.case_mode) + "."
    rng = random.Random(prompt)  # deterministic per prompt
    count = 2 if p.mode is Mode.PRODUCE_TWO else 1
    strings = produce(p.description, count, DEFAULT_MAX_LEN, rng)
    return "".join(lit(s) + "." for s in strings)


def random_answer(prompt: str, rng: random.Random) -> str:
    """Chance baseline: coin-flip on recognition, letter noise otherwise."""
    if "verify" in prompt.lower():
        return rng.choice(["true.", "false."])
    length = 1
    while rng.random() >= 1 / 3 and length < 16:
        length += 1
    return "".join(rng.choice("ABCDEFGHIJKLMNOPQRSTUVWXYZ") for _ in range(length)) + "."


def _induce_description(samples: tuple[str, ...], max_chars: int) -> Description:
    """Smallest hypothesis from the samples that fits in the answer budget.

    Tries single-n-gram languages read off the shortest sample, then the
    disjunction of observed letters (which tiles any sample), then bare
    ``anything`` as the loose fallback.
    """
    shortest = min(samples, key=len)
    for length in range(1, min(5, len(shortest)) + 1):
        prefix = shortest[:length]
        if prefix.lower() in {"or", "and", "not"}:
            continue
        candidate = Single(NGram(prefix))
        if all(recognize(candidate, s).member for s in samples):
            return candidate
    letters = sorted({c for s in samples for c in s})
    if len(letters) >= 2:
        d = Disjunction(tuple(NGram(c) for c in letters))
        if len(render_description(d)) <= max_chars:
            return d
    return Anything()


def make_agent(name: str, rng: random.Random | None = None,
               max_answer_bits: int = DEFAULT_MAX_ANSWER_BITS) -> AgentFn:
    """Build a registered agent's answer function."""
    if name == "oracle":
        return lambda prompt: oracle_answer(prompt, max_answer_bits)
    if name == "random":
        r = rng or random.Random()
        return lambda prompt: random_answer(prompt, r)
    raise UnknownAgent(f"no built-in agent named {name!r}")


AGENT_NAMES = ("oracle", "random")
