"""Episode protocol: bit codec, message grammar, and the 7-step episode loop.

One episode is a strict turn sequence: the environment sends a task prompt,
reads the learner's answer off the channel until enough periods arrive or
the bit cap is hit, checks it, then sends reward and feedback.

Wire protocol (one TCP connection = one session, newline-delimited frames)::

    env -> learner   HELLO commai-mini v1 mode=<bit|byte> max_answer_bits=<n>
    env -> learner   M <payload>     task prompt or feedback
    env -> learner   R <0|1>         reward, sent right after checking
    learner -> env   A <payload>     answer chunk
    learner -> env   BYE             polite end of session

In bit mode, ``M``/``A`` payloads are ASCII ``0``/``1`` characters, one per
bit, eight bits per character MSB-first. In byte mode payloads are the raw
message text. Reward frames are plain either way. A learner that sends
``BYE`` (or disconnects) before contributing any answer bits ends the
session cleanly; vanishing mid-answer records the episode as incorrect.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .desc_lang import (
    ALPHABET_SET,
    CaseMode,
    Description,
    parse_description,
    parse_description_with_case,
    render_description,
)
from .errors import (
    ChannelClosed,
    DescriptionSyntaxError,
    DescriptionValidationError,
    NonAsciiInput,
    PromptParseError,
)
from .semantics import DEFAULT_MAX_LEN, produce, recognize
from .taskgen import Mode, TaskInstance

PROTOCOL_ID = "commai-mini v1"
DEFAULT_MAX_ANSWER_BITS = 800

ROLE_TASK_PROMPT = "task_prompt"
ROLE_FEEDBACK = "feedback"

TERMINATED_BY_PERIOD = "period"
TERMINATED_BY_BIT_CAP = "bit_cap"


@dataclass(frozen=True)
class EnvMessage:
    text: str
    role: str

    def __post_init__(self) -> None:
        if not self.text.endswith(".") or self.text.endswith(".."):
            raise ValueError(f"message must end in exactly one period: {self.text!r}")


@dataclass(frozen=True)
class LearnerAnswer:
    raw_bits_consumed: int
    decoded_text: str
    terminated_by: str
    dropped_bits: int = 0


@dataclass(frozen=True)
class EpisodeResult:
    instance: TaskInstance
    answer: LearnerAnswer
    correct: bool
    reward: int
    feedback: EnvMessage
    bits_env_sent: int


@dataclass(frozen=True)
class Limits:
    max_answer_bits: int = DEFAULT_MAX_ANSWER_BITS


# ── bit codec ────────────────────────────────────────────────────────

def encode_message(text: str) -> str:
    """ASCII text to a bit string, 8 bits per character, MSB first."""
    out = []
    for c in text:
        code = ord(c)
        if code > 0x7F:
            raise NonAsciiInput(f"cannot encode {c!r}")
        out.append(format(code, "08b"))
    return "".join(out)


def decode_bits(bits: str) -> str:
    """Exact inverse of encode_message; rejects partial bytes."""
    if len(bits) % 8 != 0 or any(c not in "01" for c in bits):
        raise ValueError("bit string must be 0/1 characters in whole bytes")
    return "".join(chr(int(bits[i:i + 8], 2)) for i in range(0, len(bits), 8))


def decode_answer(bits: str, max_answer_bits: int | None = None, periods: int = 1) -> LearnerAnswer:
    """Scan a learner bit stream for `periods` period bytes, capped at the bit limit.

    Never raises: trailing partial bytes are dropped (and counted in
    ``dropped_bits``).
    """
    usable = bits if max_answer_bits is None else bits[:max_answer_bits]
    chars: list[str] = []
    seen = 0
    consumed = 0
    for i in range(0, len(usable) - len(usable) % 8, 8):
        chars.append(chr(int(usable[i:i + 8], 2)))
        consumed = i + 8
        if chars[-1] == ".":
            seen += 1
            if seen >= periods:
                return LearnerAnswer(
                    raw_bits_consumed=consumed,
                    decoded_text="".join(chars),
                    terminated_by=TERMINATED_BY_PERIOD,
                )
    return LearnerAnswer(
        raw_bits_consumed=len(usable),
        decoded_text="".join(chars),
        terminated_by=TERMINATED_BY_BIT_CAP,
        dropped_bits=len(usable) - consumed,
    )


def to_ascii(text: str) -> str:
    """Replace any non-ASCII characters so the codec stays total."""
    return text.encode("ascii", "replace").decode("ascii")


# ── prompt grammar ───────────────────────────────────────────────────

@dataclass(frozen=True)
class ParsedPrompt:
    mode: Mode
    case_mode: CaseMode
    description: Description | None = None
    target: str | None = None  # canonical case
    samples: tuple[str, ...] | None = None


def render_prompt(instance: TaskInstance) -> EnvMessage:
    cm = instance.spec.case_mode
    swapped = cm is CaseMode.SWAPPED

    def kw(s: str) -> str:
        return s.upper() if swapped else s

    def lit(s: str) -> str:
        return s.lower() if swapped else s

    mode = instance.spec.mode
    if mode is Mode.DESCRIBE:
        joined = ", ".join(lit(s) for s in instance.samples)
        text = f"{kw('samples')}: {joined}; {kw('describe')}."
    else:
        desc = render_description(instance.description, cm)
        if mode is Mode.RECOGNIZE:
            text = f"{kw('description')}: {desc}; {kw('verify')}: {lit(instance.target[0])}."
        elif mode is Mode.PRODUCE:
            text = f"{kw('description')}: {desc}; {kw('produce')}."
        else:
            text = f"{kw('description')}: {desc}; {kw('produce two distinct strings')}."
    return EnvMessage(text=text, role=ROLE_TASK_PROMPT)


def parse_prompt(text: str) -> ParsedPrompt:
    """Parse a task prompt back into its parts (both case conventions)."""
    raw = text.strip()
    if not raw.endswith("."):
        raise PromptParseError(f"prompt must end in a period: {raw!r}")
    parts = raw[:-1].split(";")
    if len(parts) != 2:
        raise PromptParseError(f"prompt must have exactly two clauses: {raw!r}")
    head, tail = parts[0].strip(), parts[1].strip()

    if head.lower().startswith("samples:"):
        if tail.lower() != "describe":
            raise PromptParseError(f"samples prompt must end with a describe clause: {raw!r}")
        items = [x.strip() for x in head[len("samples:"):].split(",")]
        if not items or any(not x for x in items):
            raise PromptParseError("empty sample list")
        cm = _strings_case(items)
        return ParsedPrompt(
            mode=Mode.DESCRIBE,
            case_mode=cm,
            samples=tuple(_normalize_string(x, cm) for x in items),
        )

    if not head.lower().startswith("description:"):
        raise PromptParseError(f"unrecognized prompt head: {head!r}")
    try:
        d, cm = parse_description_with_case(head[len("description:"):].strip())
    except (DescriptionSyntaxError, DescriptionValidationError) as e:
        raise PromptParseError(f"bad description in prompt: {e}") from e

    tail_low = tail.lower()
    if tail_low.startswith("verify:"):
        target = _normalize_string(tail[len("verify:"):].strip(), cm)
        if target is None:
            raise PromptParseError(f"verify string has the wrong case or alphabet: {tail!r}")
        return ParsedPrompt(mode=Mode.RECOGNIZE, case_mode=cm, description=d, target=target)
    if tail_low == "produce":
        return ParsedPrompt(mode=Mode.PRODUCE, case_mode=cm, description=d)
    if tail_low == "produce two distinct strings":
        return ParsedPrompt(mode=Mode.PRODUCE_TWO, case_mode=cm, description=d)
    raise PromptParseError(f"unrecognized task clause: {tail!r}")


def _strings_case(items: list[str]) -> CaseMode:
    if all(x.isupper() for x in items):
        return CaseMode.CANONICAL
    if all(x.islower() for x in items):
        return CaseMode.SWAPPED
    raise PromptParseError("sample strings mix case conventions")


def _normalize_string(s: str, cm: CaseMode) -> str | None:
    """Map a wire-case string to canonical, or None if malformed for the mode."""
    if cm is CaseMode.SWAPPED:
        if not s or not s.islower():
            return None
        s = s.upper()
    if not s or any(c not in ALPHABET_SET for c in s):
        return None
    return s


# ── answer checking ──────────────────────────────────────────────────

def check_answer(instance: TaskInstance, decoded: str) -> tuple[bool, EnvMessage]:
    """Judge a decoded answer (terminating period already stripped).

    Malformed answers are never an error, just incorrect. Feedback is
    ``correct.`` or ``wrong. <truth>.`` where the truth is the label word,
    a sample member string, or (for induction) the hidden description.
    """
    spec = instance.spec
    cm = spec.case_mode
    decoded = decoded.strip()

    if spec.mode is Mode.RECOGNIZE:
        label = instance.target[1]
        correct = decoded.lower() == ("true" if label else "false")
    elif spec.mode is Mode.PRODUCE:
        s = _normalize_string(decoded, cm)
        correct = s is not None and recognize(instance.description, s).member
    elif spec.mode is Mode.PRODUCE_TWO:
        parts = [p.strip() for p in decoded.split(".")]
        strings = [_normalize_string(p, cm) for p in parts]
        correct = (
            len(strings) == 2
            and all(s is not None for s in strings)
            and strings[0] != strings[1]
            and all(recognize(instance.description, s).member for s in strings)
        )
    else:
        correct = _check_induced_description(instance, decoded)

    return correct, _feedback(instance, correct)


def _check_induced_description(instance: TaskInstance, decoded: str) -> bool:
    try:
        d = parse_description(decoded)
    except (DescriptionSyntaxError, DescriptionValidationError):
        return False
    return all(recognize(d, s).member for s in instance.samples)


def _feedback(instance: TaskInstance, correct: bool) -> EnvMessage:
    swapped = instance.spec.case_mode is CaseMode.SWAPPED

    def kw(s: str) -> str:
        return s.upper() if swapped else s

    if correct:
        return EnvMessage(text=f"{kw('correct')}.", role=ROLE_FEEDBACK)
    mode = instance.spec.mode
    if mode is Mode.RECOGNIZE:
        truth = kw("true" if instance.target[1] else "false")
    elif mode is Mode.DESCRIBE:
        truth = render_description(instance.description, instance.spec.case_mode)
    else:
        # deterministic per instance so identical runs transcribe identically
        rng = random.Random(instance.instance_seed ^ 0x0F0F0F0F)
        truth = produce(instance.description, 1, DEFAULT_MAX_LEN, rng)[0]
        if swapped:
            truth = truth.lower()
    return EnvMessage(text=f"{kw('wrong')}. {truth}.", role=ROLE_FEEDBACK)


# ── channels ─────────────────────────────────────────────────────────

class SocketChannel:
    """Frame transport over a connected socket's file pair."""

    def __init__(self, rfile, wfile, mode: str) -> None:
        self.mode = mode
        self.closed = False
        self.clean_close = False
        self._rfile = rfile
        self._wfile = wfile

    def send_hello(self, max_answer_bits: int) -> None:
        self._write(f"HELLO {PROTOCOL_ID} mode={self.mode} max_answer_bits={max_answer_bits}")

    def send_message(self, payload: str) -> None:
        self._write(f"M {payload}")

    def send_reward(self, reward: int) -> None:
        self._write(f"R {reward}")

    def recv_answer_chunk(self) -> str | None:
        while True:
            try:
                line = self._rfile.readline()
            except OSError as e:
                self.closed = True
                raise ChannelClosed(str(e)) from e
            if line == "":
                self.closed = True
                raise ChannelClosed("learner disconnected")
            line = line.rstrip("\r\n")
            if line.startswith("A "):
                return line[2:]
            if line == "A":
                return ""
            if line == "BYE":
                self.closed = True
                self.clean_close = True
                raise ChannelClosed("learner said bye")
            # any other frame from the learner is ignored

    def _write(self, line: str) -> None:
        try:
            self._wfile.write(line + "\n")
            self._wfile.flush()
        except OSError as e:
            self.closed = True
            raise ChannelClosed(str(e)) from e


class LocalAgentChannel:
    """In-process stand-in for a connected learner.

    Runs an answer function against the same episode code path the server
    uses, including the bit codec when ``mode="bit"``. The agent yields one
    answer payload per prompt; when the environment asks for more, the
    channel reports end-of-answer and the episode finalizes on the cap rule.
    """

    def __init__(self, answer_fn, mode: str = "bit") -> None:
        self.mode = mode
        self.closed = False
        self.rewards: list[int] = []
        self.env_messages: list[str] = []
        self._answer_fn = answer_fn
        self._pending: str | None = None
        self._awaiting_feedback = False

    def send_message(self, payload: str) -> None:
        text = decode_bits(payload) if self.mode == "bit" else payload
        self.env_messages.append(text)
        if self._awaiting_feedback:
            self._awaiting_feedback = False
            return
        answer = to_ascii(self._answer_fn(text))
        self._pending = encode_message(answer) if self.mode == "bit" else answer

    def send_reward(self, reward: int) -> None:
        self.rewards.append(reward)
        self._awaiting_feedback = True

    def recv_answer_chunk(self) -> str | None:
        pending, self._pending = self._pending, None
        return pending


# ── episode loop ─────────────────────────────────────────────────────

def run_episode(instance: TaskInstance, channel, limits: Limits = Limits()) -> EpisodeResult:
    """Drive one full episode over ``channel`` and return its transcript."""
    prompt = render_prompt(instance)
    bits_sent = 0
    aborted = False
    try:
        channel.send_message(_outgoing(channel, prompt.text))
        bits_sent += 8 * len(prompt.text)
    except ChannelClosed:
        aborted = True

    periods = 2 if instance.spec.mode is Mode.PRODUCE_TWO else 1
    buf = ""
    if not aborted:
        while True:
            answer = decode_answer(buf, limits.max_answer_bits, periods)
            if answer.terminated_by == TERMINATED_BY_PERIOD or len(buf) >= limits.max_answer_bits:
                break
            try:
                chunk = channel.recv_answer_chunk()
            except ChannelClosed:
                aborted = True
                break
            if chunk is None:
                break
            if channel.mode == "bit":
                buf += "".join(c for c in chunk if c in "01")
            else:
                buf += encode_message(to_ascii(chunk))
    answer = decode_answer(buf, limits.max_answer_bits, periods)

    decoded = answer.decoded_text
    if answer.terminated_by == TERMINATED_BY_PERIOD and decoded.endswith("."):
        decoded = decoded[:-1]
    correct, feedback = check_answer(instance, decoded.strip())
    correct = correct and not aborted
    reward = 1 if correct else 0

    if not aborted:
        try:
            channel.send_reward(reward)
            channel.send_message(_outgoing(channel, feedback.text))
            bits_sent += 8 * len(feedback.text)
        except ChannelClosed:
            pass

    return EpisodeResult(
        instance=instance,
        answer=answer,
        correct=correct,
        reward=reward,
        feedback=feedback,
        bits_env_sent=bits_sent,
    )


def _outgoing(channel, text: str) -> str:
    return encode_message(text) if channel.mode == "bit" else text
