"""Session scheduling, the episode server, transcripts, and metrics.

Tasks are grouped into levels; within a level, specs are served in uniform
random order, and a session is promoted to the next level once its rolling
success fraction over the promotion window meets the threshold. The final
level repeats indefinitely.

Transcripts are JSON Lines, one object per episode, append-only. Runs are
reproducible: all sampling derives from (session seed, episode index), so
identical configs yield byte-identical transcripts apart from the ``ts``
field.
"""

from __future__ import annotations

import collections
import hashlib
import json
import random
import socketserver
import threading
import time
from dataclasses import dataclass, field

from .agents import make_agent
from .desc_lang import CaseMode, render_description
from .errors import BindFailure, ChannelClosed
from .protocol import (
    DEFAULT_MAX_ANSWER_BITS,
    EpisodeResult,
    Limits,
    LocalAgentChannel,
    SocketChannel,
    run_episode,
)
from .semantics import DEFAULT_MAX_LEN
from .taskgen import Mode, Shape, TaskSpec, sample_instance

DEFAULT_WINDOW = 100
DEFAULT_THRESHOLD = 0.95
DEFAULT_PORT = 7741

REPORT_AXES = ("set_id", "max_ngram_len", "n_terms", "mode")


@dataclass(frozen=True)
class LevelConfig:
    level_id: int
    specs: tuple[TaskSpec, ...]
    window: int = DEFAULT_WINDOW
    threshold: float = DEFAULT_THRESHOLD

    def validate(self) -> None:
        if not self.specs:
            raise ValueError(f"level {self.level_id} has no specs")
        if not 0 < self.threshold <= 1:
            raise ValueError(f"level {self.level_id} threshold out of (0, 1]")
        for spec in self.specs:
            spec.validate()


@dataclass
class SessionState:
    session_seed: int
    current_level: int = 0
    episode_index: int = 0
    cumulative_reward: int = 0
    rolling: collections.deque = field(default_factory=lambda: collections.deque(maxlen=DEFAULT_WINDOW))


def schedule_next(state: SessionState, levels: list[LevelConfig], rng: random.Random) -> TaskSpec:
    """Uniform draw from the session's current level."""
    return rng.choice(levels[state.current_level].specs)


def record_result(state: SessionState, levels: list[LevelConfig], correct: bool, reward: int) -> None:
    """Book an episode outcome and apply the promotion rule."""
    state.rolling.append(correct)
    state.cumulative_reward += reward
    state.episode_index += 1
    level = levels[state.current_level]
    if (
        state.current_level < len(levels) - 1
        and len(state.rolling) == level.window
        and sum(state.rolling) / level.window >= level.threshold
    ):
        state.current_level += 1
        state.rolling = collections.deque(maxlen=levels[state.current_level].window)


# ── configuration ────────────────────────────────────────────────────

@dataclass
class HarnessConfig:
    seed: int = 0
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    mode: str = "bit"
    max_answer_bits: int = DEFAULT_MAX_ANSWER_BITS
    max_len: int = DEFAULT_MAX_LEN
    transcript: str | None = None
    levels: list[LevelConfig] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.mode not in ("bit", "byte"):
            raise ValueError(f"mode must be bit or byte, not {self.mode!r}")
        if not self.levels:
            self.levels = default_levels()
        for level in self.levels:
            level.validate()


def load_config(path: str | None = None, **overrides) -> HarnessConfig:
    """Build a config from an optional JSON file plus keyword overrides."""
    data: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    promotion = data.get("promotion", {})
    window = int(promotion.get("window", DEFAULT_WINDOW))
    threshold = float(promotion.get("threshold", DEFAULT_THRESHOLD))
    levels = [
        LevelConfig(
            level_id=int(item.get("level_id", i + 1)),
            specs=tuple(TaskSpec.from_dict(s) for s in item["specs"]),
            window=int(item.get("window", window)),
            threshold=float(item.get("threshold", threshold)),
        )
        for i, item in enumerate(data.get("levels", []))
    ]
    if not levels:
        levels = default_levels(window=window, threshold=threshold)
    kwargs = {
        "seed": int(data.get("seed", 0)),
        "host": data.get("host", "127.0.0.1"),
        "port": int(data.get("port", DEFAULT_PORT)),
        "mode": data.get("mode", "bit"),
        "max_answer_bits": int(data.get("max_answer_bits", DEFAULT_MAX_ANSWER_BITS)),
        "max_len": int(data.get("max_len", DEFAULT_MAX_LEN)),
        "transcript": data.get("transcript"),
        "levels": levels,
    }
    for key, value in overrides.items():
        if value is not None:
            kwargs[key] = value
    return HarnessConfig(**kwargs)


def default_levels(window: int = DEFAULT_WINDOW, threshold: float = DEFAULT_THRESHOLD) -> list[LevelConfig]:
    """Level k = task set #k: recognition sets 1-4, production, further tasks, induction."""

    def spec(set_id, mode, shape, ngram_len=5, n_terms=1, n_negated=0, has_anything=False, case=CaseMode.CANONICAL):
        return TaskSpec(
            set_id=set_id, mode=mode, shape=shape, max_ngram_len=ngram_len,
            n_terms=n_terms, n_negated=n_negated, has_anything=has_anything, case_mode=case,
        )

    rec, pro, two, des = Mode.RECOGNIZE, Mode.PRODUCE, Mode.PRODUCE_TWO, Mode.DESCRIBE
    sgl, dis, con, anyv = Shape.SINGLE, Shape.DISJUNCTION, Shape.CONJUNCTION, Shape.ANYTHING
    ladder = [
        [spec(1, rec, sgl, ngram_len=n) for n in range(1, 6)],
        [
            spec(2, rec, anyv, has_anything=True, n_terms=1),
            spec(2, rec, dis, ngram_len=2, n_terms=2),
            spec(2, rec, dis, ngram_len=5, n_terms=2),
            spec(2, rec, dis, ngram_len=5, n_terms=3),
            spec(2, rec, dis, ngram_len=5, n_terms=5),
        ],
        [
            spec(3, rec, con, ngram_len=2, n_terms=2),
            spec(3, rec, con, ngram_len=5, n_terms=2),
            spec(3, rec, con, ngram_len=5, n_terms=3),
            spec(3, rec, con, ngram_len=5, n_terms=2, has_anything=True),
            spec(3, rec, con, ngram_len=5, n_terms=3, has_anything=True),
        ],
        [
            spec(4, rec, con, ngram_len=5, n_terms=2, n_negated=1, has_anything=True),
            spec(4, rec, con, ngram_len=5, n_terms=3, n_negated=1, has_anything=True),
            spec(4, rec, con, ngram_len=5, n_terms=3, n_negated=2, has_anything=True),
            spec(4, rec, con, ngram_len=2, n_terms=3, n_negated=1, has_anything=True),
        ],
        [
            spec(5, pro, sgl, ngram_len=3),
            spec(5, pro, anyv, has_anything=True, n_terms=1),
            spec(5, pro, dis, ngram_len=5, n_terms=3),
            spec(5, pro, con, ngram_len=5, n_terms=2),
            spec(5, pro, con, ngram_len=5, n_terms=3),
            spec(5, pro, con, ngram_len=5, n_terms=2, has_anything=True),
            spec(5, pro, con, ngram_len=5, n_terms=3, n_negated=1, has_anything=True),
            spec(5, pro, con, ngram_len=5, n_terms=3, n_negated=2, has_anything=True),
        ],
        [
            spec(6, two, sgl, ngram_len=3),
            spec(6, two, dis, ngram_len=5, n_terms=2),
            spec(6, two, con, ngram_len=3, n_terms=2),
            spec(6, pro, sgl, ngram_len=3, case=CaseMode.SWAPPED),
            spec(6, pro, dis, ngram_len=5, n_terms=2, case=CaseMode.SWAPPED),
            spec(6, pro, con, ngram_len=5, n_terms=2, n_negated=1, has_anything=True, case=CaseMode.SWAPPED),
        ],
        [
            spec(7, des, sgl, ngram_len=3),
            spec(7, des, sgl, ngram_len=5),
            spec(7, des, dis, ngram_len=3, n_terms=2),
            spec(7, des, dis, ngram_len=5, n_terms=3),
            spec(7, des, anyv, has_anything=True, n_terms=1),
        ],
    ]
    return [
        LevelConfig(level_id=i + 1, specs=tuple(specs), window=window, threshold=threshold)
        for i, specs in enumerate(ladder)
    ]


# ── transcripts ──────────────────────────────────────────────────────

class TranscriptWriter:
    """Append-only JSONL sink, safe to share across session threads."""

    def __init__(self, path: str | None) -> None:
        self._lock = threading.Lock()
        self._file = open(path, "a", encoding="utf-8") if path else None

    def append(self, record: dict) -> None:
        if self._file is None:
            return
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            self._file.write(line + "\n")
            self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None


def build_record(session_id: str, state: SessionState, level_id: int, result: EpisodeResult) -> dict:
    instance = result.instance
    record = {
        "session_id": session_id,
        "episode_index": state.episode_index,
        "level_id": level_id,
        **instance.spec.to_dict(),
        "description": render_description(instance.description),
        "instance_seed": instance.instance_seed,
        "answer_text": result.answer.decoded_text,
        "terminated_by": result.answer.terminated_by,
        "correct": result.correct,
        "reward": result.reward,
        "bits_env_sent": result.bits_env_sent,
        "bits_answer_consumed": result.answer.raw_bits_consumed,
        "ts": time.time(),
    }
    if instance.target is not None:
        record["target"] = instance.target[0]
        record["label"] = instance.target[1]
    if instance.samples is not None:
        record["samples"] = list(instance.samples)
    return record


# ── in-process evaluation ────────────────────────────────────────────

def run_local(agent: str, episodes: int, config: HarnessConfig) -> dict:
    """Run a built-in agent through the normal episode path without sockets."""
    agent_fn = make_agent(agent, random.Random(f"{config.seed}/agent"), config.max_answer_bits)
    channel = LocalAgentChannel(agent_fn, config.mode)
    writer = TranscriptWriter(config.transcript)
    state = SessionState(
        session_seed=config.seed,
        rolling=collections.deque(maxlen=config.levels[0].window),
    )
    schedule_rng = random.Random(f"{config.seed}/schedule")
    limits = Limits(max_answer_bits=config.max_answer_bits)
    records: list[dict] = []
    try:
        for _ in range(episodes):
            level_id = config.levels[state.current_level].level_id
            spec = schedule_next(state, config.levels, schedule_rng)
            inst = sample_instance(
                spec, random.Random(f"{state.session_seed}/{state.episode_index}"), config.max_len
            )
            result = run_episode(inst, channel, limits)
            record_result(state, config.levels, result.correct, result.reward)
            record = build_record("local", state, level_id, result)
            writer.append(record)
            records.append(record)
    finally:
        writer.close()
    return summarize(records)


def summarize(records: list[dict]) -> dict:
    """Success and reward totals, broken down along the task axes."""
    summary: dict = {
        "episodes": len(records),
        "reward": sum(r["reward"] for r in records),
        "success_rate": (
            sum(r["correct"] for r in records) / len(records) if records else None
        ),
        "mean_answer_bits": (
            sum(r["bits_answer_consumed"] for r in records) / len(records) if records else None
        ),
    }
    for axis in REPORT_AXES:
        cells: dict = {}
        for r in records:
            key = str(r[axis])
            cell = cells.setdefault(key, {"episodes": 0, "correct": 0, "reward": 0})
            cell["episodes"] += 1
            cell["correct"] += 1 if r["correct"] else 0
            cell["reward"] += r["reward"]
        for cell in cells.values():
            cell["success_rate"] = cell["correct"] / cell["episodes"]
        summary[f"by_{axis}"] = dict(sorted(cells.items()))
    return summary


def report(path: str) -> dict:
    """Aggregate a transcript file; malformed lines are listed, not fatal."""
    records: list[dict] = []
    malformed: list[int] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                record["reward"]  # probe the fields summarize needs
                record["correct"]
                record["bits_answer_consumed"]
                for axis in REPORT_AXES:
                    record[axis]
            except (json.JSONDecodeError, KeyError, TypeError):
                malformed.append(lineno)
                continue
            records.append(record)
    summary = summarize(records)
    summary["malformed_lines"] = malformed
    return summary


# ── network server ───────────────────────────────────────────────────

class EnvServer(socketserver.ThreadingTCPServer):
    """One connection = one session; sessions are independent."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: HarnessConfig) -> None:
        self.config = config
        self.writer = TranscriptWriter(config.transcript)
        self._session_counter = 0
        self._counter_lock = threading.Lock()
        try:
            super().__init__((config.host, config.port), _SessionHandler)
        except OSError as e:
            raise BindFailure(f"cannot bind {config.host}:{config.port}: {e}") from e

    def next_session(self) -> tuple[str, int]:
        with self._counter_lock:
            index = self._session_counter
            self._session_counter += 1
        seed_material = f"{self.config.seed}/session/{index}".encode()
        session_seed = int.from_bytes(hashlib.sha256(seed_material).digest()[:8], "big")
        return f"session-{index}", session_seed

    def server_close(self) -> None:
        super().server_close()
        self.writer.close()


class _SessionHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        server: EnvServer = self.server  # type: ignore[assignment]
        config = server.config
        session_id, session_seed = server.next_session()
        rfile = self.connection.makefile("r", encoding="ascii", errors="replace")
        wfile = self.connection.makefile("w", encoding="ascii", errors="replace")
        channel = SocketChannel(rfile, wfile, config.mode)
        try:
            channel.send_hello(config.max_answer_bits)
        except ChannelClosed:
            return
        state = SessionState(
            session_seed=session_seed,
            rolling=collections.deque(maxlen=config.levels[0].window),
        )
        schedule_rng = random.Random(f"{session_seed}/schedule")
        limits = Limits(max_answer_bits=config.max_answer_bits)
        while not channel.closed:
            level_id = config.levels[state.current_level].level_id
            spec = schedule_next(state, config.levels, schedule_rng)
            inst = sample_instance(
                spec, random.Random(f"{session_seed}/{state.episode_index}"), config.max_len
            )
            result = run_episode(inst, channel, limits)
            if channel.clean_close and result.answer.raw_bits_consumed == 0:
                break  # polite goodbye before engaging: not an episode
            record_result(state, config.levels, result.correct, result.reward)
            server.writer.append(build_record(session_id, state, level_id, result))


def serve(config: HarnessConfig) -> EnvServer:
    """Create the listening server; call serve_forever() (or use as context)."""
    return EnvServer(config)
