"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 runtime error. The environment
variable ``COMMAI_MINI_SEED`` supplies the default seed when ``--seed``
is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from .desc_lang import parse_description
from .errors import CommaiMiniError
from .harness import load_config, report, run_local, serve
from .semantics import recognize
from .taskgen import sample_instance


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse defaults to exit 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="commai-mini", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="serve sessions over TCP")
    p_serve.add_argument("--port", type=int)
    p_serve.add_argument("--host")
    p_serve.add_argument("--config", help="JSON config file")
    p_serve.add_argument("--mode", choices=["bit", "byte"])
    p_serve.add_argument("--seed", type=int)
    p_serve.add_argument("--transcript", help="JSONL transcript path")
    p_serve.set_defaults(func=cmd_serve)

    p_run = sub.add_parser("run", help="run a built-in agent in-process")
    p_run.add_argument("--agent", required=True)
    p_run.add_argument("--episodes", type=int, default=100)
    p_run.add_argument("--level-set", help="comma-separated level ids to keep, e.g. 1,2,3")
    p_run.add_argument("--config")
    p_run.add_argument("--mode", choices=["bit", "byte"])
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--transcript")
    p_run.set_defaults(func=cmd_run)

    p_gen = sub.add_parser("gen", help="emit sampled task instances as JSON lines")
    p_gen.add_argument("--set", type=int, required=True, dest="set_id", choices=range(1, 8))
    p_gen.add_argument("--count", type=int, default=10)
    p_gen.add_argument("--out", help="output path (default stdout)")
    p_gen.add_argument("--seed", type=int)
    p_gen.set_defaults(func=cmd_gen)

    p_check = sub.add_parser("check", help="check one string against a description")
    p_check.add_argument("--description", required=True)
    p_check.add_argument("--string", required=True)
    p_check.set_defaults(func=cmd_check)

    p_report = sub.add_parser("report", help="aggregate a transcript file")
    p_report.add_argument("--in", dest="path", required=True)
    p_report.set_defaults(func=cmd_report)
    return parser


def _default_seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("COMMAI_MINI_SEED")
    return int(env) if env else None


def cmd_serve(args) -> int:
    config = load_config(
        args.config,
        seed=_default_seed(args),
        host=args.host,
        port=args.port,
        mode=args.mode,
        transcript=args.transcript,
    )
    server = serve(config)
    print(f"listening on {config.host}:{server.server_address[1]} mode={config.mode}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_run(args) -> int:
    config = load_config(
        args.config,
        seed=_default_seed(args),
        mode=args.mode,
        transcript=args.transcript,
    )
    if args.level_set:
        keep = {int(x) for x in args.level_set.split(",")}
        config.levels = [lv for lv in config.levels if lv.level_id in keep]
        if not config.levels:
            raise CommaiMiniError(f"no levels left after filtering to {sorted(keep)}")
    summary = run_local(args.agent, args.episodes, config)
    print(json.dumps(summary, indent=2))
    return 0


def cmd_gen(args) -> int:
    config = load_config(None)
    level = next(lv for lv in config.levels if lv.level_id == args.set_id)
    rng = random.Random(_default_seed(args) or 0)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for _ in range(args.count):
            spec = rng.choice(level.specs)
            instance = sample_instance(spec, rng, config.max_len)
            out.write(json.dumps(instance.to_dict(), sort_keys=True) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_check(args) -> int:
    d = parse_description(args.description)
    verdict = recognize(d, args.string)
    line = "true" if verdict.member else "false"
    if verdict.witness is not None:
        line += " witness=" + ",".join(str(i) for i in verdict.witness)
    print(line)
    return 0


def cmd_report(args) -> int:
    summary = report(args.path)
    for lineno in summary["malformed_lines"]:
        print(f"malformed record at line {lineno}", file=sys.stderr)
    print(json.dumps(summary, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommaiMiniError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
