"""Command-line benchmark runner.

Subcommands: eval, bench, replay, card, serve. Exit codes: 0 success,
2 configuration error, 3 fault (simulation fault or replay mismatch).
"""
from __future__ import annotations

import argparse
import json
import sys

from ..envs import SPORTS
from ..errors import ConfigError, ReplayError, SportsimError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sportsim",
        description="Deterministic humanoid sports simulation benchmark runner.")
    sub = parser.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("eval", help="run N evaluation trials and emit metrics")
    pe.add_argument("--sport", required=True, choices=SPORTS)
    pe.add_argument("--policy", default="", help="random | scripted policy name")
    pe.add_argument("--batch", type=int, default=64)
    pe.add_argument("--trials", type=int, default=1000)
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--config", default=None, help="YAML override file")
    pe.add_argument("--out", default=None, help="output directory")
    pe.add_argument("--log-trajectories", action="store_true")
    pe.add_argument("--workers", type=int, default=1)

    pb = sub.add_parser("bench", help="measure batched steps/second")
    pb.add_argument("--sport", required=True, choices=SPORTS)
    pb.add_argument("--batch", type=int, default=4096)
    pb.add_argument("--duration", type=float, default=5.0)
    pb.add_argument("--seed", type=int, default=0)

    pr = sub.add_parser("replay", help="verify a trajectory log bitwise")
    pr.add_argument("log_path")
    pr.add_argument("--env-index", type=int, default=None,
                    help="replay a single env from the batch")

    pc = sub.add_parser("card", help="print or write environment cards")
    pc.add_argument("--sport", default="all", choices=("all",) + SPORTS)
    pc.add_argument("--out", default=None, help="directory for card files")

    ps = sub.add_parser("serve", help="serve the batched step/reset bridge")
    ps.add_argument("--sport", required=True, choices=SPORTS)
    ps.add_argument("--batch", type=int, default=64)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=7864)
    ps.add_argument("--max-sessions", type=int, default=None,
                    help="exit after this many client sessions")
    ps.add_argument("--time-limit", type=float, default=None,
                    help="override the episode time limit (seconds)")
    ps.add_argument("--unix", default=None, metavar="PATH",
                    help="serve on a Unix domain socket instead of TCP")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            from .runner import RunSpec, run_eval
            spec = RunSpec(sport=args.sport, policy=args.policy,
                           batch_size=args.batch, trials=args.trials,
                           seed=args.seed, config_path=args.config,
                           out_dir=args.out,
                           log_trajectories=args.log_trajectories,
                           workers=args.workers)
            result = run_eval(spec)
            print(result["table_text"], end="")
            if result["paths"]:
                print(f"outputs: {json.dumps(result['paths'])}")
            return 3 if result["faults"] else 0
        if args.command == "bench":
            from .runner import run_bench
            report = run_bench(args.sport, args.batch, args.duration, args.seed)
            print(json.dumps(report, indent=2))
            return 0
        if args.command == "replay":
            from .trajlog import replay
            verdict = replay(args.log_path, args.env_index)
            print(json.dumps(verdict, indent=2))
            return 0 if verdict["ok"] else 3
        if args.command == "card":
            import os
            from ..envs.cards import render_card
            sports = SPORTS if args.sport == "all" else (args.sport,)
            for sport in sports:
                card = render_card(sport)
                if args.out:
                    os.makedirs(args.out, exist_ok=True)
                    path = os.path.join(args.out, f"{sport}_card.txt")
                    with open(path, "w", encoding="utf-8") as fh:
                        fh.write(card)
                    print(path)
                else:
                    print(card)
            return 0
        if args.command == "serve":
            from ..bridge import serve
            serve(args.sport, args.batch, seed=args.seed, host=args.host,
                  port=args.port, max_sessions=args.max_sessions,
                  time_limit=args.time_limit, unix_path=args.unix)
            return 0
    except (ConfigError, ReplayError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SportsimError as exc:
        print(f"fault: {exc}", file=sys.stderr)
        return 3
    return 2


if __name__ == "__main__":
    sys.exit(main())
