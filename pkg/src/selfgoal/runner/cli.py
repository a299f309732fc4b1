"""Command-line entry point: ``selfgoal <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, ExperimentAborted, InvalidArgument, NotFound, ParseError
from ..goaltree import GoalTree
from .config import ExperimentConfig
from .experiment import run_experiment
from .record import RunRecord, parse_snapshot_name
from .report import rate, replay, report, score_table
from .sweep import sweep_table, sweep_xi

EXIT_USAGE = 2
EXIT_ABORTED = 3


def demo_config_path() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "demo.yaml"


def _emit_tables(tables, csv_path: str | None) -> None:
    for t in tables:
        print(t.text())
    if csv_path:
        Path(csv_path).write_text("\n".join(t.csv() for t in tables), encoding="utf-8")


def _run(config: ExperimentConfig, args) -> int:
    try:
        record = run_experiment(config, args.output_dir)
    except ExperimentAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.record is not None and exc.record.path is not None:
            print(f"partial record: {exc.record.path}", file=sys.stderr)
        return EXIT_ABORTED
    print(f"record: {record.path}")
    print(f"digest: {record.digest()}")
    print()
    print(score_table(record).text())
    return 0


def cmd_run(args) -> int:
    return _run(ExperimentConfig.load(args.config), args)


def cmd_demo(args) -> int:
    return _run(ExperimentConfig.load(demo_config_path()), args)


def cmd_sweep(args) -> int:
    config = ExperimentConfig.load(args.config)
    try:
        rows = sweep_xi(config, args.values, args.output_dir)
    except ExperimentAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    _emit_tables([sweep_table(rows)], args.csv)
    return 0


def cmd_rate(args) -> int:
    _emit_tables([rate(args.history)], args.csv)
    return 0


def cmd_report(args) -> int:
    _emit_tables(report(args.directory), args.csv)
    return 0


def cmd_replay(args) -> int:
    record = RunRecord.load(args.directory)
    for block in replay(record, agent=args.agent, round=args.round, kind=args.kind, repeat=args.repeat):
        print(block)
    return 0


def cmd_tree(args) -> int:
    record = RunRecord.load(args.directory)
    snaps = record.trees.get(args.agent)
    if not snaps:
        raise NotFound(f"no tree snapshots for agent {args.agent!r}")
    keys = sorted(snaps, key=parse_snapshot_name)
    if args.repeat is not None:
        keys = [k for k in keys if parse_snapshot_name(k)[0] == args.repeat]
    if args.round is not None:
        keys = [k for k in keys if parse_snapshot_name(k)[1] == args.round]
    if not keys:
        raise NotFound("no snapshot matches that repeat/round")
    tree = GoalTree.from_dict(snaps[keys[-1]])
    print(f"# {args.agent} {keys[-1]}")
    print(tree.dumps() if args.json else tree.dump_flat(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selfgoal", description="Multi-agent game arena with GoalTree-guided agents.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a config file")
    p.add_argument("config")
    p.add_argument("--output-dir", help="override the config's output_dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("demo", help="run the bundled scripted demo")
    p.add_argument("--output-dir", default="runs")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("sweep-xi", help="rerun a config once per filtering threshold")
    p.add_argument("config")
    p.add_argument("--values", type=float, nargs="+", default=[0.6, 0.7, 0.8, 0.9])
    p.add_argument("--output-dir")
    p.add_argument("--csv", help="also write the table as CSV here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rate", help="TrueSkill leaderboard from a match-history file")
    p.add_argument("history")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("report", help="score tables and leaderboards for stored records")
    p.add_argument("directory")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("replay", help="print transcript events")
    p.add_argument("directory")
    p.add_argument("--agent")
    p.add_argument("--round", type=int)
    p.add_argument("--repeat", type=int)
    p.add_argument("--kind")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("tree", help="print a stored GoalTree snapshot")
    p.add_argument("directory")
    p.add_argument("--agent", required=True)
    p.add_argument("--round", type=int, help="agent round (default: latest)")
    p.add_argument("--repeat", type=int)
    p.add_argument("--json", action="store_true", help="structured form instead of the flat listing")
    p.set_defaults(func=cmd_tree)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InvalidArgument as exc:
        parser.error(str(exc))
    except (ConfigError, ParseError, NotFound) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
