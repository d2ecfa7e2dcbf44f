"""Command line entry point: run scenarios, the example gallery, or list examples."""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, ReportIOError
from .gallery import list_examples
from .report import FORMATS, emit, to_text
from .runner import gallery_scenario, run_scenario
from .scenario import load_scenario


def _formats(value: str) -> tuple:
    parts = tuple(p.strip() for p in value.split(",") if p.strip())
    if parts == ("all",):
        return FORMATS
    bad = [p for p in parts if p not in FORMATS]
    if bad or not parts:
        raise argparse.ArgumentTypeError(f"formats are {', '.join(FORMATS)} or all (comma separated)")
    return parts


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=None, help="number of powers / Neumann terms")
    common.add_argument("--level", type=int, default=None, help="seminorm enumeration level")
    common.add_argument("--seed", type=int, default=None, help="seed for random probes and examples")
    common.add_argument("--format", type=_formats, default=("json", "text"),
                        help="comma separated subset of json,csv,text, or all (default json,text)")
    common.add_argument("--out-dir", default="tvspec-out", help="directory for report files")

    p = argparse.ArgumentParser(prog="tvspec", description="Boundedness, spectral radii and Neumann series "
                                "for operators on sequence spaces.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run a scenario file")
    run.add_argument("scenario", help="path to a YAML scenario")
    sub.add_parser("gallery", parents=[common], help="run every registered example")
    sub.add_parser("list", help="list registered examples")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for ex in list_examples():
            print(f"{ex['id']:<28} {ex['title']}")
        return 0
    try:
        if args.command == "run":
            sc = load_scenario(args.scenario)
        else:
            sc = gallery_scenario()
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for name in ("depth", "level", "seed"):
        v = getattr(args, name)
        if v is not None:
            setattr(sc, name, v)
    if sc.depth < 8 or sc.level < 1:
        print("error: --depth must be >= 8 and --level >= 1", file=sys.stderr)
        return 2
    report = run_scenario(sc)
    try:
        paths = emit(report, args.format, args.out_dir)
    except ReportIOError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    print(to_text(report), end="")
    for path in paths:
        print(f"wrote {path}")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
