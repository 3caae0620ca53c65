"""``bench`` command line: generate workload traces and run the overhead table."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import Mode, run_bench
from .report import format_csv, format_report
from .workloads import MAX_EVENTS, SORTS, UnknownWorkload, Workload, generate_workload, resolve

EXIT_WORKLOAD = 2


def _workloads(spec: str, count: int) -> list[Workload]:
    keys = [s.name for s in SORTS] if spec == "all" else [k.strip() for k in spec.split(",")]
    return [Workload(resolve(k).name, count) for k in keys]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bench", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="time the workloads in each mode and print the table")
    run.add_argument("--workloads", default="all",
                     help="'all' or comma-separated sort numbers/names")
    run.add_argument("--runs", type=int, default=30)
    run.add_argument("--modes", default="baseline,intercept,full")
    run.add_argument("--count", type=int, default=MAX_EVENTS, help="events per run")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", type=Path, help="write the table here instead of stdout")
    run.add_argument("--csv", type=Path, help="also write comma-separated values here")
    run.add_argument("--no-self-check", action="store_true",
                     help="skip the baseline-vs-baseline control")

    gen = sub.add_parser("gen", help="write one workload trace file")
    gen.add_argument("--sort", required=True, help="sort number 1-7 or name")
    gen.add_argument("--count", type=int, default=MAX_EVENTS)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            text = generate_workload(Workload(resolve(args.sort).name, args.count), args.seed)
            if args.out:
                args.out.write_text(text)
            else:
                sys.stdout.write(text)
            return 0

        workloads = _workloads(args.workloads, args.count)
        try:
            modes = Mode.parse_list(args.modes)
        except ValueError as exc:
            print(f"bench: {exc}", file=sys.stderr)
            return EXIT_WORKLOAD
        if args.runs < 2:
            print("bench: --runs must be at least 2", file=sys.stderr)
            return EXIT_WORKLOAD
        report = run_bench(workloads, args.runs, modes, args.seed,
                           self_check=not args.no_self_check,
                           progress=lambda row: print(f"  {row.api_method} done",
                                                      file=sys.stderr))
    except UnknownWorkload as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return EXIT_WORKLOAD

    text = format_report(report)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        args.csv.write_text(format_csv(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
