"""Command-line sweep runner.

    poolswitch --out results.csv --model uniform-uniform --scheduler islip \
               --loads 0.5:1.0:0.05 --seeds 3

Flags override the INI file (--config), which overrides the built-in plan.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import PoolSwitchError
from .harness import (
    SweepPlan,
    load_plan,
    parse_loads,
    parse_names,
    parse_seeds,
    run_sweep,
    write_csv,
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="poolswitch",
        description="Sweep the pooled-function switch simulator and write a CSV.",
    )
    p.add_argument("--config", help="INI file with a [sweep] section")
    p.add_argument("--out", default="results.csv", help="output CSV path")
    p.add_argument(
        "--scheduler",
        help="comma list of schedulers (islip, firm, bsc-firm)",
    )
    p.add_argument(
        "--model",
        help="comma list of traffic models (uniform-uniform, uniform-hotspot, burst-burst)",
    )
    p.add_argument("--loads", help='loads: "0.5:1.0:0.025" (range) or "0.7,0.9" (list)')
    p.add_argument("--seeds", help='seeds: a count ("5") or a comma list ("0,3,7")')
    p.add_argument("--warmup", type=int, help="warmup slots before measurement")
    p.add_argument("--slots", type=int, help="measured slots per run")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--quiet", action="store_true", help="suppress per-run progress")
    return p


def plan_from_args(args) -> SweepPlan:
    plan = SweepPlan()
    if args.config:
        plan = load_plan(args.config, plan)
    updates = {}
    if args.scheduler:
        updates["schedulers"] = parse_names(args.scheduler)
    if args.model:
        updates["models"] = parse_names(args.model)
    if args.loads:
        updates["loads"] = parse_loads(args.loads)
    if args.seeds:
        updates["seeds"] = parse_seeds(args.seeds)
    if args.warmup is not None:
        updates["warmup_slots"] = args.warmup
    if args.slots is not None:
        updates["measure_slots"] = args.slots
    return replace(plan, **updates)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        plan = plan_from_args(args)
        results = run_sweep(plan, jobs=args.jobs, verbose=not args.quiet)
        write_csv(results, args.out)
    except PoolSwitchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(results)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
