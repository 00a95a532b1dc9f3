#!/usr/bin/env python3
"""Run the full scheduler-comparison sweep and write one CSV.

The default plan is 3 traffic models x 3 schedulers x 21 loads (0.5..1.0)
x 5 seeds on the 16+16-port fabric — roughly 40 minutes single-core.
Use --quick for a reduced smoke sweep (~2 minutes), or --jobs N to run
sweep points in parallel worker processes.
"""

from __future__ import annotations

import argparse
from dataclasses import replace

from poolswitch.harness import SweepPlan, run_sweep, write_csv


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    ap.add_argument("--out", default="results.csv", help="output CSV path")
    ap.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    ap.add_argument(
        "--quick",
        action="store_true",
        help="short windows, 2 seeds, 0.05 load grid (smoke run)",
    )
    args = ap.parse_args()

    plan = SweepPlan()
    if args.quick:
        plan = replace(
            plan,
            loads=tuple(round(0.5 + 0.05 * k, 10) for k in range(11)),
            seeds=(0, 1),
            warmup_slots=2_000,
            measure_slots=20_000,
        )
    results = run_sweep(plan, jobs=args.jobs, verbose=True)
    write_csv(results, args.out)
    print(f"wrote {len(results)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
