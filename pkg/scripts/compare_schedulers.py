#!/usr/bin/env python3
"""Print a quick scheduler comparison table for one traffic model and load.

Example:
    python3 scripts/compare_schedulers.py --model uniform-hotspot --load 0.9
"""

from __future__ import annotations

import argparse
from statistics import mean

from poolswitch.engine import SimConfig, Simulation
from poolswitch.sched import SCHEDULER_NAMES
from poolswitch.traffic import MODEL_NAMES, TrafficSpec


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    ap.add_argument("--model", default="uniform-uniform", choices=MODEL_NAMES)
    ap.add_argument("--load", type=float, default=0.9)
    ap.add_argument("--seeds", type=int, default=3, help="replicate count")
    ap.add_argument("--warmup", type=int, default=10_000)
    ap.add_argument("--slots", type=int, default=100_000, help="measured slots")
    ap.add_argument("--sfc", type=float, default=0.5, help="tagged-traffic share")
    args = ap.parse_args()

    print(
        f"{args.model} @ load {args.load}, sfc {args.sfc}, "
        f"{args.seeds} seeds x {args.slots} measured slots"
    )
    print(f"{'scheduler':>10} {'delay (slots)':>14} {'drop rate':>12} {'throughput':>11}")
    for sched in sorted(SCHEDULER_NAMES):
        runs = [
            Simulation(
                SimConfig(
                    traffic=TrafficSpec(
                        model=args.model, load=args.load, sfc_fraction=args.sfc
                    ),
                    scheduler=sched,
                    warmup_slots=args.warmup,
                    measure_slots=args.slots,
                    seed=seed,
                )
            ).run()
            for seed in range(args.seeds)
        ]
        delay = mean(r.avg_delay_slots for r in runs)
        drop = mean(r.drop_rate for r in runs)
        tput = mean(r.throughput for r in runs)
        print(f"{sched:>10} {delay:>14.2f} {drop:>12.2e} {tput:>11.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
