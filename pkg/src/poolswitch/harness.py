"""Experiment harness: cartesian sweeps over (model, scheduler, load, seed)
written to a flat CSV.

The CSV is byte-stable: rows come out sorted by (model, scheduler, load,
seed) regardless of execution order or worker count, floats are formatted
with repr (shortest round-trip form), and the file is written to a temp path
and atomically renamed.
"""

from __future__ import annotations

import configparser
import csv
import multiprocessing
import os
import sys
from dataclasses import dataclass, replace

from .engine import SimConfig, Simulation
from .errors import ConfigError
from .metrics import RunMetrics
from .sched import SCHEDULER_NAMES
from .traffic import MODEL_NAMES, TrafficSpec

CSV_COLUMNS = (
    "model",
    "scheduler",
    "load",
    "seed",
    "sfc_fraction",
    "measured_slots",
    "cells_generated",
    "cells_delivered",
    "cells_dropped",
    "avg_delay_slots",
    "drop_rate",
    "throughput",
)

DEFAULT_LOADS = tuple(round(0.5 + 0.025 * k, 10) for k in range(21))
DEFAULT_SEEDS = (0, 1, 2, 3, 4)


@dataclass(frozen=True)
class SweepPlan:
    """A grid of runs sharing one fabric shape."""

    models: tuple = MODEL_NAMES
    schedulers: tuple = SCHEDULER_NAMES
    loads: tuple = DEFAULT_LOADS
    seeds: tuple = DEFAULT_SEEDS
    num_tports: int = 16
    num_fports: int = 16
    voq_capacity: int = 500
    iterations: int = 5
    warmup_slots: int = 20_000
    measure_slots: int = 200_000
    sfc_fraction: float = 0.5
    burst_mean_on: float = 64.0

    def __post_init__(self):
        for m in self.models:
            if m not in MODEL_NAMES:
                raise ConfigError(f"unknown traffic model {m!r}")
        for s in self.schedulers:
            if s not in SCHEDULER_NAMES:
                raise ConfigError(f"unknown scheduler {s!r}")
        if not self.models or not self.schedulers or not self.loads or not self.seeds:
            raise ConfigError(
                "sweep needs at least one model, scheduler, load, and seed"
            )
        for v in self.loads:
            if not 0.0 < v <= 1.0:
                raise ConfigError(f"sweep loads must be in (0, 1], got {v}")

    def runs(self) -> list[SimConfig]:
        """All run configs, in output row order."""
        out = []
        for model in sorted(self.models):
            for sched in sorted(self.schedulers):
                for load in sorted(self.loads):
                    for seed in sorted(self.seeds):
                        spec = TrafficSpec(
                            model=model,
                            load=load,
                            sfc_fraction=self.sfc_fraction,
                            burst_mean_on=self.burst_mean_on,
                        )
                        out.append(
                            SimConfig(
                                traffic=spec,
                                scheduler=sched,
                                num_tports=self.num_tports,
                                num_fports=self.num_fports,
                                voq_capacity=self.voq_capacity,
                                iterations=self.iterations,
                                warmup_slots=self.warmup_slots,
                                measure_slots=self.measure_slots,
                                seed=seed,
                            )
                        )
        return out


def run_one(config: SimConfig) -> RunMetrics:
    return Simulation(config).run()


def run_sweep(plan: SweepPlan, jobs: int = 1, verbose: bool = False) -> list[RunMetrics]:
    """Execute every run in the plan. Results keep plan order whatever the
    worker count, so the CSV is identical for any `jobs`."""
    configs = plan.runs()
    if jobs <= 1:
        results = []
        for k, cfg in enumerate(configs):
            results.append(run_one(cfg))
            if verbose:
                r = results[-1]
                print(
                    f"[{k + 1}/{len(configs)}] {r.model} {r.scheduler} "
                    f"load={r.load} seed={r.seed} delay={r.avg_delay_slots:.2f} "
                    f"drop={r.drop_rate:.2e}",
                    file=sys.stderr,
                )
        return results
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=jobs) as pool:
        results = pool.map(run_one, configs)
    return results


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(results, path) -> None:
    """Write rows (sorted by model, scheduler, load, seed) atomically."""
    rows = sorted(results, key=lambda r: (r.model, r.scheduler, r.load, r.seed))
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.model,
                    r.scheduler,
                    _fmt(r.load),
                    r.seed,
                    _fmt(r.sfc_fraction),
                    r.measured_slots,
                    r.cells_generated,
                    r.cells_delivered,
                    r.cells_dropped,
                    _fmt(r.avg_delay_slots),
                    _fmt(r.drop_rate),
                    _fmt(r.throughput),
                ]
            )
    os.replace(tmp, path)


def read_csv(path) -> list[dict]:
    """Rows back as dicts with numeric fields parsed."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                {
                    "model": row["model"],
                    "scheduler": row["scheduler"],
                    "load": float(row["load"]),
                    "seed": int(row["seed"]),
                    "sfc_fraction": float(row["sfc_fraction"]),
                    "measured_slots": int(row["measured_slots"]),
                    "cells_generated": int(row["cells_generated"]),
                    "cells_delivered": int(row["cells_delivered"]),
                    "cells_dropped": int(row["cells_dropped"]),
                    "avg_delay_slots": float(row["avg_delay_slots"]),
                    "drop_rate": float(row["drop_rate"]),
                    "throughput": float(row["throughput"]),
                }
            )
    return out


# ---------------------------------------------------------------------------
# plan parsing (INI file + CLI-style strings)


def parse_loads(text: str) -> tuple:
    """Either a comma list ("0.5,0.6") or an inclusive range ("0.5:1.0:0.025")."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"load range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError(f"load step must be positive, got {step}")
        loads = []
        k = 0
        while True:
            v = round(start + k * step, 10)
            if v > stop + 1e-9:
                break
            loads.append(v)
            k += 1
        return tuple(loads)
    return tuple(float(p) for p in text.split(",") if p.strip())


def parse_seeds(text: str) -> tuple:
    """A bare count ("5" -> 0..4) or a comma list ("0,3,11")."""
    text = text.strip()
    if "," in text:
        return tuple(int(p) for p in text.split(",") if p.strip())
    return tuple(range(int(text)))


def parse_names(text: str) -> tuple:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def load_plan(ini_path, base: SweepPlan | None = None) -> SweepPlan:
    """Build a plan from an INI file's [sweep] section; missing keys keep the
    base plan's values."""
    plan = base or SweepPlan()
    parser = configparser.ConfigParser()
    read = parser.read(ini_path)
    if not read:
        raise ConfigError(f"cannot read config file {ini_path!r}")
    if not parser.has_section("sweep"):
        raise ConfigError(f"config file {ini_path!r} has no [sweep] section")
    sec = parser["sweep"]
    updates = {}
    if "models" in sec:
        updates["models"] = parse_names(sec["models"])
    if "schedulers" in sec:
        updates["schedulers"] = parse_names(sec["schedulers"])
    if "loads" in sec:
        updates["loads"] = parse_loads(sec["loads"])
    if "seeds" in sec:
        updates["seeds"] = parse_seeds(sec["seeds"])
    for key in (
        "num_tports",
        "num_fports",
        "voq_capacity",
        "iterations",
        "warmup_slots",
        "measure_slots",
    ):
        if key in sec:
            updates[key] = sec.getint(key)
    for key in ("sfc_fraction", "burst_mean_on"):
        if key in sec:
            updates[key] = sec.getfloat(key)
    return replace(plan, **updates)
