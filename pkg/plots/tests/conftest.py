"""Fixtures for the chart package: synthetic schema-conformant CSVs plus one
real sweep produced through the simulator's public CLI (the only coupling to
the producing package)."""

from __future__ import annotations

import csv
import shutil
import subprocess

import pytest

SCHEMA = (
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

_DEFAULTS = {
    "sfc_fraction": 0.5,
    "measured_slots": 1000,
    "cells_generated": 800,
    "cells_delivered": 790,
    "cells_dropped": 10,
    "avg_delay_slots": 5.0,
    "drop_rate": 0.0125,
    "throughput": 0.79,
}


@pytest.fixture
def write_sweep_csv(tmp_path):
    """Factory: write rows (dicts of schema keys; defaults fill the rest)."""

    def _write(rows, name="sweep.csv"):
        path = tmp_path / name
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=SCHEMA, lineterminator="\n")
            writer.writeheader()
            for overrides in rows:
                row = dict(_DEFAULTS)
                row.update(overrides)
                writer.writerow(row)
        return path

    return _write


def synthetic_grid_rows():
    """Three models x three schedulers x three loads x two seeds with shaped
    values: bsc-firm strictly below the baselines, drops appearing at 0.9."""
    rows = []
    bias = {"islip": 1.0, "firm": 0.9, "bsc-firm": 0.55}
    for model in ("uniform-uniform", "uniform-hotspot", "burst-burst"):
        for sched, b in bias.items():
            for load in (0.7, 0.8, 0.9):
                for seed in (0, 1):
                    delay = 40.0 * load * b + seed
                    drop = 0.02 * b if load >= 0.9 else 0.0
                    rows.append(
                        {
                            "model": model,
                            "scheduler": sched,
                            "load": load,
                            "seed": seed,
                            "avg_delay_slots": delay,
                            "drop_rate": drop,
                        }
                    )
    return rows


@pytest.fixture
def synthetic_csv(write_sweep_csv):
    return write_sweep_csv(synthetic_grid_rows())


@pytest.fixture(scope="session")
def real_sweep_csv(tmp_path_factory):
    """A genuine sweep over all three models through the installed CLI."""
    exe = shutil.which("poolswitch")
    assert exe, "the simulator CLI must be installed for the chart suite"
    out = tmp_path_factory.mktemp("realsweep") / "real.csv"
    subprocess.run(
        [
            exe,
            "--loads",
            "0.8:0.9:0.05",
            "--seeds",
            "2",
            "--warmup",
            "5000",
            "--slots",
            "50000",
            "--out",
            str(out),
            "--quiet",
        ],
        check=True,
        capture_output=True,
        text=True,
    )
    return out
