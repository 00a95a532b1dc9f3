"""Reading and aggregating the sweep CSV.

Replicate seeds collapse to (mean, min, max) per (scheduler, load) — the
mean draws the line, the min-max range shades the band. NaN metric values
(undefined ratios from degenerate windows) are skipped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass


class ChartDataError(Exception):
    """The CSV cannot supply what a chart needs."""


REQUIRED_COLUMNS = ("model", "scheduler", "load", "seed")


@dataclass(frozen=True)
class SeriesPoint:
    load: float
    mean: float
    low: float
    high: float


@dataclass(frozen=True)
class SweepTable:
    """Parsed rows plus the header actually present in the file."""

    path: str
    columns: tuple
    rows: tuple  # of dicts: model/scheduler str, load float, seed int, metrics float

    def models(self) -> tuple:
        return tuple(sorted({r["model"] for r in self.rows}))

    def schedulers(self, model: str) -> tuple:
        return tuple(sorted({r["scheduler"] for r in self.rows if r["model"] == model}))

    def require_column(self, name: str) -> None:
        if name not in self.columns:
            raise ChartDataError(f"CSV {self.path!r} is missing column {name!r}")

    def series(self, model: str, scheduler: str, metric: str) -> tuple:
        """Seed-aggregated points for one line, sorted by load."""
        self.require_column(metric)
        by_load: dict[float, list[float]] = {}
        for r in self.rows:
            if r["model"] != model or r["scheduler"] != scheduler:
                continue
            value = r[metric]
            if math.isnan(value):
                continue
            by_load.setdefault(r["load"], []).append(value)
        return tuple(
            SeriesPoint(
                load=load,
                mean=sum(vals) / len(vals),
                low=min(vals),
                high=max(vals),
            )
            for load, vals in sorted(by_load.items())
        )


def load_table(csv_path) -> SweepTable:
    """Parse the sweep CSV; numeric columns become floats (seed: int)."""
    try:
        fh = open(csv_path, newline="")
    except OSError as exc:
        raise ChartDataError(f"cannot read CSV {str(csv_path)!r}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        columns = tuple(reader.fieldnames or ())
        for name in REQUIRED_COLUMNS:
            if name not in columns:
                raise ChartDataError(
                    f"CSV {str(csv_path)!r} is missing column {name!r}"
                )
        rows = []
        for raw in reader:
            row: dict = {"model": raw["model"], "scheduler": raw["scheduler"]}
            row["load"] = float(raw["load"])
            row["seed"] = int(raw["seed"])
            for key in columns:
                if key in ("model", "scheduler", "load", "seed"):
                    continue
                try:
                    row[key] = float(raw[key])
                except (TypeError, ValueError):
                    row[key] = float("nan")
            rows.append(row)
    if not rows:
        raise ChartDataError(f"CSV {str(csv_path)!r} has no data rows")
    return SweepTable(path=str(csv_path), columns=columns, rows=tuple(rows))
