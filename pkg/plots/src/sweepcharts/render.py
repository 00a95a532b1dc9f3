"""Figure construction and deterministic image output.

One chart = one (model, metric) pair: x-axis load, one line per scheduler
(seed mean) with a shaded min-max band. Drop-rate charts switch to a
logarithmic y-axis as soon as any plotted value is positive. Every chart is
written as both SVG and PNG; styling, ids, and metadata are pinned so
re-rendering the same CSV is byte-identical.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .data import ChartDataError, SweepTable, load_table

METRICS = ("avg_delay_slots", "drop_rate")

_METRIC_LABEL = {
    "avg_delay_slots": "average delay (slots)",
    "drop_rate": "drop rate",
}

# fixed scheduler palette; unknown names pick deterministically from the tail
_PALETTE = {
    "islip": "#4878cf",
    "firm": "#ee854a",
    "bsc-firm": "#6acc64",
}
_EXTRA_COLORS = ("#d65f5f", "#956cb4", "#8c613c", "#dc7ec0", "#797979")

# applied through rc_context for both figure construction and file output,
# never mutated globally
_RC = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.family": "DejaVu Sans",
    "font.size": 10.0,
    "axes.grid": True,
    "grid.alpha": 0.35,
    "grid.linewidth": 0.6,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "sweepcharts",
    "svg.fonttype": "path",
}


@dataclass(frozen=True)
class FigureSpec:
    """One chart to render: a model's metric curve set from one CSV."""

    csv_path: str
    model: str
    metric: str
    out_path: str  # extension-free stem; .svg and .png are appended

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ChartDataError(
                f"unknown metric {self.metric!r}; expected one of {METRICS}"
            )


def _color(scheduler: str, fallback_index: int) -> str:
    if scheduler in _PALETTE:
        return _PALETTE[scheduler]
    return _EXTRA_COLORS[fallback_index % len(_EXTRA_COLORS)]


def build_figure(table: SweepTable, model: str, metric: str) -> Figure:
    """The in-memory chart; separated from file output for inspection."""
    table.require_column(metric)
    schedulers = table.schedulers(model)
    if not schedulers:
        raise ChartDataError(f"CSV {table.path!r} has no rows for model {model!r}")

    with matplotlib.rc_context(_RC):
        fig = Figure()
        FigureCanvasAgg(fig)
        ax = fig.add_subplot(111)

        any_positive = False
        for idx, sched in enumerate(schedulers):
            points = table.series(model, sched, metric)
            if not points:
                continue
            loads = [p.load for p in points]
            means = [p.mean for p in points]
            any_positive = any_positive or any(v > 0 for v in means)
            color = _color(sched, idx)
            ax.plot(
                loads,
                means,
                marker="o",
                markersize=3.5,
                linewidth=1.6,
                color=color,
                label=sched,
            )
            ax.fill_between(
                loads,
                [p.low for p in points],
                [p.high for p in points],
                color=color,
                alpha=0.15,
                linewidth=0,
            )

        if metric == "drop_rate" and any_positive:
            ax.set_yscale("log")
        ax.set_xlabel("offered load (cells per input per slot)")
        ax.set_ylabel(_METRIC_LABEL[metric])
        ax.set_title(f"{model}: {_METRIC_LABEL[metric]} vs load")
        ax.legend(frameon=False)
        fig.tight_layout()
    return fig


def render_figure(spec: FigureSpec, table: SweepTable | None = None) -> list:
    """Write one chart as SVG + PNG; returns the two paths written."""
    table = table if table is not None else load_table(spec.csv_path)
    fig = build_figure(table, spec.model, spec.metric)
    written = []
    with matplotlib.rc_context(_RC):
        for ext in ("svg", "png"):
            path = f"{spec.out_path}.{ext}"
            fig.savefig(
                path,
                format=ext,
                metadata=(
                    {"Date": None} if ext == "svg" else {"Software": "sweepcharts"}
                ),
            )
            written.append(path)
    return written


def render_figures(csv_path, out_dir) -> list:
    """Every (model, metric) chart for the CSV, two files each.

    A three-model sweep yields six charts (twelve files). Files land in
    `out_dir` as `<model>_<metric>.<ext>`; existing files are overwritten.
    """
    table = load_table(csv_path)
    for metric in METRICS:
        table.require_column(metric)
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for model in table.models():
        for metric in METRICS:
            spec = FigureSpec(
                csv_path=str(csv_path),
                model=model,
                metric=metric,
                out_path=os.path.join(out_dir, f"{model}_{metric}"),
            )
            written.extend(render_figure(spec, table))
    return written
