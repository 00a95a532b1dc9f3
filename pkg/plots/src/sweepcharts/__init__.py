"""Comparison charts from a scheduler-sweep CSV.

The input contract is the sweep CSV schema: one row per
(model, scheduler, load, seed) with at least the columns named in
`data.REQUIRED_COLUMNS`. Rendering is read-only and deterministic —
re-running over the same CSV reproduces every image byte for byte.
"""

from .data import ChartDataError, SweepTable, load_table
from .render import FigureSpec, METRICS, render_figure, render_figures

__all__ = [
    "ChartDataError",
    "FigureSpec",
    "METRICS",
    "SweepTable",
    "load_table",
    "render_figure",
    "render_figures",
]
