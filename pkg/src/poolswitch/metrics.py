"""Run statistics.

Two ledgers exist per run: full-run totals (used for conservation checking)
and measurement-window counters (everything reported). The window opens at
`warmup_slots`; a cell generated before the window but delivered inside it
contributes its waiting time to the window's delay sum, and a cell generated
inside the window counts as generated regardless of its eventual fate.

Delay is VOQ waiting time only: the slots a cell spends queued between
enqueue and crossbar transfer, summed over every hop it makes. Pool service
time is a load-independent constant offset and is excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError
from .fabric import (
    K_DELIV,
    K_DROP,
    K_FILT,
    K_GEN,
    K_MATCH,
    K_MDELIV,
    K_MDROP,
    K_MFILT,
    K_MGEN,
    K_MMATCH,
    K_MQSLOT,
    K_QSLOT,
)


@dataclass(frozen=True)
class WindowCounts:
    """Raw event counts over one accounting window."""

    slots: int
    generated: int
    delivered: int
    dropped: int
    filtered: int
    queued_slots: int
    matches: int


def window_counts(sim) -> WindowCounts:
    """Counts restricted to the measurement window (slots >= warmup)."""
    c = sim.state.counters
    measured = max(min(sim.slot, sim.config.total_slots) - sim.config.warmup_slots, 0)
    return WindowCounts(
        slots=measured,
        generated=int(c[K_MGEN]),
        delivered=int(c[K_MDELIV]),
        dropped=int(c[K_MDROP]),
        filtered=int(c[K_MFILT]),
        queued_slots=int(c[K_MQSLOT]),
        matches=int(c[K_MMATCH]),
    )


def total_counts(sim) -> WindowCounts:
    """Counts over the whole run, warmup included."""
    c = sim.state.counters
    return WindowCounts(
        slots=sim.slot,
        generated=int(c[K_GEN]),
        delivered=int(c[K_DELIV]),
        dropped=int(c[K_DROP]),
        filtered=int(c[K_FILT]),
        queued_slots=int(c[K_QSLOT]),
        matches=int(c[K_MATCH]),
    )


def avg_delay_slots(counts: WindowCounts) -> float:
    """Mean queueing delay per delivered cell."""
    if counts.delivered == 0:
        raise UndefinedMetricError("no cells delivered; average delay undefined")
    return counts.queued_slots / counts.delivered


def drop_rate(counts: WindowCounts) -> float:
    """Fraction of generated cells lost to full VOQs."""
    if counts.generated == 0:
        raise UndefinedMetricError("no cells generated; drop rate undefined")
    return counts.dropped / counts.generated


def throughput(counts: WindowCounts, num_tports: int) -> float:
    """Delivered cells per TPort output per slot."""
    if counts.slots == 0 or num_tports == 0:
        raise UndefinedMetricError("empty window; throughput undefined")
    return counts.delivered / (counts.slots * num_tports)


def per_output_delivered(sim) -> np.ndarray:
    """Window deliveries per TPort output (length num_tports)."""
    return sim.state.deliv_by_out_meas[: sim.config.num_tports].copy()


@dataclass(frozen=True)
class RunMetrics:
    """One run's reported statistics plus the labels identifying it."""

    model: str
    scheduler: str
    load: float
    seed: int
    sfc_fraction: float
    measured_slots: int
    cells_generated: int
    cells_delivered: int
    cells_dropped: int
    cells_filtered: int
    avg_delay_slots: float
    drop_rate: float
    throughput: float


def summarize(sim) -> RunMetrics:
    """Window statistics for a finished (or partial) run.

    Degenerate windows (nothing delivered / generated) report NaN for the
    affected ratio instead of raising, so sweeps stay total.
    """
    counts = window_counts(sim)
    cfg = sim.config
    delay = avg_delay_slots(counts) if counts.delivered else float("nan")
    loss = drop_rate(counts) if counts.generated else float("nan")
    tput = (
        throughput(counts, cfg.num_tports)
        if counts.slots and cfg.num_tports
        else float("nan")
    )
    return RunMetrics(
        model=cfg.traffic.model,
        scheduler=cfg.scheduler,
        load=cfg.traffic.load,
        seed=cfg.seed,
        sfc_fraction=cfg.traffic.sfc_fraction,
        measured_slots=counts.slots,
        cells_generated=counts.generated,
        cells_delivered=counts.delivered,
        cells_dropped=counts.dropped,
        cells_filtered=counts.filtered,
        avg_delay_slots=delay,
        drop_rate=loss,
        throughput=tput,
    )
