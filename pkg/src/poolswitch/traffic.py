"""Arrival processes for the fabric's transport ports.

Three models, all cell-per-slot Bernoulli-style sources at each TPort:

* uniform-uniform -- independent Bernoulli(load) arrivals, destination drawn
  uniformly over all TPorts.
* uniform-hotspot -- same arrival process, but plain (untagged) flows send
  half their cells to a fixed per-input hotspot output (input + H/2 mod H)
  and spread the rest over the remaining outputs; tagged flows stay uniform.
* burst-burst    -- ON/OFF source per input. ON runs are geometric with mean
  `burst_mean_on` (>=1 cell); OFF gaps are geometric with mean chosen so the
  long-run rate equals `load`. Every cell of a burst shares one destination
  and one service-chain decision.

Randomness is counter-keyed rather than sequential: each decision at
(slot, input, channel) hashes its coordinates with the stream key, so the
generated traffic is identical whether slots are produced one at a time or in
blocks, and any slot can be regenerated in isolation. The burst model keeps a
tiny per-input state machine, but its draws are keyed to the boundary slot,
which preserves the same property for forward stepping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError

MODEL_UU = 0
MODEL_UH = 1
MODEL_BB = 2

MODEL_NAMES = ("uniform-uniform", "uniform-hotspot", "burst-burst")
_MODEL_IDS = {name: idx for idx, name in enumerate(MODEL_NAMES)}

# decision channels, kept disjoint in key space
CH_ARRIVAL = 0
CH_DEST = 1
CH_KIND = 2
CH_CHAIN = 3
CH_HOT = 4
CH_OFF = 5
CH_ON = 6

_U64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_MIX2 = np.uint64(0x94D049BB133111EB)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_CH_SHIFT = np.uint64(40)
_F53 = 1.0 / 9007199254740992.0  # 2**-53
_SH11 = np.uint64(11)


@njit(cache=True)
def _keyed_u64(key, channel, idx):
    """Hash of one decision coordinate: uniform uint64 for (key, channel, idx)."""
    k = (np.uint64(channel) << _CH_SHIFT) + np.uint64(idx)
    z = np.uint64(key) + k * _U64_GAMMA
    z = (z ^ (z >> _SH30)) * _U64_MIX1
    z = (z ^ (z >> _SH27)) * _U64_MIX2
    return z ^ (z >> _SH31)


@njit(cache=True)
def _keyed_unit(key, channel, idx):
    """Uniform float in (0, 1]."""
    return (np.float64(_keyed_u64(key, channel, idx) >> _SH11) + 1.0) * _F53


@njit(cache=True)
def _geom0(u, mean):
    """Geometric on {0, 1, ...} with the given mean, via inverse CDF of u in (0,1]."""
    if mean <= 0.0:
        return np.int64(0)
    q = mean / (1.0 + mean)
    k = np.int64(np.log(u) / np.log(q))
    return k


@njit(cache=True)
def _flow_id(src, dest, route):
    return ((np.int64(route) + 1) << np.int64(32)) | (np.int64(src) << np.int64(16)) | np.int64(dest)


@njit(cache=True)
def _gen_slot(
    model,
    key,
    slot,
    num_tports,
    num_chains,
    load,
    sfc_fraction,
    mean_on,
    mean_off,
    bb_start,
    bb_end,
    bb_dest,
    bb_route,
    out_dest,
    out_route,
    out_flow,
):
    """Fill per-input arrival arrays for one slot; out_dest[i] = -1 means idle.

    out_route is -1 for plain forwarding, else a chain index in [0, num_chains).
    """
    h = num_tports
    for i in range(h):
        out_dest[i] = -1
        out_route[i] = -1
        out_flow[i] = 0

    if model == MODEL_BB:
        for i in range(h):
            idx = slot * h + i
            if slot >= bb_end[i]:
                # burst boundary: draw the OFF gap, the next burst length, and
                # the burst's destination / chain, all keyed to this slot
                off = _geom0(_keyed_unit(key, CH_OFF, idx), mean_off)
                on = np.int64(1) + _geom0(_keyed_unit(key, CH_ON, idx), mean_on - 1.0)
                bb_start[i] = slot + off
                bb_end[i] = slot + off + on
                dest = np.int64(_keyed_u64(key, CH_DEST, idx) % np.uint64(h))
                route = np.int64(-1)
                if num_chains > 0 and sfc_fraction > 0.0:
                    if _keyed_unit(key, CH_KIND, idx) <= sfc_fraction:
                        route = np.int64(
                            _keyed_u64(key, CH_CHAIN, idx) % np.uint64(num_chains)
                        )
                bb_dest[i] = dest
                bb_route[i] = route
            if bb_start[i] <= slot < bb_end[i]:
                out_dest[i] = bb_dest[i]
                out_route[i] = bb_route[i]
                out_flow[i] = _flow_id(i, bb_dest[i], bb_route[i])
        return

    for i in range(h):
        idx = slot * h + i
        if _keyed_unit(key, CH_ARRIVAL, idx) > load:
            continue
        route = np.int64(-1)
        if num_chains > 0 and sfc_fraction > 0.0:
            if _keyed_unit(key, CH_KIND, idx) <= sfc_fraction:
                route = np.int64(_keyed_u64(key, CH_CHAIN, idx) % np.uint64(num_chains))
        if model == MODEL_UH and route < 0 and h >= 2:
            hot = (i + h // 2) % h
            if _keyed_unit(key, CH_HOT, idx) <= 0.5:
                dest = np.int64(hot)
            else:
                d = np.int64(_keyed_u64(key, CH_DEST, idx) % np.uint64(h - 1))
                dest = d + 1 if d >= hot else d
        else:
            dest = np.int64(_keyed_u64(key, CH_DEST, idx) % np.uint64(h))
        out_dest[i] = dest
        out_route[i] = route
        out_flow[i] = _flow_id(i, dest, route)


def mean_off_slots(load: float, burst_mean_on: float) -> float:
    """OFF-gap mean that makes an ON/OFF source with the given burst length
    carry `load` cells per slot in the long run."""
    if load >= 1.0 or load <= 0.0:
        return 0.0
    return burst_mean_on * (1.0 - load) / load


@dataclass(frozen=True)
class TrafficSpec:
    """Parameters of one arrival process."""

    model: str
    load: float
    sfc_fraction: float = 0.0
    burst_mean_on: float = 64.0
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ConfigError(
                f"unknown traffic model {self.model!r}; expected one of {MODEL_NAMES}"
            )
        if not 0.0 <= self.load <= 1.0:
            raise ConfigError(f"load must be in [0, 1], got {self.load}")
        if not 0.0 <= self.sfc_fraction <= 1.0:
            raise ConfigError(f"sfc_fraction must be in [0, 1], got {self.sfc_fraction}")
        if self.burst_mean_on <= 1.0:
            raise ConfigError(f"burst_mean_on must be > 1, got {self.burst_mean_on}")
        if self.model == "burst-burst" and self.load == 0.0:
            # zero rate admits no finite OFF-gap mean
            raise ConfigError("burst-burst traffic needs load > 0")

    @property
    def model_id(self) -> int:
        return _MODEL_IDS[self.model]


@dataclass(frozen=True)
class Arrival:
    """One cell arriving at a TPort: where it entered, where it exits, and the
    chain it is tagged with (None for plain forwarding)."""

    input_tport: int
    dest_tport: int
    chain_index: int | None
    flow_id: int


class TrafficModel:
    """Stepped generator over slots. `arrivals(slot)` must be called with
    non-decreasing slots for burst-burst (the other models are stateless).
    """

    def __init__(self, spec: TrafficSpec, num_tports: int, num_chains: int, key: int):
        if num_tports < 1:
            raise ConfigError(f"num_tports must be >= 1, got {num_tports}")
        if num_chains < 0:
            raise ConfigError(f"num_chains must be >= 0, got {num_chains}")
        if spec.sfc_fraction > 0.0 and num_chains == 0:
            raise ConfigError("sfc_fraction > 0 requires at least one service chain")
        self.spec = spec
        self.num_tports = num_tports
        self.num_chains = num_chains
        self.key = np.uint64(key)
        self.mean_off = mean_off_slots(spec.load, spec.burst_mean_on)
        h = num_tports
        self.bb_start = np.zeros(h, dtype=np.int64)
        self.bb_end = np.zeros(h, dtype=np.int64)
        self.bb_dest = np.zeros(h, dtype=np.int64)
        self.bb_route = np.full(h, -1, dtype=np.int64)
        self._dest = np.empty(h, dtype=np.int64)
        self._route = np.empty(h, dtype=np.int64)
        self._flow = np.empty(h, dtype=np.int64)

    def reset(self) -> None:
        self.bb_start[:] = 0
        self.bb_end[:] = 0
        self.bb_dest[:] = 0
        self.bb_route[:] = -1

    def arrivals(self, slot: int) -> list[Arrival]:
        _gen_slot(
            self.spec.model_id,
            self.key,
            slot,
            self.num_tports,
            self.num_chains,
            self.spec.load,
            self.spec.sfc_fraction,
            self.spec.burst_mean_on,
            self.mean_off,
            self.bb_start,
            self.bb_end,
            self.bb_dest,
            self.bb_route,
            self._dest,
            self._route,
            self._flow,
        )
        out = []
        for i in range(self.num_tports):
            d = int(self._dest[i])
            if d < 0:
                continue
            r = int(self._route[i])
            out.append(
                Arrival(
                    input_tport=i,
                    dest_tport=d,
                    chain_index=r if r >= 0 else None,
                    flow_id=int(self._flow[i]),
                )
            )
        return out
