"""Crossbar schedulers: iSLIP, FIRM, and the capacity-guided FIRM variant.

All three run the same iterative request/grant/accept loop over the VOQ
occupancy matrix and differ only in how the round-robin pointers move:

* islip    -- pointers advance past the match only for first-iteration
              accepts; an unaccepted grant leaves the grant pointer alone.
* firm     -- like islip, but an unaccepted first-iteration grant parks the
              output's grant pointer ON the granted input, so that input is
              granted again next slot (FCFS-like behaviour under contention).
* bsc-firm -- firm plus a pre-phase that repositions each input's accept
              pointer to its most-starved VOQ (longest queue, oldest service
              tie-break), so accepts favour the VOQ with the least spare
              service capacity.

The matching loop is compiled with numba; the Scheduler classes are thin
wrappers that the engine also bypasses (the block kernel calls _rga directly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError

MODE_ISLIP = 0
MODE_FIRM = 1
MODE_BSC = 2

SCHEDULER_NAMES = ("islip", "firm", "bsc-firm")

_U64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_MIX2 = np.uint64(0x94D049BB133111EB)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)


@njit(cache=True)
def _mix_next(state):
    """Advance a splitmix64 stream held in a uint64[1] array; return the draw."""
    s = state[0] + _U64_GAMMA
    state[0] = s
    z = s
    z = (z ^ (z >> _SH30)) * _U64_MIX1
    z = (z ^ (z >> _SH27)) * _U64_MIX2
    return z ^ (z >> _SH31)


@njit(cache=True)
def _rand_below(state, n):
    return np.int64(_mix_next(state) % np.uint64(n))


# ---------------------------------------------------------------------------
# service-capacity ordering


@dataclass(frozen=True)
class ServiceCapacity:
    """Scheduling pressure of one VOQ: occupancy plus the slot it last won
    service. Less remaining capacity (longer queue, served longer ago) means
    higher scheduling priority."""

    queue_len: int
    last_scheduled: int


def sc_compare(a: ServiceCapacity, b: ServiceCapacity) -> int:
    """-1 when `a` outranks `b` (schedule `a` first), +1 for the reverse, 0 on ties.

    Longer queue wins; equal lengths fall back to the longest-unserved VOQ.
    """
    if a.queue_len != b.queue_len:
        return -1 if a.queue_len > b.queue_len else 1
    if a.last_scheduled != b.last_scheduled:
        return -1 if a.last_scheduled < b.last_scheduled else 1
    return 0


def sc_sort_key(sc: ServiceCapacity):
    """Sort key placing the highest-priority (least capacity) VOQ first."""
    return (-sc.queue_len, sc.last_scheduled)


# ---------------------------------------------------------------------------
# matching


@dataclass(frozen=True)
class Matching:
    """One slot's crossbar configuration: conflict-free (input, output) pairs."""

    pairs: tuple

    def __post_init__(self):
        ins = [i for i, _ in self.pairs]
        outs = [j for _, j in self.pairs]
        if len(set(ins)) != len(ins) or len(set(outs)) != len(outs):
            raise ConfigError(f"matching reuses a port: {self.pairs}")

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __contains__(self, pair):
        return pair in self.pairs

    def output_for(self, input_port: int):
        for i, j in self.pairs:
            if i == input_port:
                return j
        return None

    def input_for(self, output_port: int):
        for i, j in self.pairs:
            if j == output_port:
                return i
        return None


@njit(cache=True)
def _bsc_reposition(q_len, last_sched, rri, tie_state):
    """Point each input's accept pointer at its least-capacity non-empty VOQ.

    Ties (same length, same last-service slot) are broken uniformly at random;
    the stream is consumed in input-index order and only when a real tie exists.
    """
    n = q_len.shape[0]
    for i in range(n):
        best_len = np.int64(0)
        best_t = np.int64(0)
        ties = 0
        for j in range(n):
            length = np.int64(q_len[i, j])
            if length <= 0:
                continue
            t = last_sched[i, j]
            if (
                ties == 0
                or length > best_len
                or (length == best_len and t < best_t)
            ):
                best_len = length
                best_t = t
                ties = 1
            elif length == best_len and t == best_t:
                ties += 1
        if ties == 0:
            continue
        pick = 0
        if ties > 1:
            pick = _rand_below(tie_state, ties)
        seen = 0
        for j in range(n):
            if np.int64(q_len[i, j]) == best_len and last_sched[i, j] == best_t:
                if seen == pick:
                    rri[i] = j
                    break
                seen += 1


@njit(cache=True)
def _rga(
    q_len,
    last_sched,
    rri,
    rro,
    iterations,
    mode,
    tie_state,
    match_of_input,
    match_of_output,
    grant_to,
):
    """Iterative request/grant/accept matching over the occupancy matrix.

    Requests are implicit (VOQ(i, j) non-empty). Each unmatched output grants
    the first requesting unmatched input at-or-after its grant pointer; each
    unmatched input accepts the first grant at-or-after its accept pointer.
    Pointers only ever move on the first iteration. Fills match_of_input /
    match_of_output (-1 = unmatched) and returns the match count.
    """
    n = q_len.shape[0]
    for i in range(n):
        match_of_input[i] = -1
        match_of_output[i] = -1

    if mode == MODE_BSC:
        _bsc_reposition(q_len, last_sched, rri, tie_state)

    total = 0
    for it in range(iterations):
        new_matches = 0
        for j in range(n):
            grant_to[j] = -1
            if match_of_output[j] >= 0:
                continue
            start = rro[j]
            for s in range(n):
                i = (start + s) % n
                if match_of_input[i] < 0 and q_len[i, j] > 0:
                    grant_to[j] = i
                    break
        for i in range(n):
            if match_of_input[i] >= 0:
                continue
            start = rri[i]
            for s in range(n):
                j = (start + s) % n
                if grant_to[j] == i:
                    match_of_input[i] = j
                    match_of_output[j] = i
                    new_matches += 1
                    if it == 0:
                        rri[i] = (j + 1) % n
                        rro[j] = (i + 1) % n
                    break
        if it == 0 and mode != MODE_ISLIP:
            # grant that went unaccepted: park the pointer on the losing input
            for j in range(n):
                g = grant_to[j]
                if g >= 0 and match_of_output[j] != g:
                    rro[j] = g
        total += new_matches
        if new_matches == 0:
            break
    return total


class Scheduler:
    """Base wrapper: runs the matching kernel against a FabricState."""

    mode = -1
    name = "?"

    def __init__(self, iterations: int = 5):
        if iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {iterations}")
        self.iterations = iterations

    def schedule(self, state) -> Matching:
        """Compute this slot's matching and advance the pointer state in place."""
        n = state.n
        match_of_input = np.empty(n, dtype=np.int64)
        match_of_output = np.empty(n, dtype=np.int64)
        grant_to = np.empty(n, dtype=np.int64)
        _rga(
            state.q_len,
            state.last_sched,
            state.rri,
            state.rro,
            self.iterations,
            self.mode,
            state.tie_rng,
            match_of_input,
            match_of_output,
            grant_to,
        )
        pairs = tuple(
            (i, int(match_of_input[i])) for i in range(n) if match_of_input[i] >= 0
        )
        return Matching(pairs=pairs)

    def __repr__(self):
        return f"{type(self).__name__}(iterations={self.iterations})"


class IslipScheduler(Scheduler):
    mode = MODE_ISLIP
    name = "islip"


class FirmScheduler(Scheduler):
    mode = MODE_FIRM
    name = "firm"


class BscFirmScheduler(Scheduler):
    mode = MODE_BSC
    name = "bsc-firm"


_BY_NAME = {
    "islip": IslipScheduler,
    "firm": FirmScheduler,
    "bsc-firm": BscFirmScheduler,
}


def make_scheduler(name: str, iterations: int = 5) -> Scheduler:
    try:
        cls = _BY_NAME[name]
    except KeyError:
        raise ConfigError(
            f"unknown scheduler {name!r}; expected one of {SCHEDULER_NAMES}"
        ) from None
    return cls(iterations)
