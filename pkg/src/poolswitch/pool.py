"""Function-server pool behind the FPorts.

Each server is a delay element: a cell arriving at a server's FPort starts
service immediately (server buffering is unbounded, so nothing is dropped
here) and is held for the sum of its hop's per-function service times, each
drawn uniformly from {1, 2} slots. Completions are tracked on a per-server
timing wheel: bucket (slot % wheel_size) holds the cells that finish at
`slot`, which bounds both memory and per-slot work by small constants.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ConfigError
from .fabric import ERR_SERVER_SLOT_OVERFLOW, K_ERR, K_ERR_A, K_NFI_D1, K_NFI_D2
from .sched import _mix_next

_U1 = np.uint64(1)


def _next_pow2(x: int) -> int:
    p = 1
    while p < x:
        p *= 2
    return p


class PoolState:
    """Timing wheels for every server plus the shared service-time stream."""

    def __init__(self, num_servers: int, max_nfis_per_hop: int, nfi_seed: int = 0):
        if num_servers < 0:
            raise ConfigError(f"num_servers must be >= 0, got {num_servers}")
        max_nfis = max(int(max_nfis_per_hop), 1)
        # worst-case hop delay is 2 * max_nfis, so a wheel strictly longer than
        # that never wraps onto a still-pending bucket
        self.wheel_size = _next_pow2(2 * max_nfis + 2)
        self.bucket_cap = 2 * max_nfis
        self.num_servers = num_servers
        self.wheel_cell = np.zeros(
            (max(num_servers, 1), self.wheel_size, self.bucket_cap), dtype=np.int32
        )
        self.wheel_len = np.zeros((max(num_servers, 1), self.wheel_size), dtype=np.int32)
        self.held = np.zeros(max(num_servers, 1), dtype=np.int64)
        self.nfi_rng = np.array([np.uint64(nfi_seed)], dtype=np.uint64)

    def resident_cells(self) -> int:
        """Cells currently in service across the pool."""
        return int(self.held[: self.num_servers].sum()) if self.num_servers else 0


@njit(cache=True)
def _draw_service(nfi_rng, counters, nfis):
    """Total hold time for one hop: `nfis` independent draws from {1, 2}."""
    total = 0
    for _ in range(nfis):
        d = 1 + np.int64(_mix_next(nfi_rng) & _U1)
        if d == 1:
            counters[K_NFI_D1] += 1
        else:
            counters[K_NFI_D2] += 1
        total += d
    return total


@njit(cache=True)
def _ingest(
    wheel_cell,
    wheel_len,
    held,
    counters,
    nfi_rng,
    wheel_size,
    bucket_cap,
    server,
    cidx,
    nfis,
    slot,
):
    """Start service for a cell; returns its completion slot, or -1 on a
    (should-be-impossible) bucket overflow."""
    service = _draw_service(nfi_rng, counters, nfis)
    done = slot + service
    b = done % wheel_size
    length = wheel_len[server, b]
    if length >= bucket_cap:
        counters[K_ERR] = ERR_SERVER_SLOT_OVERFLOW
        counters[K_ERR_A] = server
        return -1
    wheel_cell[server, b, length] = cidx
    wheel_len[server, b] = length + 1
    held[server] += 1
    return done


@njit(cache=True)
def _release(wheel_cell, wheel_len, held, wheel_size, num_servers, slot, out_server, out_cell):
    """Drain every server's bucket for `slot`; fills (server, cell) pairs and
    returns the count."""
    k = 0
    b = slot % wheel_size
    for s in range(num_servers):
        length = wheel_len[s, b]
        for q in range(length):
            out_server[k] = s
            out_cell[k] = wheel_cell[s, b, q]
            k += 1
        wheel_len[s, b] = 0
        held[s] -= length
    return k


def ingest_cell(pool: PoolState, counters, server: int, cell_idx: int, nfis: int, slot: int) -> int:
    """Python-level ingest; returns the completion slot."""
    if not 0 <= server < pool.num_servers:
        raise ConfigError(f"server index {server} out of range ({pool.num_servers} servers)")
    done = _ingest(
        pool.wheel_cell,
        pool.wheel_len,
        pool.held,
        counters,
        pool.nfi_rng,
        pool.wheel_size,
        pool.bucket_cap,
        server,
        cell_idx,
        nfis,
        slot,
    )
    return int(done)


def release_due(pool: PoolState, slot: int) -> list[tuple[int, int]]:
    """All (server, cell_idx) completions scheduled for `slot`."""
    cap = pool.num_servers * pool.bucket_cap
    out_server = np.empty(max(cap, 1), dtype=np.int64)
    out_cell = np.empty(max(cap, 1), dtype=np.int64)
    k = _release(
        pool.wheel_cell,
        pool.wheel_len,
        pool.held,
        pool.wheel_size,
        pool.num_servers,
        slot,
        out_server,
        out_cell,
    )
    return [(int(out_server[t]), int(out_cell[t])) for t in range(k)]
