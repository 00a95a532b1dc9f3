"""Slot-synchronous simulation engine.

Every slot executes five phases in a fixed order:

1. arrivals   -- generate this slot's cells, classify their tags, and enqueue
                 each at its ingress TPort's VOQ for the first hop (drops
                 happen here when that VOQ is full);
2. schedule   -- run the configured matching algorithm over all VOQs;
3. transfer   -- move one cell across the crossbar per matched pair: a TPort
                 output delivers the cell, an FPort output hands it to the
                 port's server;
4. release    -- cells finishing service re-enter the fabric at their
                 server's FPort input, queued toward the next hop or egress;
5. advance    -- the slot counter increments.

Arrivals precede scheduling, so a cell can be served in its arrival slot;
released cells queue after scheduling, so they compete from the next slot on.

The whole loop is compiled (numba) and driven in blocks; `step_slot()` runs
the same kernel for a single slot, so stepping and block runs are
bit-identical. Randomness comes from three decoupled streams derived from
`SimConfig.seed`: counter-keyed traffic draws, the scheduler tie-breaker, and
function service times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .classify import Classifier, default_pool_layout
from .errors import ConfigError, InvariantError
from .fabric import (
    ERR_CELL_POOL_EXHAUSTED,
    ERR_EMPTY_VOQ_MATCHED,
    K_CLOCK,
    K_DELIV,
    K_DROP,
    K_ENQ,
    K_ERR,
    K_ERR_A,
    K_ERR_B,
    K_FILT,
    K_FREE_TOP,
    K_GEN,
    K_MATCH,
    K_MDELIV,
    K_MFILT,
    K_MGEN,
    K_MMATCH,
    K_MQSLOT,
    K_QSLOT,
    K_UID,
    FabricState,
    PortMap,
    _enqueue,
    _free_cell,
)
from .metrics import summarize
from .pool import PoolState, _ingest, _release
from .sched import SCHEDULER_NAMES, _rga, make_scheduler
from .traffic import TrafficSpec, _gen_slot, mean_off_slots

BLOCK_SLOTS = 4096

# SeedSequence spawn tags, one per random subsystem
_TAG_TRAFFIC = 0x54
_TAG_TIE = 0x7E
_TAG_NFI = 0x4E


@dataclass(frozen=True)
class SlotReport:
    """Event counts for a single executed slot."""

    slot: int
    arrivals: int
    enqueues: int
    drops: int
    matches: int
    deliveries: int


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one run."""

    traffic: TrafficSpec
    scheduler: str = "islip"
    num_tports: int = 16
    num_fports: int = 16
    voq_capacity: int = 500
    iterations: int = 5
    warmup_slots: int = 20_000
    measure_slots: int = 200_000
    seed: int = 0
    chains: tuple = None  # None -> stock layout when the pool is non-empty
    placement: dict = None

    def __post_init__(self):
        if self.num_tports < 1:
            raise ConfigError(f"num_tports must be >= 1, got {self.num_tports}")
        if self.num_fports < 0:
            raise ConfigError(f"num_fports must be >= 0, got {self.num_fports}")
        if self.voq_capacity < 1:
            raise ConfigError(f"voq_capacity must be >= 1, got {self.voq_capacity}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.warmup_slots < 0:
            raise ConfigError(f"warmup_slots must be >= 0, got {self.warmup_slots}")
        if self.measure_slots < 0:
            raise ConfigError(f"measure_slots must be >= 0, got {self.measure_slots}")
        if self.scheduler not in SCHEDULER_NAMES:
            raise ConfigError(
                f"unknown scheduler {self.scheduler!r}; expected one of {SCHEDULER_NAMES}"
            )
        if self.traffic.sfc_fraction > 0.0 and self.num_fports == 0:
            raise ConfigError("tagged traffic (sfc_fraction > 0) needs a non-empty pool")

    @property
    def total_slots(self) -> int:
        return self.warmup_slots + self.measure_slots

    def resolve_layout(self):
        """(chains, placement) after applying the stock default."""
        if self.chains is not None:
            return tuple(self.chains), dict(self.placement or {})
        if self.num_fports == 0 or self.traffic.sfc_fraction == 0.0:
            return (), {}
        chains, placement = default_pool_layout(self.num_fports)
        return tuple(chains), placement


@njit(cache=True)
def _run_block(
    # run window
    slot0,
    nslots,
    measure_from,
    # traffic
    model,
    traffic_key,
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
    arr_dest,
    arr_route,
    arr_flow,
    route_tab,
    # fabric
    q_cell,
    q_head,
    q_len,
    last_sched,
    rri,
    rro,
    capacity,
    counters,
    drops_by_voq,
    deliv_by_out,
    deliv_by_out_meas,
    free_stack,
    cell_uid,
    cell_flow,
    cell_src,
    cell_route,
    cell_cursor,
    cell_egress,
    cell_created,
    cell_enqueued,
    cell_qtotal,
    # routes
    route_fports,
    route_nfis,
    route_lens,
    # scheduler
    iterations,
    mode,
    tie_rng,
    moi,
    moo,
    grant,
    # pool
    wheel_cell,
    wheel_len,
    held,
    nfi_rng,
    wheel_size,
    bucket_cap,
    num_servers,
    rel_server,
    rel_cell,
):
    n = q_len.shape[0]
    for t in range(slot0, slot0 + nslots):
        measured = t >= measure_from

        # -- phase 1: arrivals ------------------------------------------------
        _gen_slot(
            model,
            traffic_key,
            t,
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
            arr_dest,
            arr_route,
            arr_flow,
        )
        for i in range(num_tports):
            dest = arr_dest[i]
            if dest < 0:
                continue
            counters[K_GEN] += 1
            if measured:
                counters[K_MGEN] += 1
            tag = arr_route[i]
            route = np.int64(-1)
            if tag >= 0:
                route = np.int64(route_tab[tag])
                if route < -1:
                    counters[K_FILT] += 1
                    if measured:
                        counters[K_MFILT] += 1
                    continue
            top = counters[K_FREE_TOP]
            if top == 0:
                counters[K_ERR] = ERR_CELL_POOL_EXHAUSTED
                return t
            cidx = np.int64(free_stack[top - 1])
            counters[K_FREE_TOP] = top - 1
            cell_uid[cidx] = counters[K_UID]
            counters[K_UID] += 1
            cell_flow[cidx] = arr_flow[i]
            cell_src[cidx] = i
            cell_route[cidx] = route
            cell_cursor[cidx] = 0
            cell_egress[cidx] = dest
            cell_created[cidx] = t
            cell_qtotal[cidx] = 0
            j = np.int64(route_fports[route, 0]) if route >= 0 else dest
            _enqueue(
                q_cell,
                q_head,
                q_len,
                counters,
                drops_by_voq,
                cell_enqueued,
                free_stack,
                capacity,
                i,
                j,
                cidx,
                t,
                measured,
            )

        # -- phase 2: schedule -------------------------------------------------
        nm = _rga(q_len, last_sched, rri, rro, iterations, mode, tie_rng, moi, moo, grant)
        counters[K_MATCH] += nm
        if measured:
            counters[K_MMATCH] += nm

        # -- phase 3: transfer (outputs in index order) -------------------------
        for j in range(n):
            i = moo[j]
            if i < 0:
                continue
            if q_len[i, j] <= 0:
                counters[K_ERR] = ERR_EMPTY_VOQ_MATCHED
                counters[K_ERR_A] = i
                counters[K_ERR_B] = j
                return t
            head = q_head[i, j]
            cidx = np.int64(q_cell[i, j, head])
            q_head[i, j] = (head + 1) % capacity
            q_len[i, j] -= 1
            cell_qtotal[cidx] += t - cell_enqueued[cidx]
            last_sched[i, j] = t
            if j < num_tports:
                counters[K_DELIV] += 1
                counters[K_QSLOT] += cell_qtotal[cidx]
                deliv_by_out[j] += 1
                if measured:
                    counters[K_MDELIV] += 1
                    counters[K_MQSLOT] += cell_qtotal[cidx]
                    deliv_by_out_meas[j] += 1
                _free_cell(free_stack, counters, cidx)
            else:
                server = j - num_tports
                nfis = np.int64(route_nfis[cell_route[cidx], cell_cursor[cidx]])
                done = _ingest(
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
                    t,
                )
                if done < 0:
                    return t

        # -- phase 4: release completions ---------------------------------------
        k = _release(
            wheel_cell, wheel_len, held, wheel_size, num_servers, t, rel_server, rel_cell
        )
        for idx in range(k):
            server = rel_server[idx]
            cidx = rel_cell[idx]
            cur = np.int64(cell_cursor[cidx]) + 1
            cell_cursor[cidx] = cur
            route = np.int64(cell_route[cidx])
            if cur < route_lens[route]:
                j = np.int64(route_fports[route, cur])
            else:
                j = np.int64(cell_egress[cidx])
            _enqueue(
                q_cell,
                q_head,
                q_len,
                counters,
                drops_by_voq,
                cell_enqueued,
                free_stack,
                capacity,
                num_tports + server,
                j,
                cidx,
                t,
                measured,
            )

        # -- phase 5: advance ----------------------------------------------------
        counters[K_CLOCK] = t + 1
    return slot0 + nslots


def _seed_u64(*components) -> int:
    return int(np.random.SeedSequence(components).generate_state(1, np.uint64)[0])


class Simulation:
    """One configured fabric plus its pool, traffic source, and scheduler."""

    def __init__(self, config: SimConfig):
        self.config = config
        ports = PortMap(config.num_tports, config.num_fports)
        chains, placement = config.resolve_layout()
        if config.traffic.sfc_fraction > 0.0 and not chains:
            raise ConfigError("sfc_fraction > 0 requires at least one service chain")
        self.classifier = Classifier(ports, chains, placement)
        route_fports, route_nfis, route_lens = self.classifier.compiled_arrays()
        self.state = FabricState(
            ports,
            config.voq_capacity,
            route_fports=route_fports,
            route_nfis=route_nfis,
            route_lens=route_lens,
            sfp_tags=self.classifier.paths,
            tie_seed=_seed_u64(config.seed, _TAG_TIE),
        )
        self.state.measure_from = config.warmup_slots
        max_nfis = int(route_nfis.max()) if route_nfis.size else 1
        self.pool = PoolState(
            config.num_fports,
            max_nfis,
            nfi_seed=_seed_u64(config.seed, _TAG_NFI),
        )
        self.traffic_key = np.uint64(
            _seed_u64(config.seed, _TAG_TRAFFIC, config.traffic.seed)
        )
        self.scheduler = make_scheduler(config.scheduler, config.iterations)
        self.route_tab = self.classifier.route_table(len(chains))
        n = ports.total
        h = ports.num_tports
        self._moi = np.empty(n, dtype=np.int64)
        self._moo = np.empty(n, dtype=np.int64)
        self._grant = np.empty(n, dtype=np.int64)
        self._arr_dest = np.empty(h, dtype=np.int64)
        self._arr_route = np.empty(h, dtype=np.int64)
        self._arr_flow = np.empty(h, dtype=np.int64)
        self._bb_start = np.zeros(h, dtype=np.int64)
        self._bb_end = np.zeros(h, dtype=np.int64)
        self._bb_dest = np.zeros(h, dtype=np.int64)
        self._bb_route = np.full(h, -1, dtype=np.int64)
        rel_cap = max(config.num_fports * self.pool.bucket_cap, 1)
        self._rel_server = np.empty(rel_cap, dtype=np.int64)
        self._rel_cell = np.empty(rel_cap, dtype=np.int64)
        self._mean_off = mean_off_slots(config.traffic.load, config.traffic.burst_mean_on)

    @property
    def slot(self) -> int:
        return self.state.clock

    def _advance(self, nslots: int) -> None:
        cfg = self.config
        spec = cfg.traffic
        state = self.state
        pool = self.pool
        _run_block(
            self.slot,
            nslots,
            cfg.warmup_slots,
            spec.model_id,
            self.traffic_key,
            cfg.num_tports,
            len(self.route_tab),
            spec.load,
            spec.sfc_fraction,
            spec.burst_mean_on,
            self._mean_off,
            self._bb_start,
            self._bb_end,
            self._bb_dest,
            self._bb_route,
            self._arr_dest,
            self._arr_route,
            self._arr_flow,
            self.route_tab,
            state.q_cell,
            state.q_head,
            state.q_len,
            state.last_sched,
            state.rri,
            state.rro,
            state.capacity,
            state.counters,
            state.drops_by_voq,
            state.deliv_by_out,
            state.deliv_by_out_meas,
            state.free_stack,
            state.cell_uid,
            state.cell_flow,
            state.cell_src,
            state.cell_route,
            state.cell_cursor,
            state.cell_egress,
            state.cell_created,
            state.cell_enqueued,
            state.cell_qtotal,
            state.route_fports,
            state.route_nfis,
            state.route_lens,
            self.scheduler.iterations,
            self.scheduler.mode,
            state.tie_rng,
            self._moi,
            self._moo,
            self._grant,
            pool.wheel_cell,
            pool.wheel_len,
            pool.held,
            pool.nfi_rng,
            pool.wheel_size,
            pool.bucket_cap,
            pool.num_servers,
            self._rel_server,
            self._rel_cell,
        )
        state.raise_if_failed()

    def step_slot(self) -> SlotReport:
        """Execute exactly one slot (identical code path to `run`)."""
        c = self.state.counters
        slot = self.slot
        before = (c[K_GEN], c[K_ENQ], c[K_DROP], c[K_MATCH], c[K_DELIV])
        self._advance(1)
        return SlotReport(
            slot=slot,
            arrivals=int(c[K_GEN] - before[0]),
            enqueues=int(c[K_ENQ] - before[1]),
            drops=int(c[K_DROP] - before[2]),
            matches=int(c[K_MATCH] - before[3]),
            deliveries=int(c[K_DELIV] - before[4]),
        )

    def run_slots(self, nslots: int) -> None:
        while nslots > 0:
            chunk = min(nslots, BLOCK_SLOTS)
            self._advance(chunk)
            nslots -= chunk

    def run(self):
        """Run to the end of the measurement window and return the summary."""
        remaining = self.config.total_slots - self.slot
        if remaining > 0:
            self.run_slots(remaining)
        self.check_conservation()
        return summarize(self)

    def check_conservation(self) -> None:
        """Every generated cell is delivered, dropped, filtered, or still inside."""
        c = self.state.counters
        resident = self.state.resident_cells() + self.pool.resident_cells()
        gen = int(c[K_GEN])
        acct = int(c[K_DELIV]) + int(c[K_DROP]) + int(c[K_FILT]) + resident
        if gen != acct:
            raise InvariantError(
                f"cell conservation broken: generated {gen} != accounted {acct} "
                f"(delivered {int(c[K_DELIV])}, dropped {int(c[K_DROP])}, "
                f"filtered {int(c[K_FILT])}, resident {resident})"
            )
        free = int(c[K_FREE_TOP])
        if free + resident != self.state.pool_size:
            raise InvariantError(
                f"cell records leaked: free {free} + resident {resident} "
                f"!= pool {self.state.pool_size}"
            )
