"""VOQ crossbar fabric state.

Cells live in a preallocated record pool (one numpy column per field) and the
N x N virtual output queues are fixed-capacity ring buffers of pool indices.
This layout lets the per-slot kernels run under numba while the Python layer
keeps a normal object API (`CellRef`, `enqueue_cell`, `transfer_matched`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .errors import ConfigError, InvariantError

CELL_SIZE_BYTES = 64

# counters[] slot layout, shared with the engine kernel.
K_CLOCK = 0        # next slot to execute
K_UID = 1          # next cell uid
K_FREE_TOP = 2     # number of free cell records
K_ERR = 3          # sticky error code, see ERR_*
K_ERR_A = 4
K_ERR_B = 5
K_GEN = 6          # full-run totals
K_ENQ = 7
K_DROP = 8
K_DELIV = 9
K_FILT = 10
K_QSLOT = 11
K_MATCH = 12
K_MGEN = 13        # measurement-window counters
K_MENQ = 14
K_MDROP = 15
K_MDELIV = 16
K_MFILT = 17
K_MQSLOT = 18
K_MMATCH = 19
K_NFI_D1 = 20      # per-function service delay histogram
K_NFI_D2 = 21
N_COUNTERS = 22

ERR_NONE = 0
ERR_EMPTY_VOQ_MATCHED = 1
ERR_CELL_POOL_EXHAUSTED = 2
ERR_SERVER_SLOT_OVERFLOW = 3


class PortKind(Enum):
    TPORT = "tport"
    FPORT = "fport"


class EnqueueResult(Enum):
    ACCEPTED = "accepted"
    DROPPED = "dropped"


@dataclass(frozen=True)
class PortMap:
    """Fixed partition of fabric ports: indices [0, num_tports) are transport
    ports, [num_tports, total) are function ports."""

    num_tports: int
    num_fports: int

    def __post_init__(self):
        if self.num_tports < 1:
            raise ConfigError(f"num_tports must be >= 1, got {self.num_tports}")
        if self.num_fports < 0:
            raise ConfigError(f"num_fports must be >= 0, got {self.num_fports}")

    @property
    def total(self) -> int:
        return self.num_tports + self.num_fports

    def kind(self, port: int) -> PortKind:
        self.check(port)
        return PortKind.TPORT if port < self.num_tports else PortKind.FPORT

    def is_tport(self, port: int) -> bool:
        return 0 <= port < self.num_tports

    def is_fport(self, port: int) -> bool:
        return self.num_tports <= port < self.total

    def server_index(self, port: int) -> int:
        """Index of the server behind an FPort."""
        if not self.is_fport(port):
            raise ConfigError(f"port {port} is not an FPort")
        return port - self.num_tports

    def check(self, port: int) -> None:
        if not 0 <= port < self.total:
            raise ConfigError(
                f"port index {port} out of range for fabric with {self.total} ports"
            )


class FabricState:
    """Mutable state of one switch instance: cell pool, VOQ rings, pointers.

    `route_fports[r, h]` / `route_nfis[r, h]` / `route_lens[r]` describe the
    compiled service paths (see classify.compile_routes); a cell's `route` of
    -1 means plain forwarding.
    """

    def __init__(
        self,
        ports: PortMap,
        capacity: int,
        route_fports: np.ndarray | None = None,
        route_nfis: np.ndarray | None = None,
        route_lens: np.ndarray | None = None,
        sfp_tags: tuple | None = None,
        tie_seed: int = 0,
        pool_slack: int = 256,
    ):
        if capacity < 1:
            raise ConfigError(f"voq capacity must be >= 1, got {capacity}")
        n = ports.total
        self.ports = ports
        self.capacity = capacity

        if route_fports is None:
            route_fports = np.zeros((0, 1), dtype=np.int16)
            route_nfis = np.zeros((0, 1), dtype=np.int16)
            route_lens = np.zeros(0, dtype=np.int16)
        self.route_fports = route_fports
        self.route_nfis = route_nfis
        self.route_lens = route_lens
        self.sfp_tags = sfp_tags or ()

        pool = n * n * capacity + pool_slack
        self.pool_size = pool
        self.cell_uid = np.zeros(pool, dtype=np.int64)
        self.cell_flow = np.zeros(pool, dtype=np.int64)
        self.cell_src = np.zeros(pool, dtype=np.int16)
        self.cell_route = np.full(pool, -1, dtype=np.int32)
        self.cell_cursor = np.zeros(pool, dtype=np.int16)
        self.cell_egress = np.zeros(pool, dtype=np.int16)
        self.cell_created = np.zeros(pool, dtype=np.int64)
        self.cell_enqueued = np.zeros(pool, dtype=np.int64)
        self.cell_qtotal = np.zeros(pool, dtype=np.int64)
        # stack of free record indices; top counter lives in counters[K_FREE_TOP]
        self.free_stack = np.arange(pool - 1, -1, -1, dtype=np.int32)

        self.q_cell = np.zeros((n, n, capacity), dtype=np.int32)
        self.q_head = np.zeros((n, n), dtype=np.int32)
        self.q_len = np.zeros((n, n), dtype=np.int32)
        self.last_sched = np.zeros((n, n), dtype=np.int64)  # T of each VOQ, 0 at start
        self.rri = np.zeros(n, dtype=np.int64)
        self.rro = np.zeros(n, dtype=np.int64)

        self.drops_by_voq = np.zeros((n, n), dtype=np.int64)
        self.deliv_by_out = np.zeros(n, dtype=np.int64)
        self.deliv_by_out_meas = np.zeros(n, dtype=np.int64)

        self.counters = np.zeros(N_COUNTERS, dtype=np.int64)
        self.counters[K_FREE_TOP] = pool
        self.tie_rng = np.array([np.uint64(tie_seed)], dtype=np.uint64)
        # events at slots >= measure_from also count in the measurement window
        self.measure_from = 0

    @property
    def n(self) -> int:
        return self.ports.total

    @property
    def clock(self) -> int:
        return int(self.counters[K_CLOCK])

    def new_cell(
        self,
        flow_id: int,
        src_tport: int,
        route: int,
        egress_tport: int,
        slot: int,
    ) -> "CellRef":
        """Allocate a cell record. `route` is a compiled route index or -1."""
        top = int(self.counters[K_FREE_TOP])
        if top == 0:
            raise InvariantError("cell pool exhausted")
        idx = int(self.free_stack[top - 1])
        self.counters[K_FREE_TOP] = top - 1
        uid = int(self.counters[K_UID])
        self.counters[K_UID] = uid + 1
        self.cell_uid[idx] = uid
        self.cell_flow[idx] = flow_id
        self.cell_src[idx] = src_tport
        self.cell_route[idx] = route
        self.cell_cursor[idx] = 0
        self.cell_egress[idx] = egress_tport
        self.cell_created[idx] = slot
        self.cell_enqueued[idx] = slot
        self.cell_qtotal[idx] = 0
        return CellRef(self, idx)

    def voq_len(self, i: int, j: int) -> int:
        return int(self.q_len[i, j])

    def voq_cells(self, i: int, j: int) -> list["CellRef"]:
        """Front-to-back contents of one VOQ."""
        head = int(self.q_head[i, j])
        length = int(self.q_len[i, j])
        cap = self.capacity
        return [CellRef(self, int(self.q_cell[i, j, (head + k) % cap])) for k in range(length)]

    def resident_cells(self) -> int:
        """Cells currently held in fabric queues (servers tracked separately)."""
        return int(self.q_len.sum())

    def raise_if_failed(self) -> None:
        code = int(self.counters[K_ERR])
        if code == ERR_NONE:
            return
        a, b = int(self.counters[K_ERR_A]), int(self.counters[K_ERR_B])
        if code == ERR_EMPTY_VOQ_MATCHED:
            raise InvariantError(
                f"scheduler matched empty VOQ({a},{b}) at slot {self.clock}; "
                f"row lens {self.q_len[a].tolist()}"
            )
        if code == ERR_CELL_POOL_EXHAUSTED:
            raise InvariantError(f"cell pool exhausted at slot {self.clock}")
        if code == ERR_SERVER_SLOT_OVERFLOW:
            raise InvariantError(f"server {a} completion bucket overflow at slot {self.clock}")
        raise InvariantError(f"unknown kernel error code {code}")


class CellRef:
    """View of one pooled cell record. Valid until the cell is delivered or dropped."""

    __slots__ = ("state", "idx")

    def __init__(self, state: FabricState, idx: int):
        self.state = state
        self.idx = idx

    @property
    def cell_id(self) -> int:
        return int(self.state.cell_uid[self.idx])

    @property
    def flow_id(self) -> int:
        return int(self.state.cell_flow[self.idx])

    @property
    def size_bytes(self) -> int:
        return CELL_SIZE_BYTES

    @property
    def src_tport(self) -> int:
        return int(self.state.cell_src[self.idx])

    @property
    def route(self) -> int:
        return int(self.state.cell_route[self.idx])

    @property
    def sfp(self):
        """SfpTag for this cell (empty hops for plain forwarding)."""
        from .classify import SfpTag

        r = self.route
        hops = self.state.sfp_tags[r].hops if r >= 0 else ()
        return SfpTag(hops=hops, egress_tport=self.egress_tport)

    @property
    def hop_cursor(self) -> int:
        return int(self.state.cell_cursor[self.idx])

    @property
    def egress_tport(self) -> int:
        return int(self.state.cell_egress[self.idx])

    @property
    def created_slot(self) -> int:
        return int(self.state.cell_created[self.idx])

    @property
    def enqueued_slot(self) -> int:
        return int(self.state.cell_enqueued[self.idx])

    @property
    def queued_slots_total(self) -> int:
        return int(self.state.cell_qtotal[self.idx])

    def __eq__(self, other):
        return (
            isinstance(other, CellRef)
            and other.state is self.state
            and other.idx == self.idx
        )

    def __hash__(self):
        return hash((id(self.state), self.idx))

    def __repr__(self):
        return (
            f"CellRef(uid={self.cell_id}, flow={self.flow_id}, src={self.src_tport}, "
            f"route={self.route}, cursor={self.hop_cursor}, egress={self.egress_tport})"
        )


@njit(cache=True)
def _free_cell(free_stack, counters, cidx):
    top = counters[K_FREE_TOP]
    free_stack[top] = cidx
    counters[K_FREE_TOP] = top + 1


@njit(cache=True)
def _enqueue(
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
    slot,
    measured,
):
    """Append cell to VOQ(i, j) or drop it if the queue is full. Returns 1 if accepted."""
    length = q_len[i, j]
    if length < capacity:
        pos = (q_head[i, j] + length) % capacity
        q_cell[i, j, pos] = cidx
        q_len[i, j] = length + 1
        cell_enqueued[cidx] = slot
        counters[K_ENQ] += 1
        if measured:
            counters[K_MENQ] += 1
        return 1
    counters[K_DROP] += 1
    if measured:
        counters[K_MDROP] += 1
    drops_by_voq[i, j] += 1
    _free_cell(free_stack, counters, cidx)
    return 0


@njit(cache=True)
def _pop_head(q_cell, q_head, q_len, capacity, i, j):
    head = q_head[i, j]
    cidx = q_cell[i, j, head]
    q_head[i, j] = (head + 1) % capacity
    q_len[i, j] = q_len[i, j] - 1
    return cidx


@njit(cache=True)
def _transfer(
    q_cell,
    q_head,
    q_len,
    last_sched,
    counters,
    cell_enqueued,
    cell_qtotal,
    capacity,
    pairs_i,
    pairs_j,
    n_pairs,
    slot,
    out_cells,
):
    """Dequeue the head cell of every matched VOQ.

    Charges the waiting time since enqueue to each cell and stamps the VOQ's
    last-scheduled slot. Fills out_cells with pool indices; returns the count,
    or -1 after flagging an error if a matched VOQ is empty.
    """
    for k in range(n_pairs):
        i = pairs_i[k]
        j = pairs_j[k]
        if q_len[i, j] <= 0:
            counters[K_ERR] = ERR_EMPTY_VOQ_MATCHED
            counters[K_ERR_A] = i
            counters[K_ERR_B] = j
            return -1
        cidx = _pop_head(q_cell, q_head, q_len, capacity, i, j)
        cell_qtotal[cidx] += slot - cell_enqueued[cidx]
        last_sched[i, j] = slot
        out_cells[k] = cidx
    return n_pairs


def enqueue_cell(
    state: FabricState, input_port: int, output_port: int, cell: CellRef, slot: int
) -> EnqueueResult:
    """Append `cell` to VOQ(input_port, output_port), or drop it when full.

    A dropped cell's record is recycled immediately; do not use its CellRef
    afterwards.
    """
    state.ports.check(input_port)
    state.ports.check(output_port)
    accepted = _enqueue(
        state.q_cell,
        state.q_head,
        state.q_len,
        state.counters,
        state.drops_by_voq,
        state.cell_enqueued,
        state.free_stack,
        state.capacity,
        input_port,
        output_port,
        cell.idx,
        slot,
        slot >= state.measure_from,
    )
    return EnqueueResult.ACCEPTED if accepted else EnqueueResult.DROPPED


def transfer_matched(state: FabricState, matching, slot: int) -> list[tuple[CellRef, int]]:
    """Dequeue one cell per matched pair and hand each to its output port.

    Returns (cell, output_port) tuples; TPort outputs are final egress, FPort
    outputs are destined for that port's server. The caller completes the
    hand-off (delivery accounting or server ingest).
    """
    pairs = matching.pairs
    n_pairs = len(pairs)
    pairs_i = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=n_pairs)
    pairs_j = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=n_pairs)
    out_cells = np.empty(n_pairs, dtype=np.int64)
    got = _transfer(
        state.q_cell,
        state.q_head,
        state.q_len,
        state.last_sched,
        state.counters,
        state.cell_enqueued,
        state.cell_qtotal,
        state.capacity,
        pairs_i,
        pairs_j,
        n_pairs,
        slot,
        out_cells,
    )
    if got < 0:
        state.raise_if_failed()
    return [(CellRef(state, int(out_cells[k])), int(pairs_j[k])) for k in range(n_pairs)]
