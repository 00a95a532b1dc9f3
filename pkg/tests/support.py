"""Shared test helpers.

Two kinds of helper live here:

* pure-Python mirrors of the compiled kernels (splitmix64 stream, keyed
  decision hash, and a from-scratch request/grant/accept reference), used to
  cross-check the numba implementations against an independent second
  implementation;
* small builders and oracles (synthetic fabric states, a maximum-matching
  oracle, a compiled traffic-statistics driver) shared across test modules.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from poolswitch.fabric import FabricState, PortMap
from poolswitch.sched import MODE_BSC, MODE_ISLIP
from poolswitch.traffic import _gen_slot

_MASK64 = (1 << 64) - 1
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def py_mix(state: list) -> int:
    """Pure-Python splitmix64 step over a one-element list; mirrors sched._mix_next."""
    s = (state[0] + SPLITMIX_GAMMA) & _MASK64
    state[0] = s
    z = s
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def py_rand_below(state: list, n: int) -> int:
    """Mirror of sched._rand_below."""
    return py_mix(state) % n


def py_keyed_u64(key: int, channel: int, idx: int) -> int:
    """Mirror of traffic._keyed_u64."""
    k = ((channel << 40) + idx) & _MASK64
    z = (key + k * SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def py_keyed_unit(key: int, channel: int, idx: int) -> float:
    """Mirror of traffic._keyed_unit: uniform float in (0, 1]."""
    return ((py_keyed_u64(key, channel, idx) >> 11) + 1) * 2.0**-53


# ---------------------------------------------------------------------------
# synthetic fabric states for scheduler tests


def make_state(
    lens,
    last_sched=None,
    rri=None,
    rro=None,
    tie_seed: int = 0,
    capacity: int = 16,
) -> FabricState:
    """FabricState whose occupancy matrix is set directly (no real cells).

    Sufficient for exercising the matching kernel, which reads only q_len,
    last_sched, the pointers, and the tie-break stream.
    """
    lens = np.asarray(lens, dtype=np.int64)
    n = lens.shape[0]
    state = FabricState(PortMap(num_tports=n, num_fports=0), capacity=capacity, tie_seed=tie_seed)
    state.q_len[:, :] = lens
    if last_sched is not None:
        state.last_sched[:, :] = np.asarray(last_sched, dtype=np.int64)
    if rri is not None:
        state.rri[:] = np.asarray(rri, dtype=np.int64)
    if rro is not None:
        state.rro[:] = np.asarray(rro, dtype=np.int64)
    return state


# ---------------------------------------------------------------------------
# independent matching reference


def ref_rga(lens, last_sched, rri, rro, iterations, mode, rand_below=None):
    """From-scratch request/grant/accept reference.

    Semantics: each unmatched output grants the first unmatched input with a
    non-empty VOQ at-or-after its grant pointer; each unmatched input accepts
    the first granting output at-or-after its accept pointer. First-iteration
    accepts advance both pointers one past the match; a first-iteration grant
    that goes unaccepted parks the output pointer on the granted input for
    firm-style modes and leaves it alone for islip. The capacity-guided mode
    first points every input's accept pointer at its longest queue (oldest
    service breaks length ties; remaining ties resolved by rand_below over the
    tied columns in ascending order). Iterations beyond the first never move
    pointers. Returns (set of pairs, rri, rro).
    """
    n = len(lens)
    lens = [[int(x) for x in row] for row in lens]
    last_sched = [[int(x) for x in row] for row in last_sched]
    rri = [int(x) for x in rri]
    rro = [int(x) for x in rro]
    mi = [-1] * n
    mo = [-1] * n

    if mode == MODE_BSC:
        for i in range(n):
            nonempty = [j for j in range(n) if lens[i][j] > 0]
            if not nonempty:
                continue
            best_key = min((-lens[i][j], last_sched[i][j]) for j in nonempty)
            ties = [j for j in nonempty if (-lens[i][j], last_sched[i][j]) == best_key]
            rri[i] = ties[rand_below(len(ties))] if len(ties) > 1 else ties[0]

    for it in range(iterations):
        grant = [-1] * n
        for j in range(n):
            if mo[j] >= 0:
                continue
            for s in range(n):
                i = (rro[j] + s) % n
                if mi[i] < 0 and lens[i][j] > 0:
                    grant[j] = i
                    break
        new = 0
        for i in range(n):
            if mi[i] >= 0:
                continue
            for s in range(n):
                j = (rri[i] + s) % n
                if grant[j] == i:
                    mi[i] = j
                    mo[j] = i
                    new += 1
                    if it == 0:
                        rri[i] = (j + 1) % n
                        rro[j] = (i + 1) % n
                    break
        if it == 0 and mode != MODE_ISLIP:
            for j in range(n):
                g = grant[j]
                if g >= 0 and mo[j] != g:
                    rro[j] = g
        if new == 0:
            break
    pairs = {(i, mi[i]) for i in range(n) if mi[i] >= 0}
    return pairs, rri, rro


# ---------------------------------------------------------------------------
# matching oracles


def assert_valid_matching(pairs, lens) -> None:
    """No port reused, and every matched VOQ is non-empty."""
    ins = [i for i, _ in pairs]
    outs = [j for _, j in pairs]
    assert len(set(ins)) == len(ins), f"duplicate input in {sorted(pairs)}"
    assert len(set(outs)) == len(outs), f"duplicate output in {sorted(pairs)}"
    for i, j in pairs:
        assert lens[i][j] > 0, f"matched empty VOQ({i},{j})"


def assert_maximal_matching(pairs, lens) -> None:
    """No augmentable single edge: every unmatched (i, j) with work has a reason."""
    n = len(lens)
    ins = {i for i, _ in pairs}
    outs = {j for _, j in pairs}
    for i in range(n):
        for j in range(n):
            if lens[i][j] > 0 and i not in ins and j not in outs:
                raise AssertionError(
                    f"matching {sorted(pairs)} misses addable pair ({i},{j})"
                )


def max_matching_size(lens) -> int:
    """Maximum bipartite matching size (augmenting paths) over non-empty VOQs."""
    n = len(lens)
    match_of_output = [-1] * n

    def augment(i, seen):
        for j in range(n):
            if lens[i][j] > 0 and not seen[j]:
                seen[j] = True
                if match_of_output[j] < 0 or augment(match_of_output[j], seen):
                    match_of_output[j] = i
                    return True
        return False

    return sum(1 for i in range(n) if augment(i, [False] * n))


def random_state_arrays(rng: np.random.Generator, n: int):
    """One random scheduler-visible state: lengths 0..10, pointers anywhere."""
    lens = rng.integers(0, 11, size=(n, n))
    last = rng.integers(0, 50, size=(n, n))
    rri = rng.integers(0, n, size=n)
    rro = rng.integers(0, n, size=n)
    return lens, last, rri, rro


# ---------------------------------------------------------------------------
# compiled statistics driver for the arrival processes


@njit(cache=True)
def _drive_traffic(model, key, slots, h, num_chains, load, sfc_fraction, mean_on, mean_off):
    """Generate `slots` slots and accumulate: per-input arrival counts,
    per-(input, dest) counts split by plain/tagged, tagged total, and
    same-destination run-length statistics (a run ends on an idle slot or a
    destination change)."""
    arr_count = np.zeros(h, dtype=np.int64)
    dest_plain = np.zeros((h, h), dtype=np.int64)
    dest_tagged = np.zeros((h, h), dtype=np.int64)
    tagged = 0
    run_len = np.zeros(h, dtype=np.int64)
    run_dest = np.full(h, -1, dtype=np.int64)
    run_sum = 0
    run_cnt = 0
    bb_start = np.zeros(h, dtype=np.int64)
    bb_end = np.zeros(h, dtype=np.int64)
    bb_dest = np.zeros(h, dtype=np.int64)
    bb_route = np.full(h, -1, dtype=np.int64)
    out_dest = np.empty(h, dtype=np.int64)
    out_route = np.empty(h, dtype=np.int64)
    out_flow = np.empty(h, dtype=np.int64)
    for t in range(slots):
        _gen_slot(
            model,
            key,
            t,
            h,
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
        )
        for i in range(h):
            d = out_dest[i]
            if d < 0:
                if run_len[i] > 0:
                    run_sum += run_len[i]
                    run_cnt += 1
                    run_len[i] = 0
                    run_dest[i] = -1
                continue
            arr_count[i] += 1
            if out_route[i] >= 0:
                tagged += 1
                dest_tagged[i, d] += 1
            else:
                dest_plain[i, d] += 1
            if run_dest[i] == d:
                run_len[i] += 1
            else:
                if run_len[i] > 0:
                    run_sum += run_len[i]
                    run_cnt += 1
                run_len[i] = 1
                run_dest[i] = d
    return arr_count, dest_plain, dest_tagged, tagged, run_sum, run_cnt


def drive_traffic_stats(spec, num_tports: int, num_chains: int, key: int, slots: int):
    """Run the slot generator for `slots` slots and return aggregate statistics
    as a dict (arrival counts, destination histograms, tagged share, mean
    same-destination run length)."""
    from poolswitch.traffic import mean_off_slots

    arr_count, dest_plain, dest_tagged, tagged, run_sum, run_cnt = _drive_traffic(
        spec.model_id,
        np.uint64(key),
        slots,
        num_tports,
        num_chains,
        spec.load,
        spec.sfc_fraction,
        spec.burst_mean_on,
        mean_off_slots(spec.load, spec.burst_mean_on),
    )
    total = int(arr_count.sum())
    return {
        "arr_count": arr_count,
        "dest_plain": dest_plain,
        "dest_tagged": dest_tagged,
        "tagged": int(tagged),
        "total": total,
        "rate": total / (slots * num_tports),
        "mean_run": (run_sum / run_cnt) if run_cnt else float("nan"),
        "runs": int(run_cnt),
    }
