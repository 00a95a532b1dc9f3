"""Acceptance gate: one test per release criterion, in order.

Each test prints a single `ACCEPTANCE n: PASS` line (visible with -s or on
the captured-output section of a failure) and asserts the criterion at its
stated tolerance. The comparative criteria (4-6) run the full default fabric
(16 TPorts + 16 FPorts, capacity 500, 5 iterations, 20k warmup + 200k
measured slots), so this module dominates the suite's runtime: expect a few
minutes on one core.
"""

from __future__ import annotations

import time
from statistics import mean

import numpy as np
import pytest

from support import (
    assert_maximal_matching,
    assert_valid_matching,
    drive_traffic_stats,
    max_matching_size,
)
from poolswitch.engine import SimConfig, Simulation
from poolswitch.fabric import FabricState, K_DELIV, K_DROP, K_FILT, K_GEN, PortMap
from poolswitch.harness import SweepPlan, run_sweep, write_csv
from poolswitch.metrics import per_output_delivered
from poolswitch.sched import make_scheduler
from poolswitch.traffic import TrafficSpec

SCHEDULERS = ("islip", "firm", "bsc-firm")
CORPUS_SIZE = 10_000
CORPUS_SEED = 20_240_817


# ---------------------------------------------------------------------------
# shared machinery


def corpus_states():
    """Yield (n, state) for the random-state corpus, reusing one fabric
    template per size so generation stays far below the runtime budget."""
    rng = np.random.default_rng(CORPUS_SEED)
    sizes = (2, 4, 8)
    templates = {n: FabricState(PortMap(n, 0), 16) for n in sizes}
    for k in range(CORPUS_SIZE):
        n = sizes[k % len(sizes)]
        st = templates[n]
        st.q_len[:, :] = rng.integers(0, 11, size=(n, n))
        st.last_sched[:, :] = rng.integers(0, 51, size=(n, n))
        st.rri[:] = rng.integers(0, n, size=n)
        st.rro[:] = rng.integers(0, n, size=n)
        st.tie_rng[0] = rng.integers(1, 2**63, dtype=np.uint64)
        yield n, st


def warm_schedulers():
    st = FabricState(PortMap(2, 0), 4)
    st.q_len[:, :] = 1
    for name in SCHEDULERS:
        make_scheduler(name, 2).schedule(st)


def default_run(model, scheduler, load, seed, sfc=0.5):
    cfg = SimConfig(
        traffic=TrafficSpec(model=model, load=load, sfc_fraction=sfc),
        scheduler=scheduler,
        seed=seed,
    )
    return Simulation(cfg).run()


def grid_metrics(model, loads, seeds):
    """seed-resolved RunMetrics for every (scheduler, load)."""
    return {
        (sched, load, seed): default_run(model, sched, load, seed)
        for sched in SCHEDULERS
        for load in loads
        for seed in seeds
    }


def seed_mean(rows, sched, load, seeds, field):
    return mean(getattr(rows[(sched, load, s)], field) for s in seeds)


# ---------------------------------------------------------------------------
# criteria


def test_criterion_1_matching_validity_on_random_states():
    warm_schedulers()
    schedulers = {name: make_scheduler(name, 5) for name in SCHEDULERS}
    start = time.perf_counter()
    checked = 0
    for _, st in corpus_states():
        lens = st.q_len.copy()
        for sched in schedulers.values():
            matching = sched.schedule(st)
            assert_valid_matching(matching, lens)
            checked += 1
    elapsed = time.perf_counter() - start
    assert checked == CORPUS_SIZE * len(SCHEDULERS)
    assert elapsed < 10.0, f"corpus took {elapsed:.2f}s (budget 10s)"
    print(
        f"ACCEPTANCE 1: PASS — {checked} schedules over {CORPUS_SIZE} random "
        f"states valid in {elapsed:.2f}s"
    )


def test_criterion_2_maximality_against_augmenting_path_oracle():
    warm_schedulers()
    violations = 0
    checked = 0
    for n, st in corpus_states():
        lens = st.q_len.copy()
        optimum = max_matching_size(lens)
        saved = (st.rri.copy(), st.rro.copy(), st.tie_rng.copy(), st.last_sched.copy())
        for name in SCHEDULERS:
            st.rri[:], st.rro[:] = saved[0], saved[1]
            st.tie_rng[:] = saved[2]
            st.last_sched[:, :] = saved[3]
            matching = make_scheduler(name, n).schedule(st)
            assert_valid_matching(matching, lens)
            assert_maximal_matching(matching, lens)
            if 2 * len(matching) < optimum:
                violations += 1
            checked += 1
    assert checked == CORPUS_SIZE * len(SCHEDULERS)
    assert violations == 0
    print(
        f"ACCEPTANCE 2: PASS — 0/{checked} maximality or half-optimum "
        f"violations at iterations=N"
    )


def test_criterion_3_islip_saturation_throughput():
    cfg = SimConfig(
        traffic=TrafficSpec(model="uniform-uniform", load=1.0, sfc_fraction=0.0),
        scheduler="islip",
        num_tports=16,
        num_fports=0,
    )
    start = time.perf_counter()
    sim = Simulation(cfg)
    metrics = sim.run()
    elapsed = time.perf_counter() - start
    per_output = per_output_delivered(sim) / cfg.measure_slots
    assert per_output.shape == (16,)
    assert float(per_output.min()) >= 0.98, f"per-output throughput {per_output}"
    assert elapsed < 30.0, f"saturation run took {elapsed:.2f}s (budget ~30s)"
    print(
        f"ACCEPTANCE 3: PASS — iSLIP saturation per-output throughput "
        f"min {per_output.min():.4f} (overall {metrics.throughput:.4f}) "
        f"in {elapsed:.1f}s"
    )


def test_criterion_4_uniform_uniform_delay_and_lossless_region():
    seeds = (0, 1, 2, 3, 4)
    delay_rows = grid_metrics("uniform-uniform", (0.95,), seeds)
    per_seed = {
        sched: [delay_rows[(sched, 0.95, s)].avg_delay_slots for s in seeds]
        for sched in SCHEDULERS
    }
    for s_idx, seed in enumerate(seeds):
        assert per_seed["bsc-firm"][s_idx] < per_seed["firm"][s_idx], (
            f"seed {seed}: bsc-firm delay not below firm"
        )
        assert per_seed["bsc-firm"][s_idx] < per_seed["islip"][s_idx], (
            f"seed {seed}: bsc-firm delay not below islip"
        )
    red_firm = 1.0 - mean(per_seed["bsc-firm"]) / mean(per_seed["firm"])
    red_islip = 1.0 - mean(per_seed["bsc-firm"]) / mean(per_seed["islip"])
    assert red_firm >= 0.03, f"delay reduction vs firm {red_firm:.1%} < 3%"
    assert red_islip >= 0.03, f"delay reduction vs islip {red_islip:.1%} < 3%"

    lossless_loads = (0.5, 0.6, 0.7, 0.8, 0.9)
    drop_rows = grid_metrics("uniform-uniform", lossless_loads, seeds)
    for (sched, load, seed), m in drop_rows.items():
        assert m.cells_dropped == 0, f"{sched} dropped at load {load} seed {seed}"
    print(
        f"ACCEPTANCE 4: PASS — load 0.95 delay lower on all 5 seeds "
        f"(mean reduction {red_firm:.1%} vs firm, {red_islip:.1%} vs islip); "
        f"zero drops for all schedulers at loads {lossless_loads}"
    )


def test_criterion_5_hotspot_drop_rates_and_loss_onset():
    seeds = (0, 1, 2)
    grid = (0.8, 0.825, 0.85, 0.875, 0.9)
    window = (0.825, 0.85, 0.875, 0.9)
    rows = grid_metrics("uniform-hotspot", grid, seeds)
    drops = {
        (sched, load): seed_mean(rows, sched, load, seeds, "drop_rate")
        for sched in SCHEDULERS
        for load in grid
    }

    dropping_points = [
        load for load in grid if any(drops[(s, load)] > 0 for s in SCHEDULERS)
    ]
    assert dropping_points, "no scheduler ever dropped; criterion cannot bind"
    for load in dropping_points:
        assert drops[("bsc-firm", load)] < drops[("firm", load)], (
            f"load {load}: bsc-firm drop {drops[('bsc-firm', load)]:.2e} "
            f"not below firm {drops[('firm', load)]:.2e}"
        )
        assert drops[("bsc-firm", load)] < drops[("islip", load)], (
            f"load {load}: bsc-firm drop {drops[('bsc-firm', load)]:.2e} "
            f"not below islip {drops[('islip', load)]:.2e}"
        )

    window_mean = {
        sched: mean(drops[(sched, load)] for load in window) for sched in SCHEDULERS
    }
    assert window_mean["firm"] > 0 and window_mean["islip"] > 0
    red_firm = 1.0 - window_mean["bsc-firm"] / window_mean["firm"]
    red_islip = 1.0 - window_mean["bsc-firm"] / window_mean["islip"]
    assert red_firm >= 0.40, f"mean drop reduction vs firm {red_firm:.1%} < 40%"
    assert red_islip >= 0.40, f"mean drop reduction vs islip {red_islip:.1%} < 40%"

    def onset(sched):
        for load in grid:
            if drops[(sched, load)] > 0:
                return load
        return float("inf")

    assert onset("bsc-firm") > onset("firm"), (
        f"onset bsc-firm {onset('bsc-firm')} not later than firm {onset('firm')}"
    )
    assert onset("bsc-firm") > onset("islip"), (
        f"onset bsc-firm {onset('bsc-firm')} not later than islip {onset('islip')}"
    )
    print(
        f"ACCEPTANCE 5: PASS — hotspot drops lower at every dropping load "
        f"{dropping_points}; window mean reduction {red_firm:.1%} vs firm / "
        f"{red_islip:.1%} vs islip; onsets islip={onset('islip')} "
        f"firm={onset('firm')} bsc-firm={onset('bsc-firm')}"
    )


def test_criterion_6_burst_delay_and_drop_rates():
    seeds = (0, 1, 2)
    loads = (0.8, 0.85)
    rows = grid_metrics("burst-burst", loads, seeds)
    details = []
    for load in loads:
        delay = {s: seed_mean(rows, s, load, seeds, "avg_delay_slots") for s in SCHEDULERS}
        drop = {s: seed_mean(rows, s, load, seeds, "drop_rate") for s in SCHEDULERS}
        for baseline in ("firm", "islip"):
            delay_red = 1.0 - delay["bsc-firm"] / delay[baseline]
            assert delay_red >= 0.02, (
                f"load {load}: delay reduction vs {baseline} {delay_red:.1%} < 2%"
            )
            assert drop[baseline] > 0, f"load {load}: {baseline} never dropped"
            drop_red = 1.0 - drop["bsc-firm"] / drop[baseline]
            assert drop_red >= 0.15, (
                f"load {load}: drop reduction vs {baseline} {drop_red:.1%} < 15%"
            )
            details.append(f"{load}/{baseline}: delay -{delay_red:.1%} drop -{drop_red:.1%}")
    print(f"ACCEPTANCE 6: PASS — burst-burst {'; '.join(details)}")


def test_criterion_7_conservation_and_csv_determinism(tmp_path):
    plan = SweepPlan(
        models=("uniform-hotspot",),
        schedulers=SCHEDULERS,
        loads=(0.85, 0.95),
        seeds=(0, 1),
        num_tports=8,
        num_fports=8,
        voq_capacity=60,
        warmup_slots=500,
        measure_slots=5_000,
    )
    for cfg in plan.runs():
        sim = Simulation(cfg)
        sim.run()  # raises on any mid-run conservation breach
        sim.check_conservation()
        c = sim.state.counters
        resident = sim.state.resident_cells() + sim.pool.resident_cells()
        assert int(c[K_FILT]) == 0
        assert int(c[K_GEN]) == int(c[K_DELIV]) + int(c[K_DROP]) + resident

    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(run_sweep(plan), first)
    write_csv(run_sweep(plan), second)
    assert first.read_bytes() == second.read_bytes()
    assert first.stat().st_size > 0
    print(
        f"ACCEPTANCE 7: PASS — conservation exact on {len(plan.runs())} runs; "
        f"repeated sweep byte-identical ({first.stat().st_size} bytes)"
    )


def test_criterion_8_generator_statistics_at_one_million_slots():
    slots = 1_000_000
    h = 16

    spec = TrafficSpec(model="uniform-uniform", load=0.5, sfc_fraction=0.0)
    stats = drive_traffic_stats(spec, h, 0, key=0xACC8, slots=slots)
    rates = stats["arr_count"] / slots
    assert np.all(np.abs(rates - 0.5) <= 0.005), f"per-input rates {rates}"
    dest_freq = stats["dest_plain"].sum(axis=0) / stats["total"]
    assert np.all(np.abs(dest_freq - 1.0 / h) <= 0.005), f"dest freqs {dest_freq}"

    spec = TrafficSpec(model="uniform-hotspot", load=1.0, sfc_fraction=0.0)
    stats = drive_traffic_stats(spec, h, 0, key=0xACC9, slots=slots)
    row = stats["dest_plain"][3]
    direct = int(row.sum())
    assert direct == slots  # load 1.0: one direct arrival per slot from input 3
    hot = 3 + h // 2
    assert abs(row[hot] / direct - 0.5) <= 0.01, f"hot share {row[hot] / direct}"
    for d in range(h):
        if d == hot:
            continue
        assert abs(row[d] / direct - 0.5 / (h - 1)) <= 0.005, (
            f"dest {d} share {row[d] / direct}"
        )

    spec = TrafficSpec(
        model="burst-burst", load=0.6, sfc_fraction=0.0, burst_mean_on=16.0
    )
    stats = drive_traffic_stats(spec, h, 0, key=0xACCA, slots=slots)
    rate = stats["total"] / (h * slots)
    assert abs(rate - 0.6) <= 0.01, f"burst rate {rate}"
    assert abs(stats["mean_run"] - 16.0) <= 0.5, f"mean burst {stats['mean_run']}"

    print(
        "ACCEPTANCE 8: PASS — uniform rate/destination, hotspot split, and "
        "burst run-length statistics inside stated tolerances at 10^6 slots"
    )
