"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with `pytest tests/test_acceptance.py -v -s`."""

import itertools
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from losmap.channel import (
    ChannelParams,
    LinkCondition,
    blockage_count_distribution,
    blockage_probability_single,
    snr_distribution,
)
from losmap.experiment import ExperimentSpec, emit, run_experiment
from losmap.geometry import Point2
from losmap.network import AvailabilityMatrix, connectivity
from losmap.relay import (
    AssignmentProblem,
    admm,
    exhaustive_search,
    fcfs,
    hungarian,
)
from losmap.scenario import highway_config, intersection_config
from losmap.sensing import ObjectState, StateEstimate


def _report(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
    assert ok, f"{name} failed: {detail}"


# -------------------------------------------------------------- criterion 1

def test_criterion_1_blockage_closed_form_vs_monte_carlo():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1001)
    n = 100_000
    worst = 0.0
    for _ in range(100):
        tx = Point2(*rng.uniform(-40, 40, 2))
        rx = Point2(*rng.uniform(-40, 40, 2))
        while math.hypot(rx.x - tx.x, rx.y - tx.y) < 0.5:
            rx = Point2(*rng.uniform(-40, 40, 2))
        sigma = rng.uniform(0.3, 5.0)
        w = rng.uniform(0.3, 2.5)
        mean = rng.uniform(-40, 40, 2)
        est = StateEstimate(ObjectState(mean[0], mean[1], 0, 0),
                            np.diag([sigma**2, sigma**2, 0.1, 0.1]))
        got = blockage_probability_single(est, tx, rx, w)

        pts = rng.normal(mean, sigma, size=(n, 2))
        dx, dy = rx.x - tx.x, rx.y - tx.y
        d = math.hypot(dx, dy)
        ux, uy = dx / d, dy / d
        u = (pts[:, 0] - tx.x) * ux + (pts[:, 1] - tx.y) * uy
        v = -(pts[:, 0] - tx.x) * uy + (pts[:, 1] - tx.y) * ux
        hit = float(((u > -w) & (u < d + w) & (v > -w) & (v < w)).mean())
        # binomial standard error at the closed-form value; tiny floor for
        # the degenerate all-or-nothing tails
        se = math.sqrt(got * (1.0 - got) / n)
        tol = max(3 * se, 1e-7)
        worst = max(worst, abs(got - hit) / tol)
        assert abs(got - hit) <= tol

    # worked case: centered blocker, sigma 1, cross extent +/-1
    worked = blockage_probability_single(
        StateEstimate(ObjectState(10, 0, 0, 0), np.diag([1, 1, 0.1, 0.1])),
        Point2(0, 0), Point2(20, 0), 1.0)
    assert worked == pytest.approx(0.6827, abs=0.002)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30
    _report("criterion 1 (blockage vs Monte Carlo)",
            True, f"worst 3SE ratio {worst:.2f}, worked {worked:.4f}, {elapsed:.1f}s")


# -------------------------------------------------------------- criterion 2

def test_criterion_2_multi_blocker_combinatorics():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1002)
    for _ in range(200):
        n_b = int(rng.integers(1, 7))
        probs = rng.uniform(0, 1, n_b)
        got = blockage_count_distribution(probs)
        want = np.zeros(n_b + 1)
        for outcome in itertools.product([0, 1], repeat=n_b):
            pr = 1.0
            for hit, p in zip(outcome, probs):
                pr *= p if hit else 1.0 - p
            want[sum(outcome)] += pr
        assert np.allclose(got, want, atol=1e-12)
        total = got[0] + got[1:].sum()  # P_clear + sum over blocker counts
        assert abs(total - 1.0) <= 1e-12
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    _report("criterion 2 (multi-blocker combinatorics)", True, f"{elapsed:.2f}s")


# -------------------------------------------------------------- criterion 3

def test_criterion_3_mixture_normalization():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1003)
    worst = 0.0
    for _ in range(1000):
        params = ChannelParams(
            sigma_sh_db=rng.uniform(1, 6),
            sigma_v_db=rng.uniform(1, 8),
            vehicle_loss_base_db=rng.uniform(6, 18),
            foliage_loss_db=rng.uniform(3, 15))
        cond = rng.choice(list(LinkCondition))
        probs = rng.uniform(0, 1, int(rng.integers(0, 6)))
        mix = snr_distribution(float(rng.uniform(2, 800)), cond, probs, params,
                               n_known_blockers=int(rng.integers(1, 4)))
        stds = np.sqrt(mix.variances_db2)
        lo = float(np.min(mix.means_db - 10 * stds))
        hi = float(np.max(mix.means_db + 10 * stds))
        val, _ = quad(lambda g: float(mix.pdf(g)), lo, hi, limit=200)
        worst = max(worst, abs(val - 1.0))
        assert abs(val - 1.0) <= 1e-6
    elapsed = time.perf_counter() - t0
    assert elapsed < 60
    _report("criterion 3 (mixture normalization)", True,
            f"worst |integral-1| {worst:.2e}, {elapsed:.1f}s")


# -------------------------------------------------------------- criterion 4

def _random_instance(rng):
    n = int(rng.integers(1, 6))
    while True:
        m = int(rng.integers(1, 7))
        cap = int(rng.integers(1, 7))
        if m * cap <= 6:
            break
    scores = rng.uniform(0, 1, (n, m))
    scores[rng.uniform(size=(n, m)) < 0.2] = 0.0
    links = tuple((100 + l, 200 + l) for l in range(n))
    relays = tuple((300 + r, cap) for r in range(m))
    return AssignmentProblem(links=links, relays=relays, scores=scores)


def test_criterion_4_solver_optimality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1004)
    within_10 = 0
    for _ in range(200):
        p = _random_instance(rng)
        es = exhaustive_search(p)
        hg = hungarian(p)
        fc = fcfs(p)
        ad = admm(p)
        assert hg.objective == es.objective  # exact equality
        assert fc.objective <= hg.objective
        assert ad.objective <= hg.objective
        gap_ok = (es.objective == 0.0
                  or ad.objective >= 0.9 * es.objective - 1e-12)
        within_10 += bool(gap_ok)
    elapsed = time.perf_counter() - t0
    assert within_10 >= 180  # >= 90% of instances
    assert elapsed < 120
    _report("criterion 4 (solver optimality)", True,
            f"ADMM within 10% on {within_10}/200, {elapsed:.1f}s")


# -------------------------------------------------------------- criterion 5

def test_criterion_5_connectivity_math():
    for n in (3, 5, 10, 50):
        w = np.ones((n, n)) - np.eye(n)
        lam = connectivity(AvailabilityMatrix(tuple(range(n)), w)).lambda2
        assert abs(lam - n) <= 1e-8

    w = np.zeros((8, 8))
    for grp in ((0, 1, 2, 3), (4, 5, 6, 7)):
        for i, j in itertools.combinations(grp, 2):
            w[i, j] = w[j, i] = 0.7
    assert connectivity(AvailabilityMatrix(tuple(range(8)), w)).lambda2 == 0.0

    rng = np.random.default_rng(1005)
    for _ in range(100):
        w = np.triu(rng.uniform(0, 0.5, (10, 10)), 1)
        w = w + w.T
        base = connectivity(AvailabilityMatrix(tuple(range(10)), w)).lambda2
        i, j = 0, 0
        while i == j:
            i, j = rng.integers(0, 10, 2)
        w2 = w.copy()
        w2[i, j] = w2[j, i] = w2[i, j] + rng.uniform(0.05, 0.5)
        bumped = connectivity(AvailabilityMatrix(tuple(range(10)), w2)).lambda2
        assert bumped >= base - 1e-10
    _report("criterion 5 (connectivity math)", True)


# -------------------------------------------------------------- criterion 6

def test_criterion_6_bound_sandwich():
    spec = ExperimentSpec(
        scenario=intersection_config(density_veh_km=50.0, cav_fraction=0.6,
                                     road_half_length=120.0, seed=77),
        gamma_th_db=(5.0, 10.0, 15.0),
        solvers=("lower_bound", "upper_bound", "HG", "FCFS", "ADMM"),
        repetitions=5)
    rows = run_experiment(spec)
    groups = {}
    for r in rows:
        groups.setdefault((r.gamma_th_db, r.seed), {})[r.solver] = r.lambda2
    checked = 0
    for by_solver in groups.values():
        for solver in ("HG", "FCFS", "ADMM"):
            assert by_solver["lower_bound"] <= by_solver[solver] + 1e-8
            assert by_solver[solver] <= by_solver["upper_bound"] + 1e-8
            checked += 1
    _report("criterion 6 (bound sandwich)", True, f"{checked} comparisons")


# -------------------------------------------------------------- criterion 7

def test_criterion_7_density_trend():
    t0 = time.perf_counter()
    spec = ExperimentSpec(
        scenario=highway_config(cav_fraction=1.0, road_half_length=700.0,
                                seed=2024),
        channel=ChannelParams(environment="highway"),
        gamma_th_db=(10.0,),
        densities=(30.0, 50.0, 70.0),
        solvers=("lower_bound",),
        repetitions=50)
    rows = run_experiment(spec)
    means = [float(np.mean([r.lambda2 for r in rows if r.density == d]))
             for d in (30.0, 50.0, 70.0)]
    elapsed = time.perf_counter() - t0
    ok = means[0] > means[1] > means[2]
    assert elapsed < 300
    _report("criterion 7 (density degrades first-order connectivity)", ok,
            f"means {[round(m, 4) for m in means]}, {elapsed:.0f}s")


# -------------------------------------------------------------- criterion 8

def test_criterion_8_gamma_sweep_and_solver_ordering():
    t0 = time.perf_counter()
    sweep = (0.0, 5.0, 10.0, 15.0, 20.0)
    spec = ExperimentSpec(
        scenario=intersection_config(density_veh_km=60.0, cav_fraction=0.5,
                                     road_half_length=100.0, relay_capacity=1,
                                     aoi_radius=50.0, seed=11),
        gamma_th_db=sweep,
        solvers=("lower_bound", "upper_bound", "ES", "HG", "FCFS", "ADMM"),
        repetitions=50)
    rows = run_experiment(spec)
    elapsed = time.perf_counter() - t0

    means = {}
    for solver in spec.solvers:
        means[solver] = [float(np.mean([r.lambda2 for r in rows
                                        if r.solver == solver
                                        and r.gamma_th_db == g]))
                         for g in sweep]
        assert all(a >= b - 1e-9 for a, b in zip(means[solver],
                                                 means[solver][1:])), solver
    for k, g in enumerate(sweep):
        for cen in ("ES", "HG"):
            for dist in ("FCFS", "ADMM"):
                assert means[cen][k] >= means[dist][k] - 1e-9, (g, cen, dist)
    assert elapsed < 600
    _report("criterion 8 (threshold sweep and solver ordering)", True,
            f"ES {['%.3f' % m for m in means['ES']]}, {elapsed:.0f}s")


# -------------------------------------------------------------- criterion 9

def test_criterion_9_byte_identical_output(tmp_path):
    spec = ExperimentSpec(
        scenario=intersection_config(density_veh_km=45.0, cav_fraction=0.6,
                                     road_half_length=110.0, seed=5),
        gamma_th_db=(5.0, 15.0),
        solvers=("lower_bound", "upper_bound", "HG", "FCFS", "ADMM"),
        repetitions=3)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    emit(run_experiment(spec), "csv", p1)
    emit(run_experiment(spec, threads=2), "csv", p2)
    ok = p1.read_bytes() == p2.read_bytes()
    _report("criterion 9 (byte-identical reruns)", ok,
            f"{len(p1.read_bytes())} bytes")


# ------------------------------------------------------------- criterion 10

def test_criterion_10_complexity_scaling():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1010)
    ratios = []
    for n in (2, 3, 4, 5, 6):
        es_time = 0.0
        hg_time = 0.0
        for _ in range(30):
            scores = rng.uniform(0, 1, (n, 6))
            links = tuple((100 + l, 200 + l) for l in range(n))
            relays = tuple((300 + r, 1) for r in range(6))
            p = AssignmentProblem(links=links, relays=relays, scores=scores)
            t = time.perf_counter()
            es = exhaustive_search(p)
            es_time += time.perf_counter() - t
            t = time.perf_counter()
            hg = hungarian(p)
            hg_time += time.perf_counter() - t
            assert hg.objective == es.objective
        ratios.append(es_time / hg_time)
    elapsed = time.perf_counter() - t0
    ok = all(a < b for a, b in zip(ratios, ratios[1:]))
    assert elapsed < 120
    _report("criterion 10 (exhaustive-vs-Hungarian scaling)", ok,
            f"time ratios {['%.1f' % r for r in ratios]}, {elapsed:.0f}s")
