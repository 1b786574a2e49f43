import itertools

import numpy as np
import pytest

from losmap.network import AvailabilityMatrix
from losmap.relay import (
    AdmmParams,
    Assignment,
    AssignmentProblem,
    SolverStats,
    admm,
    build_assignment_problem,
    build_relayed_adjacency,
    exhaustive_search,
    fcfs,
    hungarian,
    protocol_message_count,
)


def _problem(scores, caps, links=None):
    scores = np.asarray(scores, float)
    n, m = scores.shape
    links = links or tuple((100 + l, 200 + l) for l in range(n))
    relays = tuple((300 + r, caps[r]) for r in range(m))
    return AssignmentProblem(links=links, relays=relays, scores=scores)


def _random_problem(rng):
    n = int(rng.integers(1, 6))
    m = int(rng.integers(1, 7))
    cap = int(rng.integers(1, 7))
    while m * cap > 6:
        cap = int(rng.integers(1, 7))
    scores = rng.uniform(0, 1, (n, m))
    scores[rng.uniform(size=(n, m)) < 0.15] = 0.0   # some useless relays
    return _problem(scores, [cap] * m)


def _feasible(problem, assignment):
    x = assignment.x
    assert set(np.unique(x)) <= {0, 1}
    assert np.all(x.sum(axis=1) <= 1)
    assert np.all(x.sum(axis=0) <= problem.capacities)
    want = sum(problem.scores[l, r] for l, r in zip(*np.nonzero(x)))
    assert assignment.objective == pytest.approx(want, abs=1e-12)


# ------------------------------------------------------- exhaustive search

def test_es_single_link():
    p = _problem([[0.9]], [1])
    a = exhaustive_search(p)
    assert a.objective == pytest.approx(0.9)
    assert a.assigned_relay(0) == 0


def test_es_capacity_binding():
    p = _problem([[0.9], [0.8]], [1])
    a = exhaustive_search(p)
    assert a.objective == pytest.approx(0.9)
    assert a.assigned_relay(0) == 0
    assert a.assigned_relay(1) is None


def test_es_beats_random_feasible_samples():
    rng = np.random.default_rng(1)
    for _ in range(10):
        n, m, cap = 4, 3, 2
        p = _problem(rng.uniform(0, 1, (n, m)), [cap] * m)
        best = exhaustive_search(p)
        _feasible(p, best)
        for _ in range(1000):
            remaining = p.capacities.copy()
            obj = 0.0
            for l in rng.permutation(n):
                r = int(rng.integers(-1, m))
                if r >= 0 and remaining[r] > 0:
                    remaining[r] -= 1
                    obj += p.scores[l, r]
            assert best.objective >= obj - 1e-12


def test_es_cap_enforced():
    p = _problem(np.full((8, 6), 0.5), [1] * 6)
    with pytest.raises(ValueError, match="cap"):
        exhaustive_search(p, cap=1000)


def test_es_deterministic_tie_break():
    p = _problem([[0.5, 0.5]], [1, 1])
    a = exhaustive_search(p)
    # tied objectives resolve to the lexicographically smallest flattened
    # selection matrix: (0,1) < (1,0)
    assert a.assigned_relay(0) == 1
    assert exhaustive_search(p).assigned_relay(0) == 1


# -------------------------------------------------------------- hungarian

def test_hungarian_diagonal():
    p = _problem(0.9 * np.eye(3), [1, 1, 1])
    a = hungarian(p)
    assert a.objective == pytest.approx(2.7)
    assert [a.assigned_relay(l) for l in range(3)] == [0, 1, 2]


def test_hungarian_greedy_trap():
    # greedy picks (link0, relay0) for 0.9 + 0.1; the optimum swaps
    p = _problem([[0.9, 0.8], [0.85, 0.1]], [1, 1])
    enumerated = []
    for c0, c1 in itertools.product([-1, 0, 1], repeat=2):
        if c0 == c1 and c0 != -1:
            continue
        obj = (p.scores[0, c0] if c0 >= 0 else 0.0) + \
              (p.scores[1, c1] if c1 >= 0 else 0.0)
        enumerated.append(obj)
    assert max(enumerated) == pytest.approx(1.65)
    a = hungarian(p)
    assert a.objective == pytest.approx(1.65)
    assert a.assigned_relay(0) == 1 and a.assigned_relay(1) == 0


def test_hungarian_matches_exhaustive_on_random_instances():
    rng = np.random.default_rng(2)
    for _ in range(100):
        p = _random_problem(rng)
        es = exhaustive_search(p)
        hg = hungarian(p)
        _feasible(p, hg)
        assert hg.objective == pytest.approx(es.objective, abs=1e-12)


def test_hungarian_capacity_expansion():
    # one relay with capacity 2 serves both links
    p = _problem([[0.9], [0.8]], [2])
    a = hungarian(p)
    assert a.objective == pytest.approx(1.7)


# ------------------------------------------------------------------- fcfs

def test_fcfs_no_contention_all_argmax():
    rng = np.random.default_rng(3)
    p = _problem(rng.uniform(0.1, 1, (4, 3)), [4, 4, 4])
    a = fcfs(p)
    for l in range(4):
        assert a.assigned_relay(l) == int(np.argmax(p.scores[l]))


def test_fcfs_greedy_trap_hand_trace():
    p = _problem([[0.9, 0.8], [0.85, 0.1]], [1, 1])
    a = fcfs(p, order=(0, 1))
    # link0 takes relay0 (0.9); link1 is refused relay0, falls back to 0.1
    assert a.objective == pytest.approx(1.0)
    assert a.stats.messages_fr1 == 2 + 4  # one grant, one retry after NACK
    assert a.objective <= hungarian(p).objective


def test_fcfs_never_beats_hungarian():
    rng = np.random.default_rng(4)
    for _ in range(100):
        p = _random_problem(rng)
        n = len(p.links)
        order = tuple(int(v) for v in rng.permutation(n))
        a = fcfs(p, order=order)
        _feasible(p, a)
        assert a.objective <= hungarian(p).objective + 1e-12


def test_fcfs_rejects_bad_order():
    p = _problem([[0.5]], [1])
    with pytest.raises(ValueError):
        fcfs(p, order=(0, 0))


# ------------------------------------------------------------------- admm

def test_admm_single_link_converges():
    p = _problem([[0.9]], [1])
    a = admm(p, AdmmParams(rho=1.0))
    assert a.objective == pytest.approx(0.9)
    assert a.stats.converged
    assert a.stats.messages_fr1 == a.stats.iterations * (1 * 1 + 1 + 1)


def test_admm_symmetric_instance_serves_both():
    p = _problem([[0.6, 0.6], [0.6, 0.6]], [1, 1])
    a = admm(p)
    _feasible(p, a)
    assert a.x.sum() == 2
    assert a.objective == pytest.approx(1.2)


def test_admm_near_optimal_and_feasible():
    rng = np.random.default_rng(5)
    gaps = []
    for _ in range(100)[:100]:
        p = _random_problem(rng)
        es = exhaustive_search(p)
        a = admm(p)
        _feasible(p, a)
        assert a.objective <= es.objective + 1e-12
        gap = 0.0 if es.objective == 0 else 1 - a.objective / es.objective
        gaps.append(gap)
    assert np.mean(np.array(gaps) <= 0.10) >= 0.9


def test_admm_deterministic():
    rng = np.random.default_rng(6)
    p = _random_problem(rng)
    a1 = admm(p)
    a2 = admm(p)
    assert np.array_equal(a1.x, a2.x)
    assert a1.objective == a2.objective


# ------------------------------------------------- relayed adjacency build

def _avail(values, ids=None):
    values = np.asarray(values, float)
    ids = ids or tuple(range(len(values)))
    return AvailabilityMatrix(ids, values)


def test_build_relayed_empty_assignment_is_identity():
    a = _avail([[0, 0.5, 0.2], [0.5, 0, 0.4], [0.2, 0.4, 0]])
    p = build_assignment_problem(a, links=((0, 1),), capacity=2)
    empty = Assignment(x=np.zeros((1, 3), dtype=int), objective=0.0)
    ar = build_relayed_adjacency(a, empty, p)
    assert np.allclose(ar.values, a.values)
    assert ar.second_order


def test_build_relayed_adds_hop_product():
    a = _avail([[0, 0.1, 0.8], [0.1, 0, 0.5], [0.8, 0.5, 0]])
    p = build_assignment_problem(a, links=((0, 1),), capacity=2)
    picked = hungarian(p)
    assert picked.assigned_relay(0) == 2
    ar = build_relayed_adjacency(a, picked, p)
    assert ar.entry(0, 1) == pytest.approx(0.1 + 0.8 * 0.5)
    # untouched links stay put
    assert ar.entry(0, 2) == pytest.approx(0.8)


def test_relayed_adjacency_sandwich():
    from losmap.network import connectivity, second_order

    rng = np.random.default_rng(7)
    for _ in range(20):
        n = 6
        w = rng.uniform(0, 1, (n, n))
        w = np.triu(w, 1)
        w = w + w.T
        a = _avail(w)
        links = ((0, 1), (2, 3))
        p = build_assignment_problem(a, links=links, capacity=2)
        picked = hungarian(p)
        ar = build_relayed_adjacency(a, picked, p)
        a2 = second_order(a)
        assert np.all(ar.values >= a.values - 1e-12)
        assert np.all(ar.values <= a2.values + 1e-12)
        lower = connectivity(a).lambda2
        mid = connectivity(ar).lambda2
        upper = connectivity(a2).lambda2
        assert lower <= mid + 1e-8
        assert mid <= upper + 1e-8


def test_endpoint_cannot_relay_own_link():
    a = _avail([[0, 0.5, 0.9], [0.5, 0, 0.9], [0.9, 0.9, 0]])
    p = build_assignment_problem(a, links=((0, 1),), capacity=2)
    assert p.scores[0, 0] == 0.0 and p.scores[0, 1] == 0.0
    assert p.scores[0, 2] == pytest.approx(0.81)
    for solver in (exhaustive_search, hungarian, fcfs, admm):
        got = solver(p)
        assert got.assigned_relay(0) == 2


# -------------------------------------------------------- message counting

def test_protocol_message_counts():
    zero = SolverStats()
    assert protocol_message_count("centralized", 5, 0, zero, 0) == 5
    # one granted request: sensing + request + ACK + two setup messages
    assert protocol_message_count("centralized", 5, 1, zero, 1) == 5 + 4
    fcfs_stats = SolverStats(messages_fr1=4)
    assert protocol_message_count("distributed", 5, 1, fcfs_stats, 1) == 9
    with pytest.raises(ValueError):
        protocol_message_count("mesh", 1, 1, zero, 1)


def test_assignment_csv(tmp_path):
    a = _avail([[0, 0.5, 0.9], [0.5, 0, 0.7], [0.9, 0.7, 0]])
    p = build_assignment_problem(a, links=((0, 1),), capacity=2)
    picked = hungarian(p)
    out = tmp_path / "assignment.csv"
    picked.to_csv(out, p)
    lines = out.read_text().splitlines()
    assert lines[0] == "link_index,rv_id,voi_id,relay_id,score"
    assert lines[1].startswith("0,0,1,2,")


def test_problem_validation():
    with pytest.raises(ValueError):
        _problem([[1.5]], [1])
    with pytest.raises(ValueError):
        AssignmentProblem(links=((1, 2),), relays=((1, 1),),
                          scores=np.array([[0.5]]))  # endpoint with score
