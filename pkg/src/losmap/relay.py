"""Capacity-constrained relay assignment: problem type and four solvers."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .network import AvailabilityMatrix

ES_DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class AssignmentProblem:
    """Links to serve, relays with capacities, and relayed-availability scores.

    scores[l, r] is the two-hop availability of serving link l through relay
    r; entries are zeroed where a relay coincides with a link endpoint, and
    solvers never assign zero-score pairs.
    """

    links: tuple[tuple[int, int], ...]       # (rv_id, voi_id)
    relays: tuple[tuple[int, int], ...]      # (relay_id, capacity)
    scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, float)
        if s.shape != (len(self.links), len(self.relays)):
            raise ValueError("scores shape must be (n_links, n_relays)")
        if s.size and (np.any(s < -1e-12) or np.any(s > 1 + 1e-12)):
            raise ValueError("scores must lie in [0, 1]")
        for (rid, cap) in self.relays:
            if cap < 0:
                raise ValueError(f"relay {rid} has negative capacity")
        for l, (i, j) in enumerate(self.links):
            for r, (rid, _) in enumerate(self.relays):
                if rid in (i, j) and s[l, r] != 0.0:
                    raise ValueError(
                        f"relay {rid} is an endpoint of link {l}; its score must be 0")
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "relays", tuple(self.relays))

    @property
    def capacities(self) -> np.ndarray:
        return np.array([cap for _, cap in self.relays], dtype=int)


@dataclass(frozen=True)
class SolverStats:
    iterations: int = 0
    messages_fr1: int = 0
    converged: bool = True


@dataclass(frozen=True)
class Assignment:
    """Binary link-to-relay selection with its objective value."""

    x: np.ndarray
    objective: float
    stats: SolverStats = field(default_factory=SolverStats)

    def assigned_relay(self, link_index: int) -> int | None:
        row = np.flatnonzero(self.x[link_index])
        return int(row[0]) if len(row) else None

    def to_csv(self, path, problem: AssignmentProblem) -> None:
        with open(path, "w") as fh:
            fh.write("link_index,rv_id,voi_id,relay_id,score\n")
            for l, (i, j) in enumerate(problem.links):
                r = self.assigned_relay(l)
                rid = problem.relays[r][0] if r is not None else ""
                score = problem.scores[l, r] if r is not None else 0.0
                fh.write(f"{l},{i},{j},{rid},{score:.9g}\n")


@dataclass(frozen=True)
class AdmmParams:
    rho: float = 1.0
    max_iterations: int = 100
    tol: float = 1e-6

    def __post_init__(self):
        if self.rho <= 0 or self.max_iterations < 1 or self.tol <= 0:
            raise ValueError("invalid distributed-solver parameters")


def _objective(problem: AssignmentProblem, choice: np.ndarray) -> float:
    total = 0.0
    for l, r in enumerate(choice):
        if r >= 0:
            total += problem.scores[l, r]
    return total


def _finish(problem: AssignmentProblem, choice: np.ndarray,
            stats: SolverStats) -> Assignment:
    n, m = problem.scores.shape
    x = np.zeros((n, m), dtype=int)
    for l, r in enumerate(choice):
        if r >= 0:
            x[l, r] = 1
    if np.any(x.sum(axis=1) > 1):
        raise AssertionError("solver produced multiply-assigned link")
    if np.any(x.sum(axis=0) > problem.capacities):
        raise AssertionError("solver exceeded relay capacity")
    return Assignment(x=x, objective=_objective(problem, choice), stats=stats)


def exhaustive_search(problem: AssignmentProblem,
                      cap: int = ES_DEFAULT_CAP) -> Assignment:
    """Globally optimal assignment by enumerating every arrangement.

    Candidate relays per link are those with positive score; the number of
    enumerated arrangements (product of per-link option counts) must stay
    under `cap`. Ties resolve to the lexicographically smallest selection
    matrix, so the result is deterministic.
    """
    n, m = problem.scores.shape
    options = [[-1] + [r for r in range(m) if problem.scores[l, r] > 0.0]
               for l in range(n)]
    size = 1
    for opts in options:
        size *= len(opts)
        if size > cap:
            raise ValueError(f"search space exceeds cap ({size} > {cap})")
    caps = problem.capacities
    best_choice = None
    best_obj = -1.0
    best_key = None
    examined = 0
    for combo in itertools.product(*options):
        examined += 1
        used = np.zeros(m, dtype=int)
        obj = 0.0
        feasible = True
        for l, r in enumerate(combo):
            if r >= 0:
                used[r] += 1
                if used[r] > caps[r]:
                    feasible = False
                    break
                obj += problem.scores[l, r]
        if not feasible:
            continue
        # row-major flattened selection matrix as the tie-break key
        key = tuple(int(r == c) for r in combo for c in range(m))
        if obj > best_obj or (obj == best_obj and key < best_key):
            best_obj = obj
            best_choice = np.array(combo, dtype=int)
            best_key = key
    return _finish(problem, best_choice,
                   SolverStats(iterations=examined, messages_fr1=0))


def hungarian(problem: AssignmentProblem) -> Assignment:
    """Optimal assignment via the rectangular Hungarian method.

    Each relay is expanded into one identical column per capacity unit and
    the cost matrix is padded with one zero-score dummy column per link (the
    unassigned option); costs are negated scores.
    """
    n, m = problem.scores.shape
    slots = [r for r, (_, cap) in enumerate(problem.relays) for _ in range(cap)]
    slot_scores = problem.scores[:, slots] if slots else np.zeros((n, 0))
    padded = np.hstack([slot_scores, np.zeros((n, n))])
    if n == 0:
        return _finish(problem, np.empty(0, dtype=int), SolverStats())
    rows, cols = linear_sum_assignment(-padded)
    choice = -np.ones(n, dtype=int)
    for l, c in zip(rows, cols):
        if c < len(slots) and slot_scores[l, c] > 0.0:
            choice[l] = slots[c]
    return _finish(problem, choice, SolverStats())


def fcfs(problem: AssignmentProblem,
         order: tuple[int, ...] | None = None) -> Assignment:
    """Sequential distributed selection: each link, in the given order,
    requests its best-scoring relay and retries down its preference list on
    negative replies. Every request and every reply counts one message."""
    n, m = problem.scores.shape
    if order is None:
        order = tuple(range(n))
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the link indices")
    remaining = problem.capacities.copy()
    choice = -np.ones(n, dtype=int)
    messages = 0
    for l in order:
        prefs = sorted((r for r in range(m) if problem.scores[l, r] > 0.0),
                       key=lambda r: (-problem.scores[l, r], r))
        for r in prefs:
            messages += 1          # reservation request
            messages += 1          # ACK or NACK
            if remaining[r] > 0:
                remaining[r] -= 1
                choice[l] = r
                break
    return _finish(problem, choice, SolverStats(iterations=n,
                                                messages_fr1=messages))


def _coordinate_min_hinge(x_l: np.ndarray, c_l: np.ndarray, rho: float,
                          cap_kink: np.ndarray, row_target: float,
                          max_pass: int = 50) -> np.ndarray:
    """Exact cyclic coordinate descent for one link's relaxed row.

    Minimizes  c.x + rho/2 sum_r max(0, x_r - cap_kink_r)^2
             + rho/2 max(0, sum(x) - row_target)^2   over the unit box.
    The per-coordinate derivative is piecewise linear and nondecreasing, so
    each coordinate has a closed-form minimizer.
    """
    m = len(x_l)
    for _ in range(max_pass):
        shift = 0.0
        for r in range(m):
            rest = float(x_l.sum() - x_l[r])
            a = float(cap_kink[r])
            b = row_target - rest
            c = float(c_l[r])
            if c >= 0.0:
                t = 0.0
            else:
                lo, hi = (a, b) if a <= b else (b, a)
                t1 = lo - c / rho
                if t1 <= hi:
                    t = t1
                else:
                    t = (a + b) / 2.0 - c / (2.0 * rho)
            t = min(max(t, 0.0), 1.0)
            shift = max(shift, abs(t - x_l[r]))
            x_l[r] = t
        if shift < 1e-12:
            break
    return x_l


def _round_and_repair(x: np.ndarray, problem: AssignmentProblem) -> np.ndarray:
    """Threshold rounding with capacity repair: each link takes its largest
    relaxed entry if it reaches 0.5; over-capacity relays then revoke their
    lowest-score grants."""
    n, m = x.shape
    caps = problem.capacities
    choice = -np.ones(n, dtype=int)
    for l in range(n):
        r = int(np.argmax(x[l])) if m else -1
        if m and x[l, r] >= 0.5 and problem.scores[l, r] > 0.0:
            choice[l] = r
    for r in range(m):
        holders = [l for l in range(n) if choice[l] == r]
        while len(holders) > caps[r]:
            worst = min(holders, key=lambda l: (problem.scores[l, r], -l))
            holders.remove(worst)
            choice[worst] = -1
    return choice


def admm(problem: AssignmentProblem, params: AdmmParams | None = None) -> Assignment:
    """Distributed selection by multiplier ascent on the relaxed problem.

    Each link row is relaxed to [0,1] and minimized in turn against the
    augmented Lagrangian; capacity and single-relay constraints enter as
    one-sided (inequality) penalty terms whose multipliers stay nonnegative.
    The relaxed iterate is rounded and capacity-repaired at the end. The
    per-iteration exchange cost is one message per matrix entry plus one per
    link plus one broadcast.
    """
    params = params or AdmmParams()
    n, m = problem.scores.shape
    if n == 0 or m == 0:
        return _finish(problem, -np.ones(n, dtype=int), SolverStats())
    c = -problem.scores
    caps = problem.capacities.astype(float)
    x = np.zeros((n, m))
    v_cap = np.zeros(m)
    v_row = np.zeros(n)
    rho = params.rho
    converged = False
    iterations = params.max_iterations
    for k in range(params.max_iterations):
        x_prev = x.copy()
        for l in range(n):
            others = x.sum(axis=0) - x[l]
            cap_kink = caps - others - v_cap / rho
            row_target = 1.0 - v_row[l] / rho
            x[l] = _coordinate_min_hinge(x[l].copy(), c[l], rho,
                                         cap_kink, row_target)
        cap_resid = x.sum(axis=0) - caps
        row_resid = x.sum(axis=1) - 1.0
        v_cap = np.maximum(0.0, v_cap + rho * cap_resid)
        v_row = np.maximum(0.0, v_row + rho * row_resid)
        primal_violation = max(float(np.maximum(cap_resid, 0.0).max()),
                               float(np.maximum(row_resid, 0.0).max()))
        if (np.abs(x - x_prev).max() < params.tol
                and primal_violation < max(params.tol, 1e-9)):
            iterations = k + 1
            converged = True
            break
    choice = _round_and_repair(x, problem)
    messages = iterations * (n * m + n + 1)
    return _finish(problem, choice, SolverStats(iterations=iterations,
                                                messages_fr1=messages,
                                                converged=converged))


def build_assignment_problem(a_bar: AvailabilityMatrix,
                             links: tuple[tuple[int, int], ...],
                             relay_ids: tuple[int, ...] | None = None,
                             capacity: int = 2) -> AssignmentProblem:
    """Assemble the selection problem from an availability matrix.

    By default every node may relay for any link it is not an endpoint of,
    with uniform capacity; endpoint entries carry score zero.
    """
    if relay_ids is None:
        relay_ids = a_bar.node_ids
    scores = np.zeros((len(links), len(relay_ids)))
    for l, (i, j) in enumerate(links):
        for r, rid in enumerate(relay_ids):
            if rid in (i, j):
                continue
            scores[l, r] = relayed_score(a_bar, i, j, rid)
    relays = tuple((rid, capacity) for rid in relay_ids)
    return AssignmentProblem(links=tuple(links), relays=relays, scores=scores)


def relayed_score(a_bar: AvailabilityMatrix, i_id: int, j_id: int,
                  r_id: int) -> float:
    return a_bar.entry(i_id, r_id) * a_bar.entry(j_id, r_id)


def build_relayed_adjacency(a_bar: AvailabilityMatrix, assignment: Assignment,
                            problem: AssignmentProblem) -> AvailabilityMatrix:
    """Availability matrix after relaying: each served link gains the product
    of its two hop availabilities on top of the direct entry. The result is
    flagged second-order and sits entrywise between the direct matrix and the
    unconstrained two-hop bound."""
    vals = a_bar.values.copy()
    for l, (i, j) in enumerate(problem.links):
        r = assignment.assigned_relay(l)
        if r is None:
            continue
        rid = problem.relays[r][0]
        ii, jj = a_bar.index(i), a_bar.index(j)
        gain = relayed_score(a_bar, i, j, rid)
        vals[ii, jj] += gain
        vals[jj, ii] += gain
    return AvailabilityMatrix(a_bar.node_ids, vals, second_order=True)


def protocol_message_count(scheme: str, n_cavs: int, n_requests: int,
                           stats: SolverStats, n_granted: int = 0) -> int:
    """Control-channel message count for one selection round.

    Centralized: every CAV uploads its sensing list, every request costs a
    request plus a reply, and every grant adds two link-setup messages.
    Distributed: every CAV broadcasts its sensing list and the solver's own
    exchange count (reservation round-trips or iterate sharing) is added.
    """
    if min(n_cavs, n_requests, n_granted) < 0:
        raise ValueError("counts must be nonnegative")
    if scheme == "centralized":
        return n_cavs + 2 * n_requests + 2 * n_granted
    if scheme == "distributed":
        return n_cavs + stats.messages_fr1
    raise ValueError(f"unknown scheme {scheme!r}")
