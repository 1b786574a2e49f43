"""Availability matrices, algebraic connectivity, and relayed availability."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ChannelParams,
    LinkCondition,
    q_function,
    service_probability,
    snr_distribution,
)
from .geometry import (
    _segments_hit_discs,
    _segments_hit_rects,
    points_to_link_frame,
)
from .prediction import PredictionParams, predict
from .scenario import WorldSnapshot, step
from .sensing import StateEstimate

DEFAULT_BLOCKER_HALF_WIDTH = 0.9


@dataclass(frozen=True)
class AvailabilityMatrix:
    """Symmetric per-link availability matrix with its node-id map.

    First-order entries are probabilities in [0, 1]; second-order matrices
    (two-hop augmented) may exceed 1 and are flagged to prevent reuse as
    probabilities.
    """

    node_ids: tuple[int, ...]
    values: np.ndarray
    second_order: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, float)
        n = len(self.node_ids)
        if vals.shape != (n, n):
            raise ValueError(f"matrix shape {vals.shape} does not match "
                             f"{n} node ids")
        if np.max(np.abs(vals - vals.T), initial=0.0) > 1e-12:
            raise ValueError("availability matrix must be symmetric")
        if np.any(np.abs(np.diag(vals)) > 0):
            raise ValueError("diagonal must be zero")
        if not self.second_order and (np.any(vals < -1e-12)
                                      or np.any(vals > 1 + 1e-12)):
            raise ValueError("first-order entries must lie in [0, 1]")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "node_ids", tuple(self.node_ids))

    def index(self, node_id: int) -> int:
        return self.node_ids.index(node_id)

    def entry(self, i_id: int, j_id: int) -> float:
        return float(self.values[self.index(i_id), self.index(j_id)])

    def to_csv(self, path) -> None:
        header = ",".join(str(i) for i in self.node_ids)
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row in self.values:
                fh.write(",".join(f"{x:.9g}" for x in row) + "\n")


@dataclass(frozen=True)
class ConnectivityReport:
    lambda2: float
    connected: bool


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-12,
                       max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps annihilate off-diagonal pivots until the off-diagonal Frobenius
    norm falls below tol relative to the matrix norm. Returns eigenvalues
    sorted ascending.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-10:
        raise ValueError("matrix must be symmetric")
    if n == 1:
        return np.diag(a).copy()
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    skip_below = 0.01 * tol * scale / n
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= tol * scale:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip_below:
                    continue
                app, aqq = a[p, p], a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, :] = a[:, p]
                a[q, :] = a[:, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
    raise RuntimeError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def connectivity(a: AvailabilityMatrix) -> ConnectivityReport:
    """Algebraic connectivity of the weighted graph: the second-smallest
    eigenvalue of the Laplacian built from the availability weights."""
    w = a.values
    lap = np.diag(w.sum(axis=1)) - w
    eigs = jacobi_eigenvalues(lap)
    scale = max(1.0, float(np.abs(eigs).max()))
    if abs(eigs[0]) > 1e-8 * scale:
        raise RuntimeError(f"Laplacian smallest eigenvalue {eigs[0]:.3e} "
                           "is not numerically zero")
    lam2 = float(eigs[1]) if len(eigs) > 1 else 0.0
    if lam2 < -1e-9:
        raise RuntimeError(f"negative algebraic connectivity {lam2:.3e}")
    lam2 = max(lam2, 0.0)
    return ConnectivityReport(lambda2=lam2, connected=lam2 > 1e-9)


def average_availability(per_epoch: list[AvailabilityMatrix]) -> AvailabilityMatrix:
    """Entrywise mean across the prediction-window epochs."""
    if not per_epoch:
        raise ValueError("need at least one epoch matrix")
    first = per_epoch[0]
    for m in per_epoch[1:]:
        if m.node_ids != first.node_ids:
            raise ValueError("epoch matrices have mismatched node ids")
        if m.second_order != first.second_order:
            raise ValueError("cannot mix first- and second-order matrices")
    mean = np.mean([m.values for m in per_epoch], axis=0)
    mean = 0.5 * (mean + mean.T)
    return AvailabilityMatrix(first.node_ids, mean, first.second_order)


def second_order(a: AvailabilityMatrix) -> AvailabilityMatrix:
    """Two-hop augmented weights: the matrix square plus the matrix itself,
    diagonal zeroed. Entries may exceed 1; this is the relay upper bound."""
    if a.second_order:
        raise ValueError("input is already second-order")
    vals = a.values @ a.values + a.values
    np.fill_diagonal(vals, 0.0)
    vals = 0.5 * (vals + vals.T)
    return AvailabilityMatrix(a.node_ids, vals, second_order=True)


def relayed_pair_availability(a: AvailabilityMatrix, i_id: int, j_id: int,
                              r_id: int) -> float:
    """Availability of the two-hop path i -> r -> j."""
    if len({i_id, j_id, r_id}) != 3:
        raise ValueError("node ids must be distinct")
    return a.entry(i_id, r_id) * a.entry(j_id, r_id)


# --------------------------------------------------------------------------
# LoS-map assembly: per-epoch link SNR mixtures for a predicted world state.

@dataclass(frozen=True)
class LinkMixtures:
    """SNR mixtures of every unordered node pair at one prediction epoch."""

    node_ids: tuple[int, ...]
    epoch: float
    mixtures: dict = field(default_factory=dict)  # (i_idx, j_idx) -> mixture

    def availability(self, gamma_th_db: float) -> AvailabilityMatrix:
        n = len(self.node_ids)
        vals = np.zeros((n, n))
        for (i, j), mix in self.mixtures.items():
            p = service_probability(mix, gamma_th_db)
            vals[i, j] = vals[j, i] = p
        return AvailabilityMatrix(self.node_ids, vals)


def _ncav_blockage_probs(tx_arr: np.ndarray, rx_arr: np.ndarray,
                         means: np.ndarray, sigmas: np.ndarray,
                         half_width: float) -> np.ndarray:
    """Closed-form obstruction probability of each uncertain blocker for one
    link; means (K, 2), sigmas (K,). Vectorized over blockers."""
    d = float(np.hypot(*(rx_arr - tx_arr)))
    u, v = points_to_link_frame(tx_arr[None, :], rx_arr[None, :], means)
    w = half_width
    with np.errstate(divide="ignore"):
        pu = (q_function((-w - u) / sigmas) - q_function((d + w - u) / sigmas))
        pv = (q_function((-w - v) / sigmas) - q_function((w - v) / sigmas))
    point_mass = sigmas == 0.0
    if np.any(point_mass):
        pu = np.where(point_mass, ((u > -w) & (u < d + w)).astype(float), pu)
        pv = np.where(point_mass, ((v > -w) & (v < w)).astype(float), pv)
    return np.clip(pu * pv, 0.0, 1.0)


def link_mixtures_at(world: WorldSnapshot, epoch: float,
                     channel: ChannelParams,
                     prediction: PredictionParams | None = None,
                     ncav_estimates: dict[int, StateEstimate] | None = None,
                     blocker_half_width: float = DEFAULT_BLOCKER_HALF_WIDTH) -> LinkMixtures:
    """Predicted SNR mixtures for every CAV/RSU pair at one window epoch.

    CAV and RSU positions at the epoch are taken from the stepped ground
    truth (connected vehicles know their own planned trajectories); the
    non-connected vehicles enter through their fused-and-predicted beliefs.
    """
    prediction = prediction or PredictionParams()
    ncav_estimates = ncav_estimates or {}
    epoch_world = step(world, epoch) if epoch > 0 else world

    cavs = epoch_world.cavs()
    node_ids = tuple([v.id for v in cavs] + [r.id for r in epoch_world.rsus])
    positions = np.array([[v.state.x, v.state.y] for v in cavs]
                         + [[r.position.x, r.position.y] for r in epoch_world.rsus])
    n = len(node_ids)
    if n < 2:
        raise ValueError("need at least 2 connected nodes (CAVs + RSUs)")

    # deterministic blockers: CAV footprints (column k belongs to cavs[k])
    cav_centers = np.array([[v.state.x, v.state.y] for v in cavs]).reshape(-1, 2)
    cav_halves = np.array([[v.footprint.half_length, v.footprint.half_width]
                           for v in cavs]).reshape(-1, 2)
    cav_headings = np.array([v.footprint.heading for v in cavs])

    smap = epoch_world.static_map
    b_rects = [f for f in smap.buildings if f.kind == "rect"]
    b_discs = [f for f in smap.buildings if f.kind == "disc"]
    b_rect_c = np.array([[f.center.x, f.center.y] for f in b_rects]).reshape(-1, 2)
    b_rect_h = np.array([[f.half_length, f.half_width] for f in b_rects]).reshape(-1, 2)
    b_rect_a = np.array([f.heading for f in b_rects])
    b_disc_c = np.array([[f.center.x, f.center.y] for f in b_discs]).reshape(-1, 2)
    b_disc_r = np.array([f.radius for f in b_discs])
    f_discs = [f for f in smap.foliage if f.kind == "disc"]
    f_rects = [f for f in smap.foliage if f.kind == "rect"]
    f_disc_c = np.array([[f.center.x, f.center.y] for f in f_discs]).reshape(-1, 2)
    f_disc_r = np.array([f.radius for f in f_discs])
    f_rect_c = np.array([[f.center.x, f.center.y] for f in f_rects]).reshape(-1, 2)
    f_rect_h = np.array([[f.half_length, f.half_width] for f in f_rects]).reshape(-1, 2)
    f_rect_a = np.array([f.heading for f in f_rects])

    # predicted beliefs of the non-connected vehicles at this epoch
    ncav_means = []
    ncav_sigmas = []
    for _, est in sorted(ncav_estimates.items()):
        pred = predict(est, epoch, prediction)
        ncav_means.append([pred.mean.x, pred.mean.y])
        ncav_sigmas.append(pred.position_sigma())
    ncav_means = np.array(ncav_means).reshape(-1, 2)
    ncav_sigmas = np.array(ncav_sigmas)

    # batch the deterministic blocker tests over all unordered pairs
    iu, jv = np.triu_indices(n, 1)
    tx = positions[iu]
    rx = positions[jv]
    n_pairs = len(iu)

    building_hit = np.zeros(n_pairs, dtype=bool)
    if len(b_rect_c):
        building_hit |= _segments_hit_rects(tx, rx, b_rect_c, b_rect_h,
                                            b_rect_a).any(axis=1)
    if len(b_disc_c):
        building_hit |= _segments_hit_discs(tx, rx, b_disc_c, b_disc_r).any(axis=1)
    foliage_hit = np.zeros(n_pairs, dtype=bool)
    if len(f_rect_c):
        foliage_hit |= _segments_hit_rects(tx, rx, f_rect_c, f_rect_h,
                                           f_rect_a).any(axis=1)
    if len(f_disc_c):
        foliage_hit |= _segments_hit_discs(tx, rx, f_disc_c, f_disc_r).any(axis=1)
    if len(cav_centers):
        cav_hits = _segments_hit_rects(tx, rx, cav_centers, cav_halves,
                                       cav_headings)
        rows = np.arange(n_pairs)
        endpoint_cav = iu < len(cavs)  # RSU columns do not exist
        cav_hits[rows[endpoint_cav], iu[endpoint_cav]] = False
        endpoint_cav = jv < len(cavs)
        cav_hits[rows[endpoint_cav], jv[endpoint_cav]] = False
        known_counts = cav_hits.sum(axis=1)
    else:
        known_counts = np.zeros(n_pairs, dtype=int)

    mixtures = {}
    for k in range(n_pairs):
        i, j = int(iu[k]), int(jv[k])
        d = float(np.hypot(*(positions[j] - positions[i])))
        d_eff = max(d, 1.0)  # clamp below the model's reference distance
        if building_hit[k]:
            cond, n_known = LinkCondition.NLOS_BUILDING, 0
        elif foliage_hit[k]:
            cond, n_known = LinkCondition.NLOS_FOLIAGE, 0
        elif known_counts[k]:
            cond, n_known = LinkCondition.NLOS_VEHICLE, int(known_counts[k])
        else:
            cond, n_known = LinkCondition.LOS, 0
        if cond in (LinkCondition.NLOS_BUILDING, LinkCondition.NLOS_FOLIAGE):
            probs = ()
        elif len(ncav_means):
            probs = _ncav_blockage_probs(positions[i], positions[j],
                                         ncav_means, ncav_sigmas,
                                         blocker_half_width)
        else:
            probs = ()
        mixtures[(i, j)] = snr_distribution(d_eff, cond, probs, channel,
                                            n_known_blockers=max(n_known, 1))
    return LinkMixtures(node_ids=node_ids, epoch=epoch, mixtures=mixtures)


def adjacency_at(world: WorldSnapshot, epoch: float, gamma_th_db: float,
                 channel: ChannelParams,
                 prediction: PredictionParams | None = None,
                 ncav_estimates: dict[int, StateEstimate] | None = None,
                 blocker_half_width: float = DEFAULT_BLOCKER_HALF_WIDTH) -> AvailabilityMatrix:
    """Service-probability adjacency of the CAV/RSU network at one epoch."""
    lm = link_mixtures_at(world, epoch, channel, prediction, ncav_estimates,
                          blocker_half_width)
    return lm.availability(gamma_th_db)
