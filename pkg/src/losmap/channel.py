"""Link classification, path loss, blockage probabilities, and SNR statistics.

All powers and losses are in decibel units; SNR distributions are Gaussian
mixtures over dB values, which keeps every probability a Q-function expression.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erfc

from .geometry import (
    Footprint,
    Point2,
    blockage_region,
    segment_intersects_footprint,
    to_link_frame,
)
from .sensing import StateEstimate

_SQRT2 = math.sqrt(2.0)


class LinkCondition(enum.Enum):
    LOS = "LoS"
    NLOS_BUILDING = "NLoSb"
    NLOS_FOLIAGE = "NLoSf"
    NLOS_VEHICLE = "NLoSv"


@dataclass(frozen=True)
class ChannelParams:
    """Link budget and large-scale fading parameters.

    Defaults: 10 dBm transmit power, -85.5 dBm noise, 28 GHz carrier, and a
    per-end beamforming gain of 10*log10(64) dBi for a 64-element array.
    Shadowing/foliage/vehicle-loss spreads are implementer-chosen and
    overridable; the vehicle excess loss grows with the blocker count and
    saturates at vehicle_loss_cap_db.
    """

    ptx_dbm: float = 10.0
    gain_dbi: float = 18.06
    noise_dbm: float = -85.5
    freq_ghz: float = 28.0
    environment: str = "urban"        # "urban" | "highway"
    sigma_sh_db: float = 3.0          # shadowing std
    foliage_loss_db: float = 9.0      # mean excess loss A_f
    sigma_f_db: float = 3.0
    vehicle_loss_base_db: float = 12.0
    vehicle_loss_step_db: float = 6.0
    vehicle_loss_cap_db: float = 30.0
    sigma_v_db: float = 4.5

    def __post_init__(self):
        if self.freq_ghz <= 0:
            raise ValueError("carrier frequency must be > 0")
        if self.environment not in ("urban", "highway"):
            raise ValueError(f"unknown environment {self.environment!r}")
        for name in ("sigma_sh_db", "sigma_f_db", "sigma_v_db"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def gamma0_db(self) -> float:
        """Blockage-free SNR offset: transmit power plus both beamforming
        gains minus noise power."""
        return self.ptx_dbm + 2.0 * self.gain_dbi - self.noise_dbm

    def vehicle_loss_db(self, k_blockers: int) -> float:
        """Mean excess loss for k simultaneous vehicle blockers."""
        if k_blockers < 1:
            raise ValueError("k_blockers must be >= 1")
        loss = self.vehicle_loss_base_db + self.vehicle_loss_step_db * (k_blockers - 1)
        return min(loss, self.vehicle_loss_cap_db)

    def vehicle_sigma_db(self, k_blockers: int) -> float:
        if k_blockers < 1:
            raise ValueError("k_blockers must be >= 1")
        return self.sigma_v_db


@dataclass(frozen=True)
class GaussianMixtureDb:
    """Weighted mixture of normals over SNR in dB."""

    weights: np.ndarray
    means_db: np.ndarray
    variances_db2: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, float))
        m = np.atleast_1d(np.asarray(self.means_db, float))
        v = np.atleast_1d(np.asarray(self.variances_db2, float))
        if not (w.shape == m.shape == v.shape):
            raise ValueError("mixture component arrays must share shape")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        if np.any(v <= 0):
            raise ValueError("variances must be > 0")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means_db", m)
        object.__setattr__(self, "variances_db2", v)

    def pdf(self, gamma_db) -> np.ndarray:
        g = np.asarray(gamma_db, float)[..., None]
        z = (g - self.means_db) ** 2 / (2.0 * self.variances_db2)
        comp = np.exp(-z) / np.sqrt(2.0 * np.pi * self.variances_db2)
        return comp @ self.weights


def q_function(x) -> float | np.ndarray:
    """Standard normal upper-tail probability Q(x)."""
    out = 0.5 * erfc(np.asarray(x, float) / _SQRT2)
    return float(out) if out.ndim == 0 else out


def path_loss_mean(cond: LinkCondition, d: float, p: ChannelParams,
                   k_blockers: int = 1) -> float:
    """Mean path loss in dB at distance d (meters).

    Clear-sky loss depends on the propagation environment; foliage and
    vehicle conditions add their excess loss on top of it. Building
    blockage follows its own exponent.
    """
    if d <= 0:
        raise ValueError("distance must be > 0")
    log_d = math.log10(d)
    log_f = math.log10(p.freq_ghz)
    if p.environment == "highway":
        a_los = 32.4 + 20.0 * log_d + 20.0 * log_f
    else:
        a_los = 38.77 + 16.7 * log_d + 18.2 * log_f
    if cond is LinkCondition.LOS:
        return a_los
    if cond is LinkCondition.NLOS_BUILDING:
        return 36.85 + 30.0 * log_d + 18.9 * log_f
    if cond is LinkCondition.NLOS_FOLIAGE:
        return a_los + p.foliage_loss_db
    return a_los + p.vehicle_loss_db(k_blockers)


def classify_link(tx: Point2, rx: Point2,
                  buildings: Sequence[Footprint] = (),
                  foliage: Sequence[Footprint] = (),
                  vehicles: Sequence[Footprint] = ()) -> LinkCondition:
    """Deterministic link classification with attenuation-order precedence:
    buildings dominate foliage, which dominates known-vehicle blockage."""
    if any(segment_intersects_footprint(tx, rx, f) for f in buildings):
        return LinkCondition.NLOS_BUILDING
    if any(segment_intersects_footprint(tx, rx, f) for f in foliage):
        return LinkCondition.NLOS_FOLIAGE
    if any(segment_intersects_footprint(tx, rx, f) for f in vehicles):
        return LinkCondition.NLOS_VEHICLE
    return LinkCondition.LOS


def blockage_probability_single(blocker: StateEstimate, tx: Point2, rx: Point2,
                                half_width: float = 0.9) -> float:
    """Probability that one uncertain blocker obstructs the link tx->rx.

    The blocker-center region that obstructs the link is a rectangle in the
    link frame; with an isotropic position covariance the rotated Gaussian
    stays axis-aligned there, so the integral factors into two Q-function
    differences.
    """
    sigma = blocker.position_sigma()
    region = blockage_region(tx, rx, half_width)
    u, v = to_link_frame(tx, rx, blocker.mean.position)
    if sigma == 0.0:
        inside = (region.u_min < u < region.u_max
                  and region.v_min < v < region.v_max)
        return 1.0 if inside else 0.0
    pu = q_function((region.u_min - u) / sigma) - q_function((region.u_max - u) / sigma)
    pv = q_function((region.v_min - v) / sigma) - q_function((region.v_max - v) / sigma)
    return float(min(max(pu * pv, 0.0), 1.0))


def blockage_count_distribution(probs: Sequence[float]) -> np.ndarray:
    """Distribution of the number of simultaneous blockers.

    Entry k is the probability that exactly k of the independent blockers
    obstruct the link; equals the sum over all k-subsets of the product of
    member probabilities times non-member complements.
    """
    probs = np.asarray(probs, float)
    if probs.size and (np.any(probs < 0) or np.any(probs > 1)):
        raise ValueError("blockage probabilities must lie in [0, 1]")
    dist = np.zeros(probs.size + 1)
    dist[0] = 1.0
    for p in probs:
        dist[1:] = dist[1:] * (1.0 - p) + dist[:-1] * p
        dist[0] *= 1.0 - p
    return dist


def blockage_probability_multi(probs: Sequence[float], k_b: int) -> float:
    """Probability that exactly k_b out of the given blockers obstruct."""
    n = len(probs)
    if not (1 <= k_b <= n):
        raise ValueError(f"k_b must be in [1, {n}], got {k_b}")
    return float(blockage_count_distribution(probs)[k_b])


def snr_distribution(d: float, cond_static: LinkCondition,
                     ncav_probs: Sequence[float],
                     p: ChannelParams,
                     n_known_blockers: int = 1) -> GaussianMixtureDb:
    """SNR distribution of one link at one epoch.

    Building or foliage blockage fixes a single Gaussian. Otherwise the SNR
    mixes a clear component with one component per possible count of
    simultaneous vehicle blockers; deterministic vehicle blockers in the
    static classification (n_known_blockers of them) each enter the
    combinatorics as a blocker with probability 1.
    """
    if d <= 0:
        raise ValueError("distance must be > 0")
    gamma0 = p.gamma0_db
    if cond_static is LinkCondition.NLOS_BUILDING:
        return GaussianMixtureDb(
            np.array([1.0]),
            np.array([gamma0 - path_loss_mean(cond_static, d, p)]),
            np.array([p.sigma_sh_db**2]))
    if cond_static is LinkCondition.NLOS_FOLIAGE:
        return GaussianMixtureDb(
            np.array([1.0]),
            np.array([gamma0 - path_loss_mean(cond_static, d, p)]),
            np.array([p.sigma_f_db**2 + p.sigma_sh_db**2]))

    probs = [float(q) for q in ncav_probs if q > 0.0]
    n_ones = sum(1 for q in probs if q == 1.0)
    if cond_static is LinkCondition.NLOS_VEHICLE:
        if n_known_blockers < 1:
            raise ValueError("vehicle blockage needs at least one known blocker")
        n_ones += n_known_blockers
    if not probs and not n_ones:
        return GaussianMixtureDb(
            np.array([1.0]),
            np.array([gamma0 - path_loss_mean(LinkCondition.LOS, d, p)]),
            np.array([p.sigma_sh_db**2]))

    # certain blockers only shift the count; run the recursion on the rest
    fractional = [q for q in probs if q < 1.0]
    count_dist = np.concatenate([np.zeros(n_ones),
                                 blockage_count_distribution(fractional)])
    a_los = path_loss_mean(LinkCondition.LOS, d, p)
    weights = []
    means = []
    variances = []
    if count_dist[0] > 0.0:
        weights.append(count_dist[0])
        means.append(gamma0 - a_los)
        variances.append(p.sigma_sh_db**2)
    for k in range(1, len(count_dist)):
        if count_dist[k] <= 0.0:
            continue
        weights.append(count_dist[k])
        means.append(gamma0 - (a_los + p.vehicle_loss_db(k)))
        variances.append(p.vehicle_sigma_db(k)**2 + p.sigma_sh_db**2)
    w = np.asarray(weights)
    return GaussianMixtureDb(w / w.sum(), np.asarray(means), np.asarray(variances))


def service_probability(m: GaussianMixtureDb, gamma_th_db: float) -> float:
    """Probability that the link SNR exceeds the threshold (mixture upper tail)."""
    stds = np.sqrt(m.variances_db2)
    return float(np.dot(m.weights, q_function((gamma_th_db - m.means_db) / stds)))
