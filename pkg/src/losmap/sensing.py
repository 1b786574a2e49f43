"""Per-CAV object detection lists and cooperative fusion of state estimates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Point2

# default measurement variance on each velocity axis, m^2/s^2
DEFAULT_VELOCITY_SIGMA = 0.5


@dataclass(frozen=True)
class ObjectState:
    """Planar kinematic state: position (m) and velocity (m/s)."""

    x: float
    y: float
    vx: float
    vy: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_vector())):
            raise ValueError("non-finite object state")

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.vx, self.vy], dtype=float)

    @classmethod
    def from_vector(cls, s: np.ndarray) -> "ObjectState":
        return cls(float(s[0]), float(s[1]), float(s[2]), float(s[3]))

    @property
    def position(self) -> Point2:
        return Point2(self.x, self.y)


@dataclass(frozen=True)
class StateEstimate:
    """Gaussian belief over an ObjectState: mean plus 4x4 covariance."""

    mean: ObjectState
    covariance: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (4, 4):
            raise ValueError(f"covariance must be 4x4, got {cov.shape}")
        if not np.all(np.isfinite(cov)):
            raise ValueError("non-finite covariance")
        if np.max(np.abs(cov - cov.T)) > 1e-12:
            raise ValueError("covariance not symmetric")
        object.__setattr__(self, "covariance", cov)

    def position_sigma(self, tol: float = 1e-9) -> float:
        """Isotropic position std deviation; raises if the position block
        is anisotropic (the closed-form blockage math needs isotropy)."""
        cov = self.covariance
        if abs(cov[0, 0] - cov[1, 1]) > tol or abs(cov[0, 1]) > tol:
            raise ValueError("position covariance is not isotropic")
        return float(np.sqrt(max(cov[0, 0], 0.0)))


@dataclass(frozen=True)
class DetectionList:
    """Objects detected by one CAV, with its declared relay capability."""

    observer_id: int
    objects: tuple  # of (object_id, StateEstimate)
    relay_capability: int = 2

    def __post_init__(self):
        ids = [oid for oid, _ in self.objects]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate object ids in detection list")
        if self.relay_capability < 0:
            raise ValueError("relay capability must be >= 0")


def fuse_estimates(estimates: list[StateEstimate]) -> StateEstimate:
    """Information-filter fusion of redundant estimates of one object.

    Fused covariance is the inverse of the summed inverse covariances; the
    fused mean is the matching inverse-covariance weighted mean.
    """
    if not estimates:
        raise ValueError("need at least one estimate")
    if len(estimates) == 1:
        return estimates[0]
    info = np.zeros((4, 4))
    info_mean = np.zeros(4)
    for idx, est in enumerate(estimates):
        try:
            np.linalg.cholesky(est.covariance)
            inv = np.linalg.inv(est.covariance)
        except np.linalg.LinAlgError:
            raise ValueError(
                f"covariance of estimate {idx} is singular or not positive-definite"
            ) from None
        info += inv
        info_mean += inv @ est.mean.as_vector()
    cov = np.linalg.inv(info)
    cov = 0.5 * (cov + cov.T)  # enforce exact symmetry after inversion
    mean = cov @ info_mean
    return StateEstimate(ObjectState.from_vector(mean), cov)


def initialize_ncav_estimate(center: Point2, velocity: tuple[float, float],
                             footprint_sigma: float,
                             velocity_sigma: float = DEFAULT_VELOCITY_SIGMA) -> StateEstimate:
    """Initial belief for a sensed non-connected vehicle.

    The position block is isotropic with std equal to the footprint radius,
    folding the vehicle's spatial extent into the localization uncertainty.
    """
    if footprint_sigma <= 0:
        raise ValueError("footprint_sigma must be > 0")
    if velocity_sigma <= 0:
        raise ValueError("velocity_sigma must be > 0")
    cov = np.diag([footprint_sigma**2, footprint_sigma**2,
                   velocity_sigma**2, velocity_sigma**2])
    mean = ObjectState(center.x, center.y, velocity[0], velocity[1])
    return StateEstimate(mean, cov)


def simulate_detections(vehicles, footprint_sigma: float,
                        velocity_sigma: float = DEFAULT_VELOCITY_SIGMA,
                        rng: np.random.Generator | None = None,
                        relay_capability: int = 2) -> list[DetectionList]:
    """Build one detection list per CAV from ground-truth vehicle states.

    Every CAV observes every non-connected vehicle with independent additive
    Gaussian noise matching the declared measurement covariance. `vehicles`
    is any sequence of objects exposing id, is_cav and state attributes.
    """
    rng = rng or np.random.default_rng()
    cavs = [v for v in vehicles if v.is_cav]
    ncavs = [v for v in vehicles if not v.is_cav]
    out = []
    for cav in cavs:
        objs = []
        for obj in ncavs:
            truth = obj.state
            noisy = Point2(truth.x + rng.normal(0.0, footprint_sigma),
                           truth.y + rng.normal(0.0, footprint_sigma))
            vel = (truth.vx + rng.normal(0.0, velocity_sigma),
                   truth.vy + rng.normal(0.0, velocity_sigma))
            objs.append((obj.id, initialize_ncav_estimate(
                noisy, vel, footprint_sigma, velocity_sigma)))
        out.append(DetectionList(observer_id=cav.id, objects=tuple(objs),
                                 relay_capability=relay_capability))
    return out


def fuse_detections(detections: list[DetectionList]) -> dict[int, StateEstimate]:
    """Cooperative fusion across observers, keyed by object id.

    Only ids detected by at least one observer appear; each id fuses all of
    its redundant estimates.
    """
    by_object: dict[int, list[StateEstimate]] = {}
    for det in detections:
        for oid, est in det.objects:
            by_object.setdefault(oid, []).append(est)
    return {oid: fuse_estimates(ests) for oid, ests in sorted(by_object.items())}
