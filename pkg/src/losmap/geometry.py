"""2-D geometric primitives: footprints, link frames, and blockage tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Point2:
    """A point in the road plane, in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class Footprint:
    """Obstacle footprint: a heading-oriented rectangle or an isotropic disc.

    Rectangles are defined in their own axes (half_length along heading,
    half_width across) and rotated by `heading`. Discs ignore heading.
    """

    kind: str  # "rect" | "disc"
    center: Point2
    half_length: float = 0.0
    half_width: float = 0.0
    heading: float = 0.0
    radius: float = 0.0

    def __post_init__(self):
        if self.kind == "rect":
            if self.half_length <= 0 or self.half_width <= 0:
                raise ValueError("rect footprint needs positive half extents")
        elif self.kind == "disc":
            if self.radius <= 0:
                raise ValueError("disc footprint needs positive radius")
        else:
            raise ValueError(f"unknown footprint kind {self.kind!r}")

    @classmethod
    def rect(cls, center: Point2, half_length: float, half_width: float,
             heading: float = 0.0) -> "Footprint":
        return cls(kind="rect", center=center, half_length=half_length,
                   half_width=half_width, heading=heading)

    @classmethod
    def disc(cls, center: Point2, radius: float) -> "Footprint":
        return cls(kind="disc", center=center, radius=radius)


@dataclass(frozen=True)
class LinkFrameRect:
    """Axis-aligned rectangle in link-frame coordinates (u along, v across)."""

    u_min: float
    u_max: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ValueError("degenerate link-frame rectangle")

    @property
    def area(self) -> float:
        return (self.u_max - self.u_min) * (self.v_max - self.v_min)


def _link_axes(tx: Point2, rx: Point2) -> tuple[np.ndarray, np.ndarray, float]:
    """Unit along-link vector, unit left normal, and link length."""
    delta = rx.as_array() - tx.as_array()
    d = float(np.hypot(delta[0], delta[1]))
    if d == 0.0:
        raise ValueError("zero-length link: tx == rx")
    u_hat = delta / d
    n_hat = np.array([-u_hat[1], u_hat[0]])  # v > 0 left of tx->rx travel
    return u_hat, n_hat, d


def to_link_frame(tx: Point2, rx: Point2, p: Point2) -> tuple[float, float]:
    """Map a point into the link frame of the segment tx->rx.

    Returns (u, v): u is the signed along-link coordinate (u=0 at tx,
    u=d at rx), v the signed cross-link offset, positive to the left of
    the direction of travel. The map is an isometry.
    """
    u_hat, n_hat, _ = _link_axes(tx, rx)
    rel = p.as_array() - tx.as_array()
    return float(rel @ u_hat), float(rel @ n_hat)


def points_to_link_frame(tx: np.ndarray, rx: np.ndarray,
                         points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized link-frame transform.

    tx, rx: (..., 2) segment endpoints; points: (..., 2) broadcast-compatible.
    Returns (u, v) arrays. Callers must guarantee tx != rx.
    """
    delta = rx - tx
    d = np.hypot(delta[..., 0], delta[..., 1])
    ux, uy = delta[..., 0] / d, delta[..., 1] / d
    relx = points[..., 0] - tx[..., 0]
    rely = points[..., 1] - tx[..., 1]
    u = relx * ux + rely * uy
    v = -relx * uy + rely * ux
    return u, v


def blockage_region(tx: Point2, rx: Point2,
                    blocker_half_width: float) -> LinkFrameRect:
    """Link-frame rectangle of blocker-center positions whose disc footprint
    of radius `blocker_half_width` can intersect the segment tx->rx."""
    if blocker_half_width <= 0:
        raise ValueError("blocker_half_width must be > 0")
    _, _, d = _link_axes(tx, rx)
    w = blocker_half_width
    return LinkFrameRect(u_min=-w, u_max=d + w, v_min=-w, v_max=w)


def _interval_open_overlap(lo1: float, hi1: float, lo2: float, hi2: float) -> bool:
    """True iff open intervals (lo1, hi1) and (lo2, hi2) overlap."""
    return max(lo1, lo2) < min(hi1, hi2)


def segment_intersects_footprint(tx: Point2, rx: Point2, f: Footprint) -> bool:
    """True iff the open segment tx->rx passes through the footprint interior.

    Touching the boundary (tangency, endpoint on the outline) does not count.
    """
    a = tx.as_array()
    b = rx.as_array()
    if np.array_equal(a, b):
        raise ValueError("zero-length link: tx == rx")
    if f.kind == "disc":
        return bool(_segment_hits_discs(a, b, f.center.as_array()[None, :],
                                        np.array([f.radius]))[0])
    return bool(_segment_hits_rects(a, b, f.center.as_array()[None, :],
                                    np.array([[f.half_length, f.half_width]]),
                                    np.array([f.heading]))[0])


def _segment_hits_discs(a: np.ndarray, b: np.ndarray, centers: np.ndarray,
                        radii: np.ndarray) -> np.ndarray:
    """Open-interior intersection test of segment a->b against discs.

    a, b: (2,); centers: (K, 2); radii: (K,). Returns (K,) bool.
    """
    return _segments_hit_discs(a[None, :], b[None, :], centers, radii)[0]


def _segments_hit_discs(a: np.ndarray, b: np.ndarray, centers: np.ndarray,
                        radii: np.ndarray) -> np.ndarray:
    """Batched open-interior test: segments a->b (P, 2) against K discs.
    Returns (P, K) bool."""
    d = b - a                                        # (P, 2)
    dd = np.einsum("ij,ij->i", d, d)[:, None]        # (P, 1)
    relx = centers[None, :, 0] - a[:, None, 0]
    rely = centers[None, :, 1] - a[:, None, 1]
    # |a + t d - c|^2 < r^2 as quadratic in t
    t_mid = (relx * d[:, None, 0] + rely * d[:, None, 1]) / dd
    dist2 = relx**2 + rely**2 - t_mid**2 * dd
    disc = radii[None, :] ** 2 - dist2
    inside = disc > 0.0
    half = np.sqrt(np.where(inside, disc, 0.0) / dd)
    t_lo = t_mid - half
    t_hi = t_mid + half
    return inside & (np.maximum(t_lo, 0.0) < np.minimum(t_hi, 1.0))


def _segment_hits_rects(a: np.ndarray, b: np.ndarray, centers: np.ndarray,
                        half_extents: np.ndarray,
                        headings: np.ndarray) -> np.ndarray:
    """Open-interior intersection of segment a->b against rotated rectangles.

    a, b: (2,); centers: (K, 2); half_extents: (K, 2); headings: (K,).
    Slab method in each rectangle's local frame. Returns (K,) bool.
    """
    return _segments_hit_rects(a[None, :], b[None, :], centers,
                               half_extents, headings)[0]


def _segments_hit_rects(a: np.ndarray, b: np.ndarray, centers: np.ndarray,
                        half_extents: np.ndarray,
                        headings: np.ndarray) -> np.ndarray:
    """Batched open-interior test: segments a->b (P, 2) against rotated
    rectangles (K of them). Returns (P, K) bool."""
    cos_h = np.cos(headings)
    sin_h = np.sin(headings)
    # segment endpoints in each rect's local frame -> (P, K)
    rax = a[:, None, 0] - centers[None, :, 0]
    ray = a[:, None, 1] - centers[None, :, 1]
    rbx = b[:, None, 0] - centers[None, :, 0]
    rby = b[:, None, 1] - centers[None, :, 1]
    ax = rax * cos_h + ray * sin_h
    ay = -rax * sin_h + ray * cos_h
    bx = rbx * cos_h + rby * sin_h
    by = -rbx * sin_h + rby * cos_h

    shape = ax.shape
    t_enter = np.zeros(shape)
    t_exit = np.ones(shape)
    alive = np.ones(shape, dtype=bool)
    for p0, p1, h in ((ax, bx, half_extents[:, 0]), (ay, by, half_extents[:, 1])):
        dp = p1 - p0
        parallel = dp == 0.0
        # parallel to slab: inside only if strictly between the faces
        alive &= ~parallel | (np.abs(p0) < h)
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = (-h - p0) / dp
            t1 = (h - p0) / dp
        lo = np.where(parallel, 0.0, np.minimum(t0, t1))
        hi = np.where(parallel, 1.0, np.maximum(t0, t1))
        t_enter = np.maximum(t_enter, lo)
        t_exit = np.minimum(t_exit, hi)
    return alive & (t_enter < t_exit)
