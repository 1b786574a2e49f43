"""Synthetic road scenarios: generation, stepping, and role identification.

Desk-scale stand-ins for trace-driven mobility: a straight highway, a blind
urban intersection with corner buildings, and a roundabout with a central
roadside unit. Vehicles follow fixed lanes at constant speed and wrap around
at lane ends, which keeps the traffic density stationary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Footprint, Point2
from .sensing import ObjectState

VEHICLE_HALF_LENGTH = 2.4
VEHICLE_HALF_WIDTH = 0.9
MIN_HEADWAY = 5.0


class Role(enum.Enum):
    RV = "RV"
    VOI = "VoI"
    RELAY_CANDIDATE = "relay_candidate"
    NONE = "none"


@dataclass(frozen=True)
class Lane:
    """Directed lane: straight segment or counterclockwise ring."""

    kind: str                     # "straight" | "ring"
    start: Point2 | None = None   # straight only
    end: Point2 | None = None
    center: Point2 | None = None  # ring only
    radius: float = 0.0

    @property
    def length(self) -> float:
        if self.kind == "straight":
            return math.hypot(self.end.x - self.start.x, self.end.y - self.start.y)
        return 2.0 * math.pi * self.radius

    def pose_at(self, s: float, speed: float) -> tuple[ObjectState, float]:
        """Ground-truth state and heading for arc position s."""
        if self.kind == "straight":
            ux = (self.end.x - self.start.x) / self.length
            uy = (self.end.y - self.start.y) / self.length
            return (ObjectState(self.start.x + s * ux, self.start.y + s * uy,
                                speed * ux, speed * uy),
                    math.atan2(uy, ux))
        theta = s / self.radius
        x = self.center.x + self.radius * math.cos(theta)
        y = self.center.y + self.radius * math.sin(theta)
        return (ObjectState(x, y, -speed * math.sin(theta), speed * math.cos(theta)),
                theta + math.pi / 2.0)


@dataclass(frozen=True)
class Vehicle:
    id: int
    is_cav: bool
    lane_index: int
    s: float
    speed: float
    state: ObjectState
    footprint: Footprint


@dataclass(frozen=True)
class Rsu:
    id: int
    position: Point2


@dataclass(frozen=True)
class StaticMap:
    buildings: tuple[Footprint, ...] = ()
    foliage: tuple[Footprint, ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "highway"            # "highway" | "intersection" | "roundabout"
    density_veh_km: float = 50.0
    cav_fraction: float = 0.6
    aoi_center: tuple[float, float] = (0.0, 0.0)
    aoi_radius: float = 70.0
    approach_band_factor: float = 2.0
    rsu_positions: tuple[tuple[float, float], ...] = ()
    lane_count: int = 2
    lane_width: float = 3.5
    road_half_length: float = 250.0
    ring_radius: float = 20.0
    building_size: float = 40.0
    buildings: tuple[Footprint, ...] = ()
    foliage: tuple[Footprint, ...] = ()
    speed_range: tuple[float, float] = (20.0, 30.0)
    relay_capacity: int = 2
    all_pairs: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.density_veh_km <= 0:
            raise ValueError("density must be > 0")
        if not (0.0 <= self.cav_fraction <= 1.0):
            raise ValueError("cav_fraction must be in [0, 1]")
        if self.aoi_radius <= 0:
            raise ValueError("aoi_radius must be > 0")
        if self.kind not in ("highway", "intersection", "roundabout"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")


@dataclass(frozen=True)
class WorldSnapshot:
    time: float
    vehicles: tuple[Vehicle, ...]
    rsus: tuple[Rsu, ...]
    static_map: StaticMap
    lanes: tuple[Lane, ...]
    roles: dict = field(default_factory=dict)
    rv_voi_pairs: tuple[tuple[int, int], ...] = ()

    def cavs(self) -> list[Vehicle]:
        return [v for v in self.vehicles if v.is_cav]

    def ncavs(self) -> list[Vehicle]:
        return [v for v in self.vehicles if not v.is_cav]

    def to_trace(self) -> str:
        lines = []
        for v in self.vehicles:
            role = self.roles.get(v.id, Role.NONE).value
            lines.append(f"{v.id},{int(v.is_cav)},{v.state.x:.6f},{v.state.y:.6f},"
                         f"{v.state.vx:.6f},{v.state.vy:.6f},{role}")
        return "\n".join(lines) + "\n"


def highway_config(**kw) -> ScenarioConfig:
    kw.setdefault("kind", "highway")
    kw.setdefault("speed_range", (20.0, 30.0))
    return ScenarioConfig(**kw)


def intersection_config(**kw) -> ScenarioConfig:
    kw.setdefault("kind", "intersection")
    kw.setdefault("road_half_length", 150.0)
    kw.setdefault("aoi_radius", 70.0)
    kw.setdefault("speed_range", (6.0, 14.0))
    return ScenarioConfig(**kw)


def roundabout_config(**kw) -> ScenarioConfig:
    kw.setdefault("kind", "roundabout")
    kw.setdefault("road_half_length", 150.0)
    kw.setdefault("aoi_radius", 90.0)
    kw.setdefault("speed_range", (6.0, 14.0))
    kw.setdefault("rsu_positions", ((0.0, 0.0),))
    return ScenarioConfig(**kw)


def _two_way_road(p0: Point2, p1: Point2, lane_count: int,
                  lane_width: float) -> list[Lane]:
    """Lanes of a two-way road between p0 and p1, right-hand traffic."""
    ux = (p1.x - p0.x) / math.hypot(p1.x - p0.x, p1.y - p0.y)
    uy = (p1.y - p0.y) / math.hypot(p1.x - p0.x, p1.y - p0.y)
    nx, ny = -uy, ux
    lanes = []
    for i in range(lane_count):
        off = (i - (lane_count - 1) / 2.0) * lane_width
        a = Point2(p0.x + off * nx, p0.y + off * ny)
        b = Point2(p1.x + off * nx, p1.y + off * ny)
        if off <= 0:
            lanes.append(Lane(kind="straight", start=a, end=b))
        else:
            lanes.append(Lane(kind="straight", start=b, end=a))
    return lanes


def _build_lanes(config: ScenarioConfig) -> tuple[list[Lane], float, StaticMap]:
    """Lane list, total road centerline length (m), and the static map."""
    hl = config.road_half_length
    buildings = list(config.buildings)
    if config.kind == "highway":
        lanes = _two_way_road(Point2(-hl, 0), Point2(hl, 0),
                              config.lane_count, config.lane_width)
        road_len = 2 * hl
    elif config.kind == "intersection":
        lanes = (_two_way_road(Point2(-hl, 0), Point2(hl, 0),
                               config.lane_count, config.lane_width)
                 + _two_way_road(Point2(0, -hl), Point2(0, hl),
                                 config.lane_count, config.lane_width))
        road_len = 4 * hl
        if not buildings:
            half_road = config.lane_count * config.lane_width / 2.0
            half_b = config.building_size / 2.0
            off = half_road + 2.0 + half_b
            buildings = [Footprint.rect(Point2(sx * off, sy * off), half_b, half_b)
                         for sx in (-1, 1) for sy in (-1, 1)]
    else:  # roundabout
        ring = Lane(kind="ring", center=Point2(0, 0), radius=config.ring_radius)
        arm_start = config.ring_radius + 8.0
        lanes = [ring]
        road_len = ring.length
        for ax, ay in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            p0 = Point2(ax * arm_start, ay * arm_start)
            p1 = Point2(ax * hl, ay * hl)
            lanes.extend(_two_way_road(p0, p1, config.lane_count, config.lane_width))
            road_len += hl - arm_start
    return lanes, road_len, StaticMap(buildings=tuple(buildings),
                                      foliage=tuple(config.foliage))


def generate(config: ScenarioConfig) -> WorldSnapshot:
    """Seeded world generation: Poisson vehicle placement on the lanes with a
    minimum same-lane headway, uniform speeds, Bernoulli CAV flags."""
    rng = np.random.default_rng(config.seed)
    lanes, road_len, static_map = _build_lanes(config)
    n_target = int(rng.poisson(config.density_veh_km * road_len / 1000.0))
    lane_lengths = np.array([ln.length for ln in lanes])
    lane_prob = lane_lengths / lane_lengths.sum()

    placed: dict[int, list[float]] = {i: [] for i in range(len(lanes))}
    vehicles = []
    for vid in range(n_target):
        for _ in range(200):
            lane_idx = int(rng.choice(len(lanes), p=lane_prob))
            s = float(rng.uniform(0.0, lane_lengths[lane_idx]))
            gaps = placed[lane_idx]
            length = lane_lengths[lane_idx]
            ok = all(min(abs(s - o), length - abs(s - o)) >= MIN_HEADWAY
                     for o in gaps)
            if ok:
                break
        else:
            raise ValueError(
                f"could not place vehicle {vid}: density too high for geometry")
        placed[lane_idx].append(s)
        speed = float(rng.uniform(*config.speed_range))
        is_cav = bool(rng.random() < config.cav_fraction)
        state, heading = lanes[lane_idx].pose_at(s, speed)
        fp = Footprint.rect(state.position, VEHICLE_HALF_LENGTH,
                            VEHICLE_HALF_WIDTH, heading)
        vehicles.append(Vehicle(id=vid, is_cav=is_cav, lane_index=lane_idx,
                                s=s, speed=speed, state=state, footprint=fp))

    rsus = tuple(Rsu(id=10_000 + k, position=Point2(*pos))
                 for k, pos in enumerate(config.rsu_positions))
    return WorldSnapshot(time=0.0, vehicles=tuple(vehicles), rsus=rsus,
                         static_map=static_map, lanes=tuple(lanes))


def step(world: WorldSnapshot, dt: float) -> WorldSnapshot:
    """Advance every vehicle along its lane by speed * dt, wrapping at lane
    ends. Roles are cleared; rerun identify_roles on the new snapshot."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    moved = []
    for v in world.vehicles:
        lane = world.lanes[v.lane_index]
        s = (v.s + v.speed * dt) % lane.length
        state, heading = lane.pose_at(s, v.speed)
        fp = Footprint.rect(state.position, VEHICLE_HALF_LENGTH,
                            VEHICLE_HALF_WIDTH, heading)
        moved.append(replace(v, s=s, state=state, footprint=fp))
    return replace(world, time=world.time + dt, vehicles=tuple(moved),
                   roles={}, rv_voi_pairs=())


def identify_roles(world: WorldSnapshot, config: ScenarioConfig) -> WorldSnapshot:
    """Partition nodes into VoI / RV / relay candidates and pair links.

    CAVs inside the area of interest are VoIs; CAVs in the approach band and
    closing on the center are RVs; remaining CAVs and all RSUs are relay
    candidates. Each RV links to its nearest VoI unless all-pairs is set.
    """
    cx, cy = config.aoi_center
    roles: dict[int, Role] = {}
    vois, rvs = [], []
    for v in world.vehicles:
        if not v.is_cav:
            roles[v.id] = Role.NONE
            continue
        dx, dy = v.state.x - cx, v.state.y - cy
        dist = math.hypot(dx, dy)
        closing = dx * v.state.vx + dy * v.state.vy < 0.0
        if dist <= config.aoi_radius:
            roles[v.id] = Role.VOI
            vois.append(v)
        elif dist <= config.approach_band_factor * config.aoi_radius and closing:
            roles[v.id] = Role.RV
            rvs.append(v)
        else:
            roles[v.id] = Role.RELAY_CANDIDATE
    for r in world.rsus:
        roles[r.id] = Role.RELAY_CANDIDATE

    pairs = []
    for rv in rvs:
        if not vois:
            break
        if config.all_pairs:
            pairs.extend((rv.id, voi.id) for voi in vois)
        else:
            nearest = min(vois, key=lambda voi: (
                math.hypot(voi.state.x - rv.state.x, voi.state.y - rv.state.y),
                voi.id))
            pairs.append((rv.id, nearest.id))
    return replace(world, roles=roles, rv_voi_pairs=tuple(pairs))
