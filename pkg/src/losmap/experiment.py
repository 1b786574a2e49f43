"""Experiment driver: sweeps, the full sensing-to-connectivity pipeline, and
result serialization."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .channel import ChannelParams
from .geometry import Footprint, Point2
from .network import (
    AvailabilityMatrix,
    average_availability,
    connectivity,
    link_mixtures_at,
    second_order,
)
from .prediction import PredictionParams
from .relay import (
    AdmmParams,
    admm,
    build_assignment_problem,
    build_relayed_adjacency,
    exhaustive_search,
    fcfs,
    hungarian,
    protocol_message_count,
)
from .scenario import ScenarioConfig, generate, identify_roles, step
from .sensing import fuse_detections, simulate_detections

SOLVER_NAMES = ("lower_bound", "upper_bound", "ES", "HG", "FCFS", "ADMM")
CENTRALIZED = {"ES", "HG"}
CSV_HEADER = ("scenario,density,cav_fraction,gamma_th_db,solver,seed,"
              "lambda2,objective,messages,wall_time_ms")


@dataclass(frozen=True)
class SensingParams:
    footprint_sigma: float = 1.0
    velocity_sigma: float = 0.5

    def __post_init__(self):
        if self.footprint_sigma <= 0 or self.velocity_sigma <= 0:
            raise ValueError("sensing sigmas must be > 0")


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a scenario, channel/prediction settings, sweep axes,
    the solvers to score, and repetition count."""

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    prediction: PredictionParams = field(default_factory=PredictionParams)
    admm: AdmmParams = field(default_factory=AdmmParams)
    sensing: SensingParams = field(default_factory=SensingParams)
    gamma_th_db: tuple[float, ...] = (10.0,)
    densities: tuple[float, ...] | None = None
    cav_fractions: tuple[float, ...] | None = None
    solvers: tuple[str, ...] = ("lower_bound", "upper_bound", "HG")
    repetitions: int = 1
    output_dir: str = "."
    blocker_half_width: float = 0.9
    windows: int = 1
    es_cap: int = 10**7
    measure_time: bool = False

    def __post_init__(self):
        if not self.gamma_th_db:
            raise ValueError("gamma_th_db: sweep must be nonempty")
        if self.densities is not None and not self.densities:
            raise ValueError("densities: sweep must be nonempty")
        if self.cav_fractions is not None and not self.cav_fractions:
            raise ValueError("cav_fractions: sweep must be nonempty")
        if self.repetitions < 1:
            raise ValueError("repetitions: must be >= 1")
        if self.windows < 1:
            raise ValueError("windows: must be >= 1")
        bad = [s for s in self.solvers if s not in SOLVER_NAMES]
        if bad or not self.solvers:
            raise ValueError(f"solvers: must be a nonempty subset of {SOLVER_NAMES}")


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    density: float
    cav_fraction: float
    gamma_th_db: float
    solver: str
    seed: int
    lambda2: float
    objective: float
    messages: int
    wall_time_ms: float

    def __post_init__(self):
        if self.lambda2 < 0:
            raise ValueError("lambda2 must be >= 0")


def _derived_seed(root: int, *tags: int) -> int:
    ss = np.random.SeedSequence([root & 0xFFFFFFFFFFFFFFFF, *tags])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _solve(name: str, problem, spec: ExperimentSpec):
    if name == "ES":
        return exhaustive_search(problem, cap=spec.es_cap)
    if name == "HG":
        return hungarian(problem)
    if name == "FCFS":
        return fcfs(problem)
    if name == "ADMM":
        return admm(problem, spec.admm)
    raise ValueError(f"unknown solver {name!r}")


def _window_metrics(world, cfg: ScenarioConfig, spec: ExperimentSpec,
                    sense_rng) -> dict:
    """Run one prediction window: sense, fuse, predict, build availability,
    and score every requested solver at every threshold."""
    detections = simulate_detections(world.vehicles,
                                     spec.sensing.footprint_sigma,
                                     spec.sensing.velocity_sigma, sense_rng,
                                     relay_capability=cfg.relay_capacity)
    estimates = fuse_detections(detections)
    n_nodes = len(world.cavs()) + len(world.rsus)
    out: dict = {}
    if n_nodes < 2:  # degenerate world: nothing to connect
        for gamma in spec.gamma_th_db:
            for solver in spec.solvers:
                out[(gamma, solver)] = (0.0, 0.0, 0, 0.0)
        return out

    epochs = [n * spec.prediction.step for n in range(spec.prediction.n_samples)]
    per_epoch = [link_mixtures_at(world, e, spec.channel, spec.prediction,
                                  estimates, spec.blocker_half_width)
                 for e in epochs]
    n_cavs = len(world.cavs())
    links = world.rv_voi_pairs
    for gamma in spec.gamma_th_db:
        a_bar = average_availability([lm.availability(gamma) for lm in per_epoch])
        lam_lower = connectivity(a_bar).lambda2
        lam_upper = connectivity(second_order(a_bar)).lambda2
        problem = build_assignment_problem(a_bar, links,
                                           capacity=cfg.relay_capacity)
        for solver in spec.solvers:
            if solver == "lower_bound":
                out[(gamma, solver)] = (lam_lower, 0.0, 0, 0.0)
                continue
            if solver == "upper_bound":
                out[(gamma, solver)] = (lam_upper, 0.0, 0, 0.0)
                continue
            t0 = time.perf_counter() if spec.measure_time else 0.0
            assignment = _solve(solver, problem, spec)
            elapsed_ms = ((time.perf_counter() - t0) * 1e3
                          if spec.measure_time else 0.0)
            a_r = build_relayed_adjacency(a_bar, assignment, problem)
            lam = connectivity(a_r).lambda2
            granted = int(assignment.x.sum())
            scheme = "centralized" if solver in CENTRALIZED else "distributed"
            msgs = protocol_message_count(scheme, n_cavs, len(links),
                                          assignment.stats, granted)
            out[(gamma, solver)] = (lam, assignment.objective, msgs, elapsed_ms)
    return out


def _run_point(spec: ExperimentSpec, density: float, rho: float,
               rep: int, d_idx: int, c_idx: int) -> list[ResultRow]:
    seed = _derived_seed(spec.scenario.seed, d_idx, c_idx, rep)
    cfg = replace(spec.scenario, density_veh_km=density, cav_fraction=rho,
                  seed=seed)
    world = identify_roles(generate(cfg), cfg)
    sense_rng = np.random.default_rng(
        _derived_seed(spec.scenario.seed, d_idx, c_idx, rep, 1))

    acc: dict = {}
    for w in range(spec.windows):
        metrics = _window_metrics(world, cfg, spec, sense_rng)
        for key, vals in metrics.items():
            acc.setdefault(key, []).append(vals)
        if w + 1 < spec.windows:
            world = identify_roles(step(world, spec.prediction.horizon), cfg)

    rows = []
    for gamma in spec.gamma_th_db:
        for solver in spec.solvers:
            stack = acc[(gamma, solver)]
            lam = float(np.mean([s[0] for s in stack]))
            obj = float(np.mean([s[1] for s in stack]))
            msgs = int(round(np.mean([s[2] for s in stack])))
            ms = float(np.mean([s[3] for s in stack]))
            rows.append(ResultRow(scenario=cfg.kind, density=density,
                                  cav_fraction=rho, gamma_th_db=gamma,
                                  solver=solver, seed=rep, lambda2=lam,
                                  objective=obj, messages=msgs,
                                  wall_time_ms=ms))
    return rows


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> list[ResultRow]:
    """Execute the sweep and return rows in deterministic order."""
    densities = spec.densities or (spec.scenario.density_veh_km,)
    fractions = spec.cav_fractions or (spec.scenario.cav_fraction,)
    tasks = [(d_idx, density, c_idx, rho, rep)
             for d_idx, density in enumerate(densities)
             for c_idx, rho in enumerate(fractions)
             for rep in range(spec.repetitions)]

    def work(task):
        d_idx, density, c_idx, rho, rep = task
        return _run_point(spec, density, rho, rep, d_idx, c_idx)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, tasks))
    else:
        chunks = [work(t) for t in tasks]

    rows = [row for chunk in chunks for row in chunk]
    solver_rank = {name: k for k, name in enumerate(SOLVER_NAMES)}
    rows.sort(key=lambda r: (r.density, r.cav_fraction, r.gamma_th_db,
                             solver_rank[r.solver], r.seed))
    return rows


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def emit(rows: list[ResultRow], fmt: str, path) -> None:
    """Write rows as CSV (fixed header) or JSON lines."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in rows:
                fh.write(",".join([
                    r.scenario, _fmt(r.density), _fmt(r.cav_fraction),
                    _fmt(r.gamma_th_db), r.solver, str(r.seed),
                    _fmt(r.lambda2), _fmt(r.objective), str(r.messages),
                    _fmt(r.wall_time_ms)]) + "\n")
    elif fmt == "jsonl":
        with open(path, "w", newline="") as fh:
            for r in rows:
                fh.write(json.dumps({
                    "scenario": r.scenario, "density": r.density,
                    "cav_fraction": r.cav_fraction,
                    "gamma_th_db": r.gamma_th_db, "solver": r.solver,
                    "seed": r.seed, "lambda2": r.lambda2,
                    "objective": r.objective, "messages": r.messages,
                    "wall_time_ms": r.wall_time_ms}, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")


def parse_rows_csv(path) -> list[ResultRow]:
    """Read back an emitted CSV file."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        for line in fh:
            parts = line.strip().split(",")
            rows.append(ResultRow(
                scenario=parts[0], density=float(parts[1]),
                cav_fraction=float(parts[2]), gamma_th_db=float(parts[3]),
                solver=parts[4], seed=int(parts[5]), lambda2=float(parts[6]),
                objective=float(parts[7]), messages=int(parts[8]),
                wall_time_ms=float(parts[9])))
    return rows


# ------------------------------------------------------------- spec loading

_SECTION_TYPES = {
    "scenario": ScenarioConfig,
    "channel": ChannelParams,
    "prediction": PredictionParams,
    "admm": AdmmParams,
    "sensing": SensingParams,
}
_LIST_FIELDS = ("gamma_th_db", "densities", "cav_fractions", "solvers")


def _footprint_from_dict(d: dict, where: str) -> Footprint:
    try:
        kind = d["kind"]
        center = Point2(*d["center"])
        if kind == "rect":
            return Footprint.rect(center, d["half_length"], d["half_width"],
                                  d.get("heading", 0.0))
        if kind == "disc":
            return Footprint.disc(center, d["radius"])
        raise ValueError(f"unknown kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{where}: invalid footprint ({exc})") from None


def _build_section(name: str, data: dict):
    cls = _SECTION_TYPES[name]
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ValueError(f"{name}.{key}: unknown field")
        if key in ("buildings", "foliage"):
            value = tuple(_footprint_from_dict(v, f"{name}.{key}[{i}]")
                          for i, v in enumerate(value))
        elif isinstance(value, list):
            value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name}: {exc}") from None


def load_spec(path) -> ExperimentSpec:
    """Load an experiment description from a JSON document.

    Every section and field is optional; defaults fill the gaps. Validation
    failures name the offending field with its section path.
    """
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be an object")
    kwargs = {}
    top_known = {f.name for f in fields(ExperimentSpec)}
    for key, value in data.items():
        if key not in top_known:
            raise ValueError(f"{key}: unknown field")
        if key in _SECTION_TYPES:
            if not isinstance(value, dict):
                raise ValueError(f"{key}: must be an object")
            kwargs[key] = _build_section(key, value)
        elif key in _LIST_FIELDS:
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    try:
        return ExperimentSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ValueError(str(exc)) from None
