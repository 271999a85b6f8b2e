"""Deployment search: the perception-entropy objective and a DE-assisted PSO."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .geometry import Deployment, LidarModel, deploy_rays
from .metric import GridSpec, VgopReport, evaluate_frame
from .raycast import cast_frame
from .scene import Scenario

DIMENSIONS = ("height", "tilt_x", "tilt_y", "x", "y")


class InvalidSwarm(ValueError):
    pass


@dataclass(frozen=True)
class ObjectiveParams:
    """Detection threshold on mean VGOP, per-miss loss and frame subsampling."""

    delta: float = 0.005
    loss: float = -1.0
    grid: GridSpec = field(default_factory=GridSpec)
    frame_stride: int = 1

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not math.isfinite(self.loss):
            raise ValueError("loss must be finite")
        if self.frame_stride < 1:
            raise ValueError("frame_stride must be >= 1")


@dataclass(frozen=True)
class SearchSpace:
    """Box bounds over a subset of DIMENSIONS; ``base`` fills the rest.

    Tilt bounds are degrees, position bounds meters.
    """

    bounds: tuple[tuple[str, float, float], ...]
    base: Deployment = field(default_factory=Deployment)

    def __post_init__(self):
        bounds = tuple((str(n), float(lo), float(hi)) for n, lo, hi in self.bounds)
        if not bounds:
            raise ValueError("search space needs at least one dimension")
        names = [b[0] for b in bounds]
        for n, lo, hi in bounds:
            if n not in DIMENSIONS:
                raise ValueError(f"unknown search dimension {n!r}")
            if not lo < hi:
                raise ValueError(f"dimension {n}: lower bound must be < upper bound")
        if len(set(names)) != len(names):
            raise ValueError("duplicate search dimension")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def from_dict(cls, bounds: dict, base: Deployment | None = None) -> "SearchSpace":
        return cls(tuple((n, lo, hi) for n, (lo, hi) in bounds.items()), base or Deployment())

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(b[0] for b in self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[2] for b in self.bounds])

    def to_deployment(self, position) -> Deployment:
        values = {
            "x": self.base.position[0], "y": self.base.position[1], "height": self.base.position[2],
            "tilt_x": self.base.tilt_x, "tilt_y": self.base.tilt_y,
        }
        values.update(zip(self.names, (float(p) for p in position)))
        return Deployment((values["x"], values["y"], values["height"]), values["tilt_x"], values["tilt_y"])


@dataclass(frozen=True)
class SwarmParams:
    iterations: int = 100
    swarm_size: int = 20
    w1: float = 0.7  # inertia
    w2: float = 0.5  # differential weight
    a1: float = 0.3  # cognitive
    a2: float = 0.2  # social
    gamma: float = 0.1  # probability of a DE step
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1 or self.swarm_size < 1:
            raise InvalidSwarm("iterations and swarm_size must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidSwarm("gamma must lie in [0, 1]")
        if min(self.w1, self.w2, self.a1, self.a2) < 0.0:
            raise InvalidSwarm("weights must be non-negative")
        if self.gamma > 0.0 and self.swarm_size < 4:
            raise InvalidSwarm("DE mutation needs a swarm of at least 4 particles")


@dataclass(frozen=True)
class FitnessRecord:
    iteration: int
    particle: int
    position: tuple[float, ...]
    velocity: tuple[float, ...]
    fitness: float
    personal_best: tuple[float, ...]
    personal_best_fitness: float
    global_best: tuple[float, ...]
    global_best_fitness: float
    de_step: bool


@dataclass
class SwarmResult:
    best_position: np.ndarray
    best_fitness: float
    history: list[FitnessRecord]


@dataclass
class OptimizationResult:
    best: Deployment
    best_fitness: float
    history: list[FitnessRecord]
    space: SearchSpace


# -- objective ---------------------------------------------------------------

def scene_reports(deployment: Deployment, scenario: Scenario, model: LidarModel,
                  grid: GridSpec) -> Iterator[tuple[int, VgopReport]]:
    """Simulate every frame and yield (frame_id, report) per vehicle."""
    rays = deploy_rays(model, deployment)
    for frame in scenario.frames:
        cloud = cast_frame(rays, frame, model, ground=False)
        for rep in evaluate_frame(cloud, frame, grid):
            yield frame.frame_id, rep


def vehicle_score(report: VgopReport, params: ObjectiveParams) -> float:
    """Entropy of a detectable vehicle, otherwise the per-miss penalty -|loss|."""
    return report.entropy if report.mean_vgop >= params.delta else -abs(params.loss)


def fitness(deployment: Deployment, scenario: Scenario, model: LidarModel, params: ObjectiveParams) -> float:
    scenario = scenario.subsample(params.frame_stride)
    return math.fsum(vehicle_score(rep, params) for _, rep in scene_reports(deployment, scenario, model, params.grid))


def proxy_recall(reports, delta: float) -> float:
    """Detected / total with detection meaning mean VGOP >= delta; 0 with no vehicles."""
    reports = list(reports)
    if not reports:
        return 0.0
    return sum(r.mean_vgop >= delta for r in reports) / len(reports)


# -- swarm primitives ----------------------------------------------------------

def pso_velocity(v, position, personal_best, global_best, w1, a1, a2, r1, r2) -> np.ndarray:
    v, p = np.asarray(v, dtype=float), np.asarray(position, dtype=float)
    return w1 * v + a1 * r1 * (np.asarray(personal_best) - p) + a2 * r2 * (np.asarray(global_best) - p)


def position_update(position, velocity) -> np.ndarray:
    return np.asarray(position, dtype=float) + np.asarray(velocity, dtype=float)


def de_mutation(position_i, position_j, position_k, w2) -> np.ndarray:
    """Velocity that carries particle i onto the mutant ``p_i + w2 (p_j - p_k)``."""
    return w2 * (np.asarray(position_j, dtype=float) - np.asarray(position_k, dtype=float))


def clamp(position, space: SearchSpace) -> np.ndarray:
    return np.clip(np.asarray(position, dtype=float), space.lower, space.upper)


def de_pso(objective: Callable[[np.ndarray], float], space: SearchSpace, swarm: SwarmParams) -> SwarmResult:
    """Maximize ``objective`` over the box ``space``.

    Each iteration is synchronous: every particle's random draws
    (r1, r2, r3 and, for a DE step, the partners j and k) come from one
    seeded stream in particle order, all moves use the previous iteration's
    positions and bests, then fitness is evaluated and bests are replaced
    only on strict improvement, again in particle order. The initial swarm
    is evaluated once to seed the bests; history holds iterations 1..T.
    """
    rng = np.random.default_rng(swarm.seed)
    n, lo, hi = swarm.swarm_size, space.lower, space.upper
    pos = lo + rng.random((n, len(lo))) * (hi - lo)
    vel = np.zeros_like(pos)
    fit = np.array([objective(p) for p in pos], dtype=float)
    pbest, pbest_fit = pos.copy(), fit.copy()
    g = int(np.argmax(fit))  # first maximum; ties keep the lowest index
    gbest, gbest_fit = pos[g].copy(), float(fit[g])

    history: list[FitnessRecord] = []
    for it in range(1, swarm.iterations + 1):
        new_vel = np.empty_like(vel)
        de_flags = []
        for i in range(n):
            r1, r2, r3 = rng.random(3)
            v = pso_velocity(vel[i], pos[i], pbest[i], gbest, swarm.w1, swarm.a1, swarm.a2, r1, r2)
            de = bool(r3 < swarm.gamma)
            if de:
                others = [k for k in range(n) if k != i]
                j, k = rng.choice(others, size=2, replace=False)
                v = de_mutation(pos[i], pos[j], pos[k], swarm.w2)
            new_vel[i] = v
            de_flags.append(de)
        vel = new_vel
        pos = np.clip(pos + vel, lo, hi)
        fit = np.array([objective(p) for p in pos], dtype=float)
        for i in range(n):
            if fit[i] > pbest_fit[i]:
                pbest[i], pbest_fit[i] = pos[i].copy(), fit[i]
            if fit[i] > gbest_fit:
                gbest, gbest_fit = pos[i].copy(), float(fit[i])
            history.append(FitnessRecord(
                iteration=it, particle=i,
                position=tuple(pos[i].tolist()), velocity=tuple(vel[i].tolist()),
                fitness=float(fit[i]),
                personal_best=tuple(pbest[i].tolist()), personal_best_fitness=float(pbest_fit[i]),
                global_best=tuple(gbest.tolist()), global_best_fitness=gbest_fit,
                de_step=de_flags[i],
            ))
    return SwarmResult(gbest, gbest_fit, history)


def run_optimizer(scenario: Scenario, model: LidarModel, space: SearchSpace,
                  swarm: SwarmParams, objective: ObjectiveParams) -> OptimizationResult:
    """Search the deployment maximizing the summed perception score of ``scenario``."""
    cache: dict[tuple, float] = {}
    frames = scenario.subsample(objective.frame_stride)
    flat = ObjectiveParams(objective.delta, objective.loss, objective.grid, 1)

    def score(position: np.ndarray) -> float:
        key = tuple(position.tolist())
        if key not in cache:
            cache[key] = fitness(space.to_deployment(position), frames, model, flat)
        return cache[key]

    res = de_pso(score, space, swarm)
    return OptimizationResult(space.to_deployment(res.best_position), res.best_fitness, res.history, space)
