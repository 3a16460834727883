"""Particle swarm optimiser for gait parameter tuning.

Standard global-best PSO with constriction-style defaults, bound clamping
(violating velocity components are zeroed) and per-particle RNG streams
derived from one seed, so a (seed, config) pair fully determines the run even
if objective evaluations are farmed out in parallel.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .gaitsim import GaitProgram, simulate
from .leg import TrajectoryParams
from .steering import LEGS


@dataclass(frozen=True)
class SearchSpace:
    """Named box bounds, one (name, lower, upper) triple per dimension."""

    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(tuple(p) for p in self.params))
        if not self.params:
            raise ConfigError("search space is empty")
        for name, lo, hi in self.params:
            if not lo < hi:
                raise ConfigError(
                    f"bound for {name} must satisfy lower < upper,"
                    f" got [{lo}, {hi}]")

    @property
    def names(self):
        return tuple(p[0] for p in self.params)

    @property
    def lower(self):
        return np.asarray([p[1] for p in self.params], dtype=np.float64)

    @property
    def upper(self):
        return np.asarray([p[2] for p in self.params], dtype=np.float64)

    @property
    def dim(self):
        return len(self.params)


@dataclass(frozen=True)
class SwarmConfig:
    """PSO hyperparameters (constriction-factor defaults)."""

    particles: int = 20
    iterations: int = 60
    inertia: float = 0.7298
    cognitive: float = 1.49618
    social: float = 1.49618
    seed: int = 0

    def __post_init__(self):
        if self.particles < 1:
            raise ConfigError("need at least 1 particle")
        if not 0.0 <= self.inertia < 1.0:
            raise ConfigError("inertia must be in [0, 1)")
        if self.cognitive < 0 or self.social < 0:
            raise ConfigError("cognitive/social weights must be >= 0")


@dataclass
class OptimizeResult:
    best_params: dict
    best_score: float
    trace: list = field(default_factory=list)  # (iteration, best, mean)


def optimize(objective, space, cfg=SwarmConfig(), maximize=True,
             initial_positions=None, initial_velocities=None):
    """Run PSO over the search space; objective must be deterministic.

    Returns an OptimizeResult whose trace has one (iteration, best_score,
    mean_score) row per iteration, in the objective's own sense (best is
    monotone: never worsens once found). initial_positions/velocities
    override the seeded uniform initialisation (e.g. to warm-start).
    """
    lo, hi = space.lower, space.upper
    span = hi - lo
    sign = 1.0 if maximize else -1.0
    streams = [np.random.default_rng(s)
               for s in np.random.SeedSequence(cfg.seed).spawn(cfg.particles)]

    if initial_positions is None:
        pos = np.stack([lo + rng.random(space.dim) * span for rng in streams])
    else:
        pos = np.array(initial_positions, dtype=np.float64)
    if initial_velocities is None:
        vel = np.stack([(rng.random(space.dim) - 0.5) * span
                        for rng in streams])
    else:
        vel = np.array(initial_velocities, dtype=np.float64)
    if pos.shape != (cfg.particles, space.dim) or vel.shape != pos.shape:
        raise ConfigError("initial swarm state has the wrong shape")
    scores = np.asarray([sign * objective(p) for p in pos])

    pbest = pos.copy()
    pbest_score = scores.copy()
    g = int(np.argmax(pbest_score))
    gbest = pbest[g].copy()
    gbest_score = float(pbest_score[g])

    trace = []
    for it in range(cfg.iterations):
        for i, rng in enumerate(streams):
            r1 = rng.random(space.dim)
            r2 = rng.random(space.dim)
            vel[i] = (cfg.inertia * vel[i]
                      + cfg.cognitive * r1 * (pbest[i] - pos[i])
                      + cfg.social * r2 * (gbest - pos[i]))
            pos[i] = pos[i] + vel[i]
            out = (pos[i] < lo) | (pos[i] > hi)
            pos[i] = np.clip(pos[i], lo, hi)
            vel[i][out] = 0.0
            scores[i] = sign * objective(pos[i])
            if scores[i] > pbest_score[i]:
                pbest[i] = pos[i].copy()
                pbest_score[i] = scores[i]
                if scores[i] > gbest_score:
                    gbest = pos[i].copy()
                    gbest_score = float(scores[i])
        finite = scores[np.isfinite(scores)]
        mean = float(np.mean(finite)) if finite.size else float("-inf")
        trace.append((it, sign * gbest_score, sign * mean))

    best = dict(zip(space.names, gbest))
    return OptimizeResult(best_params=best, best_score=sign * gbest_score,
                          trace=trace)


DEFAULT_GAIT_BOUNDS = SearchSpace(params=(
    ("step_length_m", 0.04, 0.12),
    ("frequency_hz", 1.0, 3.5),
    ("duty_factor", 0.4, 0.6),
    ("lift_height_m", 0.02, 0.05),
))


def decode_gait(values, space, base=None):
    """Build a GaitProgram from an optimisation vector.

    Recognised names: step_length_m, frequency_hz, duty_factor,
    lift_height_m; anything else is rejected up front.
    """
    base = base if base is not None else GaitProgram.trot()
    named = dict(zip(space.names, values))
    known = {"step_length_m", "frequency_hz", "duty_factor", "lift_height_m"}
    unknown = set(named) - known
    if unknown:
        raise ConfigError(f"unknown gait parameters: {sorted(unknown)}")
    frequency = named.get("frequency_hz", base.frequency)
    legs = {}
    for leg in LEGS:
        p = base.legs[leg]
        legs[leg] = TrajectoryParams(
            step_length=named.get("step_length_m", p.step_length),
            lift_height=named.get("lift_height_m", p.lift_height),
            duty_factor=named.get("duty_factor", p.duty_factor),
            touchdown_angle=p.touchdown_angle,
            stand_height=p.stand_height)
    return replace(base, frequency=frequency, legs=legs)


def gait_objective(values, space=DEFAULT_GAIT_BOUNDS, base=None,
                   settle_time=5.0, run_time=15.0, dt=5e-3, slip=0.0):
    """Planar distance covered between settle_time and the end of the run.

    The gait runs for settle_time + run_time seconds; any configuration that
    cannot be simulated (workspace violation, invalid parameters) scores
    -inf instead of raising.
    """
    try:
        gait = decode_gait(values, space, base=base)
        if slip:
            gait = replace(gait, slip=slip)
        step = min(dt, 1.0 / (50.0 * gait.frequency))
        log = simulate(gait, settle_time + run_time, step)
        k0 = int(round(settle_time / step))
        return math.hypot(log.x[-1] - log.x[k0], log.y[-1] - log.y[k0])
    except Exception:
        return float("-inf")
