"""Experiment configuration: a JSON document with fixed sections.

Unknown keys are rejected anywhere in the document and every physical value
carries its unit in the key name, so a config cannot silently drift. The
canonical serialisation (sorted keys) is what run manifests hash.
"""

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .gaitsim import GaitProgram
from .leg import TrajectoryParams
from .sbcp import BusConfig
from .steering import LEGS, TurnCommand, TurnStrategy, apply_turn


@dataclass(frozen=True)
class GaitSection:
    frequency_hz: float = 3.5
    step_length_m: float = 0.12
    duty_factor: float = 0.49
    lift_height_m: float = 0.04
    stand_height_m: float = 0.16
    touchdown_angle_rad: float = 2.85
    slip: float = 0.0
    gait_type: str = "trot"


@dataclass(frozen=True)
class SteeringSection:
    strategy: str = "none"  # none | aa_amp | asl
    varpi: float = 0.0
    yaw_rate_rad_s: float = 0.0


@dataclass(frozen=True)
class SimSection:
    duration_s: float = 10.0
    dt_s: float = 0.002


@dataclass(frozen=True)
class MotorSection:
    gear_efficiency: float = 0.85
    effective_stride_fraction: float = 0.8
    mass_kg: float = 4.5
    sweep_speeds_mps: tuple = (0.05, 0.23, 0.41, 0.57, 0.71)


@dataclass(frozen=True)
class PsoSection:
    # sized so a full optimisation stays inside a coffee break even on the
    # pure-Python kernel; the kinematic objective converges much earlier
    particles: int = 16
    iterations: int = 25
    inertia: float = 0.7298
    cognitive: float = 1.49618
    social: float = 1.49618
    bounds: dict = field(default_factory=lambda: {
        "step_length_m": (0.04, 0.12),
        "frequency_hz": (1.0, 3.5),
    })


@dataclass(frozen=True)
class SbcpSection:
    baud: float = 3.3e6
    base_latency_us: float = 12.0
    jitter_max_us: float = 2.2
    slave_timeout_us: float = 100.0
    slaves: int = 8


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    gait: GaitSection = field(default_factory=GaitSection)
    steering: SteeringSection = field(default_factory=SteeringSection)
    sim: SimSection = field(default_factory=SimSection)
    motor: MotorSection = field(default_factory=MotorSection)
    pso: PsoSection = field(default_factory=PsoSection)
    sbcp: SbcpSection = field(default_factory=SbcpSection)


_SECTIONS = {
    "gait": GaitSection,
    "steering": SteeringSection,
    "sim": SimSection,
    "motor": MotorSection,
    "pso": PsoSection,
    "sbcp": SbcpSection,
}


def _build_section(cls, data, where):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(
            f"unknown keys in section '{where}': {sorted(unknown)}")
    return cls(**data)


def from_dict(data):
    """Validate and build an ExperimentConfig; rejects unknown keys."""
    known = set(_SECTIONS) | {"seed"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    kwargs = {"seed": int(data.get("seed", 0))}
    for name, cls in _SECTIONS.items():
        section = data.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"section '{name}' must be an object")
        kwargs[name] = _build_section(cls, section, name)
    return ExperimentConfig(**kwargs)


def load(path):
    """Read a JSON config file; parse errors carry line/column positions."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return from_dict(data)


def to_dict(cfg):
    return dataclasses.asdict(cfg)


def canonical_json(cfg):
    return json.dumps(to_dict(cfg), sort_keys=True, separators=(",", ":"))


def config_hash(cfg):
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def make_gait(cfg):
    """GaitProgram from the gait + steering sections."""
    g = cfg.gait
    if g.gait_type != "trot":
        raise ConfigError(f"unsupported gait_type '{g.gait_type}'")
    params = TrajectoryParams(step_length=g.step_length_m,
                              lift_height=g.lift_height_m,
                              duty_factor=g.duty_factor,
                              touchdown_angle=g.touchdown_angle_rad,
                              stand_height=g.stand_height_m)
    gait = GaitProgram(frequency=g.frequency_hz,
                       legs={leg: params for leg in LEGS}, slip=g.slip)
    s = cfg.steering
    if s.strategy == "none":
        return gait
    try:
        strategy = TurnStrategy(s.strategy)
    except ValueError:
        raise ConfigError(f"unknown steering strategy '{s.strategy}'")
    cmd = TurnCommand(strategy=strategy, varpi=s.varpi,
                      yaw_rate=s.yaw_rate_rad_s)
    return apply_turn(gait, cmd)


def make_bus_config(cfg, seed=None):
    s = cfg.sbcp
    return BusConfig(baud=s.baud, base_latency=s.base_latency_us * 1e-6,
                     jitter_max=s.jitter_max_us * 1e-6,
                     slave_timeout=s.slave_timeout_us * 1e-6,
                     rng_seed=cfg.seed if seed is None else seed)
