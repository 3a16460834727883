"""Virtual pantograph-leg kinematics.

The spring-loaded three-segment leg is reduced to a 2-DOF polar virtual leg:
a sagittal leg angle (fore-aft protraction/retraction) and a leg length,
bounded by the hardware limits. Foot targets live in the hip frame, x forward
and z downward-negative. The adduction/abduction joint adds a lateral offset
handled by the gait simulator.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, WorkspaceError

DEG = math.pi / 180.0


@dataclass(frozen=True)
class LegGeometry:
    """Leg limits and spring constants.

    Defaults are the hardware values: leg length 0.11/0.16/0.18 m
    (min/standing/max), +-34 deg fore-aft range, +-8 deg adduction/abduction,
    diagonal extension spring 5.8 kN/m, parallel segment spring 7.4 kN/m,
    foot torsion spring 1.21e-3 N*m/deg stored per radian.
    """

    length_min: float = 0.11
    length_stand: float = 0.16
    length_max: float = 0.18
    leg_angle_range: float = 34.0 * DEG
    aa_range: float = 8.0 * DEG
    k_diagonal: float = 5.8e3
    k_parallel: float = 7.4e3
    k_foot_torsion: float = 1.21e-3 / DEG

    def __post_init__(self):
        if not 0 < self.length_min < self.length_stand < self.length_max:
            raise ConfigError(
                "leg lengths must satisfy 0 < min < standing < max")


@dataclass(frozen=True)
class FootTarget:
    """Foot position in the hip frame: x forward, z up (negative below hip)."""

    x: float
    z: float


@dataclass(frozen=True)
class JointCommand:
    """Virtual leg joint values: sagittal angle, length, lateral (AA) angle."""

    leg_angle: float
    leg_length: float
    aa_angle: float = 0.0


@dataclass(frozen=True)
class TrajectoryParams:
    """Parametric foot-cycle description (defaults: reference trot values).

    touchdown_angle is carried as a raw, uninterpreted offset parameter; it
    does not alter the generated trajectory.
    """

    step_length: float = 0.12
    lift_height: float = 0.04
    duty_factor: float = 0.49
    touchdown_angle: float = 2.85
    stand_height: float = 0.16

    def __post_init__(self):
        if not 0.0 < self.duty_factor < 1.0:
            raise ConfigError(
                f"duty_factor must be in (0, 1), got {self.duty_factor}")
        if self.lift_height < 0 or self.lift_height >= self.stand_height:
            raise ConfigError("lift_height must be in [0, stand_height)")
        # step_length may be negative: a reversed stride (turning in place)


def inverse_kinematics(target, geom=LegGeometry()):
    """Closed-form polar IK: angle = atan2(x, -z), length = |(x, z)|.

    Raises WorkspaceError naming the violated limit when the target is
    outside the reachable annulus or angle range.
    """
    length = math.hypot(target.x, target.z)
    angle = math.atan2(target.x, -target.z)
    if length < geom.length_min:
        raise WorkspaceError(
            f"target length {length:.4f} m below minimum leg length"
            f" {geom.length_min} m")
    if length > geom.length_max:
        raise WorkspaceError(
            f"target length {length:.4f} m above maximum leg length"
            f" {geom.length_max} m")
    if abs(angle) > geom.leg_angle_range:
        raise WorkspaceError(
            f"target angle {angle:.4f} rad exceeds leg angle range"
            f" +-{geom.leg_angle_range:.4f} rad")
    return JointCommand(leg_angle=angle, leg_length=length)


def forward_kinematics(cmd, geom=LegGeometry()):
    """Inverse of the virtual-leg map: x = l*sin(angle), z = -l*cos(angle)."""
    if not geom.length_min <= cmd.leg_length <= geom.length_max:
        raise WorkspaceError(
            f"leg length {cmd.leg_length:.4f} m outside"
            f" [{geom.length_min}, {geom.length_max}] m")
    if abs(cmd.leg_angle) > geom.leg_angle_range:
        raise WorkspaceError(
            f"leg angle {cmd.leg_angle:.4f} rad exceeds"
            f" +-{geom.leg_angle_range:.4f} rad")
    if abs(cmd.aa_angle) > geom.aa_range:
        raise WorkspaceError(
            f"AA angle {cmd.aa_angle:.4f} rad exceeds +-{geom.aa_range:.4f} rad")
    return FootTarget(x=cmd.leg_length * math.sin(cmd.leg_angle),
                      z=-cmd.leg_length * math.cos(cmd.leg_angle))


def foot_trajectory_arrays(phase, p):
    """Vectorised foot cycle: returns (x, z) arrays for a phase array.

    Phase 0 is touchdown. For the stance fraction (duty_factor of the cycle)
    the foot sweeps a straight line backward at z = -stand_height from
    +step_length/2 to -step_length/2. The swing segment returns forward on a
    cycloidal arc with apex z = -(stand_height - lift_height). The cycle is
    C0-continuous and periodic.
    """
    phase = np.mod(np.asarray(phase, dtype=np.float64), 2.0 * np.pi)
    d = p.duty_factor
    if p.step_length == 0.0:
        # degenerate cycle: nothing to step over, the foot stays put
        zeros = np.zeros_like(phase)
        return zeros, zeros - p.stand_height
    stance_end = 2.0 * np.pi * d
    in_stance = phase < stance_end

    s_st = phase / stance_end
    x_st = 0.5 * p.step_length * (1.0 - 2.0 * s_st)

    s_sw = (phase - stance_end) / (2.0 * np.pi * (1.0 - d))
    x_sw = -0.5 * p.step_length + p.step_length * (
        s_sw - np.sin(2.0 * np.pi * s_sw) / (2.0 * np.pi))
    z_sw = -p.stand_height + 0.5 * p.lift_height * (
        1.0 - np.cos(2.0 * np.pi * s_sw))

    x = np.where(in_stance, x_st, x_sw)
    z = np.where(in_stance, -p.stand_height, z_sw)
    return x, z


def foot_trajectory(phase, p):
    """Foot target for a single phase value (see foot_trajectory_arrays)."""
    x, z = foot_trajectory_arrays(float(phase), p)
    return FootTarget(x=float(x), z=float(z))


def stance_mask(phase, duty_factor):
    """True where the wrapped phase falls in the stance segment."""
    return np.mod(np.asarray(phase), 2.0 * np.pi) < 2.0 * np.pi * duty_factor


def spring_force(deflection, stiffness):
    """Unilateral linear spring: stiffness * deflection, zero when slack."""
    return np.maximum(stiffness * np.asarray(deflection, dtype=np.float64),
                      0.0)[()]


def contact_from_deflection(knee_angle, ankle_angle, threshold=0.02,
                            geom=LegGeometry()):
    """Estimate stance and ankle torque from knee/ankle deflection difference.

    The loaded ankle joint lags the knee, so (knee - ankle) > threshold marks
    ground contact; multiplying the same difference by the foot torsion
    stiffness gives an ankle torque estimate. Series must be equal-length and
    uniformly sampled.
    """
    knee = np.asarray(knee_angle, dtype=np.float64)
    ankle = np.asarray(ankle_angle, dtype=np.float64)
    if knee.shape != ankle.shape:
        raise ValueError(
            f"knee and ankle series lengths differ: {knee.shape} vs"
            f" {ankle.shape}")
    diff = knee - ankle
    return diff > threshold, diff * geom.k_foot_torsion
