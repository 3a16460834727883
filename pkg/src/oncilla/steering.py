"""Turning strategies, applied as pure modifiers of a gait program.

Two strategies are implemented:

* AA amplification: a sine wave a*sin(theta) is installed on each leg's
  adduction/abduction node; the amplitude is proportional to the desired yaw
  rate, with opposite signs for front and hind legs, so the lateral foot
  sweeps form a turning couple.
* Asymmetric stride-length (ASL) scaling: per-leg step lengths are multiplied
  by a factor derived from a turning factor varpi in [-1, 1], shortening (and
  eventually reversing) the strides on one side, like a differential drive.
"""

import enum
import math
from dataclasses import dataclass, replace

from .errors import ConfigError
from .leg import LegGeometry


class LegId(enum.Enum):
    LF = "LF"
    RF = "RF"
    LH = "LH"
    RH = "RH"

    @property
    def is_front(self):
        return self in (LegId.LF, LegId.RF)

    @property
    def is_left(self):
        return self in (LegId.LF, LegId.LH)


LEGS = (LegId.LF, LegId.RF, LegId.LH, LegId.RH)


class TurnStrategy(enum.Enum):
    AA_AMP = "aa_amp"
    ASL = "asl"


# AA amplitude per unit of desired yaw rate (rad * s). Chosen so a yaw rate
# of 0.7 rad/s (a full turn in ~9 s) commands the working amplitude 0.05 rad.
DEFAULT_AA_GAIN = 0.05 / 0.7

_AA_RANGE = LegGeometry().aa_range


@dataclass(frozen=True)
class TurnCommand:
    """One turning request: either a desired yaw rate (AA_AMP, rad/s) or a
    dimensionless turning factor varpi in [-1, 1] (ASL)."""

    strategy: TurnStrategy
    yaw_rate: float = 0.0
    varpi: float = 0.0

    def __post_init__(self):
        if abs(self.varpi) > 1.0:
            raise ConfigError(f"varpi must be in [-1, 1], got {self.varpi}")

    @property
    def is_zero(self):
        if self.strategy is TurnStrategy.AA_AMP:
            return self.yaw_rate == 0.0
        return self.varpi == 0.0


def aa_amplitude(yaw_rate, leg, gain=DEFAULT_AA_GAIN, aa_range=_AA_RANGE):
    """Signed AA sine amplitude for one leg: +gain*yaw_rate on front legs,
    -gain*yaw_rate on hind legs, clamped to the joint range.

    Returns (amplitude, clamped); clamping is silent but flagged, matching
    the hardware joint stop.
    """
    sign = 1.0 if leg.is_front else -1.0
    a = sign * gain * yaw_rate
    if abs(a) > aa_range:
        return math.copysign(aa_range, a), True
    return a, False


def aa_setpoint(theta, yaw_rate, leg, gain=DEFAULT_AA_GAIN):
    """Instantaneous AA joint setpoint a*sin(theta) for one leg."""
    a, _ = aa_amplitude(yaw_rate, leg, gain)
    return a * math.sin(theta)


def asl_amplifier(varpi, leg, mirror=False):
    """Per-leg step-length multiplier for ASL turning.

    Positive varpi shortens the right side (2*varpi + 1 on the shortened side
    as varpi goes negative, 1 - 2*varpi as it goes positive); at |varpi| = 0.5
    one side's stride is zero, at |varpi| = 1 it is reversed. mirror=True
    swaps the side convention.
    """
    if abs(varpi) > 1.0:
        raise ConfigError(f"varpi must be in [-1, 1], got {varpi}")
    left = leg.is_left if not mirror else not leg.is_left
    if varpi < 0.0 and left:
        return 2.0 * varpi + 1.0
    if varpi > 0.0 and not left:
        return 1.0 - 2.0 * varpi
    return 1.0


def apply_turn(gait, cmd, gain=DEFAULT_AA_GAIN):
    """Return a copy of the gait program with the turn command installed.

    AA_AMP sets per-leg AA sine amplitudes; ASL rescales per-leg step
    lengths. All other parameters are untouched. A zero-magnitude command
    returns the gait unchanged.
    """
    if cmd.is_zero:
        return gait
    if cmd.strategy is TurnStrategy.AA_AMP:
        aman = {leg: aa_amplitude(cmd.yaw_rate, leg, gain) for leg in LEGS}
        return replace(
            gait,
            aa_amplitudes={leg: a for leg, (a, _) in aman.items()},
            aa_clamped=any(flag for _, flag in aman.values()),
            turn=cmd,
        )
    legs = {
        leg: replace(p, step_length=asl_amplifier(cmd.varpi, leg) * p.step_length)
        for leg, p in gait.legs.items()
    }
    return replace(gait, legs=legs, turn=cmd)
