"""Actuator and energetics models.

Covers the linear motor/gearbox model with its torque-speed envelope, the
motor-board PID position loop with velocity-profile interpolation, electrical
power accounting, cost of transport and Froude number, and the simplified
pre-design load model that predicts the cost-of-transport-over-speed curve
for a trot before any hardware exists.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InfeasibleLoadError
from .leg import LegGeometry

G = 9.81

ROBOT_MASS = 4.5

# Stand-by electronics draw, measured with no actuator movement. Subtracted
# from hardware recordings before COT comparisons; never added to model power.
STANDBY_POWER_W = 19.6

DEFAULT_GEAR_EFFICIENCY = 0.85


@dataclass(frozen=True)
class MotorSpec:
    """Linear motor model referred to the gearbox output.

    The torque-speed line runs from torque_max_output at stall to zero at
    no_load_speed_output; torque_at_limit is the current-limited ceiling.
    """

    torque_max_output: float
    no_load_speed_output: float
    gear_ratio: float
    current_limit: float
    torque_at_limit: float


# Leg-angle drive: 53.5 mN*m motor through an 84:1 spur gear, 16300 rpm
# no-load (printed output values 4.5 N*m / 20.3 rad/s); 7.1 N*m at the 6 A
# current limit.
LA_SPEC = MotorSpec(torque_max_output=4.5, no_load_speed_output=20.3,
                    gear_ratio=84.0, current_limit=6.0, torque_at_limit=7.1)

# Leg-length drive: same motor through the 56:1 planetary gearbox; 4.7 N*m at
# the 6 A limit.
LL_SPEC = MotorSpec(torque_max_output=53.5e-3 * 56.0,
                    no_load_speed_output=16300.0 / 60.0 * 2.0 * math.pi / 56.0,
                    gear_ratio=56.0, current_limit=6.0, torque_at_limit=4.7)


def available_torque(speed, spec):
    """Torque available at the gear output for a given output speed.

    Linear from torque_max_output at stall to zero at the no-load speed,
    capped by the current-limit torque; zero beyond the no-load speed.
    """
    frac = 1.0 - abs(speed) / spec.no_load_speed_output
    tau = spec.torque_max_output * frac
    return float(np.clip(tau, 0.0, spec.torque_at_limit))


def over_speed(speed, spec):
    """True when |speed| exceeds the no-load speed (no torque available)."""
    return abs(speed) > spec.no_load_speed_output


def motor_electrical_power(torque, speed, spec,
                           gear_efficiency=DEFAULT_GEAR_EFFICIENCY):
    """Electrical power drawn to produce (torque, speed) at the output.

    Mechanical power passes through the gear efficiency (negative mechanical
    power is dissipated, not recovered); the copper loss follows from the
    linear torque-speed line, whose equivalent winding resistance gives
    I^2*R = torque^2 * no_load_speed / stall_torque.
    """
    torque = np.asarray(torque, dtype=np.float64)
    speed = np.asarray(speed, dtype=np.float64)
    mech = np.maximum(torque * speed, 0.0) / gear_efficiency
    copper = torque * torque * (spec.no_load_speed_output /
                                spec.torque_max_output)
    return (mech + copper)[()]


@dataclass(frozen=True)
class PidConfig:
    """Motor-board position loop configuration.

    The internal control loop runs at 1 kHz; setpoint tracking is limited to
    half of that. Gains default to values tuned on a unit-inertia benchmark
    against a fine-step reference simulation.
    """

    kp: float = 100.0
    ki: float = 20.0
    kd: float = 20.0
    tracking_frequency: float = 500.0
    internal_loop: float = 1000.0

    def __post_init__(self):
        if not 0.0 < self.tracking_frequency <= 500.0:
            raise ConfigError(
                f"tracking_frequency must be in (0, 500] Hz, got"
                f" {self.tracking_frequency}")


def velocity_profile(current, target, duration, cfg=PidConfig()):
    """Linear setpoint interpolation from current to target over duration.

    Emits round(duration * tracking_frequency) equal increments (constant
    slope, as computed on the motor boards); the returned sequence includes
    both endpoints exactly. An unchanged target yields a single setpoint.
    """
    if duration <= 0:
        raise ConfigError(f"duration must be > 0, got {duration}")
    if target == current:
        return np.asarray([float(target)])
    steps = max(1, round(duration * cfg.tracking_frequency))
    return np.linspace(float(current), float(target), steps + 1)


@dataclass
class PidState:
    """Mutable controller state: measured position/velocity and integral."""

    pos: float = 0.0
    vel: float = 0.0
    integral: float = 0.0


def pid_step(state, setpoint, cfg=PidConfig(), spec=LA_SPEC, dt=None):
    """One PID update; returns the torque command in N*m.

    torque = kp*e + ki*int(e) + kd*de/dt with de/dt = -vel (derivative on
    measurement), clamped to the torque-speed envelope at the current
    velocity. Integration freezes while the output is clamped (anti-windup).
    """
    if dt is None:
        dt = 1.0 / cfg.internal_loop
    err = setpoint - state.pos
    integral = state.integral + err * dt
    torque = cfg.kp * err + cfg.ki * integral + cfg.kd * (-state.vel)
    limit = available_torque(state.vel, spec)
    if abs(torque) > limit:
        torque = math.copysign(limit, torque)
    else:
        state.integral = integral
    return torque


def cost_of_transport(power, mass, speed):
    """COT = P / (m*g*v) in J/(N*m). Raises on non-positive speed or mass."""
    if mass <= 0:
        raise ValueError(f"mass must be > 0, got {mass}")
    if speed <= 0:
        raise ValueError(f"speed must be > 0, got {speed}")
    if power < 0:
        raise ValueError(f"power must be >= 0, got {power}")
    return power / (mass * G * speed)


def froude(speed, hip_height):
    """Froude number v^2 / (g*l) with l the standing hip height."""
    if hip_height <= 0:
        raise ValueError(f"hip_height must be > 0, got {hip_height}")
    return speed * speed / (G * hip_height)


# --- simplified pre-design load model ------------------------------------
#
# The load scenario reduces a trot cycle to a sinusoidal leg-angle sweep plus
# a trapezoidal leg-length shortening during swing. The cable drive is
# summarised by three effective constants (lever arm, preload, cable-side
# stiffness); displacement of the parallel spring during stance is ignored.
# LEG_INERTIA includes the gear-reflected rotor inertia, which dominates the
# bare leg's. These constants target the shape of the power-over-speed curve,
# not hardware point values.

CABLE_LEVER = 0.06
CABLE_PRELOAD = 8.0
CABLE_STIFFNESS = 100.0
LEG_INERTIA = 0.008


@dataclass
class LoadScenario:
    """Joint torque/speed demand over one representative leg cycle.

    Series cover exactly one cycle at uniform spacing; the same pattern,
    phase-shifted, applies to all four legs of a trot, so whole-robot power
    is four times the per-leg cycle mean.
    """

    frequency: float
    step_length: float
    la_torque: np.ndarray
    la_speed: np.ndarray
    ll_torque: np.ndarray
    ll_speed: np.ndarray

    def __post_init__(self):
        lengths = {len(self.la_torque), len(self.la_speed),
                   len(self.ll_torque), len(self.ll_speed)}
        if len(lengths) != 1:
            raise ConfigError("scenario series must have equal lengths")
        if self.frequency <= 0:
            raise ConfigError("cycle frequency must be > 0")


def sldm_scenario(frequency, step_length=0.12, lift_height=0.04, mass=ROBOT_MASS,
                  geom=LegGeometry(), samples=512):
    """Build the simplified trot load scenario for one leg.

    Leg angle sweeps sinusoidally between the stance end angles (stance =
    first half cycle, two legs of the trot carrying the body); leg length is
    constant in stance and shortens trapezoidally during swing. Loads are the
    quasi-static weight-support moment, the swinging-leg inertia, and the
    cable tension holding the extension spring.
    """
    t = np.arange(samples) / samples / frequency
    phase = 2.0 * np.pi * frequency * t
    stance = phase < np.pi

    alpha_amp = math.atan2(0.5 * step_length, geom.length_stand)
    alpha = alpha_amp * np.cos(phase)
    alpha_dot = -alpha_amp * 2.0 * np.pi * frequency * np.sin(phase)
    alpha_ddot = -alpha_amp * (2.0 * np.pi * frequency) ** 2 * np.cos(phase)

    # vertical load shared by the two stance legs acts at the foot's
    # horizontal offset from the hip
    foot_x = geom.length_stand * np.tan(alpha)
    tau_weight = np.where(stance, 0.5 * mass * G * foot_x, 0.0)
    la_torque = tau_weight + LEG_INERTIA * alpha_ddot

    # trapezoidal shortening: ramp down 30% of swing, hold 40%, ramp up 30%
    s = np.clip((phase - np.pi) / np.pi, 0.0, 1.0)
    ramp = 0.3
    down = np.clip(s / ramp, 0.0, 1.0)
    up = np.clip((1.0 - s) / ramp, 0.0, 1.0)
    shorten = lift_height * np.where(stance, 0.0, np.minimum(down, up))
    length = geom.length_stand - shorten
    swing_t = 0.5 / frequency
    rate = lift_height / (ramp * swing_t)
    ll_vel = np.where(stance, 0.0,
                      np.where(s < ramp, -rate, np.where(s > 1.0 - ramp, rate,
                                                         0.0)))
    tension = CABLE_PRELOAD + CABLE_STIFFNESS * (geom.length_max - length)
    return LoadScenario(frequency=frequency, step_length=step_length,
                        la_torque=la_torque, la_speed=alpha_dot,
                        ll_torque=tension * CABLE_LEVER,
                        ll_speed=ll_vel / CABLE_LEVER)


@dataclass(frozen=True)
class SldmResult:
    speed: float
    power: float
    cot: float


def sldm_estimate(scenario, la=LA_SPEC, ll=LL_SPEC,
                  effective_stride_fraction=0.8,
                  gear_efficiency=DEFAULT_GEAR_EFFICIENCY, mass=ROBOT_MASS):
    """Predicted speed, mean electrical power and COT for a load scenario.

    Speed follows the trot identity 2 * effective stride * frequency with the
    effective stride a fixed fraction of the commanded step. Power integrates
    the electrical model over the cycle for all four legs. Any sample whose
    demand leaves the torque-speed envelope raises InfeasibleLoadError naming
    the joint and cycle phase.
    """
    n = len(scenario.la_torque)
    phase = 2.0 * np.pi * np.arange(n) / n
    for joint, torque, speed, spec in (
            ("LA", scenario.la_torque, scenario.la_speed, la),
            ("LL", scenario.ll_torque, scenario.ll_speed, ll)):
        avail = np.asarray([available_torque(w, spec) for w in speed])
        bad = np.abs(torque) > avail
        if np.any(bad):
            k = int(np.argmax(bad))
            raise InfeasibleLoadError(
                f"{joint} demand {abs(torque[k]):.3f} N*m exceeds available"
                f" {avail[k]:.3f} N*m at cycle phase {phase[k]:.3f} rad",
                joint=joint, phase=float(phase[k]))

    p_la = motor_electrical_power(scenario.la_torque, scenario.la_speed, la,
                                  gear_efficiency)
    p_ll = motor_electrical_power(scenario.ll_torque, scenario.ll_speed, ll,
                                  gear_efficiency)
    power = 4.0 * float(np.mean(p_la + p_ll))
    speed = 2.0 * effective_stride_fraction * scenario.step_length * \
        scenario.frequency
    return SldmResult(speed=speed, power=power,
                      cot=cost_of_transport(power, mass, speed))


def cot_sweep(speeds, step_length=0.12, lift_height=0.04,
              effective_stride_fraction=0.8, mass=ROBOT_MASS, la=LA_SPEC,
              ll=LL_SPEC, gear_efficiency=DEFAULT_GEAR_EFFICIENCY):
    """Evaluate the load model over target speeds; returns SldmResults.

    The cycle frequency for each point follows from the trot identity at the
    effective stride length.
    """
    results = []
    for v in speeds:
        f = v / (2.0 * effective_stride_fraction * step_length)
        scenario = sldm_scenario(f, step_length=step_length,
                                 lift_height=lift_height, mass=mass)
        results.append(sldm_estimate(
            scenario, la=la, ll=ll,
            effective_stride_fraction=effective_stride_fraction,
            gear_efficiency=gear_efficiency, mass=mass))
    return results


def rollout_power(leg_angle, leg_length, stance, dt, mass=ROBOT_MASS,
                  la=LA_SPEC, ll=LL_SPEC,
                  gear_efficiency=DEFAULT_GEAR_EFFICIENCY,
                  geom=LegGeometry()):
    """Instantaneous electrical power estimate for a simulated rollout.

    Arrays are (T, legs). Joint speeds come from finite differences; torques
    from the same quasi-static load terms as the pre-design model, with the
    body weight shared by the legs currently in stance.
    """
    leg_angle = np.asarray(leg_angle, dtype=np.float64)
    leg_length = np.asarray(leg_length, dtype=np.float64)
    alpha_dot = np.gradient(leg_angle, dt, axis=0)
    alpha_ddot = np.gradient(alpha_dot, dt, axis=0)
    ll_vel = np.gradient(leg_length, dt, axis=0)

    n_stance = np.maximum(stance.sum(axis=1, keepdims=True), 1)
    foot_x = leg_length * np.sin(leg_angle)
    tau_weight = np.where(stance, mass * G * foot_x / n_stance, 0.0)
    tau_la = tau_weight + LEG_INERTIA * alpha_ddot
    tension = CABLE_PRELOAD + CABLE_STIFFNESS * (geom.length_max - leg_length)
    tau_ll = tension * CABLE_LEVER

    p = motor_electrical_power(tau_la, alpha_dot, la, gear_efficiency) + \
        motor_electrical_power(tau_ll, ll_vel / CABLE_LEVER, ll,
                               gear_efficiency)
    return p.sum(axis=1)
