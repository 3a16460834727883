"""Kinematic quasi-static quadruped simulator.

Four legs are driven by the oscillator network through the foot-cycle /
inverse-kinematics pipeline; body motion is reconstructed from the stance
feet under a no-slip (optionally scaled-slip) assumption:

* forward/lateral displacement per step is minus the mean motion of the
  stance feet in their hip frames, scaled by (1 - slip);
* yaw combines the differential left/right stance sweep (wheel-like) with
  the lateral adduction/abduction sweeps projected to a differential-drive
  equivalent through a calibrated gain;
* hip height is the mean vertical leg projection of the stance legs.

Dynamics (ground reaction forces, roll/pitch oscillation) are out of scope;
the model targets kinematic quantities: speed, stride, duty factor, turning
radius.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import cpg
from .actuation import rollout_power
from .errors import ConfigError, InsufficientYawError, SimulationError
from .leg import LegGeometry, TrajectoryParams, foot_trajectory_arrays
from .steering import LEGS, LegId

TWO_PI = 2.0 * np.pi

TROT_OFFSETS = {LegId.LF: 0.0, LegId.RF: math.pi, LegId.LH: math.pi,
                LegId.RH: 0.0}

# Perfect foot pinning transfers lateral stance sweeps to yaw far less
# efficiently than the hardware turns (the outward and inward halves of the
# sweep nearly cancel); this gain projects the pinned-foot estimate onto a
# differential-drive equivalent. Calibrated once so that an AA amplitude of
# 0.05 rad at 3.5 Hz turns the robot in place in 10 s, then frozen.
AA_YAW_GAIN = 22.6


@dataclass(frozen=True)
class BodyGeometry:
    """Trunk layout used for odometry lever arms."""

    hip_spacing: float = 0.23
    track_width: float = 0.14
    mass: float = 4.5


@dataclass(frozen=True)
class GaitProgram:
    """Complete open-loop gait description.

    legs maps each LegId to its foot-cycle parameters (per-leg step lengths
    let turning modifiers act on one side only); phase_offsets is the gait
    type; aa_amplitudes are sine amplitudes for the lateral joints installed
    by the AA turning strategy; slip in [0, 1] scales all ground-transmitted
    motion (0 = perfect traction).
    """

    frequency: float = 3.5
    legs: dict = None
    phase_offsets: dict = None
    aa_amplitudes: dict = None
    aa_clamped: bool = False
    slip: float = 0.0
    turn: object = None

    def __post_init__(self):
        if self.frequency <= 0:
            raise ConfigError(f"frequency must be > 0, got {self.frequency}")
        if not 0.0 <= self.slip <= 1.0:
            raise ConfigError(f"slip must be in [0, 1], got {self.slip}")
        if self.legs is None:
            object.__setattr__(self, "legs",
                               {leg: TrajectoryParams() for leg in LEGS})
        if self.phase_offsets is None:
            object.__setattr__(self, "phase_offsets", dict(TROT_OFFSETS))
        if self.aa_amplitudes is None:
            object.__setattr__(self, "aa_amplitudes",
                               {leg: 0.0 for leg in LEGS})

    @classmethod
    def trot(cls, frequency=3.5, params=None, slip=0.0):
        params = params if params is not None else TrajectoryParams()
        return cls(frequency=frequency,
                   legs={leg: params for leg in LEGS},
                   phase_offsets=dict(TROT_OFFSETS), slip=slip)


@dataclass
class TrajectoryLog:
    """Uniform time series produced by simulate(); input to all metrics."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    yaw: np.ndarray
    hip_height: np.ndarray
    leg_angle: np.ndarray   # (T, 4) in LEGS order
    leg_length: np.ndarray
    aa_angle: np.ndarray
    contact: np.ndarray     # (T, 4) bool
    foot_x_world: np.ndarray
    foot_y_world: np.ndarray
    power: np.ndarray
    frequency: float
    dt: float

    CSV_LEGS = ("lf", "rf", "lh", "rh")

    @property
    def duration(self):
        return float(self.t[-1] - self.t[0])

    def to_csv(self, path):
        """Write the spec'd log table; column units live in the header."""
        cols = ["t_s", "x_m", "y_m", "yaw_rad", "hip_height_m"]
        series = [self.t, self.x, self.y, self.yaw, self.hip_height]
        for i, leg in enumerate(self.CSV_LEGS):
            cols += [f"{leg}_angle_rad", f"{leg}_length_m", f"{leg}_aa_rad",
                     f"{leg}_contact"]
            series += [self.leg_angle[:, i], self.leg_length[:, i],
                       self.aa_angle[:, i], self.contact[:, i].astype(int)]
        cols.append("power_W")
        series.append(self.power)
        with open(path, "w", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for k in range(len(self.t)):
                fh.write(",".join(_fmt(s[k]) for s in series) + "\n")

    @classmethod
    def from_csv(cls, path, frequency):
        """Rebuild a log from its CSV export (frequency is not stored there)."""
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            rows = [line.strip().split(",") for line in fh if line.strip()]
        data = {name: np.asarray([float(r[i]) for r in rows])
                for i, name in enumerate(header)}
        t = data["t_s"]
        leg_angle = np.stack([data[f"{leg}_angle_rad"]
                              for leg in cls.CSV_LEGS], axis=1)
        leg_length = np.stack([data[f"{leg}_length_m"]
                               for leg in cls.CSV_LEGS], axis=1)
        aa_angle = np.stack([data[f"{leg}_aa_rad"]
                             for leg in cls.CSV_LEGS], axis=1)
        contact = np.stack([data[f"{leg}_contact"]
                            for leg in cls.CSV_LEGS], axis=1) > 0.5
        log = cls(t=t, x=data["x_m"], y=data["y_m"], yaw=data["yaw_rad"],
                  hip_height=data["hip_height_m"], leg_angle=leg_angle,
                  leg_length=leg_length, aa_angle=aa_angle, contact=contact,
                  foot_x_world=np.zeros_like(leg_angle),
                  foot_y_world=np.zeros_like(leg_angle),
                  power=data["power_W"], frequency=float(frequency),
                  dt=float(t[1] - t[0]))
        log._fill_world_feet()
        return log

    def _fill_world_feet(self):
        fx, fy, _ = _foot_local(self.leg_angle, self.leg_length, self.aa_angle)
        hip_x, hip_y = _hip_positions(BodyGeometry())
        c, s = np.cos(self.yaw)[:, None], np.sin(self.yaw)[:, None]
        px, py = hip_x + fx, hip_y + fy
        self.foot_x_world = self.x[:, None] + c * px - s * py
        self.foot_y_world = self.y[:, None] + s * px + c * py


def _fmt(v):
    return format(float(v), ".10g")


def _hip_positions(body):
    # LEGS order LF, RF, LH, RH; x forward, y to the robot's left
    hip_x = np.asarray([body.hip_spacing / 2, body.hip_spacing / 2,
                        -body.hip_spacing / 2, -body.hip_spacing / 2])
    hip_y = np.asarray([body.track_width / 2, -body.track_width / 2,
                        body.track_width / 2, -body.track_width / 2])
    return hip_x, hip_y


def _foot_local(la, ll, aa):
    """Foot position in the hip frame; positive aa sweeps the foot to the
    robot's right so opposite front/hind amplitudes form a counterclockwise
    couple for a positive commanded yaw rate."""
    vertical = ll * np.cos(la)
    fx = ll * np.sin(la)
    fy = -vertical * np.sin(aa)
    fz = -vertical * np.cos(aa)
    return fx, fy, fz


def build_network(gait, gamma=cpg.DEFAULT_GAMMA, table_size=cpg.SHAPE_SAMPLES):
    """Oscillator network realising a gait program.

    Three nodes per leg (leg angle, leg length, adduction/abduction) in LEGS
    order; the foot cycle is converted to joint tables through the closed-form
    inverse kinematics, the lateral node carries the turning sine.
    """
    grid = TWO_PI * np.arange(table_size) / table_size
    shapes = []
    for leg in LEGS:
        p = gait.legs[leg]
        x, z = foot_trajectory_arrays(grid, p)
        shapes.append(cpg.ShapeFunction(np.arctan2(x, -z)))
        shapes.append(cpg.ShapeFunction(np.hypot(x, z)))
        shapes.append(cpg.ShapeFunction(
            gait.aa_amplitudes[leg] * np.sin(grid)))
    node_phase = np.repeat([gait.phase_offsets[leg] for leg in LEGS], 3)
    n = len(shapes)
    coupling = np.full((n, n), cpg.TROT_COUPLING)
    np.fill_diagonal(coupling, 0.0)
    phase_bias = node_phase[None, :] - node_phase[:, None]
    params = cpg.OscillatorParams(omega=TWO_PI * gait.frequency, gamma=gamma,
                                  coupling=coupling, phase_bias=phase_bias,
                                  shapes=shapes)
    state = cpg.OscillatorState.on_cycle(params, node_phase)
    return params, state


def _weighted_yaw(weight, lever, value):
    """Least-squares rotation rate of pinned feet: cov(lever, value)/var."""
    n = np.maximum(weight.sum(axis=1), 1)
    ml = (weight * lever).sum(axis=1) / n
    mv = (weight * value).sum(axis=1) / n
    dl = lever - ml[:, None]
    cov = (weight * dl * (value - mv[:, None])).sum(axis=1) / n
    var = (weight * dl * dl).sum(axis=1) / n
    return np.where(var > 1e-12, cov / np.where(var > 0, var, 1.0), 0.0)


def _forward_fill(values):
    valid = ~np.isnan(values)
    if not valid.any():
        return values
    idx = np.where(valid, np.arange(len(values)), 0)
    np.maximum.accumulate(idx, out=idx)
    out = values[idx]
    first = np.argmax(valid)
    out[:first] = values[first]
    return out


def simulate(gait, duration, dt, body=BodyGeometry(), leg_geom=LegGeometry(),
             gamma=cpg.DEFAULT_GAMMA):
    """Run the gait for duration seconds at step dt; returns a TrajectoryLog.

    dt must give at least 50 samples per gait cycle (and respect the
    oscillator integrator guard). Raises SimulationError with timestamp and
    leg if any joint command leaves the leg workspace.
    """
    max_dt = min(cpg.MAX_DT, 1.0 / (50.0 * gait.frequency))
    if not 0.0 < dt <= max_dt * (1.0 + 1e-9):
        raise ConfigError(
            f"dt must be in (0, {max_dt:.6g}] s for {gait.frequency} Hz,"
            f" got {dt}")
    n_steps = int(round(duration / dt))
    if n_steps < 1:
        raise ConfigError("duration must cover at least one step")

    params, state = build_network(gait, gamma=gamma)
    t, _th, r = cpg.record(state, params, dt=dt, n_steps=n_steps)
    th_leg = _th[:, 0::3]
    la = r[:, 0::3]
    ll = r[:, 1::3]
    aa = r[:, 2::3]

    bad = ((ll < leg_geom.length_min - 1e-12) |
           (ll > leg_geom.length_max + 1e-12) |
           (np.abs(la) > leg_geom.leg_angle_range + 1e-12) |
           (np.abs(aa) > leg_geom.aa_range + 1e-12))
    if bad.any():
        k, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise SimulationError(
            f"joint command outside workspace at t={t[k]:.4f} s on leg"
            f" {LEGS[j].value}", t=float(t[k]), leg=LEGS[j])

    fx, fy, fz = _foot_local(la, ll, aa)
    duty = np.asarray([gait.legs[leg].duty_factor for leg in LEGS])
    steps = np.asarray([gait.legs[leg].step_length for leg in LEGS])
    stance = np.mod(th_leg, TWO_PI) < TWO_PI * duty

    st0, st1 = stance[:-1], stance[1:]
    full = st0 & st1
    entering = ~st0 & st1
    leaving = st0 & ~st1
    part = full | entering | leaving

    # fore-aft stance sweep per interval; partial intervals use the commanded
    # touchdown/liftoff points so displacement per cycle is exact to O(dt^2)
    entry_x, exit_x = 0.5 * steps, -0.5 * steps
    dx = np.where(full, fx[1:] - fx[:-1], 0.0)
    dx += np.where(entering, fx[1:] - entry_x, 0.0)
    dx += np.where(leaving, exit_x - fx[:-1], 0.0)
    dy = np.where(full, fy[1:] - fy[:-1], 0.0)

    traction = 1.0 - gait.slip
    n_part = part.sum(axis=1)
    d_fwd = -dx.sum(axis=1) / np.maximum(n_part, 1) * traction
    n_full = full.sum(axis=1)
    d_lat = -dy.sum(axis=1) / np.maximum(n_full, 1) * traction

    hip_x, hip_y = _hip_positions(body)
    dyaw_fa = _weighted_yaw(part.astype(float), hip_y, dx)
    dyaw_aa = -AA_YAW_GAIN * _weighted_yaw(full.astype(float), hip_x, dy)
    dyaw = (dyaw_fa + dyaw_aa) * traction

    yaw = np.concatenate([[0.0], np.cumsum(dyaw)])
    c, s = np.cos(yaw[:-1]), np.sin(yaw[:-1])
    x = np.concatenate([[0.0], np.cumsum(d_fwd * c - d_lat * s)])
    y = np.concatenate([[0.0], np.cumsum(d_fwd * s + d_lat * c)])

    n_st = stance.sum(axis=1)
    height = np.where(n_st > 0,
                      np.where(stance, -fz, 0.0).sum(axis=1)
                      / np.maximum(n_st, 1), np.nan)
    height = _forward_fill(height)

    power = rollout_power(la, ll, stance, dt, mass=body.mass)

    cy, sy = np.cos(yaw)[:, None], np.sin(yaw)[:, None]
    px, py = hip_x + fx, hip_y + fy
    foot_x_world = x[:, None] + cy * px - sy * py
    foot_y_world = y[:, None] + sy * px + cy * py

    return TrajectoryLog(t=t, x=x, y=y, yaw=yaw, hip_height=height,
                         leg_angle=la, leg_length=ll, aa_angle=aa,
                         contact=stance, foot_x_world=foot_x_world,
                         foot_y_world=foot_y_world, power=power,
                         frequency=gait.frequency, dt=dt)


def metrics(log):
    """Locomotion metrics over a log spanning at least 4 gait cycles."""
    cycles = log.duration * log.frequency
    if cycles < 4.0 - 1e-9:
        raise ValueError(
            f"log spans {cycles:.2f} cycles; at least 4 are required")

    step_disp = np.hypot(np.diff(log.x), np.diff(log.y))
    path = float(step_disp.sum())
    speed_avg = path / log.duration
    speed_peak = float(step_disp.max()) / log.dt

    n_cycles = int(cycles)
    k_end = int(round(n_cycles / log.frequency / log.dt))
    net = math.hypot(log.x[k_end] - log.x[0], log.y[k_end] - log.y[0])
    stride_effective = net / n_cycles / 2.0

    out = {
        "speed_avg_mps": speed_avg,
        "speed_peak_mps": speed_peak,
        "stride_effective_m": stride_effective,
        "com_vertical_oscillation_m":
            float(log.hip_height.max() - log.hip_height.min()) / 2.0,
    }
    duty = log.contact[:k_end + 1].mean(axis=0)
    for name, value in zip(TrajectoryLog.CSV_LEGS, duty):
        out[f"duty_factor_{name}"] = float(value)
    out["pitch_proxy_rad"] = _pitch_proxy(log)
    return out


def _pitch_proxy(log, body=BodyGeometry()):
    """Mean front-minus-hind stance height difference over the hip spacing."""
    heights = log.leg_length * np.cos(log.leg_angle) * np.cos(log.aa_angle)
    front = np.where(log.contact[:, :2], heights[:, :2], np.nan)
    hind = np.where(log.contact[:, 2:], heights[:, 2:], np.nan)
    with np.errstate(invalid="ignore"):
        diff = np.nanmean(front) - np.nanmean(hind)
    if np.isnan(diff):
        return 0.0
    return float(diff / body.hip_spacing)


def fit_circle(x, y):
    """Least-squares circle through planar points; returns (cx, cy, radius).

    Algebraic (Kasa) fit: linear in (cx, cy, cx^2 + cy^2 - r^2). Used as the
    fallback radius estimator when the path/yaw ratio is unusable (yaw not
    monotone); degenerate point sets raise ValueError.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    a = np.column_stack([2.0 * x, 2.0 * y, np.ones_like(x)])
    b = x * x + y * y
    sol, residual, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < 3:
        raise ValueError("points are degenerate; no unique circle")
    cx, cy, c = sol
    return float(cx), float(cy), float(math.sqrt(c + cx * cx + cy * cy))


def turning_metrics(log):
    """Turning radius, full-turn time and average speed from a log.

    Requires at least 90 degrees of net yaw; raises InsufficientYawError
    otherwise. radius = path length / |yaw change|, which equals the circle
    radius for arcs of monotone yaw (every log the simulator produces); for
    dithering-yaw recordings fit_circle() on (x, y) is the estimator to use
    instead.
    """
    dyaw = float(log.yaw[-1] - log.yaw[0])
    if abs(dyaw) < math.pi / 2.0:
        raise InsufficientYawError(
            f"InsufficientYaw: net yaw {dyaw:.3g} rad is below pi/2;"
            " cannot fit a turning circle")
    path = float(np.hypot(np.diff(log.x), np.diff(log.y)).sum())
    return {
        "radius_m": path / abs(dyaw),
        "time_full_turn_s": TWO_PI * log.duration / abs(dyaw),
        "speed_avg_mps": path / log.duration,
    }
