"""Morphed-oscillator central pattern generator.

A network of N amplitude-controlled oscillators produces joint-angle
references. Each node i carries a phase theta_i and a radial output r_i that
is attracted onto a limit cycle shaped by a periodic function f_i:

    dtheta_i = Omega_i
    dr_i     = Omega_i * f_i'(theta_i) + gamma * (f_i(theta_i) - r_i) + xi_i
    Omega_i  = omega + sum_j c_ij * sin(theta_j - theta_i - phi_ij)

gamma sets how fast r converges onto the cycle, c_ij and phi_ij couple and
phase-lock the nodes, and xi_i is an additive feedback slot (zero for
open-loop gaits). r_i is the joint reference for the i-th degree of freedom.

Integration is fixed-step RK4 (default 1 ms); phases are re-wrapped to
[0, 2*pi) after every step, never inside derivative evaluation, so coupling
terms always see raw phase differences.
"""

from dataclasses import dataclass

import numpy as np

from . import kernel
from .errors import ConfigError, ValidationError

TWO_PI = 2.0 * np.pi

SHAPE_SAMPLES = 256

# stability guard for the fixed-step integrator
MAX_DT = 0.01

DEFAULT_GAMMA = 10.0
TROT_COUPLING = 5.0

# node ordering convention for quadruped networks: legs in the order
# LF, RF, LH, RH, oscillators grouped per leg (hip/leg-angle node first)
LEG_ORDER = ("LF", "RF", "LH", "RH")
TROT_LEG_PHASE = (0.0, np.pi, np.pi, 0.0)


class ShapeFunction:
    """Periodic limit-cycle shape stored as a uniform sample table.

    Samples live on the grid 2*pi*k/M for k in 0..M-1. Evaluation uses
    periodic local-cubic (Catmull-Rom) interpolation, exact at the nodes;
    the derivative is the analytic derivative of the same piecewise cubic,
    so it is consistent with finite differences of the values.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] < 4:
            raise ValidationError("shape table needs at least 4 samples")
        self.values = values

    @classmethod
    def from_callable(cls, fn, samples=SHAPE_SAMPLES):
        """Sample a callable f(theta) on the uniform grid."""
        grid = TWO_PI * np.arange(samples) / samples
        return cls(np.asarray([fn(g) for g in grid], dtype=np.float64))

    @classmethod
    def constant(cls, value, samples=SHAPE_SAMPLES):
        return cls(np.full(samples, float(value)))

    @classmethod
    def sine(cls, amplitude, samples=SHAPE_SAMPLES):
        grid = TWO_PI * np.arange(samples) / samples
        return cls(amplitude * np.sin(grid))

    @property
    def grid(self):
        m = self.values.shape[0]
        return TWO_PI * np.arange(m) / m

    def value(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        f, _ = kernel.shape_eval(self.values[None, :], theta[..., None])
        out = f[..., 0]
        return float(out) if theta.ndim == 0 else out

    def derivative(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        _, d = kernel.shape_eval(self.values[None, :], theta[..., None])
        out = d[..., 0]
        return float(out) if theta.ndim == 0 else out

    __call__ = value

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def __eq__(self, other):
        return isinstance(other, ShapeFunction) and np.array_equal(
            self.values, other.values)

    def __repr__(self):
        return f"ShapeFunction({self.values.shape[0]} samples)"


def encode_trajectory(samples, atol=1e-6, table_size=SHAPE_SAMPLES):
    """Encode one period of a sampled joint trajectory as a ShapeFunction.

    samples must cover one full period uniformly, endpoint included: sample k
    sits at phase 2*pi*k/(len-1), so the first and last values are the same
    point of the cycle and must agree within atol (otherwise the input is not
    periodic and a ValidationError is raised).
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.shape[0] < 5:
        raise ValidationError("trajectory needs at least 5 samples")
    if abs(samples[0] - samples[-1]) > atol:
        raise ValidationError(
            f"trajectory endpoints differ by {abs(samples[0] - samples[-1]):.3g}"
            f" (> {atol:.3g}); input does not cover a full period")
    period_values = samples[:-1]
    if period_values.shape[0] == table_size:
        return ShapeFunction(period_values)
    # resample onto the canonical grid with the same periodic interpolant
    grid = TWO_PI * np.arange(table_size) / table_size
    resampled, _ = kernel.shape_eval(period_values[None, :], grid[:, None])
    return ShapeFunction(resampled[:, 0])


@dataclass(eq=False)
class OscillatorParams:
    """Static description of an oscillator network.

    omega: common drive frequency in rad/s (2*pi times the gait frequency).
    gamma: limit-cycle convergence rate, 1/s.
    coupling: (N, N) non-negative coupling strengths, zero diagonal.
    phase_bias: (N, N) target phase differences, antisymmetric up to 2*pi
        wherever coupling is non-zero.
    shapes: N ShapeFunctions, one per node, all with equal table size.
    """

    omega: float
    gamma: float
    coupling: np.ndarray
    phase_bias: np.ndarray
    shapes: list

    def __post_init__(self):
        self.coupling = np.ascontiguousarray(self.coupling, dtype=np.float64)
        self.phase_bias = np.ascontiguousarray(self.phase_bias,
                                               dtype=np.float64)
        n = len(self.shapes)
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if self.omega < 0:
            raise ConfigError(f"omega must be >= 0, got {self.omega}")
        if self.coupling.shape != (n, n) or self.phase_bias.shape != (n, n):
            raise ConfigError(
                f"coupling/phase_bias must be ({n}, {n}) to match shapes")
        if np.any(self.coupling < 0):
            raise ConfigError("coupling entries must be >= 0")
        if np.any(np.diag(self.coupling) != 0):
            raise ConfigError("coupling diagonal must be zero")
        coupled = (self.coupling > 0) | (self.coupling.T > 0)
        mismatch = np.abs(
            np.remainder(self.phase_bias + self.phase_bias.T + np.pi, TWO_PI)
            - np.pi)
        if np.any(coupled & (mismatch > 1e-9)):
            raise ConfigError(
                "phase_bias must satisfy phi_ij == -phi_ji (mod 2*pi) for"
                " coupled pairs")
        sizes = {s.values.shape[0] for s in self.shapes}
        if len(sizes) > 1:
            raise ConfigError("all shape tables must have the same size")

    @property
    def n(self):
        return len(self.shapes)

    @property
    def shape_table(self):
        """Stacked (N, M) sample table handed to the integration kernel."""
        return np.ascontiguousarray(
            np.stack([s.values for s in self.shapes]))


@dataclass
class OscillatorState:
    """Phases (wrapped to [0, 2*pi) after each step) and radial outputs."""

    theta: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        self.theta = np.array(self.theta, dtype=np.float64).reshape(-1)
        self.r = np.array(self.r, dtype=np.float64).reshape(-1)
        if self.theta.shape != self.r.shape:
            raise ValueError(
                f"theta and r lengths differ: {self.theta.shape[0]} vs"
                f" {self.r.shape[0]}")

    @classmethod
    def on_cycle(cls, params, theta):
        """State lying exactly on the limit cycle at the given phases."""
        theta = np.asarray(theta, dtype=np.float64)
        r = np.asarray([s.value(t) for s, t in zip(params.shapes, theta)])
        return cls(theta, r)

    def copy(self):
        return OscillatorState(self.theta.copy(), self.r.copy())


@dataclass
class FeedbackTerm:
    """Additive feedback xi in rad/s per node; all zero for open-loop gaits."""

    xi: np.ndarray

    def __post_init__(self):
        self.xi = np.array(self.xi, dtype=np.float64).reshape(-1)

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n))


def _check_dims(state, params, fb):
    n = params.n
    if state.theta.shape[0] != n:
        raise ValueError(
            f"state has {state.theta.shape[0]} nodes, params has {n}")
    if fb.xi.shape[0] != n:
        raise ValueError(f"feedback has {fb.xi.shape[0]} nodes, params has {n}")


def derivatives(state, params, fb=None):
    """Evaluate (dtheta, dr) for one state. Raises ValueError on size mismatch."""
    if fb is None:
        fb = FeedbackTerm.zeros(params.n)
    _check_dims(state, params, fb)
    dth, dr = kernel.derivs(state.theta[None, :], state.r[None, :],
                            params.omega, params.gamma, params.coupling,
                            params.phase_bias, params.shape_table, fb.xi)
    return dth[0], dr[0]


def _check_dt(dt):
    if not 0.0 < dt <= MAX_DT:
        raise ConfigError(f"dt must be in (0, {MAX_DT}] s, got {dt}")


def integrate_step(state, params, fb=None, dt=1e-3):
    """Advance the network by one RK4 step of length dt (s)."""
    return run(state, params, fb=fb, dt=dt, n_steps=1)


def run(state, params, fb=None, dt=1e-3, n_steps=1):
    """Advance the network by n_steps RK4 steps; returns the final state.

    Calling run once with n_steps=k is bit-identical to k calls of
    integrate_step.
    """
    if fb is None:
        fb = FeedbackTerm.zeros(params.n)
    _check_dims(state, params, fb)
    _check_dt(dt)
    th, r = kernel.rk4_run(state.theta[None, :], state.r[None, :],
                           params.omega, params.gamma, params.coupling,
                           params.phase_bias, params.shape_table, fb.xi, dt,
                           n_steps)
    return OscillatorState(th[0], r[0])


def run_batch(thetas, rs, params, fb=None, dt=1e-3, n_steps=1):
    """Advance a batch of independent states (B, N) through the same network.

    Returns new (thetas, rs) arrays. Used for convergence studies over many
    initial conditions.
    """
    if fb is None:
        fb = FeedbackTerm.zeros(params.n)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    rs = np.atleast_2d(np.asarray(rs, dtype=np.float64))
    if thetas.shape[1] != params.n or rs.shape != thetas.shape:
        raise ValueError("batch state dimensions do not match params")
    _check_dt(dt)
    return kernel.rk4_run(thetas, rs, params.omega, params.gamma,
                          params.coupling, params.phase_bias,
                          params.shape_table, fb.xi, dt, n_steps)


def record(state, params, fb=None, dt=1e-3, n_steps=1):
    """Integrate and record every step.

    Returns (t, theta_hist, r_hist): t is (n_steps + 1,) seconds, the
    histories are (n_steps + 1, N) with the initial state in row 0.
    """
    if fb is None:
        fb = FeedbackTerm.zeros(params.n)
    _check_dims(state, params, fb)
    _check_dt(dt)
    th, r = kernel.rk4_record(state.theta, state.r, params.omega, params.gamma,
                              params.coupling, params.phase_bias,
                              params.shape_table, fb.xi, dt, n_steps)
    t = dt * np.arange(n_steps + 1)
    return t, th, r


def export_csv(path, t, theta_hist, r_hist):
    """Dump a recorded run as CSV columns (t, theta_1..N, r_1..N)."""
    n = theta_hist.shape[1]
    header = ["t"] + [f"theta_{i + 1}" for i in range(n)] \
        + [f"r_{i + 1}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(len(t)):
            row = [t[k], *theta_hist[k], *r_hist[k]]
            fh.write(",".join(format(float(v), ".10g") for v in row) + "\n")


def make_trot_network(frequency, legs=4, joints_per_leg=2, shapes=None,
                      gamma=DEFAULT_GAMMA):
    """Fully-coupled trot network for a quadruped.

    Nodes are grouped per leg in the order LF, RF, LH, RH (joints_per_leg
    nodes each, hip node first). Phase biases are pi between adjacent hips,
    0 between diagonal hips, 0 within a leg; every pair is coupled with
    strength 5. omega = 2*pi*frequency.

    shapes defaults to constant-zero tables; pass per-node ShapeFunctions to
    install joint trajectories.
    """
    if frequency <= 0:
        raise ConfigError(f"frequency must be > 0, got {frequency}")
    if legs != 4:
        raise ConfigError("trot network is defined for 4 legs")
    if joints_per_leg < 2:
        raise ConfigError("need at least 2 joints per leg")
    n = legs * joints_per_leg
    node_phase = np.repeat(TROT_LEG_PHASE, joints_per_leg)
    phase_bias = node_phase[None, :] - node_phase[:, None]
    coupling = np.full((n, n), TROT_COUPLING)
    np.fill_diagonal(coupling, 0.0)
    if shapes is None:
        shapes = [ShapeFunction.constant(0.0) for _ in range(n)]
    if len(shapes) != n:
        raise ConfigError(f"expected {n} shapes, got {len(shapes)}")
    return OscillatorParams(omega=TWO_PI * frequency, gamma=gamma,
                            coupling=coupling, phase_bias=phase_bias,
                            shapes=list(shapes))
