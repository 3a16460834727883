"""NumPy implementation of the oscillator integration kernels.

This is the import-time fallback when the compiled extension is missing and
the reference the compiled kernel is checked against. All state arrays carry
a leading batch axis so that many independent networks (e.g. random
initialisations of the same gait network) integrate in one vectorised pass.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def shape_eval(tables, theta):
    """Evaluate periodic interpolation tables and their derivative.

    tables: (N, M) samples of N periodic functions on the uniform grid
        2*pi*k/M.
    theta: (..., N) phases in radians; any real value is accepted, the
        evaluation is 2*pi-periodic.

    Returns (f, df_dtheta), each shaped like theta. Interpolation is local
    cubic (Catmull-Rom), which reproduces table values exactly at the nodes;
    the derivative is the analytic derivative of the same piecewise cubic.
    """
    n, m = tables.shape
    u = theta * (m / TWO_PI)
    base = np.floor(u)
    t = u - base
    i1 = base.astype(np.int64) % m
    i0 = (i1 - 1) % m
    i2 = (i1 + 1) % m
    i3 = (i1 + 2) % m
    node = np.arange(n, dtype=np.int64) * m
    flat = tables.ravel()
    p0 = flat[node + i0]
    p1 = flat[node + i1]
    p2 = flat[node + i2]
    p3 = flat[node + i3]
    a = p2 - p0
    b = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3
    c = -p0 + 3.0 * p1 - 3.0 * p2 + p3
    f = p1 + 0.5 * t * (a + t * (b + t * c))
    dfd = 0.5 * (a + t * (2.0 * b + 3.0 * t * c)) * (m / TWO_PI)
    return f, dfd


def derivs(theta, r, omega, gamma, coupling, phase_bias, tables, xi):
    """Network derivatives (dtheta, dr) for batched states shaped (B, N)."""
    # diff[b, i, j] = theta_j - theta_i - phi_ij, evaluated on raw phases
    diff = theta[:, None, :] - theta[:, :, None] - phase_bias
    big_omega = omega + np.einsum("ij,bij->bi", coupling, np.sin(diff))
    f, dfd = shape_eval(tables, theta)
    dr = big_omega * dfd + gamma * (f - r) + xi
    return big_omega, dr


def _rk4_step(theta, r, omega, gamma, coupling, phase_bias, tables, xi, dt):
    half = 0.5 * dt
    sixth = dt / 6.0
    k1t, k1r = derivs(theta, r, omega, gamma, coupling, phase_bias, tables, xi)
    k2t, k2r = derivs(theta + half * k1t, r + half * k1r, omega, gamma,
                      coupling, phase_bias, tables, xi)
    k3t, k3r = derivs(theta + half * k2t, r + half * k2r, omega, gamma,
                      coupling, phase_bias, tables, xi)
    k4t, k4r = derivs(theta + dt * k3t, r + dt * k3r, omega, gamma,
                      coupling, phase_bias, tables, xi)
    theta = theta + sixth * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    r = r + sixth * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    # wrap once per step so coupling terms always see raw phase differences
    theta = theta - np.floor(theta / TWO_PI) * TWO_PI
    return theta, r


def rk4_run(theta, r, omega, gamma, coupling, phase_bias, tables, xi, dt,
            n_steps):
    """Advance batched states (B, N) by n_steps fixed RK4 steps.

    Returns new (theta, r) arrays; theta is wrapped to [0, 2*pi) after every
    step. Inputs are not modified.
    """
    theta = np.array(theta, dtype=np.float64)
    r = np.array(r, dtype=np.float64)
    for _ in range(n_steps):
        theta, r = _rk4_step(theta, r, omega, gamma, coupling, phase_bias,
                             tables, xi, dt)
    return theta, r


def rk4_record(theta, r, omega, gamma, coupling, phase_bias, tables, xi, dt,
               n_steps):
    """Integrate one (N,) state, recording every step.

    Returns (theta_hist, r_hist), each (n_steps + 1, N) with the initial
    state at row 0.
    """
    n = theta.shape[-1]
    th_hist = np.empty((n_steps + 1, n))
    r_hist = np.empty((n_steps + 1, n))
    th = np.array(theta, dtype=np.float64).reshape(1, n)
    rr = np.array(r, dtype=np.float64).reshape(1, n)
    th_hist[0] = th[0]
    r_hist[0] = rr[0]
    for k in range(n_steps):
        th, rr = _rk4_step(th, rr, omega, gamma, coupling, phase_bias,
                           tables, xi, dt)
        th_hist[k + 1] = th[0]
        r_hist[k + 1] = rr[0]
    return th_hist, r_hist
