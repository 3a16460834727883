# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _kernel_py: fixed-step RK4 for the oscillator network.

Same call signatures and semantics as the NumPy fallback; the inner loops run
without Python overhead, which is what makes long rollouts (gait simulation,
swarm objective evaluations, phase-locking sweeps) cheap.
"""

import numpy as np

from libc.math cimport floor, sin

cdef double TWO_PI = 6.283185307179586


cdef inline void _shape_eval_one(const double* tab, Py_ssize_t m, double theta,
                                 double* f, double* dfd) noexcept nogil:
    cdef double u = theta * (m / TWO_PI)
    cdef double base = floor(u)
    cdef double t = u - base
    cdef Py_ssize_t i1 = (<Py_ssize_t>base) % m
    if i1 < 0:
        i1 += m
    cdef Py_ssize_t i0 = i1 - 1
    if i0 < 0:
        i0 += m
    cdef Py_ssize_t i2 = i1 + 1
    if i2 >= m:
        i2 -= m
    cdef Py_ssize_t i3 = i1 + 2
    if i3 >= m:
        i3 -= m
    cdef double p0 = tab[i0]
    cdef double p1 = tab[i1]
    cdef double p2 = tab[i2]
    cdef double p3 = tab[i3]
    cdef double a = p2 - p0
    cdef double b = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3
    cdef double c = -p0 + 3.0 * p1 - 3.0 * p2 + p3
    f[0] = p1 + 0.5 * t * (a + t * (b + t * c))
    dfd[0] = 0.5 * (a + t * (2.0 * b + 3.0 * t * c)) * (m / TWO_PI)


cdef void _derivs(const double* theta, const double* r, double omega,
                  double gamma, const double* coupling,
                  const double* phase_bias, Py_ssize_t n, const double* tables,
                  Py_ssize_t m, const double* xi, double* dtheta,
                  double* dr) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s, f, dfd
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += coupling[i * n + j] * sin(theta[j] - theta[i] - phase_bias[i * n + j])
        dtheta[i] = omega + s
    for i in range(n):
        _shape_eval_one(tables + i * m, m, theta[i], &f, &dfd)
        dr[i] = dtheta[i] * dfd + gamma * (f - r[i]) + xi[i]


cdef void _rk4_step(double* th, double* r, double omega, double gamma,
                    const double* coupling, const double* phase_bias,
                    Py_ssize_t n, const double* tables, Py_ssize_t m,
                    const double* xi, double dt, double* work) noexcept nogil:
    # work holds 10 scratch vectors of length n
    cdef double* k1t = work
    cdef double* k1r = work + n
    cdef double* k2t = work + 2 * n
    cdef double* k2r = work + 3 * n
    cdef double* k3t = work + 4 * n
    cdef double* k3r = work + 5 * n
    cdef double* k4t = work + 6 * n
    cdef double* k4r = work + 7 * n
    cdef double* tt = work + 8 * n
    cdef double* tr = work + 9 * n
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef Py_ssize_t i

    _derivs(th, r, omega, gamma, coupling, phase_bias, n, tables, m, xi, k1t, k1r)
    for i in range(n):
        tt[i] = th[i] + half * k1t[i]
        tr[i] = r[i] + half * k1r[i]
    _derivs(tt, tr, omega, gamma, coupling, phase_bias, n, tables, m, xi, k2t, k2r)
    for i in range(n):
        tt[i] = th[i] + half * k2t[i]
        tr[i] = r[i] + half * k2r[i]
    _derivs(tt, tr, omega, gamma, coupling, phase_bias, n, tables, m, xi, k3t, k3r)
    for i in range(n):
        tt[i] = th[i] + dt * k3t[i]
        tr[i] = r[i] + dt * k3r[i]
    _derivs(tt, tr, omega, gamma, coupling, phase_bias, n, tables, m, xi, k4t, k4r)
    for i in range(n):
        th[i] = th[i] + sixth * (k1t[i] + 2.0 * k2t[i] + 2.0 * k3t[i] + k4t[i])
        r[i] = r[i] + sixth * (k1r[i] + 2.0 * k2r[i] + 2.0 * k3r[i] + k4r[i])
        th[i] = th[i] - floor(th[i] / TWO_PI) * TWO_PI


def rk4_run(theta, r, double omega, double gamma, coupling, phase_bias,
            tables, xi, double dt, Py_ssize_t n_steps):
    """Advance batched states (B, N) by n_steps fixed RK4 steps.

    Returns new (theta, r) arrays; theta is wrapped to [0, 2*pi) after every
    step. Inputs are not modified.
    """
    th_arr = np.array(theta, dtype=np.float64, order="C")
    r_arr = np.array(r, dtype=np.float64, order="C")
    c_arr = np.ascontiguousarray(coupling, dtype=np.float64)
    p_arr = np.ascontiguousarray(phase_bias, dtype=np.float64)
    t_arr = np.ascontiguousarray(tables, dtype=np.float64)
    x_arr = np.ascontiguousarray(xi, dtype=np.float64)

    cdef double[:, ::1] th = th_arr
    cdef double[:, ::1] rr = r_arr
    cdef const double[:, ::1] cc = c_arr
    cdef const double[:, ::1] pp = p_arr
    cdef const double[:, ::1] tb = t_arr
    cdef const double[::1] xx = x_arr
    cdef Py_ssize_t nb = th.shape[0]
    cdef Py_ssize_t n = th.shape[1]
    cdef Py_ssize_t m = tb.shape[1]
    work_arr = np.empty(10 * n, dtype=np.float64)
    cdef double[::1] work = work_arr
    cdef Py_ssize_t b, k

    with nogil:
        for b in range(nb):
            for k in range(n_steps):
                _rk4_step(&th[b, 0], &rr[b, 0], omega, gamma, &cc[0, 0],
                          &pp[0, 0], n, &tb[0, 0], m, &xx[0], dt, &work[0])
    return th_arr, r_arr


def rk4_record(theta, r, double omega, double gamma, coupling, phase_bias,
               tables, xi, double dt, Py_ssize_t n_steps):
    """Integrate one (N,) state, recording every step.

    Returns (theta_hist, r_hist), each (n_steps + 1, N) with the initial
    state at row 0.
    """
    th_arr = np.array(theta, dtype=np.float64, order="C").reshape(-1)
    r_arr = np.array(r, dtype=np.float64, order="C").reshape(-1)
    c_arr = np.ascontiguousarray(coupling, dtype=np.float64)
    p_arr = np.ascontiguousarray(phase_bias, dtype=np.float64)
    t_arr = np.ascontiguousarray(tables, dtype=np.float64)
    x_arr = np.ascontiguousarray(xi, dtype=np.float64)

    cdef Py_ssize_t n = th_arr.shape[0]
    th_hist_arr = np.empty((n_steps + 1, n), dtype=np.float64)
    r_hist_arr = np.empty((n_steps + 1, n), dtype=np.float64)

    cdef double[::1] th = th_arr
    cdef double[::1] rr = r_arr
    cdef const double[:, ::1] cc = c_arr
    cdef const double[:, ::1] pp = p_arr
    cdef const double[:, ::1] tb = t_arr
    cdef const double[::1] xx = x_arr
    cdef double[:, ::1] th_hist = th_hist_arr
    cdef double[:, ::1] r_hist = r_hist_arr
    cdef Py_ssize_t m = tb.shape[1]
    work_arr = np.empty(10 * n, dtype=np.float64)
    cdef double[::1] work = work_arr
    cdef Py_ssize_t i, k

    with nogil:
        for i in range(n):
            th_hist[0, i] = th[i]
            r_hist[0, i] = rr[i]
        for k in range(n_steps):
            _rk4_step(&th[0], &rr[0], omega, gamma, &cc[0, 0], &pp[0, 0], n,
                      &tb[0, 0], m, &xx[0], dt, &work[0])
            for i in range(n):
                th_hist[k + 1, i] = th[i]
                r_hist[k + 1, i] = rr[i]
    return th_hist_arr, r_hist_arr
