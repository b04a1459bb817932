# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_pycore`` for the reference implementation."""

import numpy as np

from libc.math cimport acos, cos, ceil, fabs, fmax, fmin, hypot, isfinite, sqrt, pow, copysign, fmod, NAN, INFINITY, M_PI

cdef double ROOT_TOL = 1e-8
cdef double STEP_TOL = 1e-10
cdef int MAX_ITER = 100
cdef int MAX_RESTARTS = 100
cdef double EQUAL_TOL = 1e-9
cdef double _GOLDEN = 0.6180339887498949


cdef inline void _load(object x, double* out):
    cdef int k
    for k in range(4):
        out[k] = <double>x[k]


cdef bint _equal(const double* xi, const double* xf) noexcept nogil:
    cdef int k
    for k in range(4):
        if fabs(xi[k] - xf[k]) >= EQUAL_TOL:
            return False
    return True


cdef double _cost(const double* xi, const double* xf, double tau, double r) noexcept nogil:
    cdef double t2 = tau * tau
    cdef double t3 = t2 * tau
    cdef double c = tau
    cdef double dp, dv
    cdef int ax
    for ax in range(2):
        dp = xf[ax] - xi[ax] - xi[ax + 2] * tau
        dv = xf[ax + 2] - xi[ax + 2]
        c += r * (12.0 * dp * dp / t3 - 12.0 * dp * dv / t2 + 4.0 * dv * dv / tau)
    return c


cdef double _dcost(const double* xi, const double* xf, double tau, double r) noexcept nogil:
    cdef double t2 = tau * tau
    cdef double t3 = t2 * tau
    cdef double dc = 1.0
    cdef double dp, dv, d_p, d_v
    cdef int ax
    for ax in range(2):
        dp = xf[ax] - xi[ax] - xi[ax + 2] * tau
        dv = xf[ax + 2] - xi[ax + 2]
        d_p = r * (12.0 * dp / t3 - 6.0 * dv / t2)
        d_v = r * (-6.0 * dp / t2 + 4.0 * dv / tau)
        dc -= 2.0 * xf[ax + 2] * d_p + d_v * d_v / r
    return dc


cdef double _secant(const double* xi, const double* xf, double r, double t0, double t1) noexcept nogil:
    cdef double f0 = _dcost(xi, xf, t0, r)
    cdef double f1 = _dcost(xi, xf, t1, r)
    cdef double t2
    cdef int it
    for it in range(MAX_ITER):
        if fabs(f1) < ROOT_TOL:
            return t1
        if f1 == f0:
            return NAN
        t2 = t1 - f1 * (t1 - t0) / (f1 - f0)
        if not isfinite(t2) or t2 <= 0.0:
            return NAN
        if fabs(t2 - t1) < STEP_TOL:
            return t2
        t0 = t1
        f0 = f1
        t1 = t2
        f1 = _dcost(xi, xf, t1, r)
    return NAN


cdef inline double _cbrt(double x) noexcept nogil:
    return copysign(pow(fabs(x), 1.0 / 3.0), x)


cdef int _cubic_roots(double b2, double b1, double b0, double* out) noexcept nogil:
    cdef double shift = -b2 / 3.0
    cdef double p = b1 - b2 * b2 / 3.0
    cdef double q = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0
    cdef double disc = 0.25 * q * q + p * p * p / 27.0
    cdef double sq, m, arg, theta
    cdef int j
    if disc > 0.0 or p >= 0.0:
        sq = sqrt(fmax(disc, 0.0))
        out[0] = _cbrt(-0.5 * q + sq) + _cbrt(-0.5 * q - sq) + shift
        return 1
    m = 2.0 * sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    arg = fmin(1.0, fmax(-1.0, arg))
    theta = acos(arg) / 3.0
    for j in range(3):
        out[j] = m * cos(theta - 2.0 * M_PI * j / 3.0) + shift
    return 3


cdef double _polish(double t, double r, double a, double b, double k) noexcept nogil:
    cdef double p, dp, step
    cdef int it
    for it in range(8):
        p = ((t * t - r * k) * t - 2.0 * r * b) * t - 3.0 * r * a
        dp = (4.0 * t * t - 2.0 * r * k) * t - 2.0 * r * b
        if dp == 0.0:
            break
        step = p / dp
        t -= step
        if fabs(step) < STEP_TOL * fmax(1.0, t):
            break
    return t


cdef inline double _quasi_random(int k) noexcept nogil:
    cdef double u = fmod(0.5 + k * _GOLDEN, 1.0)
    return u if u > 0.0 else 0.5


cdef double _arrival_time(const double* xi, const double* xf, double r) noexcept nogil:
    cdef double dist, t_hi, tau, t0, a, b, k, dp, vi, vf, q2, q1, q0
    cdef double best, best_cost, cand, c, refined
    cdef double[4] cands
    cdef int restart, ax, n, j
    if _equal(xi, xf):
        return 0.0
    dist = hypot(xf[0] - xi[0], xf[1] - xi[1])
    t_hi = 2.0 * (dist + 1.0)
    tau = _secant(xi, xf, r, 1.0, t_hi)
    restart = 0
    while not (tau > 0.0) and restart < MAX_RESTARTS:
        restart += 1
        t0 = 2.0 * t_hi * _quasi_random(restart)
        tau = _secant(xi, xf, r, t0, 1.1 * t0)
    if not (tau > 0.0):
        return NAN

    a = 0.0
    b = 0.0
    k = 0.0
    for ax in range(2):
        dp = xf[ax] - xi[ax]
        vi = xi[ax + 2]
        vf = xf[ax + 2]
        a += 12.0 * dp * dp
        b -= 12.0 * dp * (vi + vf)
        k += 4.0 * (vi * vi + vi * vf + vf * vf)
    if b >= 0.0:
        return tau
    q2 = tau
    q1 = tau * q2 - r * k
    q0 = tau * q1 - 2.0 * r * b
    cands[0] = tau
    n = 1 + _cubic_roots(q2, q1, q0, &cands[1])
    best = NAN
    best_cost = INFINITY
    for j in range(n):
        cand = cands[j]
        if not (cand > 0.0) or not isfinite(cand):
            continue
        if j > 0 and cand != tau:
            cand = _polish(cand, r, a, b, k)
            if not (cand > 0.0):
                continue
        if (4.0 * cand * cand - 2.0 * r * k) * cand - 2.0 * r * b <= 0.0:
            continue
        c = _cost(xi, xf, cand, r)
        if c < best_cost:
            best_cost = c
            best = cand
    if best != best:
        return tau
    if best != tau and fabs(_dcost(xi, xf, best, r)) >= ROOT_TOL:
        refined = _secant(xi, xf, r, best, best * (1.0 + 1e-6))
        if refined > 0.0:
            best = refined
    return best


cdef inline void _dual(const double* xi, const double* xf, double tau, double r, double* out) noexcept nogil:
    cdef double t2 = tau * tau
    cdef double t3 = t2 * tau
    cdef double dp, dv
    cdef int ax
    for ax in range(2):
        dp = xf[ax] - xi[ax] - xi[ax + 2] * tau
        dv = xf[ax + 2] - xi[ax + 2]
        out[2 * ax] = r * (12.0 * dp / t3 - 6.0 * dv / t2)
        out[2 * ax + 1] = r * (-6.0 * dp / t2 + 4.0 * dv / tau)


cdef inline void _state_at(const double* xf, const double* dual, double s, double r, double* out) noexcept nogil:
    # out = (px, py, vx, vy, ux, uy)
    cdef double d_p, d_v
    cdef int ax
    for ax in range(2):
        d_p = dual[2 * ax]
        d_v = dual[2 * ax + 1]
        out[ax] = xf[ax] - s * xf[ax + 2] + s * s * s / (6.0 * r) * d_p + s * s / (2.0 * r) * d_v
        out[ax + 2] = xf[ax + 2] - s * s / (2.0 * r) * d_p - s / r * d_v
        out[ax + 4] = (s * d_p + d_v) / r


cdef inline Py_ssize_t _sample_count(double tau, double dt) noexcept nogil:
    cdef Py_ssize_t n
    if tau <= 0.0:
        return 1
    n = <Py_ssize_t>ceil(tau / dt)
    if tau - (n - 1) * dt < 1e-12:
        n -= 1
    return n + 1


cdef inline bint _seg_hit(double ax, double ay, double bx, double by,
                          double cx, double cy, double radius) noexcept nogil:
    cdef double ex = bx - ax
    cdef double ey = by - ay
    cdef double ll = ex * ex + ey * ey
    cdef double u = 0.0
    cdef double dx, dy
    if ll > 0.0:
        u = ((cx - ax) * ex + (cy - ay) * ey) / ll
        u = fmin(1.0, fmax(0.0, u))
    dx = ax + u * ex - cx
    dy = ay + u * ey - cy
    return dx * dx + dy * dy <= radius * radius


cdef bint _segment_hits(double t_s, double ax, double ay, double a_s,
                        double t_e, double bx, double by, double a_e,
                        double t0, const double[:, ::1] obs, double inflation) noexcept nogil:
    cdef double h = t_e - t_s
    cdef double bow = 0.125 * h * h * fmax(a_s, a_e)
    cdef double t = t0 + t_s
    cdef double cx, cy, rad
    cdef Py_ssize_t j
    for j in range(obs.shape[0]):
        cx = obs[j, 0] + obs[j, 2] * t
        cy = obs[j, 1] + obs[j, 3] * t
        rad = obs[j, 4] + inflation + hypot(obs[j, 2], obs[j, 3]) * h + bow
        if _seg_hit(ax, ay, bx, by, cx, cy, rad):
            return True
    return False


cdef inline const double[:, ::1] _as_obstacles(object obstacles):
    return np.ascontiguousarray(obstacles, dtype=np.float64).reshape(-1, 5)


# ---------------------------------------------------------------- Python API

def states_equal(xi, xf):
    cdef double[4] a
    _load(xi, a)
    cdef double[4] b
    _load(xf, b)
    return _equal(a, b)


def arrival_cost(xi, xf, double tau, double r):
    cdef double[4] a
    _load(xi, a)
    cdef double[4] b
    _load(xf, b)
    return _cost(a, b, tau, r)


def cost_derivative(xi, xf, double tau, double r):
    cdef double[4] a
    _load(xi, a)
    cdef double[4] b
    _load(xf, b)
    return _dcost(a, b, tau, r)


def optimal_arrival_time(xi, xf, double r):
    cdef double[4] a
    _load(xi, a)
    cdef double[4] b
    _load(xf, b)
    return _arrival_time(a, b, r)


def steer(xi, xf, double r):
    cdef double[4] a
    _load(xi, a)
    cdef double[4] b
    _load(xf, b)
    cdef double tau = _arrival_time(a, b, r)
    if tau == 0.0:
        return 0.0, 0.0
    if tau != tau:
        return NAN, NAN
    return tau, _cost(a, b, tau, r)


def steer_many(states, q, double r, bint reverse):
    cdef const double[:, ::1] s = np.ascontiguousarray(states, dtype=np.float64).reshape(-1, 4)
    cdef double[4] qq
    _load(q, qq)
    cdef Py_ssize_t n = s.shape[0]
    taus_arr = np.empty(n)
    costs_arr = np.empty(n)
    cdef double[::1] taus = taus_arr
    cdef double[::1] costs = costs_arr
    cdef double[4] row
    cdef double tau
    cdef Py_ssize_t i
    cdef int k
    with nogil:
        for i in range(n):
            for k in range(4):
                row[k] = s[i, k]
            if reverse:
                tau = _arrival_time(qq, row, r)
            else:
                tau = _arrival_time(row, qq, r)
            taus[i] = tau
            if tau == 0.0:
                costs[i] = 0.0
            elif tau != tau:
                costs[i] = NAN
            elif reverse:
                costs[i] = _cost(qq, row, tau, r)
            else:
                costs[i] = _cost(row, qq, tau, r)
    return taus_arr, costs_arr


def sample_count(double tau, double dt):
    return _sample_count(tau, dt)


def sample_trajectory(xi, xf, double tau, double r, double dt):
    cdef double[4] a
    _load(xi, a)
    cdef double[4] b
    _load(xf, b)
    cdef Py_ssize_t n = _sample_count(tau, dt)
    out_arr = np.zeros((n, 7))
    cdef double[:, ::1] out = out_arr
    cdef double[4] dual
    cdef double[6] st
    cdef double t
    cdef Py_ssize_t i
    cdef int k
    if n == 1:
        for k in range(4):
            out[0, k + 1] = b[k]
        return out_arr
    _dual(a, b, tau, r, dual)
    for i in range(n):
        t = tau if i == n - 1 else i * dt
        _state_at(b, dual, tau - t, r, st)
        out[i, 0] = t
        for k in range(6):
            out[i, k + 1] = st[k]
    return out_arr


def segment_circle_hit(double ax, double ay, double bx, double by,
                       double cx, double cy, double radius):
    return _seg_hit(ax, ay, bx, by, cx, cy, radius)


def polyline_collides(samples, double t0, obstacles, double inflation):
    cdef const double[:, ::1] obs = _as_obstacles(obstacles)
    cdef const double[:, ::1] s = np.ascontiguousarray(samples, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double a_prev, a_cur
    cdef bint hit = False
    if obs.shape[0] == 0 or s.shape[0] < 2:
        return False
    with nogil:
        a_prev = hypot(s[0, 5], s[0, 6])
        for i in range(1, s.shape[0]):
            a_cur = hypot(s[i, 5], s[i, 6])
            if _segment_hits(s[i - 1, 0], s[i - 1, 1], s[i - 1, 2], a_prev,
                             s[i, 0], s[i, 1], s[i, 2], a_cur, t0, obs, inflation):
                hit = True
                break
            a_prev = a_cur
    return hit


def edge_collides(xi, xf, double tau, double r, double t0, double dt, obstacles, double inflation):
    cdef const double[:, ::1] obs = _as_obstacles(obstacles)
    cdef double[4] a
    _load(xi, a)
    cdef double[4] b
    _load(xf, b)
    cdef Py_ssize_t n = _sample_count(tau, dt)
    cdef double[4] dual
    cdef double[6] st
    cdef double t, t_prev, px, py, a_prev, a_cur
    cdef Py_ssize_t i
    cdef bint hit = False
    if obs.shape[0] == 0 or n < 2:
        return False
    with nogil:
        _dual(a, b, tau, r, dual)
        _state_at(b, dual, tau, r, st)
        t_prev = 0.0
        px = st[0]
        py = st[1]
        a_prev = hypot(st[4], st[5])
        for i in range(1, n):
            t = tau if i == n - 1 else i * dt
            _state_at(b, dual, tau - t, r, st)
            a_cur = hypot(st[4], st[5])
            if _segment_hits(t_prev, px, py, a_prev, t, st[0], st[1], a_cur, t0, obs, inflation):
                hit = True
                break
            t_prev = t
            px = st[0]
            py = st[1]
            a_prev = a_cur
    return hit
