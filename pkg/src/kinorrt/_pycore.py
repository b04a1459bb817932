"""Pure-Python hot kernels.

This module mirrors ``_core.pyx`` function for function and is used when the
compiled extension is unavailable (or when ``KINORRT_PURE_PYTHON`` is set).
States are length-4 sequences ``(px, py, vx, vy)``; obstacles are rows of
``(cx, cy, vx, vy, radius)``.
"""

import math

import numpy as np

ROOT_TOL = 1e-8
STEP_TOL = 1e-10
MAX_ITER = 100
MAX_RESTARTS = 100
EQUAL_TOL = 1e-9

_GOLDEN = 0.6180339887498949


def states_equal(xi, xf):
    for k in range(4):
        if abs(xi[k] - xf[k]) >= EQUAL_TOL:
            return False
    return True


def arrival_cost(xi, xf, tau, r):
    t2 = tau * tau
    t3 = t2 * tau
    c = tau
    for ax in range(2):
        dp = xf[ax] - xi[ax] - xi[ax + 2] * tau
        dv = xf[ax + 2] - xi[ax + 2]
        c += r * (12.0 * dp * dp / t3 - 12.0 * dp * dv / t2 + 4.0 * dv * dv / tau)
    return c


def cost_derivative(xi, xf, tau, r):
    t2 = tau * tau
    t3 = t2 * tau
    dc = 1.0
    for ax in range(2):
        dp = xf[ax] - xi[ax] - xi[ax + 2] * tau
        dv = xf[ax + 2] - xi[ax + 2]
        d_p = r * (12.0 * dp / t3 - 6.0 * dv / t2)
        d_v = r * (-6.0 * dp / t2 + 4.0 * dv / tau)
        dc -= 2.0 * xf[ax + 2] * d_p + d_v * d_v / r
    return dc


def _secant(xi, xf, r, t0, t1):
    """Secant iteration on the cost derivative; NaN on failure."""
    f0 = cost_derivative(xi, xf, t0, r)
    f1 = cost_derivative(xi, xf, t1, r)
    for _ in range(MAX_ITER):
        if abs(f1) < ROOT_TOL:
            return t1
        if f1 == f0:
            return math.nan
        t2 = t1 - f1 * (t1 - t0) / (f1 - f0)
        if not math.isfinite(t2) or t2 <= 0.0:
            return math.nan
        if abs(t2 - t1) < STEP_TOL:
            return t2
        t0, f0 = t1, f1
        t1 = t2
        f1 = cost_derivative(xi, xf, t1, r)
    return math.nan


def _poly_coeffs(xi, xf, r):
    # tau^4 * dc/dtau = tau^4 - r*k*tau^2 - 2*r*b*tau - 3*r*a
    a = b = k = 0.0
    for ax in range(2):
        dp = xf[ax] - xi[ax]
        vi = xi[ax + 2]
        vf = xf[ax + 2]
        a += 12.0 * dp * dp
        b -= 12.0 * dp * (vi + vf)
        k += 4.0 * (vi * vi + vi * vf + vf * vf)
    return a, b, k


def _cbrt(x):
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _cubic_roots(b2, b1, b0):
    """Real roots of x^3 + b2 x^2 + b1 x + b0."""
    shift = -b2 / 3.0
    p = b1 - b2 * b2 / 3.0
    q = 2.0 * b2 * b2 * b2 / 27.0 - b2 * b1 / 3.0 + b0
    disc = 0.25 * q * q + p * p * p / 27.0
    if disc > 0.0 or p >= 0.0:
        sq = math.sqrt(max(disc, 0.0))
        return [_cbrt(-0.5 * q + sq) + _cbrt(-0.5 * q - sq) + shift]
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg) / 3.0
    return [m * math.cos(theta - 2.0 * math.pi * j / 3.0) + shift for j in range(3)]


def _polish(t, r, a, b, k):
    # Newton on the quartic; the root is already close
    for _ in range(8):
        p = ((t * t - r * k) * t - 2.0 * r * b) * t - 3.0 * r * a
        dp = (4.0 * t * t - 2.0 * r * k) * t - 2.0 * r * b
        if dp == 0.0:
            break
        step = p / dp
        t -= step
        if abs(step) < STEP_TOL * max(1.0, t):
            break
    return t


def _curvature_sign(t, r, b, k):
    return (4.0 * t * t - 2.0 * r * k) * t - 2.0 * r * b


def _quasi_random(k):
    u = (0.5 + k * _GOLDEN) % 1.0
    return u if u > 0.0 else 0.5


def optimal_arrival_time(xi, xf, r):
    """Optimal arrival time; 0.0 for equal states, NaN if no root is found."""
    if states_equal(xi, xf):
        return 0.0
    dist = math.hypot(xf[0] - xi[0], xf[1] - xi[1])
    t_hi = 2.0 * (dist + 1.0)
    tau = _secant(xi, xf, r, 1.0, t_hi)
    restart = 0
    while not (tau > 0.0) and restart < MAX_RESTARTS:
        restart += 1
        t0 = 2.0 * t_hi * _quasi_random(restart)
        tau = _secant(xi, xf, r, t0, 1.1 * t0)
    if not (tau > 0.0):
        return math.nan

    a, b, k = _poly_coeffs(xi, xf, r)
    if b >= 0.0:
        # one sign change in the quartic: the root is unique
        return tau
    # up to three positive roots; compare every local minimum
    q2 = tau
    q1 = tau * q2 - r * k
    q0 = tau * q1 - 2.0 * r * b
    best = math.nan
    best_cost = math.inf
    for cand in [tau] + _cubic_roots(q2, q1, q0):
        if not (cand > 0.0) or not math.isfinite(cand):
            continue
        if cand != tau:
            cand = _polish(cand, r, a, b, k)
            if not (cand > 0.0):
                continue
        if _curvature_sign(cand, r, b, k) <= 0.0:
            continue
        c = arrival_cost(xi, xf, cand, r)
        if c < best_cost:
            best_cost = c
            best = cand
    if best != best:
        return tau
    if best != tau and abs(cost_derivative(xi, xf, best, r)) >= ROOT_TOL:
        refined = _secant(xi, xf, r, best, best * (1.0 + 1e-6))
        if refined > 0.0:
            best = refined
    return best


def steer(xi, xf, r):
    """Return ``(tau, cost)`` of the optimal connection, NaNs on failure."""
    tau = optimal_arrival_time(xi, xf, r)
    if tau == 0.0:
        return 0.0, 0.0
    if tau != tau:
        return math.nan, math.nan
    return tau, arrival_cost(xi, xf, tau, r)


def steer_many(states, q, r, reverse):
    """Steer from every row of ``states`` to ``q`` (or from ``q`` when reverse)."""
    states = np.asarray(states, dtype=np.float64)
    q = [float(v) for v in q]
    n = states.shape[0]
    taus = np.empty(n)
    costs = np.empty(n)
    for i in range(n):
        s = states[i].tolist()
        if reverse:
            taus[i], costs[i] = steer(q, s, r)
        else:
            taus[i], costs[i] = steer(s, q, r)
    return taus, costs


def _dual(xi, xf, tau, r):
    t2 = tau * tau
    t3 = t2 * tau
    out = []
    for ax in range(2):
        dp = xf[ax] - xi[ax] - xi[ax + 2] * tau
        dv = xf[ax + 2] - xi[ax + 2]
        out.append(r * (12.0 * dp / t3 - 6.0 * dv / t2))
        out.append(r * (-6.0 * dp / t2 + 4.0 * dv / tau))
    return out


def _state_at(xf, dual, s, r):
    # s = tau - t; closed-form composite state/costate propagation
    row = []
    for ax in range(2):
        d_p = dual[2 * ax]
        d_v = dual[2 * ax + 1]
        pf = xf[ax]
        vf = xf[ax + 2]
        p = pf - s * vf + s * s * s / (6.0 * r) * d_p + s * s / (2.0 * r) * d_v
        v = vf - s * s / (2.0 * r) * d_p - s / r * d_v
        u = (s * d_p + d_v) / r
        row.append((p, v, u))
    return row


def sample_count(tau, dt):
    if tau <= 0.0:
        return 1
    n = int(math.ceil(tau / dt))
    if tau - (n - 1) * dt < 1e-12:
        n -= 1
    return n + 1


def sample_trajectory(xi, xf, tau, r, dt):
    """Rows ``(t, px, py, vx, vy, ax, ay)`` at step ``dt``, last row at ``tau``."""
    xi = [float(v) for v in xi]
    xf = [float(v) for v in xf]
    n = sample_count(tau, dt)
    out = np.zeros((n, 7))
    if n == 1:
        out[0, 1:5] = xf
        return out
    dual = _dual(xi, xf, tau, r)
    for i in range(n):
        t = tau if i == n - 1 else i * dt
        (px, vx, ux), (py, vy, uy) = _state_at(xf, dual, tau - t, r)
        out[i] = (t, px, py, vx, vy, ux, uy)
    return out


def segment_circle_hit(ax, ay, bx, by, cx, cy, radius):
    ex = bx - ax
    ey = by - ay
    ll = ex * ex + ey * ey
    u = 0.0
    if ll > 0.0:
        u = ((cx - ax) * ex + (cy - ay) * ey) / ll
        u = min(1.0, max(0.0, u))
    dx = ax + u * ex - cx
    dy = ay + u * ey - cy
    return dx * dx + dy * dy <= radius * radius


def _segment_hits(t_s, ax, ay, a_s, t_e, bx, by, a_e, t0, obstacles, inflation):
    h = t_e - t_s
    # chord-to-curve deviation bound for an interpolated C2 path
    bow = 0.125 * h * h * max(a_s, a_e)
    for o in obstacles:
        t = t0 + t_s
        cx = o[0] + o[2] * t
        cy = o[1] + o[3] * t
        rad = o[4] + inflation + math.hypot(o[2], o[3]) * h + bow
        if segment_circle_hit(ax, ay, bx, by, cx, cy, rad):
            return True
    return False


def polyline_collides(samples, t0, obstacles, inflation):
    samples = np.asarray(samples, dtype=np.float64)
    obs = np.asarray(obstacles, dtype=np.float64).reshape(-1, 5).tolist()
    if not obs or samples.shape[0] < 2:
        return False
    rows = samples[:, :7].tolist()
    prev = rows[0]
    a_prev = math.hypot(prev[5], prev[6])
    for row in rows[1:]:
        a_cur = math.hypot(row[5], row[6])
        if _segment_hits(prev[0], prev[1], prev[2], a_prev, row[0], row[1], row[2], a_cur,
                         t0, obs, inflation):
            return True
        prev = row
        a_prev = a_cur
    return False


def edge_collides(xi, xf, tau, r, t0, dt, obstacles, inflation):
    """Collision test of the optimal edge without materializing its samples."""
    obs = np.asarray(obstacles, dtype=np.float64).reshape(-1, 5).tolist()
    n = sample_count(tau, dt)
    if not obs or n < 2:
        return False
    xi = [float(v) for v in xi]
    xf = [float(v) for v in xf]
    dual = _dual(xi, xf, tau, r)
    (px, _, ux), (py, _, uy) = _state_at(xf, dual, tau, r)
    t_prev = 0.0
    a_prev = math.hypot(ux, uy)
    for i in range(1, n):
        t = tau if i == n - 1 else i * dt
        (qx, _, ux), (qy, _, uy) = _state_at(xf, dual, tau - t, r)
        a_cur = math.hypot(ux, uy)
        if _segment_hits(t_prev, px, py, a_prev, t, qx, qy, a_cur, t0, obs, inflation):
            return True
        t_prev, px, py, a_prev = t, qx, qy, a_cur
    return False
