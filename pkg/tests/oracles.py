"""Independent reference computations shared by the unit and acceptance tests."""

import math

import numpy as np

from kinorrt import obvp


def grid_cost(xi, xf, r, grid):
    """Arrival cost on a time grid, vectorized from the expanded quadratic form.

    Checked against a quadrature Gramian with a general linear solve in the
    obvp tests.
    """
    dp = xf[:2] - xi[:2] - np.outer(grid, xi[2:])
    dv = xf[2:] - xi[2:]
    return grid + r * (12 * (dp**2).sum(1) / grid**3 - 12 * (dp @ dv) / grid**2 + 4 * (dv @ dv) / grid)


def brute_force_time(d, v0, vm, am, step=1e-3):
    """Best bang-coast-bang time over a grid of first-switch times.

    Profiles are ``s1*am`` for ``t1``, a coast at the reached rate, then the
    stopping bang.  ``t1`` runs over a ``step`` grid; the coast time follows
    from the displacement.
    """
    best = math.inf
    horizon = 2.0 * (abs(v0) / am + abs(d) / vm + vm / am) + 1.0
    t1 = np.arange(0.0, horizon, step)
    for s1 in (1.0, -1.0):
        v1 = v0 + s1 * am * t1
        # the bang may pass through higher speeds only while decelerating from an over-speed start
        ok = (np.abs(v1) <= vm + 1e-12) | ((np.abs(v1) <= abs(v0)) & (s1 * v0 < 0))
        p1 = v0 * t1 + 0.5 * s1 * am * t1**2
        t3 = np.abs(v1) / am
        p3 = v1 * t3 - 0.5 * np.sign(v1) * am * t3**2
        rest = d - p1 - p3
        with np.errstate(divide="ignore", invalid="ignore"):
            t2 = np.where(np.abs(v1) > 1e-12, rest / v1, np.where(np.abs(rest) < 1e-9, 0.0, -1.0))
        # coasting above the rate limit is not allowed
        ok &= (t2 >= -1e-12) & ((np.abs(v1) <= vm + 1e-12) | (np.abs(t2) < 1e-12))
        total = t1 + np.maximum(t2, 0.0) + t3
        if np.any(ok):
            best = min(best, float(total[ok].min()))
    return best


def fine_oracle(traj, t0, obstacles, r=0.5):
    """Point-vs-disc distance on a 1e-3 time grid of the exact trajectory."""
    fine = obvp.trajectory_for(traj.start, traj.end, traj.tau, traj.cost, r, 1e-3).samples
    for o in obstacles:
        c = np.asarray(o.center0) + np.outer(fine[:, 0] + t0, o.velocity)
        if np.any(np.hypot(*(fine[:, 1:3] - c).T) <= o.radius):
            return True
    return False
