"""Optimal steering for the planar double integrator.

Solves the fixed-final-state, free-final-time problem

    minimize  integral_0^tau (1 + r * |u(t)|^2) dt
    s.t.      p'' = u,  x(0) = x_i,  x(tau) = x_f

in closed form.  The arrival time is the root of the cost derivative found by
secant iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DegenerateDurationError, NoSolutionError

DEFAULT_DT = 0.02


class TransState(NamedTuple):
    """Planar position (m) and velocity (m/s) in the world frame."""

    px: float
    py: float
    vx: float
    vy: float

    @property
    def position(self) -> np.ndarray:
        return np.array([self.px, self.py])

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.vx, self.vy])


@dataclass(frozen=True)
class InputWeight:
    """Scalar control penalty ``r`` in the cost integrand ``1 + r |u|^2``."""

    r_weight: float

    def __post_init__(self):
        if not (self.r_weight > 0.0 and math.isfinite(self.r_weight)):
            raise ValueError(f"input weight must be positive and finite, got {self.r_weight}")


def _weight(w) -> float:
    return w.r_weight if isinstance(w, InputWeight) else float(w)


def _state(x) -> TransState:
    x = TransState(*(float(v) for v in x))
    if not all(math.isfinite(v) for v in x):
        raise ValueError(f"state must be finite, got {x}")
    return x


@dataclass(frozen=True)
class TransTrajectory:
    """Sampled translational trajectory.

    ``samples`` has one row per sample with columns
    ``t, px, py, vx, vy, ax, ay``.  ``knots`` lists segment boundary times for
    trajectories chained from several optimal connections.
    """

    start: TransState
    end: TransState
    tau: float
    samples: np.ndarray
    cost: float
    knots: tuple = ()

    COLUMNS = ("t", "px", "py", "vx", "vy", "ax", "ay")

    @property
    def times(self) -> np.ndarray:
        return self.samples[:, 0]

    def state_at(self, t: float) -> tuple[TransState, np.ndarray]:
        """Linearly interpolated state and acceleration at time ``t``.

        Times past the end hold the final state with zero velocity feedforward
        left to the caller; here they clamp to the last sample.
        """
        s = self.samples
        if t <= s[0, 0]:
            row = s[0]
        elif t >= s[-1, 0]:
            row = s[-1]
        else:
            i = int(np.searchsorted(s[:, 0], t, side="right")) - 1
            w = (t - s[i, 0]) / (s[i + 1, 0] - s[i, 0])
            row = s[i] + w * (s[i + 1] - s[i])
        return TransState(*row[1:5]), row[5:7].copy()

    def shifted(self, dt: float) -> "TransTrajectory":
        samples = self.samples.copy()
        samples[:, 0] += dt
        return TransTrajectory(self.start, self.end, self.tau, samples, self.cost,
                               tuple(k + dt for k in self.knots))


def gramian(t: float, w) -> np.ndarray:
    """Weighted controllability Gramian of the double integrator."""
    if not t > 0.0:
        raise DegenerateDurationError(f"Gramian is singular for t={t}")
    r = _weight(w)
    g = np.zeros((4, 4))
    for ax in range(2):
        g[ax, ax] = t**3 / (3.0 * r)
        g[ax, ax + 2] = g[ax + 2, ax] = t**2 / (2.0 * r)
        g[ax + 2, ax + 2] = t / r
    return g


def gramian_inverse(t: float, w) -> np.ndarray:
    # per-axis 2x2 block inverse; avoids a general solve at small t
    if not t > 0.0:
        raise DegenerateDurationError(f"Gramian is singular for t={t}")
    r = _weight(w)
    gi = np.zeros((4, 4))
    for ax in range(2):
        gi[ax, ax] = 12.0 * r / t**3
        gi[ax, ax + 2] = gi[ax + 2, ax] = -6.0 * r / t**2
        gi[ax + 2, ax + 2] = 4.0 * r / t
    return gi


def drift(x_i, t: float) -> TransState:
    """Unforced motion: position advances by velocity times ``t``."""
    x = _state(x_i)
    return TransState(x.px + x.vx * t, x.py + x.vy * t, x.vx, x.vy)


def arrival_cost(x_i, x_f, tau: float, w) -> float:
    """Optimal cost of reaching ``x_f`` from ``x_i`` in exactly ``tau`` seconds."""
    if not tau > 0.0:
        raise DegenerateDurationError(f"arrival time must be positive, got {tau}")
    return kernels.arrival_cost(_state(x_i), _state(x_f), float(tau), _weight(w))


def cost_derivative(x_i, x_f, tau: float, w) -> float:
    """Derivative of :func:`arrival_cost` with respect to ``tau``."""
    if not tau > 0.0:
        raise DegenerateDurationError(f"arrival time must be positive, got {tau}")
    return kernels.cost_derivative(_state(x_i), _state(x_f), float(tau), _weight(w))


def optimal_arrival_time(x_i, x_f, w) -> float:
    """Arrival time minimizing :func:`arrival_cost`; 0 for equal states.

    Raises :class:`NoSolutionError` when the secant search fails on every
    restart.
    """
    tau = kernels.optimal_arrival_time(_state(x_i), _state(x_f), _weight(w))
    if math.isnan(tau):
        raise NoSolutionError(f"no arrival time found from {x_i} to {x_f}")
    return tau


def connect(x_i, x_f, w, dt: float = DEFAULT_DT) -> TransTrajectory:
    """Optimal trajectory between two states, sampled every ``dt`` seconds."""
    if not dt > 0.0:
        raise ValueError(f"sample step must be positive, got {dt}")
    xi = _state(x_i)
    xf = _state(x_f)
    r = _weight(w)
    tau = optimal_arrival_time(xi, xf, r)
    cost = 0.0 if tau == 0.0 else kernels.arrival_cost(xi, xf, tau, r)
    samples = kernels.sample_trajectory(xi, xf, tau, r, dt)
    if tau == 0.0:
        samples[0, 1:5] = xi
    return TransTrajectory(xi, xf, tau, samples, cost, (0.0, tau))


def trajectory_for(x_i, x_f, tau: float, cost: float, w, dt: float = DEFAULT_DT) -> TransTrajectory:
    """Materialize an already-solved connection (no root search)."""
    xi = _state(x_i)
    xf = _state(x_f)
    samples = kernels.sample_trajectory(xi, xf, float(tau), _weight(w), dt)
    if tau == 0.0:
        samples[0, 1:5] = xi
    return TransTrajectory(xi, xf, float(tau), samples, float(cost), (0.0, float(tau)))


def concatenate(parts) -> TransTrajectory:
    """Chain trajectories end to start; zero-duration parts are dropped."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to concatenate")
    kept = [p for p in parts if p.tau > 0.0] or parts[:1]
    rows = [kept[0].samples]
    knots = [0.0]
    offset = 0.0
    for k, p in enumerate(kept):
        if k > 0:
            s = p.samples[1:].copy()
            s[:, 0] += offset
            rows.append(s)
        offset += p.tau
        knots.append(offset)
    samples = np.vstack(rows)
    return TransTrajectory(parts[0].start, parts[-1].end, offset, samples,
                           float(sum(p.cost for p in parts)), tuple(knots))


def max_control_norm(traj: TransTrajectory) -> float:
    return float(np.hypot(traj.samples[:, 5], traj.samples[:, 6]).max())
