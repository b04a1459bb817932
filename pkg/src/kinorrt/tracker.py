"""Feedforward plus PI pose tracking for an omnidirectional robot.

Body velocities ``(u, v, r)`` map to world velocities through the heading
rotation ``B(w) = [[cos w, -sin w, 0], [sin w, cos w, 0], [0, 0, 1]]``.
The commanded body velocity is the desired body velocity plus a PI
correction of the pose error ``e = actual - desired``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .rotation import RotTrajectory, wrap_angle


class Pose(NamedTuple):
    x: float
    y: float
    heading: float


class BodyVelocity(NamedTuple):
    u: float
    v: float
    r: float


class ReferencePoint(NamedTuple):
    """Desired pose and desired world-frame velocity."""

    x: float
    y: float
    heading: float
    vx: float
    vy: float
    rate: float

    @property
    def pose(self) -> Pose:
        return Pose(self.x, self.y, self.heading)


@dataclass(frozen=True)
class TrackerGains:
    a_p: tuple = (3.0, 3.0, 3.0)
    a_i: tuple = (5.0, 5.0, 5.0)
    # per-axis clamp on the integrated error (m*s or rad*s)
    integral_limit: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "a_p", tuple(float(v) for v in self.a_p))
        object.__setattr__(self, "a_i", tuple(float(v) for v in self.a_i))
        if len(self.a_p) != 3 or len(self.a_i) != 3:
            raise ValueError("a_p and a_i must have three entries")
        if not all(v > 0.0 for v in self.a_p + self.a_i):
            raise ValueError(f"tracker coefficients must be positive, got {self}")
        if not self.integral_limit > 0.0:
            raise ValueError("integral_limit must be positive")


def rotation_matrix(heading: float) -> np.ndarray:
    """Body-to-world rotation ``B(heading)``."""
    c, s = math.cos(heading), math.sin(heading)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def world_to_body(world_vel, heading: float) -> BodyVelocity:
    c, s = math.cos(heading), math.sin(heading)
    vx, vy, w = world_vel
    return BodyVelocity(c * vx + s * vy, -s * vx + c * vy, float(w))


def body_to_world(body, heading: float) -> np.ndarray:
    c, s = math.cos(heading), math.sin(heading)
    u, v, r = body
    return np.array([c * u - s * v, s * u + c * v, float(r)])


def coupling_matrix(ref: ReferencePoint) -> np.ndarray:
    """Linearized heading coupling ``A1``: d(B(w) [u_d, v_d, 0]) / dw at the reference."""
    body = world_to_body((ref.vx, ref.vy, ref.rate), ref.heading)
    c, s = math.cos(ref.heading), math.sin(ref.heading)
    a = np.zeros((3, 3))
    a[0, 2] = -body.u * s - body.v * c
    a[1, 2] = body.u * c - body.v * s
    return a


def gains(g: TrackerGains, ref: ReferencePoint) -> tuple[np.ndarray, np.ndarray]:
    """Gain matrices ``(K_P, K_I)`` at the reference.

    ``K_P = -B1^-1 (A1 + diag(a_p))`` and ``K_I = B1^-1 diag(a_i)``.
    """
    b_inv = rotation_matrix(ref.heading).T
    k_p = -b_inv @ (coupling_matrix(ref) + np.diag(g.a_p))
    k_i = b_inv @ np.diag(g.a_i)
    return k_p, k_i


def pose_error(actual, ref) -> np.ndarray:
    """``actual - desired`` with the heading difference wrapped to (-pi, pi]."""
    return np.array([actual[0] - ref[0], actual[1] - ref[1], wrap_angle(actual[2] - ref[2])])


def control_step(actual: Pose, ref: ReferencePoint, integral_state, dt: float,
                 g: TrackerGains, feedforward: Optional[ReferencePoint] = None):
    """One controller update; returns ``(command, new_integral_state)``.

    The correction is ``K_P e - K_I int(e)``, which makes the linearized
    error obey ``de/dt = -diag(a_p) e - diag(a_i) int(e)``.
    ``feedforward`` optionally supplies the desired velocity (for example
    sampled mid-way through the control period); it defaults to ``ref``.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    e = pose_error(actual, ref)
    lim = g.integral_limit
    integral = np.clip(np.asarray(integral_state, dtype=float) + e * dt, -lim, lim)
    k_p, k_i = gains(g, ref)
    correction = k_p @ e - k_i @ integral
    ff = ref if feedforward is None else feedforward
    body = world_to_body((ff.vx, ff.vy, ff.rate), ref.heading)
    cmd = BodyVelocity(body.u + correction[0], body.v + correction[1], body.r + correction[2])
    return cmd, integral


class Reference:
    """Pose reference built from a translational and a rotational trajectory.

    ``t0`` is the absolute time at which both trajectories start.  Positions
    and velocities are interpolated linearly between translational samples;
    each component holds its terminal value with zero velocity once its
    trajectory has ended.
    """

    def __init__(self, trans, rot: Optional[RotTrajectory], t0: float = 0.0,
                 heading: float = 0.0):
        self.trans = trans
        self.rot = rot
        self.t0 = float(t0)
        self.heading = heading
        self._t = trans.times
        self._s = trans.samples

    @property
    def end_time(self) -> float:
        rot_end = 0.0 if self.rot is None else self.rot.total_time
        return self.t0 + max(self.trans.tau, rot_end)

    def point(self, t: float) -> ReferencePoint:
        tl = max(t - self.t0, 0.0)
        if tl >= self.trans.tau:
            row = self._s[-1]
            px, py, vx, vy = row[1], row[2], 0.0, 0.0
        else:
            cols = [np.interp(tl, self._t, self._s[:, k]) for k in (1, 2, 3, 4)]
            px, py, vx, vy = cols
        if self.rot is None:
            w, rate = self.heading, 0.0
        else:
            w, rate, _ = self.rot.state_at(tl)
        return ReferencePoint(float(px), float(py), float(w), float(vx), float(vy), float(rate))
