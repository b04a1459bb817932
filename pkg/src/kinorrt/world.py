"""Circular constant-velocity obstacles and time-space collision checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class Obstacle:
    center0: tuple[float, float]
    velocity: tuple[float, float]
    radius: float

    def __post_init__(self):
        vals = (*self.center0, *self.velocity, self.radius)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"obstacle fields must be finite: {self}")
        if not self.radius > 0.0:
            raise ValueError(f"obstacle radius must be positive, got {self.radius}")

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)

    def advanced(self, dt: float) -> "Obstacle":
        return Obstacle(predict_obstacle(self, dt), self.velocity, self.radius)


@dataclass(frozen=True)
class Bounds:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(f"degenerate bounds {self}")

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax


@dataclass(frozen=True)
class WorldSnapshot:
    """Obstacle set frozen at ``epoch``; obstacle centers are given at that time."""

    epoch: float
    obstacles: tuple[Obstacle, ...]
    bounds: Bounds

    def __post_init__(self):
        if not math.isfinite(self.epoch):
            raise ValueError("snapshot epoch must be finite")
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    def obstacle_array(self) -> np.ndarray:
        """Rows ``(cx, cy, vx, vy, radius)`` as consumed by the kernels."""
        if not self.obstacles:
            return np.zeros((0, 5))
        return np.array([(*o.center0, *o.velocity, o.radius) for o in self.obstacles])


def predict_obstacle(obs: Obstacle, t: float) -> tuple[float, float]:
    """Center of ``obs`` at ``t`` seconds after its epoch."""
    return (obs.center0[0] + obs.velocity[0] * t, obs.center0[1] + obs.velocity[1] * t)


def segment_circle_hit(a, b, center, radius: float) -> bool:
    """True iff segment ``[a, b]`` comes within ``radius`` of ``center`` (tangency hits)."""
    return bool(kernels.segment_circle_hit(float(a[0]), float(a[1]), float(b[0]), float(b[1]),
                                           float(center[0]), float(center[1]), float(radius)))


def trajectory_collides(traj, start_offset: float, snapshot: WorldSnapshot,
                        inflation: float = 0.0) -> bool:
    """Check consecutive trajectory samples against every predicted obstacle.

    Trajectory time 0 corresponds to ``snapshot.epoch + start_offset``.  Each
    segment is tested against the obstacle at the segment start, with the
    radius grown by ``inflation``, by how far the obstacle can move during
    the segment, and by how far the path can bow away from its chord.
    """
    return bool(kernels.polyline_collides(traj.samples, float(start_offset),
                                          snapshot.obstacle_array(), float(inflation)))


def point_in_collision(x: float, y: float, t: float, snapshot: WorldSnapshot,
                       inflation: float = 0.0) -> bool:
    for o in snapshot.obstacles:
        cx, cy = predict_obstacle(o, t)
        if math.hypot(x - cx, y - cy) <= o.radius + inflation:
            return True
    return False


def min_clearance(x: float, y: float, t: float, obstacles) -> float:
    """Smallest ``distance - radius`` over obstacles at time ``t`` (inf if none)."""
    best = math.inf
    for o in obstacles:
        cx, cy = predict_obstacle(o, t)
        best = min(best, math.hypot(x - cx, y - cy) - o.radius)
    return best
