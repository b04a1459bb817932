"""Minimum-time heading trajectories under rate and acceleration limits.

Profiles are piecewise-constant acceleration (bang, optional coast, bang) and
always end at rest on the target angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class RotState(NamedTuple):
    angle: float
    rate: float


@dataclass(frozen=True)
class RotLimits:
    rate_max: float
    accel_max: float

    def __post_init__(self):
        if not (self.rate_max > 0.0 and self.accel_max > 0.0):
            raise ValueError(f"rotation limits must be positive, got {self}")


@dataclass(frozen=True)
class RotTrajectory:
    initial: RotState
    target: float
    phases: tuple = field(default_factory=tuple)

    @property
    def total_time(self) -> float:
        return float(sum(d for d, _ in self.phases))

    @property
    def max_accel(self) -> float:
        return max((abs(a) for _, a in self.phases), default=0.0)

    def state_at(self, t: float) -> tuple[float, float, float]:
        """``(angle, rate, accel)`` at time ``t``; rests at the target afterwards."""
        angle, rate = self.initial
        if t <= 0.0:
            return angle, rate, self.phases[0][1] if self.phases else 0.0
        elapsed = 0.0
        for dur, acc in self.phases:
            if t < elapsed + dur:
                h = t - elapsed
                return angle + rate * h + 0.5 * acc * h * h, rate + acc * h, acc
            angle += rate * dur + 0.5 * acc * dur * dur
            rate += acc * dur
            elapsed += dur
        return angle, rate, 0.0

    def final_state(self) -> RotState:
        a, r, _ = self.state_at(math.inf)
        return RotState(a, r)

    def sample(self, dt: float) -> np.ndarray:
        """Rows ``(t, angle, rate, accel)`` every ``dt`` with the last row at the end."""
        total = self.total_time
        n = max(int(math.ceil(total / dt)), 0)
        times = [k * dt for k in range(n)] + [total]
        return np.array([(t, *self.state_at(t)) for t in times])


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


def _rest_to_rest(d, vm, am):
    # d >= 0
    if d <= 0.0:
        return []
    vp = math.sqrt(am * d)
    if vp <= vm:
        t = vp / am
        return [(t, am), (t, -am)]
    ramp = vm / am
    return [(ramp, am), (d / vm - ramp, 0.0), (ramp, -am)]


def _plan(d, v0, vm, am):
    """Phases for displacement ``d >= 0`` from rate ``v0``."""
    if v0 < 0.0:
        # moving away: brake to rest first
        t = -v0 / am
        return [(t, am)] + _rest_to_rest(d + v0 * v0 / (2.0 * am), vm, am)
    stop = v0 * v0 / (2.0 * am)
    if stop > d:
        # cannot stop before the target: brake through it and come back
        back = stop - d
        return [(v0 / am, -am)] + [(t, -a) for t, a in _rest_to_rest(back, vm, am)]
    phases = []
    if v0 > vm:
        phases.append(((v0 - vm) / am, -am))
        d -= (v0 * v0 - vm * vm) / (2.0 * am)
        v0 = vm
    vp = math.sqrt(am * d + 0.5 * v0 * v0)
    if vp <= vm:
        phases += [((vp - v0) / am, am), (vp / am, -am)]
    else:
        cruise = (d - (vm * vm - v0 * v0) / (2.0 * am) - vm * vm / (2.0 * am)) / vm
        phases += [((vm - v0) / am, am), (cruise, 0.0), (vm / am, -am)]
    return phases


def _merge(phases):
    out = []
    for dur, acc in phases:
        if dur <= 0.0:
            continue
        if out and out[-1][1] == acc:
            out[-1] = (out[-1][0] + dur, acc)
        else:
            out.append((dur, acc))
    return tuple(out)


def min_time_rotation(initial, target_angle: float, limits: RotLimits,
                      wrap: bool = True) -> RotTrajectory:
    """Time-optimal rotation from ``initial`` to rest at ``target_angle``.

    With ``wrap`` the displacement is taken modulo a full turn, in (-pi, pi];
    the returned trajectory's ``target`` is the unwrapped goal angle.
    """
    initial = RotState(float(initial[0]), float(initial[1]))
    delta = target_angle - initial.angle
    if wrap:
        delta = wrap_angle(delta)
    goal = initial.angle + delta
    sign = 1.0
    d, v0 = delta, initial.rate
    if d < 0.0 or (d == 0.0 and v0 < 0.0):
        sign = -1.0
        d, v0 = -d, -v0
    phases = _plan(d, v0, limits.rate_max, limits.accel_max)
    phases = _merge((t, sign * a) for t, a in phases)
    return RotTrajectory(initial, goal, phases)
