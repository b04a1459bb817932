"""Multi-rate plan / track / simulate loop.

Three periodic processes share one world: the plant and obstacles advance at
``f_sim``, the tracker runs at ``f_control`` and the planner at ``f_plan``.
In simulated-time mode a single scheduler fires ticks in timestamp order
(sim, then control, then plan on ties) and planning takes no simulated time.
In free-running mode each process is a thread paced by the wall clock and
they exchange immutable values through swap cells.
"""

from __future__ import annotations

import csv
import json
import math
import threading
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from . import obvp, rotation, rrtstar, tracker
from .errors import InvalidStartError, PlanningError
from .obvp import TransState
from .scenario import RateConfig, Scenario
from .tracker import BodyVelocity, Pose, Reference
from .world import point_in_collision, predict_obstacle

LOG_SCHEMA_VERSION = 1
TICK_COLUMNS = ("t", "x", "y", "heading", "vx", "vy", "rate", "cmd_u", "cmd_v", "cmd_r",
                "ref_x", "ref_y", "ref_heading", "ref_vx", "ref_vy", "ref_rate",
                "pos_error", "clearance", "plan_id")
EVENT_COLUMNS = ("t", "plan_id", "success", "swapped", "source", "tree_size", "cost",
                 "handover_gap", "discontinuity", "wall_s")


def step_plant(pose: Pose, cmd, dt: float) -> Pose:
    """Euler step of the kinematic plant driven by a body-frame velocity."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    w = tracker.body_to_world(cmd, pose.heading)
    return Pose(pose.x + w[0] * dt, pose.y + w[1] * dt, pose.heading + w[2] * dt)


def lag_velocity(current, cmd, dt: float, time_constant: float) -> BodyVelocity:
    """First-order response of the realized velocity to ``cmd`` over ``dt``."""
    if time_constant <= 0.0:
        return BodyVelocity(*cmd)
    a = 1.0 - math.exp(-dt / time_constant)
    return BodyVelocity(*(c + a * (k - c) for c, k in zip(current, cmd)))


@dataclass
class ReplanEvent:
    t: float
    plan_id: int
    success: bool
    swapped: bool
    source: str
    tree_size: int
    cost: float
    handover_gap: float
    discontinuity: bool
    wall_s: float

    def row(self):
        return [getattr(self, c) for c in EVENT_COLUMNS]


@dataclass
class SimLog:
    rows: list = field(default_factory=list)
    events: list = field(default_factory=list)
    obstacles: list = field(default_factory=list)  # per tick: [(x, y), ...]
    status: str = "running"
    radii: tuple = ()
    control_ticks: int = 0

    @property
    def goal_reached(self) -> bool:
        return self.status == "goal"

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, len(TICK_COLUMNS))

    def column(self, name) -> np.ndarray:
        return self.array()[:, TICK_COLUMNS.index(name)]

    @property
    def min_clearance(self) -> float:
        c = self.column("clearance")
        return float(c.min()) if len(c) else math.inf

    @property
    def total_time(self) -> float:
        return float(self.rows[-1][0]) if self.rows else 0.0

    def summary(self) -> dict:
        last = self.rows[-1] if self.rows else None
        return {
            "schema_version": LOG_SCHEMA_VERSION,
            "status": self.status,
            "goal_reached": self.goal_reached,
            "total_time_s": self.total_time,
            "ticks": len(self.rows),
            "control_ticks": self.control_ticks,
            "replan_count": len(self.events),
            "swap_count": sum(e.swapped for e in self.events),
            "discontinuities": sum(e.discontinuity for e in self.events),
            "min_clearance_m": self.min_clearance,
            "final_pose": None if last is None else [float(v) for v in last[1:4]],
        }

    def deterministic_view(self):
        """Everything except wall-clock measurements."""
        events = [tuple(e.row()[:-1]) for e in self.events]
        return ([tuple(r) for r in self.rows], events, [tuple(map(tuple, o)) for o in self.obstacles],
                self.control_ticks, self.status)

    def write(self, out_dir, stem: str = "simlog") -> dict:
        """Write tick CSV, event CSV and summary JSON; return the paths."""
        from pathlib import Path
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        n_obs = len(self.radii)
        obs_cols = [f"obs{i}_{a}" for i in range(n_obs) for a in ("x", "y")]
        paths = {"ticks": out / f"{stem}.csv", "events": out / f"{stem}_events.csv",
                 "summary": out / f"{stem}_summary.json"}
        with open(paths["ticks"], "w", newline="") as fh:
            fh.write(f"# schema_version={LOG_SCHEMA_VERSION}\n")
            w = csv.writer(fh)
            w.writerow(list(TICK_COLUMNS) + obs_cols)
            for row, obs in zip(self.rows, self.obstacles):
                w.writerow([repr(float(v)) for v in row] + [repr(v) for xy in obs for v in xy])
        with open(paths["events"], "w", newline="") as fh:
            fh.write(f"# schema_version={LOG_SCHEMA_VERSION}\n")
            w = csv.writer(fh)
            w.writerow(EVENT_COLUMNS)
            for e in self.events:
                w.writerow(e.row())
        paths["summary"].write_text(json.dumps(self.summary(), indent=2) + "\n")
        return paths


def track_reference(ref: Reference, initial: Pose, gains, dt: float, duration: float,
                    lag: float = 0.0, midpoint: bool = True) -> np.ndarray:
    """Closed-loop tracking with plant and controller both at step ``dt``.

    Returns rows ``(t, pos_error, heading_error)``.  With ``midpoint`` the
    feedforward velocity is sampled half a step ahead, i.e. the average
    reference velocity over the hold interval.
    """
    pose = Pose(*initial)
    vel = BodyVelocity(0.0, 0.0, 0.0)
    integral = np.zeros(3)
    out = []
    n = int(round(duration / dt))
    for k in range(n + 1):
        t = k * dt
        rp = ref.point(t)
        e = tracker.pose_error(pose, rp)
        out.append((t, math.hypot(e[0], e[1]), abs(e[2])))
        if k == n:
            break
        ff = ref.point(t + 0.5 * dt) if midpoint else None
        cmd, integral = tracker.control_step(pose, rp, integral, dt, gains, ff)
        vel = lag_velocity(vel, cmd, dt, lag)
        pose = step_plant(pose, vel, dt)
    return np.array(out)


class _Engine:
    """State shared by the simulated-time and free-running drivers."""

    def __init__(self, scen: Scenario, rates: RateConfig, seed: int):
        self.scen = scen
        self.rates = rates
        self.seed = seed
        self.pose = Pose(*scen.start_pose)
        self.vel = tracker.world_to_body(scen.start_velocity, scen.start_pose[2])
        self.cmd = self.vel
        self.integral = np.zeros(3)
        self.ref: Optional[Reference] = None
        self.plan_id = -1
        self.log = SimLog(radii=tuple(o.radius for o in scen.obstacles))
        self.lock = threading.Lock()
        if point_in_collision(self.pose.x, self.pose.y, 0.0, scen.snapshot(0.0), scen.inflation):
            raise InvalidStartError(f"start {self.pose[:2]} lies inside an obstacle")

    # ---------------------------------------------------------------- helpers

    def world_velocity(self) -> np.ndarray:
        return tracker.body_to_world(self.vel, self.pose.heading)

    def hold_point(self):
        w = self.world_velocity()
        return tracker.ReferencePoint(self.pose.x, self.pose.y, self.pose.heading, w[0], w[1], w[2])

    def ref_point(self, t):
        return self.hold_point() if self.ref is None else self.ref.point(t)

    def clearance(self, t):
        best = math.inf
        for o in self.scen.obstacles:
            cx, cy = predict_obstacle(o, t)
            best = min(best, math.hypot(self.pose.x - cx, self.pose.y - cy) - o.radius)
        return best

    def at_goal(self, t) -> bool:
        s = self.scen.sim
        g = self.scen.goal
        w = self.world_velocity()
        return (math.hypot(self.pose.x - g.px, self.pose.y - g.py) <= s.goal_tol_pos
                and math.hypot(w[0] - g.vx, w[1] - g.vy) <= s.goal_tol_speed
                and abs(rotation.wrap_angle(self.pose.heading - self.scen.goal_heading))
                <= s.goal_tol_heading)

    # ---------------------------------------------------------------- processes

    def sim_step(self, dt):
        self.vel = lag_velocity(self.vel, self.cmd, dt, self.scen.sim.lag)
        self.pose = step_plant(self.pose, self.vel, dt)

    def record(self, t):
        rp = self.ref_point(t)
        w = self.world_velocity()
        err = math.hypot(self.pose.x - rp.x, self.pose.y - rp.y)
        self.log.rows.append((t, *self.pose, *w, *self.cmd, *rp, err, self.clearance(t),
                              self.plan_id))
        self.log.obstacles.append([predict_obstacle(o, t) for o in self.scen.obstacles])

    def control(self, t, dt):
        self.log.control_ticks += 1
        if self.ref is None:
            self.cmd = BodyVelocity(0.0, 0.0, 0.0)
            return
        rp = self.ref.point(t)
        ff = self.ref.point(t + 0.5 * dt)
        self.cmd, self.integral = tracker.control_step(self.pose, rp, self.integral, dt,
                                                      self.scen.gains, ff)

    def plan_input(self, t):
        """Start translational state, heading state and source label for a replan."""
        if self.ref is not None:
            rp = self.ref.point(t)
            if math.hypot(self.pose.x - rp.x, self.pose.y - rp.y) < self.scen.sim.replan_error:
                return TransState(rp.x, rp.y, rp.vx, rp.vy), (rp.heading, rp.rate), "reference"
        w = self.world_velocity()
        return (TransState(self.pose.x, self.pose.y, w[0], w[1]),
                (self.pose.heading, w[2]), "measured")

    def plan(self, t, start, heading, should_stop=None):
        """Run the planner for a snapshot taken at ``t``; returns (result, reference or None)."""
        scen = self.scen
        self.plan_id += 1
        seed = int(np.random.SeedSequence([self.seed, self.plan_id]).generate_state(1)[0])
        params = replace(scen.planner, rng_seed=seed)
        res = rrtstar.plan(start, scen.goal, scen.snapshot(t), params, should_stop=should_stop)
        if not res.success or res.cancelled:
            return res, None
        rot = rotation.min_time_rotation(heading, scen.goal_heading, scen.rot_limits)
        return res, Reference(res.trajectory, rot, t)

    def activate(self, t, new_ref, res, source, wall):
        gap = 0.0
        swapped = new_ref is not None
        if swapped:
            old = self.ref_point(t)
            new = new_ref.point(t)
            gap = math.hypot(old.x - new.x, old.y - new.y)
            self.ref = new_ref
        cost = res.cost if res is not None else math.inf
        size = len(res.tree) if res is not None else 0
        ok = res is not None and res.success
        self.log.events.append(ReplanEvent(t, self.plan_id, ok, swapped, source, size,
                                           float(cost), gap, gap > self.scen.sim.handover_bound,
                                           wall))


def run_online(scen: Scenario, rates: Optional[RateConfig] = None, seed: int = 0,
               mode: str = "simtime", time_scale: float = 1.0) -> SimLog:
    """Run the closed loop until the goal is reached or the time limit expires."""
    rates = scen.rates if rates is None else rates
    if mode == "simtime":
        return _run_simtime(scen, rates, seed)
    if mode == "freerun":
        return _run_freerun(scen, rates, seed, time_scale)
    raise ValueError(f"unknown mode {mode!r}")


def _replan(eng: _Engine, t: float, should_stop=None):
    start, heading, source = eng.plan_input(t)
    t_wall = time.perf_counter()
    try:
        res, ref = eng.plan(t, start, heading, should_stop)
    except PlanningError:
        res, ref = None, None
    return res, ref, source, time.perf_counter() - t_wall


def _run_simtime(scen, rates, seed) -> SimLog:
    eng = _Engine(scen, rates, seed)
    periods = [Fraction(1) / Fraction(f).limit_denominator(10**6)
               for f in (rates.f_sim, rates.f_control, rates.f_plan)]
    counts = [0, 0, 0]
    limit = Fraction(scen.sim.time_limit).limit_denominator(10**6)
    dt_sim = float(periods[0])
    dt_ctrl = float(periods[1])
    while True:
        # next event: earliest timestamp, priority sim -> control -> plan on ties
        k = min(range(3), key=lambda i: (counts[i] * periods[i], i))
        now = counts[k] * periods[k]
        counts[k] += 1
        t = float(now)
        if k == 0:
            if now > 0:
                eng.sim_step(dt_sim)
            eng.record(t)
            if eng.at_goal(t):
                eng.log.status = "goal"
                break
            if now >= limit:
                eng.log.status = "timeout"
                break
        elif k == 1:
            eng.control(t, dt_ctrl)
        else:
            res, ref, source, wall = _replan(eng, t)
            eng.activate(t, ref, res, source, wall)
    return eng.log


class SwapCell:
    """Holds one immutable value; readers always see a complete value."""

    def __init__(self, value=None):
        self._lock = threading.Lock()
        self._value = value

    def get(self):
        with self._lock:
            return self._value

    def set(self, value):
        with self._lock:
            self._value = value


def _run_freerun(scen, rates, seed, time_scale) -> SimLog:
    """Wall-clock paced threads; simulated time runs ``time_scale`` times real time."""
    eng = _Engine(scen, rates, seed)
    clock = SwapCell(0.0)
    plant = SwapCell((eng.pose, eng.vel))
    command = SwapCell(BodyVelocity(0.0, 0.0, 0.0))
    reference = SwapCell(None)
    done = threading.Event()
    dt_sim = 1.0 / rates.f_sim

    def periodic(rate, body):
        period = 1.0 / (rate * time_scale)
        nxt = time.perf_counter()
        while not done.is_set():
            body()
            nxt += period
            delay = nxt - time.perf_counter()
            if delay > 0:
                done.wait(delay)

    def sim_body():
        t = clock.get()
        with eng.lock:
            eng.cmd = command.get()
            eng.ref = reference.get()
            if t > 0:
                eng.sim_step(dt_sim)
            eng.record(t)
            plant.set((eng.pose, eng.vel))
            if eng.at_goal(t):
                eng.log.status = "goal"
                done.set()
            elif t >= scen.sim.time_limit:
                eng.log.status = "timeout"
                done.set()
        clock.set(t + dt_sim)

    integral = [np.zeros(3)]

    def control_body():
        eng.log.control_ticks += 1
        ref = reference.get()
        if ref is None:
            return
        t = clock.get()
        pose, _ = plant.get()
        dt = 1.0 / rates.f_control
        cmd, integral[0] = tracker.control_step(pose, ref.point(t), integral[0], dt,
                                               scen.gains, ref.point(t + 0.5 * dt))
        command.set(cmd)

    def plan_body():
        t_snap = clock.get()
        with eng.lock:
            eng.ref = reference.get()
            eng.pose, eng.vel = plant.get()
            start, heading, source = eng.plan_input(t_snap)
        period = 1.0 / rates.f_plan
        # a newer snapshot supersedes this one once the next plan period starts
        stop = lambda: clock.get() - t_snap >= period or done.is_set()
        t_wall = time.perf_counter()
        try:
            res, ref = eng.plan(t_snap, start, heading, stop)
        except PlanningError:
            res, ref = None, None
        wall = time.perf_counter() - t_wall
        if ref is not None:
            # activation instant: trajectory time 0 is now
            ref = Reference(ref.trans, ref.rot, clock.get())
        with eng.lock:
            eng.activate(clock.get(), ref, res, source, wall)
            if ref is not None:
                reference.set(ref)

    threads = [threading.Thread(target=periodic, args=(f, b), daemon=True)
               for f, b in ((rates.f_sim, sim_body), (rates.f_control, control_body),
                            (rates.f_plan, plan_body))]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    return eng.log
