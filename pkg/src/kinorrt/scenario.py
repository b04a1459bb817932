"""Scenario files: JSON with units in the key names.

A scenario bundles the field, the robot start and goal, the obstacles and
every planner, tracker and engine setting.  Missing sections fall back to
the defaults below; unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .errors import ScenarioError
from .obvp import TransState
from .rotation import RotLimits
from .rrtstar import PlannerParams, SampleBounds
from .tracker import TrackerGains
from .world import Bounds, Obstacle, WorldSnapshot

SCHEMA_VERSION = 1
SCENARIO_DIR = Path(__file__).parent / "scenarios"


@dataclass(frozen=True)
class RateConfig:
    f_sim: float = 60.0
    f_plan: float = 3.0
    f_control: float = 60.0

    def __post_init__(self):
        if not (self.f_sim > 0 and self.f_plan > 0 and self.f_control > 0):
            raise ValueError(f"rates must be positive, got {self}")
        if self.f_sim < self.f_control:
            raise ValueError("f_sim must be >= f_control")


@dataclass(frozen=True)
class SimSettings:
    time_limit: float = 60.0
    lag: float = 0.0
    handover_bound: float = 0.5
    goal_tol_pos: float = 0.1
    goal_tol_speed: float = 0.1
    goal_tol_heading: float = 0.1
    replan_error: float = 0.25


@dataclass(frozen=True)
class Scenario:
    name: str
    bounds: Bounds
    start_pose: tuple  # (x, y, heading)
    start_velocity: tuple  # world (vx, vy, rate)
    goal: TransState
    goal_heading: float
    obstacles: tuple
    planner: PlannerParams
    rot_limits: RotLimits
    gains: TrackerGains
    rates: RateConfig
    inflation: float
    sim: SimSettings = field(default_factory=SimSettings)

    @property
    def start_state(self) -> TransState:
        return TransState(self.start_pose[0], self.start_pose[1], *self.start_velocity[:2])

    def snapshot(self, t: float = 0.0) -> WorldSnapshot:
        """Obstacles advanced to time ``t`` with the snapshot epoch set to ``t``."""
        return WorldSnapshot(t, tuple(o.advanced(t) for o in self.obstacles), self.bounds)

    def with_planner(self, **changes) -> "Scenario":
        return replace(self, planner=replace(self.planner, **changes))


# key name -> (attribute, default) per section
_FIELD = {"xmin_m": 0.0, "xmax_m": 12.0, "ymin_m": 0.0, "ymax_m": 18.0}
_START = {"x_m": None, "y_m": None, "heading_rad": 0.0, "vx_mps": 0.0, "vy_mps": 0.0,
          "rate_radps": 0.0}
_GOAL = {"x_m": None, "y_m": None, "vx_mps": 0.0, "vy_mps": 0.0, "heading_rad": 0.0}
_OBSTACLE = {"x_m": None, "y_m": None, "vx_mps": 0.0, "vy_mps": 0.0, "radius_m": None}
_PLANNER = {"goal_bias_p": 0.1, "n_iter": 5000, "target_nodes": 75, "cost_radius": 10.0,
            "input_weight": 0.5, "velocity_range_mps": [-2.0, 2.0], "collision_dt_s": 0.05,
            "output_dt_s": 0.02, "parent_selection": "total"}
_ROTATION = {"rate_max_radps": 0.75, "accel_max_radps2": 0.75}
_TRACKER = {"a_p": [3.0, 3.0, 3.0], "a_i": [5.0, 5.0, 5.0], "integral_limit": 1.0}
_RATES = {"f_sim_hz": 60.0, "f_plan_hz": 3.0, "f_control_hz": 60.0}
_SIM = {"time_limit_s": 60.0, "lag_s": 0.0, "handover_bound_m": 0.5, "goal_tol_m": 0.1,
        "goal_tol_mps": 0.1, "goal_tol_rad": 0.1, "replan_error_m": 0.25}
_TOP = {"schema_version", "name", "field", "start", "goal", "obstacles", "planner", "rotation",
        "tracker", "rates", "inflation_m", "sim"}


def _section(data, name, spec):
    raw = data.get(name, {})
    if not isinstance(raw, dict):
        raise ScenarioError(name, "expected an object")
    unknown = sorted(set(raw) - set(spec))
    if unknown:
        raise ScenarioError(f"{name}.{unknown[0]}", "unknown key")
    out = {}
    for key, default in spec.items():
        if key in raw:
            out[key] = raw[key]
        elif default is None:
            raise ScenarioError(f"{name}.{key}", "required")
        else:
            out[key] = default
    return out


def _num(where, value, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(where, f"expected a finite number, got {value!r}")
    if positive and not value > 0:
        raise ScenarioError(where, f"must be positive, got {value}")
    if nonneg and value < 0:
        raise ScenarioError(where, f"must be non-negative, got {value}")
    return float(value)


def _vec(where, value, n):
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ScenarioError(where, f"expected a list of {n} numbers")
    return [_num(f"{where}[{i}]", v) for i, v in enumerate(value)]


def _build(where, ctor, *args, **kwargs):
    try:
        return ctor(*args, **kwargs)
    except ValueError as exc:
        raise ScenarioError(where, str(exc)) from None


def from_dict(data: dict) -> Scenario:
    """Validate and build a scenario; raises ScenarioError naming the bad field."""
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "expected an object")
    unknown = sorted(set(data) - _TOP)
    if unknown:
        raise ScenarioError(unknown[0], "unknown key")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError("schema_version", f"unsupported version {version!r}")
    name = data.get("name", "unnamed")
    if not isinstance(name, str):
        raise ScenarioError("name", "expected a string")

    f = {k: _num(f"field.{k}", v) for k, v in _section(data, "field", _FIELD).items()}
    bounds = _build("field", Bounds, f["xmin_m"], f["xmax_m"], f["ymin_m"], f["ymax_m"])

    s = {k: _num(f"start.{k}", v) for k, v in _section(data, "start", _START).items()}
    if not bounds.contains(s["x_m"], s["y_m"]):
        raise ScenarioError("start", "position outside the field")
    g = {k: _num(f"goal.{k}", v) for k, v in _section(data, "goal", _GOAL).items()}
    if not bounds.contains(g["x_m"], g["y_m"]):
        raise ScenarioError("goal", "position outside the field")

    raw_obs = data.get("obstacles", [])
    if not isinstance(raw_obs, list):
        raise ScenarioError("obstacles", "expected a list")
    obstacles = []
    for i, item in enumerate(raw_obs):
        where = f"obstacles[{i}]"
        o = {k: _num(f"{where}.{k}", v) for k, v in _section({where: item}, where, _OBSTACLE).items()}
        if not o["radius_m"] > 0:
            raise ScenarioError(f"{where}.radius_m", "must be positive")
        obstacles.append(Obstacle((o["x_m"], o["y_m"]), (o["vx_mps"], o["vy_mps"]), o["radius_m"]))

    p = _section(data, "planner", _PLANNER)
    vr = _vec("planner.velocity_range_mps", p["velocity_range_mps"], 2)
    for key in ("n_iter", "target_nodes"):
        if p[key] is not None and (isinstance(p[key], bool) or not isinstance(p[key], int)):
            raise ScenarioError(f"planner.{key}", "expected an integer")
    sample_bounds = _build("planner.velocity_range_mps", SampleBounds, bounds.xmin, bounds.xmax,
                           bounds.ymin, bounds.ymax, vr[0], vr[1])
    inflation = _num("inflation_m", data.get("inflation_m", 0.0), nonneg=True)
    planner = _build("planner", PlannerParams,
                     goal_bias_p=_num("planner.goal_bias_p", p["goal_bias_p"]),
                     n_iter=p["n_iter"], target_nodes=p["target_nodes"],
                     cost_radius=_num("planner.cost_radius", p["cost_radius"], positive=True),
                     input_weight=_num("planner.input_weight", p["input_weight"], positive=True),
                     sample_bounds=sample_bounds,
                     collision_dt=_num("planner.collision_dt_s", p["collision_dt_s"], positive=True),
                     output_dt=_num("planner.output_dt_s", p["output_dt_s"], positive=True),
                     inflation=inflation, parent_selection=p["parent_selection"])

    r = _section(data, "rotation", _ROTATION)
    rot = _build("rotation", RotLimits, _num("rotation.rate_max_radps", r["rate_max_radps"], positive=True),
                 _num("rotation.accel_max_radps2", r["accel_max_radps2"], positive=True))
    t = _section(data, "tracker", _TRACKER)
    gains = _build("tracker", TrackerGains, _vec("tracker.a_p", t["a_p"], 3),
                   _vec("tracker.a_i", t["a_i"], 3),
                   _num("tracker.integral_limit", t["integral_limit"], positive=True))
    q = _section(data, "rates", _RATES)
    rates = _build("rates", RateConfig, *(_num(f"rates.{k}", q[k], positive=True) for k in _RATES))
    m = {k: _num(f"sim.{k}", v, nonneg=True) for k, v in _section(data, "sim", _SIM).items()}
    sim = SimSettings(m["time_limit_s"], m["lag_s"], m["handover_bound_m"], m["goal_tol_m"],
                      m["goal_tol_mps"], m["goal_tol_rad"], m["replan_error_m"])

    scen = Scenario(name, bounds, (s["x_m"], s["y_m"], s["heading_rad"]),
                    (s["vx_mps"], s["vy_mps"], s["rate_radps"]),
                    TransState(g["x_m"], g["y_m"], g["vx_mps"], g["vy_mps"]), g["heading_rad"],
                    tuple(obstacles), planner, rot, gains, rates, inflation, sim)
    return scen


def to_dict(scen: Scenario) -> dict:
    b, p = scen.bounds, scen.planner
    return {
        "schema_version": SCHEMA_VERSION,
        "name": scen.name,
        "field": {"xmin_m": b.xmin, "xmax_m": b.xmax, "ymin_m": b.ymin, "ymax_m": b.ymax},
        "start": {"x_m": scen.start_pose[0], "y_m": scen.start_pose[1],
                  "heading_rad": scen.start_pose[2], "vx_mps": scen.start_velocity[0],
                  "vy_mps": scen.start_velocity[1], "rate_radps": scen.start_velocity[2]},
        "goal": {"x_m": scen.goal.px, "y_m": scen.goal.py, "vx_mps": scen.goal.vx,
                 "vy_mps": scen.goal.vy, "heading_rad": scen.goal_heading},
        "obstacles": [{"x_m": o.center0[0], "y_m": o.center0[1], "vx_mps": o.velocity[0],
                       "vy_mps": o.velocity[1], "radius_m": o.radius} for o in scen.obstacles],
        "planner": {"goal_bias_p": p.goal_bias_p, "n_iter": p.n_iter,
                    "target_nodes": p.target_nodes, "cost_radius": p.cost_radius,
                    "input_weight": p.input_weight,
                    "velocity_range_mps": [p.sample_bounds.vmin, p.sample_bounds.vmax],
                    "collision_dt_s": p.collision_dt, "output_dt_s": p.output_dt,
                    "parent_selection": p.parent_selection},
        "rotation": {"rate_max_radps": scen.rot_limits.rate_max,
                     "accel_max_radps2": scen.rot_limits.accel_max},
        "tracker": {"a_p": list(scen.gains.a_p), "a_i": list(scen.gains.a_i),
                    "integral_limit": scen.gains.integral_limit},
        "rates": {"f_sim_hz": scen.rates.f_sim, "f_plan_hz": scen.rates.f_plan,
                  "f_control_hz": scen.rates.f_control},
        "inflation_m": scen.inflation,
        "sim": {"time_limit_s": scen.sim.time_limit, "lag_s": scen.sim.lag,
                "handover_bound_m": scen.sim.handover_bound, "goal_tol_m": scen.sim.goal_tol_pos,
                "goal_tol_mps": scen.sim.goal_tol_speed, "goal_tol_rad": scen.sim.goal_tol_heading,
                "replan_error_m": scen.sim.replan_error},
    }


def load(path) -> Scenario:
    """Read a scenario file; a bare name resolves to a shipped scenario."""
    path = Path(path)
    if not path.exists() and (SCENARIO_DIR / f"{path.name}.json").exists():
        path = SCENARIO_DIR / f"{path.name}.json"
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"invalid JSON: {exc}") from None
    return from_dict(data)


def dump(scen: Scenario, path) -> None:
    Path(path).write_text(json.dumps(to_dict(scen), indent=2) + "\n")


def shipped() -> list[str]:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))
