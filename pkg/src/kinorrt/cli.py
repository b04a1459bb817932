"""Command-line entry point: ``kinorrt {obvp,rotation,plan,simulate,bench}``.

Exit codes: 0 success, 2 usage or validation error, 3 no solution,
4 simulation time limit reached.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

from . import bench, obvp, rotation, rrtstar, scenario, simengine
from .errors import InvalidStartError, NoSolutionError, ScenarioError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_SOLUTION = 3
EXIT_TIMEOUT = 4


def _floats(n):
    def parse(text):
        try:
            vals = [float(v) for v in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        if len(vals) != n or not all(math.isfinite(v) for v in vals):
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        return tuple(vals)
    return parse


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write("# schema_version=1\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def cmd_obvp(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'r':>8} {'tau_s':>12} {'max_u':>10} {'cost':>12} {'samples':>8}")
    for r in args.r:
        try:
            traj = obvp.connect(args.xi, args.xf, r, args.dt)
        except NoSolutionError as exc:
            print(f"{r:8.3f} no solution: {exc}", file=sys.stderr)
            return EXIT_NO_SOLUTION
        n = len(traj.samples)
        print(f"{r:8.3f} {traj.tau:12.6f} {obvp.max_control_norm(traj):10.4f} {traj.cost:12.6f} {n:8d}")
        _write_csv(out / f"obvp_r{r:g}.csv", obvp.TransTrajectory.COLUMNS, traj.samples)
    return EXIT_OK


def cmd_rotation(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'rate_max':>9} {'accel_max':>9} {'time_s':>10} {'max_accel':>10}")
    for vm, am in args.limits:
        try:
            limits = rotation.RotLimits(vm, am)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        traj = rotation.min_time_rotation(args.initial, args.target, limits, wrap=not args.no_wrap)
        print(f"{vm:9.3f} {am:9.3f} {traj.total_time:10.6f} {traj.max_accel:10.4f}")
        _write_csv(out / f"rotation_{vm:g}_{am:g}.csv", ("t", "angle", "rate", "accel"),
                   traj.sample(args.dt))
    return EXIT_OK


def _load(args):
    scen = scenario.load(args.scenario)
    if args.seed is not None:
        scen = scen.with_planner(rng_seed=args.seed)
    return scen


def cmd_plan(args) -> int:
    scen = _load(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    res = rrtstar.plan(scen.start_state, scen.goal, scen.snapshot(0.0), scen.planner)
    wall = time.perf_counter() - t0
    Path(out / "tree.json").write_text(res.dump_json() + "\n")
    summary = {"schema_version": 1, "scenario": scen.name, "seed": scen.planner.rng_seed,
               "success": res.success, "cost": res.cost if res.success else None,
               "tree_size": len(res.tree), "iterations": res.iterations,
               "arrival_s": res.trajectory.tau if res.success else None}
    _write_json(out / "summary.json", summary)
    if res.success:
        _write_csv(out / "solution.csv", obvp.TransTrajectory.COLUMNS, res.trajectory.samples)
        print(f"solution cost {res.cost:.6f}, arrival {res.trajectory.tau:.4f} s, "
              f"{len(res.tree)} nodes, {wall * 1e3:.1f} ms")
        return EXIT_OK
    print(f"no solution after {res.iterations} iterations ({len(res.tree)} nodes)")
    return EXIT_NO_SOLUTION


def cmd_simulate(args) -> int:
    scen = _load(args)
    seed = 0 if args.seed is None else args.seed
    log = simengine.run_online(scen, seed=seed, mode=args.mode, time_scale=args.time_scale)
    log.write(args.out_dir)
    s = log.summary()
    print(f"{s['status']}: t={s['total_time_s']:.3f} s, replans={s['replan_count']}, "
          f"min clearance={s['min_clearance_m']:.3f} m")
    return EXIT_OK if log.goal_reached else EXIT_TIMEOUT


def cmd_bench(args) -> int:
    scen = scenario.load(args.scenario)
    seed = 0 if args.seed is None else args.seed
    report = bench.run(scen, args.nodes, args.p, args.runs, seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "bench.json", report.as_dict())
    report.write_raw(out / "bench_raw.csv")
    print(f"{'nodes':>6} {'p':>5} {'mean_ms':>9} {'median_cost':>12} {'success':>8}")
    for c in report.aggregates():
        print(f"{c['target_nodes']:6d} {c['goal_bias_p']:5.2f} {c['time_s']['mean'] * 1e3:9.2f} "
              f"{c['cost']['median']:12.4f} {c['success_rate']:8.2f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed")
    common.add_argument("--out-dir", default="out", help="directory for output files")
    common.add_argument("--dt", type=float, default=obvp.DEFAULT_DT, help="trace sample step (s)")

    parser = argparse.ArgumentParser(prog="kinorrt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("obvp", parents=[common], help="optimal double-integrator connection")
    p.add_argument("--xi", type=_floats(4), default=(2.3, -2.3, 1.0, -1.0), help="px,py,vx,vy")
    p.add_argument("--xf", type=_floats(4), default=(0.0, 0.0, 0.0, 0.0), help="px,py,vx,vy")
    p.add_argument("--r", type=float, nargs="+", default=[1.5, 1.0, 0.5], help="input weights")
    p.set_defaults(func=cmd_obvp)

    p = sub.add_parser("rotation", parents=[common], help="minimum-time rotation")
    p.add_argument("--initial", type=_floats(2), default=(-2.3, 1.0), help="angle,rate")
    p.add_argument("--target", type=float, default=0.0, help="target angle (rad)")
    p.add_argument("--limits", type=_floats(2), nargs="+",
                   default=[(0.5, 0.5), (1.0, 1.0), (1.5, 1.5)], help="rate_max,accel_max pairs")
    p.add_argument("--no-wrap", action="store_true", help="do not wrap the displacement")
    p.set_defaults(func=cmd_rotation)

    for name, func, text in (("plan", cmd_plan, "single-shot planning"),
                             ("simulate", cmd_simulate, "closed-loop simulation")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--scenario", required=True, help="scenario file or shipped name")
        p.set_defaults(func=func)
        if name == "simulate":
            p.add_argument("--mode", choices=("simtime", "freerun"), default="simtime")
            p.add_argument("--time-scale", type=float, default=1.0,
                           help="simulated seconds per wall second (freerun)")

    p = sub.add_parser("bench", parents=[common], help="planner benchmark")
    p.add_argument("--scenario", default="benchmark")
    p.add_argument("--nodes", type=int, nargs="+", default=[25, 50, 75, 100, 150])
    p.add_argument("--p", type=float, nargs="+", default=[0.0, 0.1])
    p.add_argument("--runs", type=int, default=100)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.dt > 0:
        parser.error("--dt must be positive")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidStartError as exc:
        print(f"invalid start: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
