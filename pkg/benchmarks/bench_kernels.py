"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit
from dataclasses import replace

import numpy as np

from kinorrt import kernels, rrtstar, scenario


def cases(core):
    rng = np.random.default_rng(0)
    states = rng.uniform([0, 0, -2, -2], [12, 18, 2, 2], size=(200, 4))
    q = (6.0, 9.0, 0.5, -0.5)
    obstacles = scenario.load("benchmark").snapshot().obstacle_array()
    xi, xf = (2.3, -2.3, 1.0, -1.0), (0.0, 0.0, 0.0, 0.0)
    return {
        "steer (1 pair)": lambda: core.steer(xi, xf, 0.5),
        "steer_many (200)": lambda: core.steer_many(states, q, 0.5, False),
        "edge_collides": lambda: core.edge_collides(xi, xf, 4.847, 0.5, 0.0, 0.05, obstacles, 0.0),
        "sample_trajectory": lambda: core.sample_trajectory(xi, xf, 4.847, 0.5, 0.02),
    }


def plan_case(core):
    scen = scenario.load("benchmark")
    params = replace(scen.planner, target_nodes=75)

    def run():
        saved = kernels.impl
        kernels.use(core)
        try:
            rrtstar.plan(scen.start_state, scen.goal, scen.snapshot(), params)
        finally:
            kernels.use(saved)
    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {}
    for name in ("cython", "python"):
        try:
            backends[name] = kernels.load_backend(name)
        except ImportError:
            print(f"backend {name!r} unavailable")
    print(f"{'case':<22}" + "".join(f"{n:>14}" for n in backends) + f"{'speedup':>10}")
    names = list(cases(next(iter(backends.values()))))
    for case in names + ["plan (75 nodes)"]:
        times = []
        for core in backends.values():
            fn = plan_case(core) if case.startswith("plan") else cases(core)[case]
            n = 3 if case.startswith("plan") else 50
            times.append(min(timeit.repeat(fn, number=n, repeat=args.repeat)) / n)
        speed = f"{times[1] / times[0]:9.1f}x" if len(times) == 2 else ""
        print(f"{case:<22}" + "".join(f"{t * 1e3:12.3f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
