"""Repeated planner runs over (target node count, goal bias) cells."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace

import numpy as np

from . import rrtstar
from .scenario import Scenario

RAW_COLUMNS = ("target_nodes", "goal_bias_p", "seed", "wall_s", "cost", "success", "tree_size",
               "iterations")


@dataclass
class BenchReport:
    node_counts: tuple
    probabilities: tuple
    runs: int
    seeds: tuple
    raw: list  # rows in RAW_COLUMNS order

    def cell(self, nodes, p) -> np.ndarray:
        return np.array([r for r in self.raw if r[0] == nodes and r[1] == p], dtype=float)

    def aggregates(self) -> list[dict]:
        out = []
        for n in self.node_counts:
            for p in self.probabilities:
                rows = self.cell(n, p)
                wall, cost = rows[:, 3], rows[:, 4]
                finite = cost[np.isfinite(cost)]
                out.append({
                    "target_nodes": n, "goal_bias_p": p, "samples": len(rows),
                    "success_rate": float(rows[:, 5].mean()),
                    "time_s": _stats(wall),
                    # unsolved runs count as infinite cost, so the median is honest
                    "cost": {**_stats(finite), "median": float(np.median(cost))},
                })
        return out

    def as_dict(self) -> dict:
        return {"schema_version": 1, "node_counts": list(self.node_counts),
                "probabilities": list(self.probabilities), "runs": self.runs,
                "seeds": list(self.seeds), "cells": self.aggregates()}

    def write_raw(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("# schema_version=1\n")
            w = csv.writer(fh)
            w.writerow(RAW_COLUMNS)
            w.writerows(self.raw)


def _stats(x) -> dict:
    if len(x) == 0:
        return {"mean": None, "median": None, "min": None, "max": None}
    return {"mean": float(np.mean(x)), "median": float(np.median(x)),
            "min": float(np.min(x)), "max": float(np.max(x))}


def run(scen: Scenario, node_counts=(25, 50, 75, 100, 150), probabilities=(0.0, 0.1),
        runs: int = 100, seed_base: int = 0) -> BenchReport:
    """Plan ``runs`` times per cell with seeds ``seed_base .. seed_base + runs - 1``."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    seeds = tuple(range(seed_base, seed_base + runs))
    start = scen.start_state
    snap = scen.snapshot(0.0)
    raw = []
    for n in node_counts:
        for p in probabilities:
            for s in seeds:
                params = replace(scen.planner, target_nodes=int(n), goal_bias_p=float(p), rng_seed=s)
                t0 = time.perf_counter()
                res = rrtstar.plan(start, scen.goal, snap, params)
                wall = time.perf_counter() - t0
                raw.append((int(n), float(p), s, wall, float(res.cost), int(res.success),
                            len(res.tree), res.iterations))
    return BenchReport(tuple(node_counts), tuple(probabilities), runs, seeds, raw)
