"""Kinodynamic RRT* over double-integrator states.

Edges are optimal double-integrator connections (:mod:`kinorrt.obvp`).
Neighborhoods are defined by steering cost, the goal may be sampled
directly with probability ``goal_bias_p``, and collision checks are done in
time-space against constant-velocity obstacles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import kernels, obvp
from .errors import InvalidStartError
from .obvp import TransState, TransTrajectory
from .spatial import SpatialIndex
from .world import WorldSnapshot, point_in_collision

TREE_DUMP_VERSION = 1
TREE_DUMP_FIELDS = ("id", "parent", "state", "cost", "arrival", "edge")


@dataclass(frozen=True)
class SampleBounds:
    """Uniform sampling box: position rectangle and per-axis velocity range."""

    xmin: float = 0.0
    xmax: float = 12.0
    ymin: float = 0.0
    ymax: float = 18.0
    vmin: float = -2.0
    vmax: float = 2.0

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin and self.vmax >= self.vmin):
            raise ValueError(f"degenerate sample bounds {self}")

    @property
    def low(self):
        return np.array([self.xmin, self.ymin, self.vmin, self.vmin])

    @property
    def high(self):
        return np.array([self.xmax, self.ymax, self.vmax, self.vmax])

    @property
    def max_speed(self) -> float:
        return math.hypot(max(abs(self.vmin), abs(self.vmax)), max(abs(self.vmin), abs(self.vmax)))


@dataclass(frozen=True)
class PlannerParams:
    goal_bias_p: float = 0.1
    n_iter: int = 5000
    target_nodes: Optional[int] = 75
    cost_radius: float = 10.0
    input_weight: float = 0.5
    sample_bounds: SampleBounds = field(default_factory=SampleBounds)
    rng_seed: int = 0
    collision_dt: float = 0.05
    output_dt: float = obvp.DEFAULT_DT
    inflation: float = 0.0
    # "total": minimize cost-to-come + edge cost; "edge": minimize edge cost only
    parent_selection: str = "total"

    def __post_init__(self):
        if not 0.0 <= self.goal_bias_p <= 1.0:
            raise ValueError(f"goal_bias_p must lie in [0, 1], got {self.goal_bias_p}")
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be >= 1, got {self.n_iter}")
        if self.target_nodes is not None and self.target_nodes < 1:
            raise ValueError(f"target_nodes must be >= 1, got {self.target_nodes}")
        if not self.cost_radius > 0.0:
            raise ValueError(f"cost_radius must be positive, got {self.cost_radius}")
        if not self.input_weight > 0.0:
            raise ValueError(f"input_weight must be positive, got {self.input_weight}")
        if not (self.collision_dt > 0.0 and self.output_dt > 0.0):
            raise ValueError("sample steps must be positive")
        if self.inflation < 0.0:
            raise ValueError("inflation must be non-negative")
        if self.parent_selection not in ("total", "edge"):
            raise ValueError(f"unknown parent_selection {self.parent_selection!r}")


class Edge(NamedTuple):
    tau: float
    cost: float


class TreeNode:
    __slots__ = ("id", "state", "parent", "cost", "arrival", "edge", "children")

    def __init__(self, id, state, parent=None, cost=0.0, arrival=0.0, edge=None):
        self.id = id
        self.state = state
        self.parent = parent
        self.cost = cost
        self.arrival = arrival
        self.edge = edge
        self.children = []

    def __repr__(self):
        pid = None if self.parent is None else self.parent.id
        return f"TreeNode(id={self.id}, parent={pid}, cost={self.cost:.4f})"

    def is_ancestor_of(self, other) -> bool:
        node = other.parent
        while node is not None:
            if node is self:
                return True
            node = node.parent
        return False


def prefilter_radius(cost_radius: float, r: float, max_speed: float) -> float:
    """Euclidean state-space radius containing every state within ``cost_radius``.

    A connection with cost ``C`` has duration ``tau <= C`` and control energy
    ``E <= (C - tau) / r``; then ``|dp - v tau| <= sqrt(tau^3 E / 3)`` and
    ``|dv| <= sqrt(tau E)``.  Maximizing each term separately over ``tau``
    gives the bound.
    """
    c = cost_radius
    pos = max_speed * c + c * c * math.sqrt(27.0 / (768.0 * r))
    vel = c / (2.0 * math.sqrt(r))
    return math.hypot(pos, vel) * (1.0 + 1e-9)


class Tree:
    """RRT* tree plus the (separately stored) goal node."""

    def __init__(self, start: TransState, goal: TransState, params: PlannerParams,
                 snapshot: WorldSnapshot):
        self.params = params
        self.snapshot = snapshot
        self.obstacles = snapshot.obstacle_array()
        self.has_moving = bool(np.any(self.obstacles[:, 2:4] != 0.0)) if len(self.obstacles) else False
        self.index = SpatialIndex(4)
        self.nodes: list[TreeNode] = []
        self.max_speed = params.sample_bounds.max_speed
        self.root = self._add(TransState(*start), None, Edge(0.0, 0.0))
        self.goal = TreeNode(-1, TransState(*goal), cost=math.inf, arrival=math.inf)
        self.max_speed = max(self.max_speed, math.hypot(start[2], start[3]),
                             math.hypot(goal[2], goal[3]))

    def __len__(self):
        return len(self.nodes)

    @property
    def r(self) -> float:
        return self.params.input_weight

    def _add(self, state, parent, edge):
        node = TreeNode(len(self.nodes), state)
        if parent is not None:
            node.parent = parent
            node.edge = edge
            node.cost = parent.cost + edge.cost
            node.arrival = parent.arrival + edge.tau
            parent.children.append(node)
        self.nodes.append(node)
        self.index.add(state)
        return node

    def states(self, ids=None) -> np.ndarray:
        pts = self.index.points
        return pts if ids is None else pts[ids]

    def candidate_ids(self, q) -> np.ndarray:
        speed = max(self.max_speed, math.hypot(q[2], q[3]))
        rad = prefilter_radius(self.params.cost_radius, self.r, speed)
        return self.index.query_radius(q, rad)

    def edge_collides(self, a: TransState, b: TransState, tau: float, t0: float) -> bool:
        return bool(kernels.edge_collides(a, b, tau, self.r, t0, self.params.collision_dt,
                                          self.obstacles, self.params.inflation))

    def steer_costs(self, ids, q, reverse: bool):
        if len(ids) == 0:
            return np.zeros(0), np.zeros(0)
        taus, costs = kernels.steer_many(self.states(ids), q, self.r, reverse)
        return taus, costs

    def solution_cost(self) -> float:
        return self.goal.cost

    def audit(self) -> float:
        """Largest violation of ``cost = parent.cost + edge.cost`` over the tree."""
        worst = 0.0
        for node in self.nodes + [self.goal]:
            if node.parent is None:
                if node is self.root and node.cost != 0.0:
                    worst = max(worst, abs(node.cost))
                continue
            worst = max(worst, abs(node.cost - (node.parent.cost + node.edge.cost)),
                        abs(node.arrival - (node.parent.arrival + node.edge.tau)))
        return worst

    # ------------------------------------------------------------------ rewiring

    def _subtree_clear(self, node, new_arrival) -> bool:
        """Whether ``node``'s descendants stay collision-free when it arrives at ``new_arrival``."""
        if not self.has_moving or new_arrival == node.arrival:
            return True
        shift = new_arrival - node.arrival
        stack = [node]
        while stack:
            n = stack.pop()
            for child in n.children:
                if self.edge_collides(n.state, child.state, child.edge.tau, n.arrival + shift):
                    return False
                stack.append(child)
        return True

    def _propagate(self, node):
        stack = [node]
        while stack:
            n = stack.pop()
            for child in n.children:
                child.cost = n.cost + child.edge.cost
                child.arrival = n.arrival + child.edge.tau
                stack.append(child)

    def reparent(self, node, parent, edge):
        if node.parent is not None:
            node.parent.children.remove(node)
        node.parent = parent
        node.edge = edge
        node.cost = parent.cost + edge.cost
        node.arrival = parent.arrival + edge.tau
        parent.children.append(node)
        self._propagate(node)

    def rewire(self, new_node, neighbors) -> int:
        """Re-parent neighbors through ``new_node`` where that lowers their cost.

        ``neighbors`` holds ``(node, tau, cost)`` for connections from
        ``new_node``.  Returns the number of re-parented nodes.
        """
        changed = 0
        for node, tau, cost in neighbors:
            if node is new_node or node is self.root:
                continue
            total = new_node.cost + cost
            if not total < node.cost:
                continue
            if node.is_ancestor_of(new_node):
                continue
            if self.edge_collides(new_node.state, node.state, tau, new_node.arrival):
                continue
            if not self._subtree_clear(node, new_node.arrival + tau):
                continue
            self.reparent(node, new_node, Edge(tau, cost))
            changed += 1
        return changed

    # ------------------------------------------------------------------ output

    def backtrack(self) -> list[TreeNode]:
        """Nodes from root to goal, or ``[]`` when the goal is not wired."""
        if self.goal.parent is None:
            return []
        chain = [self.goal]
        while chain[-1].parent is not None:
            chain.append(chain[-1].parent)
        return chain[::-1]

    def edge_trajectory(self, node, dt=None) -> TransTrajectory:
        dt = self.params.output_dt if dt is None else dt
        return obvp.trajectory_for(node.parent.state, node.state, node.edge.tau, node.edge.cost,
                                   self.r, dt)

    def dump(self, polyline_dt: float = 0.1) -> dict:
        """JSON-ready dump; see ``TREE_DUMP_FIELDS`` for the record layout."""
        records = []
        for node in self.nodes + ([self.goal] if self.goal.parent is not None else []):
            if node.parent is None:
                edge = []
            else:
                s = self.edge_trajectory(node, polyline_dt).samples
                edge = [[round(v, 9) for v in row] for row in s[:, :3].tolist()]
            records.append({
                "id": node.id,
                "parent": None if node.parent is None else node.parent.id,
                "state": [float(v) for v in node.state],
                "cost": float(node.cost),
                "arrival": float(node.arrival),
                "edge": edge,
            })
        return {"schema_version": TREE_DUMP_VERSION, "fields": list(TREE_DUMP_FIELDS),
                "goal_id": self.goal.id, "nodes": records}


@dataclass
class PlanResult:
    trajectory: Optional[TransTrajectory]
    tree: Tree
    iterations: int
    cancelled: bool = False

    @property
    def success(self) -> bool:
        return self.trajectory is not None

    @property
    def cost(self) -> float:
        return self.tree.solution_cost()

    def dump_json(self) -> str:
        return json.dumps(self.tree.dump())


def sample(goal, params: PlannerParams, rng: np.random.Generator,
           explore_rng: Optional[np.random.Generator] = None) -> TransState:
    """Goal with probability ``goal_bias_p``, else uniform over the sampling box.

    The goal coin is drawn from ``rng`` and the uniform state from
    ``explore_rng`` (``rng`` when omitted).  With separate streams the k-th
    exploratory sample does not depend on ``goal_bias_p``.
    """
    if rng.random() < params.goal_bias_p:
        return TransState(*goal)
    b = params.sample_bounds
    gen = rng if explore_rng is None else explore_rng
    return TransState(*gen.uniform(b.low, b.high).tolist())


def sampler_streams(seed: int):
    """Independent ``(coin, explore)`` generators derived from one seed."""
    coin, explore = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(coin), np.random.default_rng(explore)


def near(tree: Tree, q, direction: str = "to", q_arrival: float = 0.0):
    """Collision-free tree nodes within the cost radius of ``q``.

    ``direction="to"`` scores connections node -> q (parent search, each
    edge starting at the node's arrival time); ``"from"`` scores q -> node
    starting at ``q_arrival`` (rewiring).  Returns ``(node, tau, cost)``
    sorted by cost.
    """
    if direction not in ("to", "from"):
        raise ValueError(f"direction must be 'to' or 'from', got {direction!r}")
    q = TransState(*q)
    ids = tree.candidate_ids(q)
    taus, costs = tree.steer_costs(ids, q, reverse=(direction == "from"))
    out = []
    for i in np.argsort(costs, kind="stable"):
        c = costs[i]
        if not c < tree.params.cost_radius:
            continue
        node = tree.nodes[ids[i]]
        tau = float(taus[i])
        if direction == "to":
            hit = tree.edge_collides(node.state, q, tau, node.arrival)
        else:
            hit = tree.edge_collides(q, node.state, tau, q_arrival)
        if not hit:
            out.append((node, tau, float(c)))
    return out


def _choose_parent(tree: Tree, q):
    ids = tree.candidate_ids(q)
    taus, costs = tree.steer_costs(ids, q, reverse=False)
    ok = np.nonzero(costs < tree.params.cost_radius)[0]
    if len(ok) == 0:
        return None
    if tree.params.parent_selection == "total":
        base = np.array([tree.nodes[ids[i]].cost for i in ok])
        key = base + costs[ok]
    else:
        key = costs[ok]
    # lazily collision-check candidates in order of preference
    for j in np.argsort(key, kind="stable"):
        i = ok[j]
        node = tree.nodes[ids[i]]
        if not tree.edge_collides(node.state, q, float(taus[i]), node.arrival):
            return node, Edge(float(taus[i]), float(costs[i]))
    return None


def _rewire_candidates(tree: Tree, new_node):
    q = new_node.state
    ids = tree.candidate_ids(q)
    ids = ids[ids != new_node.id]
    taus, costs = tree.steer_costs(ids, q, reverse=True)
    out = []
    for i in np.nonzero(costs < tree.params.cost_radius)[0]:
        out.append((tree.nodes[ids[i]], float(taus[i]), float(costs[i])))
    gt, gc = kernels.steer(q, tree.goal.state, tree.r)
    if gc < tree.params.cost_radius:
        out.append((tree.goal, gt, gc))
    return out


def plan(start, goal, snapshot: WorldSnapshot, params: PlannerParams,
         should_stop: Optional[Callable[[], bool]] = None,
         on_iteration: Optional[Callable[[Tree], None]] = None) -> PlanResult:
    """Grow an RRT* tree from ``start`` and return the goal path if one exists.

    Stops after ``params.n_iter`` sampling attempts, once the tree holds
    ``params.target_nodes`` nodes, or when ``should_stop()`` returns true.
    """
    start = TransState(*start)
    goal = TransState(*goal)
    if point_in_collision(start.px, start.py, 0.0, snapshot, params.inflation):
        raise InvalidStartError(f"start {start} lies inside an obstacle")
    tree = Tree(start, goal, params, snapshot)
    coin_rng, explore_rng = sampler_streams(params.rng_seed)

    if kernels.states_equal(start, goal):
        tree.reparent(tree.goal, tree.root, Edge(0.0, 0.0))
        return PlanResult(_solution(tree), tree, 0)

    iterations = 0
    cancelled = False
    while iterations < params.n_iter:
        if params.target_nodes is not None and len(tree) >= params.target_nodes:
            break
        if should_stop is not None and should_stop():
            cancelled = True
            break
        iterations += 1
        q = sample(goal, params, coin_rng, explore_rng)
        if q == goal:
            # the goal is a single tree member: re-select its parent, add nothing
            chosen = _choose_parent(tree, q)
            if chosen is not None and chosen[0].cost + chosen[1].cost < tree.goal.cost:
                tree.reparent(tree.goal, *chosen)
            if on_iteration is not None:
                on_iteration(tree)
            continue
        chosen = _choose_parent(tree, q)
        if chosen is None:
            continue
        parent, edge = chosen
        new_node = tree._add(q, parent, edge)
        tree.rewire(new_node, _rewire_candidates(tree, new_node))
        if on_iteration is not None:
            on_iteration(tree)
    return PlanResult(_solution(tree), tree, iterations, cancelled)


def _solution(tree: Tree) -> Optional[TransTrajectory]:
    chain = tree.backtrack()
    if not chain:
        return None
    parts = [tree.edge_trajectory(n) for n in chain[1:]]
    return obvp.concatenate(parts)
