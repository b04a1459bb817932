import numpy as np
import pytest

from oracles import fine_oracle
from kinorrt import obvp
from kinorrt.obvp import TransState, TransTrajectory
from kinorrt.world import (Bounds, Obstacle, WorldSnapshot, min_clearance, point_in_collision,
                           predict_obstacle, segment_circle_hit, trajectory_collides)

FIELD = Bounds(0, 12, 0, 18)


def straight(p0, p1, duration, n=11):
    t = np.linspace(0.0, duration, n)
    v = (np.asarray(p1) - np.asarray(p0)) / duration
    pts = np.asarray(p0) + np.outer(t / duration, np.asarray(p1) - np.asarray(p0))
    s = np.column_stack([t, pts, np.tile(v, (n, 1)), np.zeros((n, 2))])
    return TransTrajectory(TransState(*p0, *v), TransState(*p1, *v), duration, s, duration)


def snap(*obs):
    return WorldSnapshot(0.0, obs, FIELD)


def test_predict_obstacle():
    o = Obstacle((1.0, 2.0), (0.5, -1.0), 0.3)
    assert predict_obstacle(o, 2.0) == (2.0, 0.0)
    assert predict_obstacle(o, 0.0) == (1.0, 2.0)
    assert predict_obstacle(Obstacle((3.0, 4.0), (0.0, 0.0), 1.0), 7.5) == (3.0, 4.0)


def test_segment_circle_examples():
    assert segment_circle_hit((0, 0), (2, 0), (1, 1), 1.0)
    assert not segment_circle_hit((0, 0), (2, 0), (1, 1.5), 1.0)
    assert not segment_circle_hit((0, 0), (2, 0), (3, 0), 0.5)
    assert segment_circle_hit((0, 0), (0, 0), (0.5, 0), 0.5)


def test_trajectory_examples():
    assert not trajectory_collides(straight((0, 0), (1, 0), 1.0), 0.0, snap())
    assert trajectory_collides(straight((0, 0), (4, 0), 2.0), 0.0, snap(Obstacle((2, 0), (0, 0), 0.5)))
    seg = straight((0, 0), (1, 0), 1.0)
    assert trajectory_collides(seg, 0.0, snap(Obstacle((2, 0), (-2, 0), 0.3)))
    assert not trajectory_collides(seg, 0.0, snap(Obstacle((2, 0), (2, 0), 0.3)))


def test_start_offset_shifts_obstacles():
    seg = straight((0, 0), (1, 0), 1.0)
    o = Obstacle((5, 0), (-2, 0), 0.3)
    assert not trajectory_collides(seg, 0.0, snap(o))
    assert trajectory_collides(seg, 2.0, snap(o))


def random_case(rng):
    lo, hi = [0, 0, -2, -2], [12, 18, 2, 2]
    traj = obvp.connect(rng.uniform(lo, hi), rng.uniform(lo, hi), 0.5, dt=0.05)
    obs = tuple(Obstacle(tuple(rng.uniform([0, 0], [12, 18])), tuple(rng.uniform(-1, 1, 2)),
                         float(rng.uniform(0.2, 1.5))) for _ in range(3))
    return traj, obs, float(rng.uniform(0, 3))


def test_conservative_against_fine_oracle():
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(1000):
        traj, obs, t0 = random_case(rng)
        if fine_oracle(traj, t0, obs):
            hits += 1
            assert trajectory_collides(traj, t0, snap(*obs))
    assert hits > 50


def test_translation_invariance_and_radius_monotonicity():
    rng = np.random.default_rng(1)
    for _ in range(300):
        traj, obs, t0 = random_case(rng)
        verdict = trajectory_collides(traj, t0, snap(*obs))
        shift = rng.uniform(-5, 5, 2)
        s = traj.samples.copy()
        s[:, 1:3] += shift
        moved = TransTrajectory(traj.start, traj.end, traj.tau, s, traj.cost)
        obs2 = tuple(Obstacle(tuple(np.add(o.center0, shift)), o.velocity, o.radius) for o in obs)
        assert trajectory_collides(moved, t0, snap(*obs2)) == verdict
        if verdict:
            bigger = tuple(Obstacle(o.center0, o.velocity, o.radius * 1.3) for o in obs)
            assert trajectory_collides(traj, t0, snap(*bigger))
            assert trajectory_collides(traj, t0, snap(*obs), inflation=0.2)


def test_point_queries():
    s = snap(Obstacle((1, 1), (1, 0), 0.5))
    assert point_in_collision(1.0, 1.0, 0.0, s)
    assert not point_in_collision(1.0, 1.0, 1.0, s)
    assert point_in_collision(1.0, 1.7, 0.0, s, inflation=0.25)
    assert min_clearance(4.0, 1.0, 1.0, s.obstacles) == pytest.approx(1.5)
    assert min_clearance(0.0, 0.0, 0.0, ()) == np.inf


def test_validation():
    with pytest.raises(ValueError):
        Obstacle((0, 0), (0, 0), 0.0)
    with pytest.raises(ValueError):
        Obstacle((np.nan, 0), (0, 0), 1.0)
    with pytest.raises(ValueError):
        Bounds(0, 0, 0, 1)
    with pytest.raises(ValueError):
        WorldSnapshot(np.inf, (), FIELD)
    assert snap().obstacle_array().shape == (0, 5)
