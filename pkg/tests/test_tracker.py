import math

import numpy as np
import pytest
import sympy as sp

from kinorrt import obvp, rotation, tracker
from kinorrt.simengine import track_reference
from kinorrt.tracker import (BodyVelocity, Pose, Reference, ReferencePoint, TrackerGains,
                             body_to_world, control_step, gains, world_to_body)

XI = (2.3, -2.3, 1.0, -1.0)

# symbolic gain expressions, evaluated independently of the module
_w, _u, _v = sp.symbols("w u v")
_ap = sp.symbols("p1:4")
_ai = sp.symbols("i1:4")
_A1 = sp.Matrix([[0, 0, -_u * sp.sin(_w) - _v * sp.cos(_w)],
                 [0, 0, _u * sp.cos(_w) - _v * sp.sin(_w)], [0, 0, 0]])
_B1 = sp.Matrix([[sp.cos(_w), -sp.sin(_w), 0], [sp.sin(_w), sp.cos(_w), 0], [0, 0, 1]])
_KI = -_B1.inv() * sp.diag(*[-a for a in _ai])
_KP = -_B1.inv() * (_A1 - sp.diag(*[-a for a in _ap]))
_gain_fn = sp.lambdify((_w, _u, _v, _ap, _ai), (_KP, _KI), "numpy")


def test_frame_transforms():
    assert world_to_body((1.0, 2.0, 3.0), 0.0) == (1.0, 2.0, 3.0)
    np.testing.assert_allclose(world_to_body((1, 0, 0), math.pi / 2), (0, -1, 0), atol=1e-15)
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        w = rng.uniform(-10, 10)
        vel = rng.normal(size=3)
        np.testing.assert_allclose(body_to_world(world_to_body(vel, w), w), vel, atol=1e-12)


def test_rest_reference_matrices():
    ref = ReferencePoint(0, 0, 0, 0, 0, 0)
    np.testing.assert_array_equal(tracker.rotation_matrix(0.0), np.eye(3))
    np.testing.assert_array_equal(tracker.coupling_matrix(ref), np.zeros((3, 3)))
    for w in np.linspace(-4, 4, 17):
        assert np.linalg.det(tracker.rotation_matrix(w)) == pytest.approx(1.0)


def test_gains_match_symbolic_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        g = TrackerGains(tuple(rng.uniform(0.5, 5, 3)), tuple(rng.uniform(0.5, 5, 3)))
        ref = ReferencePoint(*rng.normal(size=2), rng.uniform(-4, 4), *rng.normal(size=3))
        body = world_to_body((ref.vx, ref.vy, ref.rate), ref.heading)
        kp, ki = _gain_fn(ref.heading, body.u, body.v, g.a_p, g.a_i)
        got_p, got_i = gains(g, ref)
        np.testing.assert_allclose(got_p, np.array(kp, dtype=float), atol=1e-12)
        np.testing.assert_allclose(got_i, np.array(ki, dtype=float), atol=1e-12)


def test_control_step_examples():
    g = TrackerGains()
    ref = ReferencePoint(1.0, 2.0, 0.5, 0.3, -0.2, 0.1)
    cmd, integ = control_step(Pose(1.0, 2.0, 0.5), ref, np.zeros(3), 1 / 60, g)
    np.testing.assert_allclose(cmd, world_to_body((0.3, -0.2, 0.1), 0.5), atol=1e-15)
    assert np.all(integ == 0)
    rest = ReferencePoint(0, 0, 0, 0, 0, 0)
    cmd, _ = control_step(Pose(0.1, 0.0, 0.0), rest, np.zeros(3), 1e-9, g)
    assert cmd.u == pytest.approx(-0.3, abs=1e-8)
    with pytest.raises(ValueError):
        control_step(Pose(0, 0, 0), rest, np.zeros(3), 0.0, g)


def test_integral_clamp_and_heading_wrap():
    g = TrackerGains()
    rest = ReferencePoint(0, 0, 0, 0, 0, 0)
    _, integ = control_step(Pose(100.0, 0, 0), rest, np.zeros(3), 1.0, g)
    assert integ[0] == 1.0
    ref = ReferencePoint(1.0, 1.0, 3.0, 0.2, 0.1, 0.0)
    a, _ = control_step(Pose(1.1, 0.9, -3.0), ref, np.zeros(3), 0.01, g)
    b, _ = control_step(Pose(1.1, 0.9, -3.0 + 2 * math.pi), ref._replace(heading=3.0 + 2 * math.pi),
                        np.zeros(3), 0.01, g)
    np.testing.assert_allclose(a, b, atol=1e-12)
    # heading error is taken the short way round
    assert tracker.pose_error((0, 0, -3.1), (0, 0, 3.1))[2] == pytest.approx(2 * math.pi - 6.2)


def test_linearized_error_dynamics():
    # one step from a small error follows de/dt = -a_p e - a_i int(e)
    g = TrackerGains((2.0, 3.0, 4.0), (1.0, 1.0, 1.0))
    ref = ReferencePoint(0.0, 0.0, 0.7, 0.8, -0.4, 0.0)
    e0 = np.array([1e-4, -2e-4, 1e-4])
    pose = Pose(*(np.array(ref.pose) + e0))
    dt = 1e-6
    cmd, integ = control_step(pose, ref, np.zeros(3), dt, g)
    w = body_to_world(cmd, pose.heading) - np.array([ref.vx, ref.vy, ref.rate])
    expected = -np.array(g.a_p) * e0 - np.array(g.a_i) * integ
    np.testing.assert_allclose(w, expected, rtol=2e-3, atol=1e-9)


def obvp_reference(with_rotation=True):
    traj = obvp.connect(XI, (0, 0, 0, 0), 0.5)
    rot = rotation.min_time_rotation((-2.3, 1.0), 0.0, rotation.RotLimits(0.75, 0.75)) if with_rotation else None
    return Reference(traj, rot, 0.0, heading=0.4)


@pytest.mark.parametrize("with_rotation", [False, True])
def test_closed_loop_tracking(with_rotation):
    ref = obvp_reference(with_rotation)
    p0 = ref.point(0.0).pose
    zero = track_reference(ref, p0, TrackerGains(), 1 / 60, 8.0)
    assert np.max(np.hypot(zero[:, 1], zero[:, 2])) < 1e-3
    off = track_reference(ref, Pose(p0.x + 0.5, p0.y, p0.heading), TrackerGains(), 1 / 60, 8.0)
    err = np.hypot(off[:, 1], off[:, 2])
    assert np.all(err[off[:, 0] >= 3.0] < 0.01)
    # the loop is underdamped; the error stays under a decaying envelope
    assert np.all(err <= 0.5 * 1.5 * np.exp(-1.5 * off[:, 0]) + 1e-3)


def test_bounded_initial_error_converges():
    ref = obvp_reference()
    rng = np.random.default_rng(3)
    for _ in range(10):
        p0 = ref.point(0.0).pose
        d = rng.normal(size=2)
        d *= rng.uniform(0, 0.5) / np.linalg.norm(d)
        start = Pose(p0.x + d[0], p0.y + d[1], p0.heading + rng.uniform(-0.5, 0.5))
        out = track_reference(ref, start, TrackerGains(), 1 / 60, 6.0)
        err = np.hypot(out[:, 1], out[:, 2])
        assert np.all(err[out[:, 0] >= 5.0] < 0.01)


def test_reference_lookup():
    ref = obvp_reference()
    s = ref.trans.samples
    mid = 0.5 * (s[3] + s[4])
    p = ref.point(mid[0])
    assert (p.x, p.y, p.vx, p.vy) == pytest.approx(tuple(mid[1:5]))
    end = ref.point(100.0)
    assert (end.x, end.y, end.vx, end.vy, end.rate) == pytest.approx((0, 0, 0, 0, 0), abs=1e-9)
    assert end.heading == pytest.approx(0.0, abs=1e-9)
    shifted = Reference(ref.trans, ref.rot, 2.0)
    assert shifted.point(2.0 + 1.0) == ref.point(1.0)
    assert shifted.point(0.0) == ref.point(0.0)


def test_gain_validation():
    with pytest.raises(ValueError):
        TrackerGains((0, 1, 1), (1, 1, 1))
    with pytest.raises(ValueError):
        TrackerGains((1, 1), (1, 1, 1))
    assert BodyVelocity(1, 2, 3).r == 3
