import numpy as np
import pytest

from kinorrt import _pycore, kernels, rrtstar, scenario

try:
    from kinorrt import _core
except ImportError:  # extension not built
    _core = None

needs_ext = pytest.mark.skipif(_core is None, reason="compiled extension not built")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.load_backend("python") is _pycore
    with pytest.raises(ValueError):
        kernels.load_backend("fortran")


@needs_ext
def test_kernel_parity():
    rng = np.random.default_rng(0)
    obstacles = scenario.load("benchmark").snapshot().obstacle_array()
    for _ in range(300):
        xi = tuple(rng.uniform([0, 0, -2, -2], [12, 18, 2, 2]))
        xf = tuple(rng.uniform([0, 0, -2, -2], [12, 18, 2, 2]))
        r = float(rng.choice([0.25, 0.5, 1.5]))
        tau = float(rng.uniform(0.1, 10))
        assert _core.arrival_cost(xi, xf, tau, r) == pytest.approx(_pycore.arrival_cost(xi, xf, tau, r), rel=1e-13)
        assert _core.cost_derivative(xi, xf, tau, r) == pytest.approx(_pycore.cost_derivative(xi, xf, tau, r), rel=1e-12, abs=1e-12)
        assert _core.steer(xi, xf, r) == pytest.approx(_pycore.steer(xi, xf, r), rel=1e-12)
        ts, _ = _pycore.steer(xi, xf, r)
        np.testing.assert_allclose(_core.sample_trajectory(xi, xf, ts, r, 0.05),
                                   _pycore.sample_trajectory(xi, xf, ts, r, 0.05), rtol=1e-11, atol=1e-11)
        t0 = float(rng.uniform(0, 5))
        assert _core.edge_collides(xi, xf, ts, r, t0, 0.05, obstacles, 0.1) == \
            _pycore.edge_collides(xi, xf, ts, r, t0, 0.05, obstacles, 0.1)
    states = rng.uniform([0, 0, -2, -2], [12, 18, 2, 2], size=(50, 4))
    for rev in (False, True):
        a = _core.steer_many(states, (5, 5, 0, 0), 0.5, rev)
        b = _pycore.steer_many(states, (5, 5, 0, 0), 0.5, rev)
        np.testing.assert_allclose(a, b, rtol=1e-12)


@needs_ext
def test_planner_parity():
    scen = scenario.load("benchmark")
    out = []
    saved = kernels.impl
    try:
        for core in (_core, _pycore):
            kernels.use(core)
            res = rrtstar.plan(scen.start_state, scen.goal, scen.snapshot(), scen.planner)
            out.append((res.cost, [n.parent.id if n.parent else None for n in res.tree.nodes]))
    finally:
        kernels.use(saved)
    assert out[0][1] == out[1][1]
    assert out[0][0] == pytest.approx(out[1][0], rel=1e-12)
