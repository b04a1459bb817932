"""Kernel backend selection.

The compiled extension ``kinorrt._core`` is preferred; if it cannot be
imported (not built, or ``KINORRT_PURE_PYTHON=1``) the pure-Python twin in
``kinorrt._pycore`` is used.  Both expose the same functions.
"""

import importlib
import os

from . import _pycore


def load_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pycore
    if name == "cython":
        return importlib.import_module("kinorrt._core")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if os.environ.get("KINORRT_PURE_PYTHON", "") not in ("", "0"):
        return "python", _pycore
    try:
        return "cython", load_backend("cython")
    except ImportError:
        return "python", _pycore


_NAMES = ("states_equal", "arrival_cost", "cost_derivative", "optimal_arrival_time", "steer",
          "steer_many", "sample_count", "sample_trajectory", "segment_circle_hit",
          "polyline_collides", "edge_collides")


def use(module):
    """Rebind the module-level kernels to ``module`` (tests and benchmarks)."""
    global impl, BACKEND
    impl = module
    BACKEND = "python" if module is _pycore else "cython"
    globals().update({n: getattr(module, n) for n in _NAMES})


BACKEND, impl = _select()
use(impl)
