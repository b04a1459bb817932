"""Incremental 4-D point index for tree states."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree


class SpatialIndex:
    """Point index with radius and k-nearest queries.

    Points are appended one at a time; the KD-tree is rebuilt lazily on the
    next query after an insertion.  Query results are point ids (insertion
    order), sorted by distance with ties broken by id.
    """

    def __init__(self, dim: int = 4):
        self.dim = dim
        self._points = np.zeros((0, dim))
        self._n = 0
        self._tree = None

    def __len__(self):
        return self._n

    @property
    def points(self) -> np.ndarray:
        return self._points[: self._n]

    def add(self, point) -> int:
        point = np.asarray(point, dtype=np.float64).reshape(self.dim)
        if self._n == self._points.shape[0]:
            grown = np.zeros((max(16, 2 * self._n), self.dim))
            grown[: self._n] = self._points[: self._n]
            self._points = grown
        self._points[self._n] = point
        self._n += 1
        self._tree = None
        return self._n - 1

    def _kdtree(self):
        if self._tree is None:
            self._tree = cKDTree(self.points)
        return self._tree

    def _sorted(self, ids, q):
        ids = np.asarray(ids, dtype=np.intp)
        d = np.linalg.norm(self.points[ids] - q, axis=1)
        return ids[np.lexsort((ids, d))]

    def query_radius(self, point, radius: float) -> np.ndarray:
        """Ids of points within ``radius`` (inclusive) of ``point``."""
        if self._n == 0:
            return np.zeros(0, dtype=np.intp)
        q = np.asarray(point, dtype=np.float64)
        if not np.isfinite(radius):
            return self._sorted(np.arange(self._n), q)
        return self._sorted(self._kdtree().query_ball_point(q, radius), q)

    def query_knn(self, point, k: int) -> np.ndarray:
        """Ids of the ``k`` nearest points (fewer if the index is smaller)."""
        k = min(k, self._n)
        if k <= 0:
            return np.zeros(0, dtype=np.intp)
        q = np.asarray(point, dtype=np.float64)
        d, _ = self._kdtree().query(q, k=k)
        cutoff = np.max(np.atleast_1d(d))
        # re-select so equidistant points at the cutoff resolve by id
        within = self._kdtree().query_ball_point(q, cutoff * (1 + 1e-12) + 1e-300)
        return self._sorted(within, q)[:k]

