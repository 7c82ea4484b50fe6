"""Discrete measures, ground metrics, solver parameters and cost matrices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Points closer than this on every axis are treated as the same point.
DUPLICATE_TOL = 1e-12
#: Slack allowed when checking the triangle inequality of an explicit metric.
TRIANGLE_TOL = 1e-12


class ValidationError(ValueError):
    """Invalid user input. ``field`` names the offending field when known."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DiscreteMeasure:
    """Nonnegative weighted point cloud.

    ``points`` has shape ``(n, dim)`` and ``masses`` shape ``(n,)``. The total
    mass is arbitrary, in particular it need not be 1.
    """

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        points = np.asarray(self.points, dtype=float)
        if points.size == 0:
            dim = points.shape[1] if points.ndim == 2 else 0
            points = points.reshape(0, dim)
        elif points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2:
            raise ValidationError("points must be a 2-d array", "points")
        if len(points) != len(masses):
            raise ValidationError(
                f"got {len(points)} points but {len(masses)} masses", "masses")
        if not np.all(np.isfinite(points)):
            raise ValidationError("point coordinates must be finite", "points")
        if not np.all(np.isfinite(masses)):
            raise ValidationError("masses must be finite", "masses")
        if np.any(masses < 0):
            raise ValidationError("masses must be nonnegative", "masses")
        object.__setattr__(self, "points", _frozen(points))
        object.__setattr__(self, "masses", _frozen(masses))

    @property
    def size(self):
        return len(self.masses)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def total_mass(self):
        return float(self.masses.sum())

    def __len__(self):
        return self.size

    @classmethod
    def empty(cls, dim=1):
        return cls(np.zeros((0, dim)), np.zeros(0))

    @classmethod
    def dirac(cls, point, mass=1.0):
        return cls(np.atleast_2d(np.asarray(point, dtype=float)), [mass])


def normalize_measure(mu):
    """Merge duplicate points, drop zero masses and sort points lexicographically.

    Points whose coordinates agree within ``DUPLICATE_TOL`` on every axis are
    merged onto the lexicographically smallest of them.
    """
    pts, m = mu.points, mu.masses
    if mu.size == 0:
        return DiscreteMeasure(pts, m)
    order = np.lexsort(pts.T[::-1])
    pts, m = pts[order], m[order]
    close = np.all(np.abs(pts[:, None, :] - pts[None, :, :]) < DUPLICATE_TOL, axis=2)
    rep = np.argmax(close, axis=1)
    keep = rep == np.arange(len(m))
    merged = np.zeros(len(m))
    np.add.at(merged, rep, m)
    pts, merged = pts[keep], merged[keep]
    nz = merged > 0
    return DiscreteMeasure(pts[nz], merged[nz])


@dataclass(frozen=True)
class GWParams:
    """Parameters ``a`` (removal price), ``b`` (length scale) and ``p`` (exponent)."""

    a: float = 1.0
    b: float = 1.0
    p: float = 2.0

    def __post_init__(self):
        for name in ("a", "b", "p"):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise ValidationError(f"{name} must be finite", name)
        if self.a <= 0:
            raise ValidationError("a must be > 0", "a")
        if self.b <= 0:
            raise ValidationError("b must be > 0", "b")
        if self.p < 1:
            raise ValidationError("p must be >= 1", "p")


@dataclass(frozen=True)
class GroundMetric:
    """Ground distance on the point space.

    ``kind="euclidean"`` uses the Euclidean norm of coordinate differences.
    ``kind="explicit-matrix"`` reads distances from ``matrix``; points are then
    one-dimensional and their single coordinate is a node index into it.
    """

    kind: str = "euclidean"
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "euclidean":
            if self.matrix is not None:
                raise ValidationError("euclidean metric takes no matrix", "matrix")
            return
        if self.kind != "explicit-matrix":
            raise ValidationError(f"unknown metric kind {self.kind!r}", "kind")
        if self.matrix is None:
            raise ValidationError("explicit-matrix metric needs a matrix", "matrix")
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError("metric matrix must be square", "matrix")
        if np.any(np.isnan(mat)) or not np.all(np.isfinite(mat)):
            raise ValidationError("metric matrix entries must be finite", "matrix")
        if np.any(mat < 0):
            raise ValidationError("metric matrix entries must be >= 0", "matrix")
        if np.any(np.diag(mat) != 0):
            raise ValidationError("metric matrix needs a zero diagonal", "matrix")
        if not np.array_equal(mat, mat.T):
            raise ValidationError("metric matrix must be symmetric", "matrix")
        # d(i,k) <= d(i,j) + d(j,k) for all i, j, k
        via = (mat[:, :, None] + mat[None, :, :]).min(axis=1)
        if np.any(mat > via + TRIANGLE_TOL):
            raise ValidationError("metric matrix violates the triangle inequality", "matrix")
        object.__setattr__(self, "matrix", _frozen(mat))

    @classmethod
    def euclidean(cls):
        return cls("euclidean")

    @classmethod
    def explicit(cls, matrix):
        return cls("explicit-matrix", np.asarray(matrix, dtype=float))

    def _indices(self, pts):
        if pts.shape[1] != 1:
            raise ValidationError(
                "explicit-matrix metric expects 1-d points holding node indices", "points")
        idx = pts[:, 0]
        n = self.matrix.shape[0]
        if np.any(idx != np.round(idx)) or np.any(idx < 0) or np.any(idx >= n):
            raise ValidationError(f"point indices must be integers in [0, {n})", "points")
        return idx.astype(int)

    def pairwise(self, x, y, squared=False):
        """Distance matrix between the rows of ``x`` and ``y``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(x) == 0 or len(y) == 0:
            return np.zeros((len(x), len(y)))
        if x.shape[1] != y.shape[1]:
            raise ValidationError(
                f"point dimension mismatch: {x.shape[1]} vs {y.shape[1]}", "points")
        if self.kind == "euclidean":
            diff = x[:, None, :] - y[None, :, :]
            sq = np.einsum("ijk,ijk->ij", diff, diff)
            return sq if squared else np.sqrt(sq)
        d = self.matrix[np.ix_(self._indices(x), self._indices(y))]
        return d * d if squared else d.copy()


@dataclass(frozen=True)
class CostMatrix:
    """Ground costs ``(b * d(x_i, y_j)) ** p`` between two supports."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValidationError("cost matrix must be 2-d", "cost")
        if np.any(np.isnan(vals)) or np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValidationError("cost entries must be finite and >= 0", "cost")
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def shape(self):
        return self.values.shape

    @property
    def T(self):
        return CostMatrix(self.values.T)


def ground_cost(x, y, metric, b, p):
    """``(b * d) ** p`` between point arrays, exact for ``p`` in {1, 2}."""
    if p == 2:
        return (b * b) * metric.pairwise(x, y, squared=True)
    d = metric.pairwise(x, y)
    if p == 1:
        return b * d
    return (b * d) ** p


def build_cost_matrix(mu1, mu2, metric, params):
    """Cost matrix ``c[i, j] = (b * d(x_i, y_j)) ** p`` between two supports."""
    if mu1.size and mu2.size and mu1.dim != mu2.dim:
        raise ValidationError(
            f"point dimension mismatch: {mu1.dim} vs {mu2.dim}", "points")
    return CostMatrix(ground_cost(mu1.points, mu2.points, metric, params.b, params.p))


def as_cost_array(cost):
    if isinstance(cost, CostMatrix):
        return cost.values
    return np.asarray(cost, dtype=float)
