"""Finite pointed metric spaces and ball primitives.

Every space carries a basepoint at index 0, is normalized to diameter 1 and
keeps the basepoint at distance exactly 1 from every other point.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

# validation tolerance for metric axioms
METRIC_TOL = 1e-12
# comparison tolerance for downstream numerical checks
EPS = 1e-9


class MetricError(ValueError):
    """Raised when a distance matrix is not a valid (pointed) metric.

    ``witness`` holds the offending index tuple when there is one.
    """

    def __init__(self, message: str, witness: tuple[int, ...] | None = None):
        super().__init__(message)
        self.witness = witness


def _check_metric(d: np.ndarray, tol: float = METRIC_TOL) -> None:
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise MetricError(f"distance matrix must be square, got shape {d.shape}")
    if d.shape[0] == 0:
        raise MetricError("distance matrix is empty")
    if not np.all(np.isfinite(d)):
        raise MetricError("distance matrix has non-finite entries")
    m = d.shape[0]
    diag = np.flatnonzero(np.abs(np.diag(d)) > tol)
    if diag.size:
        i = int(diag[0])
        raise MetricError(f"d({i},{i}) = {d[i, i]} is not zero", (i,))
    asym = np.argwhere(np.abs(d - d.T) > tol)
    if asym.size:
        i, j = map(int, asym[0])
        raise MetricError(f"d({i},{j}) != d({j},{i})", (i, j))
    off = ~np.eye(m, dtype=bool)
    bad = np.argwhere(off & (d <= 0))
    if bad.size:
        i, j = map(int, bad[0])
        raise MetricError(f"d({i},{j}) = {d[i, j]} must be positive", (i, j))
    # slack[i, j, k] = d[i,j] + d[j,k] - d[i,k]
    slack = d[:, :, None] + d[None, :, :] - d[:, None, :]
    viol = np.argwhere(slack < -tol)
    if viol.size:
        i, j, k = map(int, viol[0])
        raise MetricError(
            f"triangle inequality fails: d({i},{k}) = {d[i, k]} > "
            f"d({i},{j}) + d({j},{k}) = {d[i, j] + d[j, k]}",
            (i, j, k),
        )


@dataclass(frozen=True, eq=False)
class PointedMetricSpace:
    """Validated finite metric with basepoint 0, diameter 1 and d(0, p) = 1."""

    dist: np.ndarray

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        _check_metric(d)
        n = d.shape[0]
        if n < 2:
            raise MetricError("a pointed space needs the basepoint and at least one point")
        far = np.flatnonzero(np.abs(d[0, 1:] - 1.0) > METRIC_TOL)
        if far.size:
            p = int(far[0]) + 1
            raise MetricError(f"d(0,{p}) = {d[0, p]} must equal 1", (0, p))
        if d.max() > 1.0 + METRIC_TOL:
            i, j = np.unravel_index(int(np.argmax(d)), d.shape)
            raise MetricError(f"diameter exceeds 1 at ({i},{j})", (int(i), int(j)))
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def points(self) -> range:
        """Non-basepoint indices."""
        return range(1, self.n)

    def __eq__(self, other):
        if not isinstance(other, PointedMetricSpace):
            return NotImplemented
        return self.dist.shape == other.dist.shape and np.array_equal(self.dist, other.dist)

    def __hash__(self):
        return hash(self.dist.tobytes())

    def to_json(self) -> dict:
        return {"matrix": self.dist.tolist()}


def normalize_and_adjoin_basepoint(raw) -> PointedMetricSpace:
    """Scale ``raw`` to diameter 1 and prepend a basepoint at distance 1.

    >>> normalize_and_adjoin_basepoint([[0, 2], [2, 0]]).dist.tolist()
    [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]
    """
    d = np.asarray(raw, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise MetricError(f"expected a non-empty square matrix, got shape {d.shape}")
    m = d.shape[0]
    if m > 1:
        diam = float(d.max())
        if diam <= 0:
            raise MetricError("diameter is zero; all points coincide")
        # axioms are checked at the raw scale with a relative tolerance
        _check_metric(d, tol=METRIC_TOL * max(1.0, diam))
        d = d / diam
    else:
        _check_metric(d)
    out = np.ones((m + 1, m + 1))
    out[1:, 1:] = d
    np.fill_diagonal(out, 0.0)
    out[1:, 1:] = (out[1:, 1:] + out[1:, 1:].T) / 2
    return PointedMetricSpace(out)


def from_points(points, metric: str = "euclidean") -> PointedMetricSpace:
    """Build a normalized pointed space from coordinates."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    diff = x[:, None, :] - x[None, :, :]
    if metric == "euclidean":
        d = np.sqrt((diff**2).sum(-1))
    elif metric == "linf":
        d = np.abs(diff).max(-1)
    else:
        raise ValueError(f"unknown metric {metric!r}; use 'euclidean' or 'linf'")
    return normalize_and_adjoin_basepoint(d)


def _check_point(X: PointedMetricSpace, p: int) -> int:
    p = int(p)
    if not 0 <= p < X.n:
        raise IndexError(f"point {p} out of range for a {X.n}-point space")
    return p


def point_set(X: PointedMetricSpace, members: Iterable[int]) -> frozenset[int]:
    """Validate and freeze a subset of point indices."""
    return frozenset(_check_point(X, p) for p in members)


def ball(X: PointedMetricSpace, p: int, r: float) -> frozenset[int]:
    """Closed ball {x : d(x, p) <= r}."""
    p = _check_point(X, p)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return frozenset(np.flatnonzero(X.dist[p] <= r).tolist())


def ball_of_set(X: PointedMetricSpace, E: Iterable[int], r: float) -> frozenset[int]:
    out: set[int] = set()
    for p in E:
        out |= ball(X, p, r)
    return frozenset(out)


def dist_to_set(X: PointedMetricSpace, E: Iterable[int], x: int) -> float:
    """min over e in E of d(x, e); ``inf`` for the empty set."""
    idx = sorted(point_set(X, E))
    if not idx:
        return float("inf")
    return float(X.dist[_check_point(X, x), idx].min())


def dist_to_set_all(X: PointedMetricSpace, E: Iterable[int]) -> np.ndarray:
    """Vector of distances from every point to E."""
    idx = sorted(point_set(X, E))
    if not idx:
        return np.full(X.n, np.inf)
    return X.dist[:, idx].min(axis=1)
