"""Weighted multiplication operators around a set E at scale theta.

The weight is ``w(x) = max(0, min(1, 2 - 2 d(E, x) / theta))``: it is 1 on the
theta/2-neighbourhood of E, 0 beyond distance theta, and 2/theta-Lipschitz.
``apply_T_star`` multiplies Lipschitz functions by ``w``; its predual
``apply_T`` scales moment coefficients by ``w``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .freespace import as_moments, support
from .metric import PointedMetricSpace, dist_to_set_all, point_set


@dataclass(frozen=True, eq=False)
class WeightProfile:
    values: np.ndarray
    E: frozenset[int]
    theta: float

    @property
    def lipschitz_bound(self) -> float:
        return 2.0 / self.theta

    @property
    def operator_bound(self) -> float:
        """Norm bound 1 + 2/theta for both T and T* on a diameter-1 space."""
        return 1.0 + 2.0 / self.theta


def weight(X: PointedMetricSpace, E: Iterable[int], theta: float) -> WeightProfile:
    E = point_set(X, E)
    if theta <= 0:
        raise ValueError("theta must be positive")
    if not E:
        raise ValueError("E must be nonempty")
    d = dist_to_set_all(X, E)
    w = np.maximum(0.0, np.minimum(1.0, 2.0 - 2.0 * d / theta))
    w.setflags(write=False)
    return WeightProfile(w, E, float(theta))


def apply_T_star(X: PointedMetricSpace, f, E: Iterable[int], theta: float) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    return f * weight(X, E, theta).values


def apply_T(X: PointedMetricSpace, v, E: Iterable[int], theta: float) -> np.ndarray:
    v = as_moments(X, v)
    return v * weight(X, E, theta).values


def fixed_point_check(X: PointedMetricSpace, v, theta: float, E: Iterable[int] | None = None) -> bool:
    """Whether ``apply_T(v, E, theta) == v`` exactly; ``E`` defaults to supp v."""
    v = as_moments(X, v)
    E = support(v) if E is None else point_set(X, E)
    if not E:
        return not v.any()
    return bool(np.array_equal(apply_T(X, v, E, theta), v))
