"""Ideal carriers, the radius function and the ideal-restricted norm.

On a finite space every ideal of subsets is the family of subsets of one
carrier ``A``, so an ideal is passed around as its carrier (a frozenset).
Functions in Lip(I, X) are exactly those vanishing off ``A``.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .freespace import as_moments, lipschitz_dual
from .metric import PointedMetricSpace, ball, point_set


class CarrierError(ValueError):
    def __init__(self, message: str, witness: int | None = None):
        super().__init__(message)
        self.witness = witness


def carrier(X: PointedMetricSpace, A: Iterable[int]) -> frozenset[int]:
    return point_set(X, A)


def rad(X: PointedMetricSpace, A: Iterable[int], p: int) -> float:
    """Largest radius (capped at 1) whose balls around ``p`` stay inside ``A``.

    Equals ``min(1, min_{q not in A} d(p, q))`` for ``p`` in ``A`` and 0 off
    ``A``. The basepoint always gets 0 since delta_0 = 0.
    """
    A = carrier(X, A)
    p = int(p)
    if p == 0 or p not in A:
        return 0.0
    outside = [q for q in range(X.n) if q not in A]
    if not outside:
        return 1.0
    return float(min(1.0, X.dist[p, outside].min()))


def rad_table(X: PointedMetricSpace, A: Iterable[int]) -> np.ndarray:
    A = carrier(X, A)
    return np.array([rad(X, A, p) for p in range(X.n)])


def ideal_norm(X: PointedMetricSpace, A: Iterable[int], v) -> tuple[float, np.ndarray]:
    """Dual norm of ``v`` against 1-Lipschitz functions vanishing off ``A``.

    Returns ``(value, witness)``.
    """
    A = carrier(X, A)
    off = [q for q in range(1, X.n) if q not in A]
    return lipschitz_dual(X, v, vanish=off)


def canonical_atoms(X: PointedMetricSpace, A: Iterable[int], a) -> np.ndarray:
    """Zero every coefficient where rad vanishes (the l1_I equivalence)."""
    a = np.array(a, dtype=float)
    if a.shape != (X.n,):
        raise ValueError(f"expected {X.n} atom coefficients, got shape {a.shape}")
    a[rad_table(X, A) == 0] = 0.0
    return a


def atom_cost(X: PointedMetricSpace, A: Iterable[int], a) -> float:
    """Weighted l1 norm sum_p |a_p| rad(p)."""
    return float(np.abs(np.asarray(a, dtype=float)) @ rad_table(X, A))


def q_map(X: PointedMetricSpace, A: Iterable[int], a) -> np.ndarray:
    """Send an atom vector to the free-space element sum a_p delta_p."""
    return as_moments(X, canonical_atoms(X, A, a))


def radiinf_margin(X: PointedMetricSpace, A: Iterable[int], p: int, r: float, r_outer: float) -> float:
    """min of rad over ``ball(p, r)``, given ``ball(p, r_outer)`` lies inside ``A``.

    The result is at least ``r_outer - r``.
    """
    if not 0 <= r < r_outer <= 1:
        raise ValueError("need 0 <= r < r_outer <= 1")
    if p == 0:
        raise ValueError("the basepoint has no interior radius")
    A = carrier(X, A)
    outer = ball(X, p, r_outer)
    stray = sorted(outer - A - {0})
    if stray:
        raise CarrierError(f"ball({p}, {r_outer}) leaves the carrier at point {stray[0]}", stray[0])
    return min(rad(X, A, q) for q in ball(X, p, r))
