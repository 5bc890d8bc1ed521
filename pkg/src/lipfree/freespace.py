"""The Lipschitz free-space norm on finitely supported elements.

An element sum_p a_p delta_p is stored as a length-``n`` moment vector; the
basepoint entry is always 0 because delta_0 = 0. A transshipment plan is an
``n x n`` array ``B`` of nonnegative flows, ``B[p, q]`` carrying mass on the
ordered pair (p, q) and representing sum B[p, q] (delta_p - delta_q).
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .metric import PointedMetricSpace
from .solver import LinearProgram, SolverInstabilityError, solve


def as_moments(X: PointedMetricSpace, v) -> np.ndarray:
    """Canonical moment vector; accepts an array or ``{index: coeff}``."""
    if isinstance(v, Mapping):
        out = np.zeros(X.n)
        for k, c in v.items():
            p = int(k)
            if not 0 <= p < X.n:
                raise IndexError(f"point {p} out of range for a {X.n}-point space")
            out[p] += float(c)
    else:
        out = np.array(v, dtype=float)
        if out.shape != (X.n,):
            raise ValueError(f"expected {X.n} coefficients, got shape {out.shape}")
    out[0] = 0.0
    return out


def delta(X: PointedMetricSpace, p: int) -> np.ndarray:
    v = np.zeros(X.n)
    v[p] = 1.0
    v[0] = 0.0
    return v


def support(v) -> frozenset[int]:
    v = np.asarray(v)
    return frozenset(int(p) for p in np.flatnonzero(v) if p != 0)


def evaluate(v, f) -> float:
    """Pairing sum_p v_p f(p)."""
    return float(np.dot(np.asarray(v, dtype=float)[1:], np.asarray(f, dtype=float)[1:]))


def plan_cost(X: PointedMetricSpace, B) -> float:
    return float((np.abs(B) * X.dist).sum())


def plan_moments(B) -> np.ndarray:
    """pi(B): net outflow at every point, basepoint entry zeroed."""
    B = np.asarray(B, dtype=float)
    out = B.sum(axis=1) - B.sum(axis=0)
    out[0] = 0.0
    return out


def plan_to_list(B, tol: float = 0.0) -> list[list]:
    B = np.asarray(B)
    return [[int(p), int(q), float(B[p, q])] for p, q in zip(*np.nonzero(np.abs(B) > tol))]


def _dual_lp(X: PointedMetricSpace, v: np.ndarray, vanish=()) -> LinearProgram:
    """max v.f over 1-Lipschitz f with f(0) = 0 and f = 0 on ``vanish``.

    Variables are the free values f(1..n-1); every unordered pair contributes
    the two rows +-(f(p) - f(q)) <= d(p, q), pairs with the basepoint reading
    +-f(p) <= 1. Vanishing points are pinned through their bounds.
    """
    k = X.n - 1
    iu, ju = np.triu_indices(k, 1)
    rows = len(iu)
    D = np.zeros((rows + k, k))
    D[np.arange(rows), iu] = 1.0
    D[np.arange(rows), ju] = -1.0
    D[rows + np.arange(k), np.arange(k)] = 1.0
    d = np.concatenate([X.dist[iu + 1, ju + 1], X.dist[0, 1:]])
    lower = np.full(k, -np.inf)
    upper = np.full(k, np.inf)
    for q in vanish:
        if q != 0:
            lower[q - 1] = upper[q - 1] = 0.0
    return LinearProgram(v[1:], np.vstack([D, -D]), ["<="] * (2 * len(d)),
                         np.concatenate([d, d]), lower, upper)


def lipschitz_dual(X: PointedMetricSpace, v, vanish=()) -> tuple[float, np.ndarray]:
    v = as_moments(X, v)
    sol = solve(_dual_lp(X, v, vanish))
    if not sol.optimal:
        raise SolverInstabilityError(f"dual norm LP ended {sol.status}")
    f = np.zeros(X.n)
    f[1:] = sol.x
    return max(sol.value, 0.0), f


def free_norm_dual(X: PointedMetricSpace, v) -> tuple[float, np.ndarray]:
    """Norm of ``v`` as max v(f) over the unit ball of Lip_0(X); returns (value, f)."""
    return lipschitz_dual(X, v)


def pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All ordered pairs (p, q), p != q, in row-major order."""
    P, Q = np.nonzero(~np.eye(n, dtype=bool))
    return P, Q


def free_norm_primal(X: PointedMetricSpace, v) -> tuple[float, np.ndarray]:
    """Norm of ``v`` as the cheapest transshipment plan B with pi(B) = v."""
    v = as_moments(X, v)
    n = X.n
    P, Q = pair_index(n)
    A = np.zeros((n - 1, P.size))
    cols = np.arange(P.size)
    # row p-1 is the balance at p: outflow - inflow; the basepoint is free
    mask = P > 0
    A[P[mask] - 1, cols[mask]] += 1.0
    mask = Q > 0
    A[Q[mask] - 1, cols[mask]] -= 1.0
    cost = X.dist[P, Q]
    sol = solve(LinearProgram(-cost, A, ["="] * (n - 1), v[1:]))
    if not sol.optimal:
        raise SolverInstabilityError(f"transshipment LP ended {sol.status}")
    B = np.zeros((n, n))
    B[P, Q] = sol.x
    return plan_cost(X, B), B


def free_norm(X: PointedMetricSpace, v) -> float:
    return free_norm_primal(X, v)[0]
