"""Lipschitz functions on a finite pointed space.

A Lipschitz function is a length-``n`` float array with ``f[0] == 0``.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .metric import EPS, PointedMetricSpace, point_set


def as_lip_function(X: PointedMetricSpace, values) -> np.ndarray:
    f = np.asarray(values, dtype=float)
    if f.shape != (X.n,):
        raise ValueError(f"expected {X.n} values, got shape {f.shape}")
    if f[0] != 0.0:
        raise ValueError("Lipschitz functions must vanish at the basepoint")
    return f


def _pair_slopes(X: PointedMetricSpace, f: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(X.n, 1)
    return np.abs(f[iu[0]] - f[iu[1]]) / X.dist[iu]


def lip_norm(X: PointedMetricSpace, f) -> float:
    """max over unordered pairs of |f(p) - f(q)| / d(p, q)."""
    f = np.asarray(f, dtype=float)
    if X.n < 2:
        return 0.0
    return float(_pair_slopes(X, f).max())


def lip_const_on(X: PointedMetricSpace, S: Sequence[int], values) -> float:
    """Lipschitz constant of a partial function given on the index list ``S``."""
    S = list(S)
    vals = np.asarray(values, dtype=float)
    if len(S) < 2:
        return 0.0
    sub = X.dist[np.ix_(S, S)]
    iu = np.triu_indices(len(S), 1)
    return float((np.abs(vals[iu[0]] - vals[iu[1]]) / sub[iu]).max())


def sup_norm(f) -> float:
    f = np.asarray(f, dtype=float)
    return float(np.abs(f).max()) if f.size else 0.0


def _partial_items(X: PointedMetricSpace, S, partial) -> tuple[list[int], np.ndarray]:
    if isinstance(partial, Mapping):
        S = sorted(point_set(X, partial.keys()) if S is None else point_set(X, S))
        vals = np.array([float(partial[s]) for s in S])
    else:
        S = list(S)
        vals = np.asarray(partial, dtype=float)
        if vals.shape != (len(S),):
            raise ValueError("partial values must align with S")
        point_set(X, S)
    return S, vals


def mcshane_extend(X: PointedMetricSpace, S, partial) -> np.ndarray:
    """Norm-preserving extension ``f(x) = min_s (partial(s) + L d(s, x))``.

    ``partial`` is either a mapping ``{index: value}`` (``S`` may then be None)
    or a sequence aligned with ``S``. The basepoint must be in ``S`` with value 0.
    """
    S, vals = _partial_items(X, S, partial)
    if 0 not in S:
        raise ValueError("the basepoint must belong to the domain of the partial function")
    if vals[S.index(0)] != 0.0:
        raise ValueError("the partial function must vanish at the basepoint")
    L = lip_const_on(X, S, vals)
    f = (vals[:, None] + L * X.dist[S, :]).min(axis=0)
    f[S] = vals
    return f - f[0]


def tent_bump(X: PointedMetricSpace, p: int, h: float) -> np.ndarray:
    """``x -> max(0, h - d(p, x))``; 1-Lipschitz, vanishing off the open h-ball."""
    if not 0 <= h <= 1:
        raise ValueError("tent height must lie in [0, 1]")
    f = np.maximum(0.0, h - X.dist[int(p)])
    f[0] = 0.0
    return f


def truncate_between(g_minus, f, g_plus) -> np.ndarray:
    """Pointwise ``max(g_minus, min(g_plus, f))``."""
    g_minus = np.asarray(g_minus, dtype=float)
    g_plus = np.asarray(g_plus, dtype=float)
    f = np.asarray(f, dtype=float)
    if np.any(g_minus > 0) or np.any(g_plus < 0):
        raise ValueError("need g_minus <= 0 <= g_plus pointwise")
    return np.maximum(g_minus, np.minimum(g_plus, f))


class SeparationError(ValueError):
    def __init__(self, message: str, witness: tuple[int, int]):
        super().__init__(message)
        self.witness = witness


def glue_separated(
    X: PointedMetricSpace, pieces, theta: float, tol: float = EPS
) -> tuple[np.ndarray, float]:
    """Glue functions living on theta/2-separated sets into one function.

    ``pieces`` is a sequence of ``(S_i, values_i)``; each piece must have
    Lipschitz and sup norm at most 1 on ``S_i`` together with the basepoint.
    The glued function is fixed on the union of the pieces and the basepoint,
    then McShane-extended to the rest of ``X``. Returns the function and the
    certified bound ``max(1, 4 / theta)`` on its Lipschitz norm.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    items = []
    for S, vals in pieces:
        S = list(S)
        vals = np.asarray(vals, dtype=float)
        if len(S) != len(set(S)) or vals.shape != (len(S),):
            raise ValueError("each piece needs distinct points and one value per point")
        if 0 in S:
            raise ValueError("pieces may not contain the basepoint")
        point_set(X, S)
        if lip_const_on(X, [0] + S, np.concatenate([[0.0], vals])) > 1 + tol:
            raise ValueError("piece has Lipschitz norm above 1")
        if sup_norm(vals) > 1 + tol:
            raise ValueError("piece has sup norm above 1")
        items.append((S, vals))
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            Si, Sj = items[i][0], items[j][0]
            sub = X.dist[np.ix_(Si, Sj)]
            if sub.size == 0:
                continue
            k = np.unravel_index(int(np.argmin(sub)), sub.shape)
            if set(Si) & set(Sj) or sub[k] < theta / 2:
                raise SeparationError(
                    f"pieces {i} and {j} are closer than theta/2 = {theta / 2}",
                    (Si[k[0]], Sj[k[1]]),
                )
    partial = {0: 0.0}
    for S, vals in items:
        partial.update(zip(S, vals.tolist()))
    f = mcshane_extend(X, None, partial)
    return f, max(1.0, 4.0 / theta)
