"""Dense two-phase simplex with Bland's anti-cycling rule.

Small, deterministic and dependency-free apart from numpy. Problems are
maximizations over box-bounded variables with mixed ``<=``/``=``/``>=`` rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS = 1e-9
PIVOT_FLOOR = 1e-12
MAX_PIVOTS = 100_000

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_SENSES = ("<=", "=", ">=")


class SolverInstabilityError(RuntimeError):
    """Pivoting hit magnitudes too small to trust, or the result failed re-checking."""


@dataclass
class LinearProgram:
    """maximize ``objective @ x`` subject to ``A[i] @ x  senses[i]  rhs[i]``
    and ``lower <= x <= upper``.

    Bounds default to ``[0, inf)``.
    """

    objective: np.ndarray
    A: np.ndarray
    senses: list[str]
    rhs: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        k = self.objective.shape[0]
        self.A = np.asarray(self.A, dtype=float).reshape(-1, k)
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        self.senses = list(self.senses)
        if len(self.senses) != self.A.shape[0] or self.rhs.shape[0] != self.A.shape[0]:
            raise ValueError("A, senses and rhs disagree on the number of rows")
        bad = [s for s in self.senses if s not in _SENSES]
        if bad:
            raise ValueError(f"unknown relation {bad[0]!r}")
        if not np.all(np.isfinite(self.rhs)):
            raise ValueError("right-hand sides must be finite")
        self.lower = np.zeros(k) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(k, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if self.lower.shape != (k,) or self.upper.shape != (k,):
            raise ValueError("bounds must match the objective length")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("bounds admit no finite value")

    @classmethod
    def from_rows(cls, objective, rows, bounds=None) -> "LinearProgram":
        """Build from ``[(coefficients, relation, rhs), ...]`` and ``[(lo, hi), ...]``."""
        objective = np.asarray(objective, dtype=float)
        k = objective.shape[0]
        A = np.array([r[0] for r in rows], dtype=float).reshape(-1, k)
        senses = [r[1] for r in rows]
        rhs = [r[2] for r in rows]
        lower = upper = None
        if bounds is not None:
            lower = np.array([b[0] for b in bounds], dtype=float)
            upper = np.array([b[1] for b in bounds], dtype=float)
        return cls(objective, A, senses, rhs, lower, upper)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    def residuals(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation of ``x``."""
        gap = self.A @ x - self.rhs
        senses = np.asarray(self.senses)
        viol = np.where(senses == "<=", gap, np.where(senses == ">=", -gap, np.abs(gap)))
        worst = float(viol.max(initial=0.0))
        if x.size:
            worst = max(worst, float(np.max(self.lower - x)), float(np.max(x - self.upper)))
        return worst


@dataclass
class LpSolution:
    status: str
    value: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _standardize(lp: LinearProgram):
    """Rewrite as max c'y, A'y (rel) b', y >= 0 with x = offset + M y."""
    k = lp.n_vars
    cols = []  # (original index, sign)
    offset = np.zeros(k)
    extra_rows = []  # (column position, upper bound)
    for j in range(k):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isfinite(lo) and np.isfinite(hi) and lo == hi:
            offset[j] = lo
        elif np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    M = np.zeros((k, len(cols)))
    for c, (j, s) in enumerate(cols):
        M[j, c] = s
    A = lp.A @ M
    b = lp.rhs - lp.A @ offset
    senses = list(lp.senses)
    if extra_rows:
        E = np.zeros((len(extra_rows), len(cols)))
        for r, (c, ub) in enumerate(extra_rows):
            E[r, c] = 1.0
        A = np.vstack([A, E])
        b = np.concatenate([b, [ub for _, ub in extra_rows]])
        senses += ["<="] * len(extra_rows)
    c = lp.objective @ M
    const = float(lp.objective @ offset)
    return A, b, senses, c, const, M, offset


class _Tableau:
    """Row-reduced tableau ``[B^-1 A | B^-1 b]`` plus basis bookkeeping.

    While optimizing, one extra trailing row holds the reduced costs so that
    pivots keep it current.
    """

    def __init__(self, T: np.ndarray, basis: list[int]):
        self.T = T
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, j: int, T: np.ndarray | None = None) -> None:
        T = self.T if T is None else T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        T[nz] -= col[nz, None] * T[r]
        T[nz, j] = 0.0
        rhs = T[:, -1]
        rhs[(rhs < 0) & (rhs > -EPS)] = 0.0
        self.basis[r] = j
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise SolverInstabilityError("pivot limit exceeded")

    def optimize(self, cost: np.ndarray, active: int) -> str:
        """Bland-rule simplex on the first ``active`` columns for max cost @ y."""
        m = self.T.shape[0]
        T = np.empty((m + 1, active + 1))
        T[:m, :active] = self.T[:, :active]
        T[:m, -1] = self.T[:, -1]
        T[m, :active] = cost[self.basis] @ T[:m, :active] - cost[:active]
        T[m, -1] = 0.0
        try:
            while True:
                cand = np.flatnonzero(T[m, :active] < -EPS)
                if cand.size == 0:
                    return OPTIMAL
                j = int(cand[0])
                colj = T[:m, j]
                pos = np.flatnonzero(colj > EPS)
                if pos.size == 0:
                    if np.any(colj > PIVOT_FLOOR):
                        raise SolverInstabilityError(
                            f"entering column {j} has only pivots in ({PIVOT_FLOOR}, {EPS}]"
                        )
                    return UNBOUNDED
                ratios = T[pos, -1] / colj[pos]
                best = ratios.min()
                ties = pos[ratios <= best + EPS * max(1.0, abs(best))]
                r = int(min(ties, key=lambda i: self.basis[i]))
                self.pivot(r, j, T)
        finally:
            self.T[:, :active] = T[:m, :active]
            self.T[:, -1] = T[:m, -1]


def solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly as posed; deterministic for identical input."""
    A, b, senses, c, const, M, offset = _standardize(lp)
    m, k = A.shape

    flip = b < 0
    A = np.where(flip[:, None], -A, A)
    b = np.abs(b)
    senses = [
        {"<=": ">=", ">=": "<="}.get(s, s) if f else s for s, f in zip(senses, flip)
    ]

    n_slack = sum(s != "=" for s in senses)
    # crash basis: a column with one positive entry can replace a row's artificial
    crash: dict[int, int] = {}
    if k:
        nnz = np.count_nonzero(A, axis=0)
        for j in np.flatnonzero(nnz == 1).tolist():
            i = int(np.flatnonzero(A[:, j])[0])
            if senses[i] != "<=" and A[i, j] > 0 and i not in crash:
                crash[i] = j
        for i, j in crash.items():
            b[i] /= A[i, j]
            A[i] /= A[i, j]
    art_rows = [i for i, s in enumerate(senses) if s != "<=" and i not in crash]
    n_art = len(art_rows)
    width = k + n_slack + n_art
    T = np.zeros((m, width + 1))
    T[:, :k] = A
    T[:, -1] = b
    basis = [-1] * m
    s_col = k
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, s_col] = 1.0
            basis[i] = s_col
            s_col += 1
        elif s == ">=":
            T[i, s_col] = -1.0
            s_col += 1
    for i, j in crash.items():
        basis[i] = j
    for a, i in enumerate(art_rows):
        col = k + n_slack + a
        T[i, col] = 1.0
        basis[i] = col

    tab = _Tableau(T, basis)
    real = k + n_slack
    if n_art:
        phase1 = np.zeros(width)
        phase1[real:] = -1.0
        tab.optimize(phase1, width)
        infeas = float(tab.T[:, -1][np.array(tab.basis) >= real].sum())
        if infeas > EPS * max(1.0, float(b.max(initial=0.0))):
            return LpSolution(INFEASIBLE, pivots=tab.pivots)
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if tab.basis[i] >= real:
                row = np.abs(tab.T[i, :real])
                j = int(np.argmax(row)) if real else 0
                if real and row[j] > EPS:
                    tab.pivot(i, j)
                    keep.append(i)
            else:
                keep.append(i)
        tab.T = np.ascontiguousarray(np.delete(tab.T[keep], np.s_[real:width], axis=1))
        tab.basis = [tab.basis[i] for i in keep]

    cost = np.zeros(real)
    cost[:k] = c
    status = tab.optimize(cost, real)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tab.pivots)

    y = np.zeros(real)
    for i, j in enumerate(tab.basis):
        y[j] = tab.T[i, -1]
    x = offset + M @ y[:k]
    value = float(lp.objective @ x)
    tol = EPS * max(1.0, float(np.abs(lp.rhs).max(initial=0.0)), float(np.abs(x).max(initial=0.0)))
    if lp.residuals(x) > tol:
        raise SolverInstabilityError(f"optimal point violates constraints by {lp.residuals(x):.3e}")
    return LpSolution(OPTIMAL, value, x, tab.pivots)
