"""Certified decompositions v = pi(plan) + sum_p a_p delta_p on an ideal carrier.

A decomposition pairs a transshipment plan with an atom vector. It
reconstructs ``v`` when the plan's net outflow plus the atoms matches ``v``
at every carrier point; coordinates off the carrier are invisible to
functions vanishing there. Its cost is plan cost plus rad-weighted atom mass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .freespace import as_moments, pair_index, plan_cost, plan_moments
from .ideals import atom_cost, canonical_atoms, carrier, ideal_norm, rad_table
from .metric import EPS, PointedMetricSpace, ball
from .solver import LinearProgram, SolverInstabilityError, solve


def inequality(lhs: float, rhs: float, tol: float = 0.0, name: str = "") -> dict:
    """Record of the check ``lhs <= rhs + tol``."""
    rec = {"lhs": float(lhs), "rhs": float(rhs), "ok": bool(lhs <= rhs + tol)}
    if name:
        rec = {"name": name, **rec}
    return rec


@dataclass
class QuotientDecomposition:
    X: PointedMetricSpace = field(repr=False)
    A: frozenset[int]
    plan: np.ndarray
    atoms: np.ndarray

    @property
    def plan_cost(self) -> float:
        return plan_cost(self.X, self.plan)

    @property
    def atom_cost(self) -> float:
        return atom_cost(self.X, self.A, self.atoms)

    @property
    def cost(self) -> float:
        return self.plan_cost + self.atom_cost

    def reconstruct(self) -> np.ndarray:
        """Represented element, with off-carrier coordinates zeroed."""
        out = plan_moments(self.plan) + self.atoms
        return restrict(self.X, self.A, out)

    def residual(self, v) -> float:
        """Largest reconstruction error on the carrier."""
        diff = self.reconstruct() - restrict(self.X, self.A, as_moments(self.X, v))
        return float(np.abs(diff).max(initial=0.0))


def restrict(X: PointedMetricSpace, A: Iterable[int], v) -> np.ndarray:
    """Zero the coordinates of ``v`` outside the carrier (and at the basepoint)."""
    A = carrier(X, A)
    out = np.array(v, dtype=float)
    mask = np.zeros(X.n, dtype=bool)
    mask[sorted(A - {0})] = True
    out[~mask] = 0.0
    return out


def optimal_lift(X: PointedMetricSpace, A: Iterable[int], v) -> QuotientDecomposition:
    """Cheapest decomposition of ``v``; its cost equals the ideal norm of ``v``."""
    A = carrier(X, A)
    v = as_moments(X, v)
    n = X.n
    r = rad_table(X, A)
    rows = [p for p in range(1, n) if p in A]
    row_of = {p: i for i, p in enumerate(rows)}
    P, Q = pair_index(n)
    k_flow = P.size
    k = k_flow + 2 * len(rows)
    M = np.zeros((len(rows), k))
    for c, (p, q) in enumerate(zip(P.tolist(), Q.tolist())):
        if p in row_of:
            M[row_of[p], c] += 1.0
        if q in row_of:
            M[row_of[q], c] -= 1.0
    for i, p in enumerate(rows):
        M[i, k_flow + 2 * i] = 1.0
        M[i, k_flow + 2 * i + 1] = -1.0
    cost = np.concatenate([X.dist[P, Q], np.repeat(r[rows], 2)])
    sol = solve(LinearProgram(-cost, M, ["="] * len(rows), v[rows]))
    if not sol.optimal:
        raise SolverInstabilityError(f"lift LP ended {sol.status}")
    plan = np.zeros((n, n))
    plan[P, Q] = sol.x[:k_flow]
    atoms = np.zeros(n)
    split = sol.x[k_flow:].reshape(-1, 2)
    atoms[rows] = split[:, 0] - split[:, 1]
    return QuotientDecomposition(X, A, plan, atoms)


def close_radius(X: PointedMetricSpace, A: Iterable[int], c: float) -> np.ndarray:
    """Matrix rho(p, q) = c * min(rad p, rad q)."""
    r = rad_table(X, A)
    return c * np.minimum(r[:, None], r[None, :])


def far_pair_inequality(X: PointedMetricSpace, A: Iterable[int], p: int, q: int, c: float,
                        tol: float = EPS) -> bool:
    """For a far pair (d > rho), check rad p + rad q <= 3 d / c; vacuous otherwise."""
    if p == q:
        raise ValueError("need p != q")
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    r = rad_table(X, A)
    d = X.dist[p, q]
    if d <= c * min(r[p], r[q]):
        return True
    return bool(r[p] + r[q] <= 3.0 / c * d + tol)


@dataclass
class ClosePairDecomposition(QuotientDecomposition):
    c: float = 0.5
    lift_cost: float = 0.0
    moved: list = field(default_factory=list)

    def far_pair_certificates(self, tol: float = EPS) -> list[dict]:
        """rad p + rad q <= 3 d(p, q) / c over every far pair p < q."""
        r = rad_table(self.X, self.A)
        rho = close_radius(self.X, self.A, self.c)
        out = []
        for p in range(self.X.n):
            for q in range(p + 1, self.X.n):
                d = self.X.dist[p, q]
                if d > rho[p, q]:
                    out.append({"pair": [p, q],
                                **inequality(r[p] + r[q], 3.0 / self.c * d, tol)})
        return out

    def support_ok(self) -> bool:
        """Plan mass sits only on close pairs, exactly."""
        rho = close_radius(self.X, self.A, self.c)
        return bool(np.all(self.plan[self.X.dist > rho] == 0.0))


def close_pairs_decompose(X: PointedMetricSpace, A: Iterable[int], u, c: float) -> ClosePairDecomposition:
    """Decompose ``u`` (ideal norm < 1) using only pairs with d <= c min(rad p, rad q).

    Flow on every far pair is moved into the atom part; the resulting cost is
    at most 3/c times the optimal lift cost, hence below 3/c.
    """
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    A = carrier(X, A)
    u = as_moments(X, u)
    norm, _ = ideal_norm(X, A, u)
    if norm >= 1:
        raise ValueError(f"ideal norm of u is {norm}; rescale below 1")
    lift = optimal_lift(X, A, u)
    far = X.dist > close_radius(X, A, c)
    np.fill_diagonal(far, False)
    moved_flow = np.where(far, lift.plan, 0.0)
    plan = np.where(far, 0.0, lift.plan)
    atoms = lift.atoms + moved_flow.sum(axis=1) - moved_flow.sum(axis=0)
    atoms = canonical_atoms(X, A, atoms)
    moved = [[int(p), int(q), float(moved_flow[p, q])] for p, q in zip(*np.nonzero(moved_flow))]
    return ClosePairDecomposition(X, A, plan, atoms, c=c, lift_cost=lift.cost, moved=moved)


def separation_violations(X: PointedMetricSpace, A: Iterable[int], atoms) -> list[tuple[int, int]]:
    """Pairs p < q with opposite-sign atoms closer than (rad p + rad q) / 2."""
    a = np.asarray(atoms, dtype=float)
    r = rad_table(X, A)
    opp = (a[:, None] * a[None, :]) < 0
    close = X.dist < (r[:, None] + r[None, :]) / 2
    P, Q = np.nonzero(np.triu(opp & close, 1))
    return list(zip(P.tolist(), Q.tolist()))


@dataclass
class RebalanceResult:
    plan: np.ndarray
    atoms: np.ndarray
    steps: int
    costs: list[float]


def separated_rebalance(X: PointedMetricSpace, A: Iterable[int], plan, atoms) -> RebalanceResult:
    """Cancel opposite-sign atoms that sit too close by routing them through the plan.

    Each step takes the violating pair with the largest atom (ties by index),
    moves ``m = min(|a_p|, |a_q|)`` onto the plan edge from the positive atom
    to the negative one and zeroes the smaller atom. Cost drops by
    ``m (rad p + rad q - d(p, q)) > 0`` per step; at most |supp a| steps.
    """
    A = carrier(X, A)
    plan = np.array(plan, dtype=float)
    a = canonical_atoms(X, A, atoms)
    costs = [plan_cost(X, plan) + atom_cost(X, A, a)]
    steps = 0
    while True:
        bad = separation_violations(X, A, a)
        if not bad:
            break
        p, q = min(bad, key=lambda pq: (-max(abs(a[pq[0]]), abs(a[pq[1]])), pq))
        if a[p] < 0:
            p, q = q, p
        m = min(a[p], -a[q])
        plan[p, q] += m
        if a[p] <= -a[q]:
            a[q] += a[p]
            a[p] = 0.0
        else:
            a[p] += a[q]
            a[q] = 0.0
        steps += 1
        costs.append(plan_cost(X, plan) + atom_cost(X, A, a))
    return RebalanceResult(plan, a, steps, costs)


def mass_bound_check(X: PointedMetricSpace, A: Iterable[int], atoms, p: int, r: float) -> tuple[float, float]:
    """Return ``(4 / theta, sum of |a_q| over ball(p, r))`` with theta = min rad on the ball.

    For the atom part of a separated decomposition of cost below 1 the mass
    never exceeds the bound.
    """
    A = carrier(X, A)
    a = canonical_atoms(X, A, atoms)
    B = sorted(ball(X, p, r))
    theta = float(rad_table(X, A)[B].min())
    if theta == 0.0:
        raise ValueError(f"ball({p}, {r}) is not interior to the carrier")
    return 4.0 / theta, float(np.abs(a[B]).sum())
