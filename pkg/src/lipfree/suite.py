"""Randomized verification of every finite-scale identity and certificate.

Each trial draws moment vectors, carriers and functions on one space and
runs a fixed battery of checks. A check is a family of cases ``lhs <= rhs +
tolerance``; the report keeps, per check and trial, the worst case.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import decompose as dec
from . import freespace as fn
from . import ideals as idl
from . import lipschitz as lip
from . import operators as ops
from .instances import GENERATORS, instance_to_json, random_instance
from .metric import PointedMetricSpace, ball, ball_of_set, dist_to_set, dist_to_set_all

SCHEMA = 1
DEFAULT_SIZES = (4, 8, 12)
DEFAULT_TRIALS = 50

ANCHORS = {
    "metric": "plumbing",
    "solver": "plumbing",
    "duality": "free space dual is Lip_0; norm by transshipment",
    "embedding": "delta_p - delta_q has norm d(p,q); ||delta_p|| = 1",
    "free": "free-space norm axioms",
    "lip": "Lipschitz norm calculus (Leibniz, lattice, sup <= Lip)",
    "mcshane": "McShane extension preserves the Lipschitz norm",
    "truncate": "f'' = max(g-, min(g+, f')) truncation",
    "glue": "gluing theta/2-separated pieces costs at most 4/theta",
    "rad": "rad_I(p) = sup{r <= diam : B_r(p) in I}",
    "radnorm": "||delta_p||_I = rad_I(p); ||delta_p - delta_p'||_I = min{d, rad + rad'}",
    "ideal": "ideal-restricted norm properties",
    "radiinf": "inf of rad_I over B_r(p) is at least r' - r",
    "weight": "weight max{0, min{1, 2 - 2 d(E,x)/theta}}",
    "operator": "T_{E,theta} supports and bound C(theta) = 1 + 2/theta",
    "fixed": "T_{F,theta}(v) = v when F contains supp v",
    "lift": "R_I + Q_I maps the open ball onto the open ball",
    "close": "close-pair decomposition with cost below 3/c",
    "far": "rad_I(p) + rad_I(q) < 3 d(p,q) / c on far pairs",
    "rebalance": "opposite-sign atoms separated by (rad p + rad q)/2",
    "mass": "atom mass over B_r(p) at most 4/theta",
    "pipeline": "lift, close-pairs, rebalance composed",
}


@dataclass
class _Check:
    name: str
    anchor: str
    tolerance: float
    cases: int = 0
    lhs: float = float("-inf")
    rhs: float = 0.0
    ok: bool = True

    def add(self, lhs: float, rhs: float) -> None:
        lhs, rhs = float(lhs), float(rhs)
        self.cases += 1
        passed = lhs <= rhs + self.tolerance
        if self.cases == 1 or lhs - rhs > self.lhs - self.rhs:
            self.lhs, self.rhs = lhs, rhs
        self.ok = self.ok and passed


@dataclass
class _Trial:
    index: int
    n: int
    tol: float
    checks: dict = field(default_factory=dict)

    def check(self, name: str, lhs: float, rhs: float = 0.0, tol: float | None = None) -> None:
        if name not in self.checks:
            group = name.split(".")[0]
            self.checks[name] = _Check(name, ANCHORS[group], self.tol if tol is None else tol)
        self.checks[name].add(lhs, rhs)

    def equal(self, name: str, a: float, b: float, tol: float | None = None) -> None:
        self.check(name, abs(float(a) - float(b)), 0.0, tol)

    def records(self) -> list[dict]:
        return [
            {
                "name": c.name, "anchor": c.anchor, "trial": self.index, "n": self.n,
                "cases": c.cases, "lhs": c.lhs, "rhs": c.rhs,
                "tolerance": c.tolerance, "ok": c.ok,
            }
            for c in self.checks.values()
        ]


def rad_by_ball_scan(X: PointedMetricSpace, A, p: int) -> float:
    """sup{r <= 1 : ball(p, r) inside A} by scanning the distinct radii around p.

    Balls only change at the distances d(p, x), so the sup is the first such
    radius whose ball leaves the carrier, or 1 if none does. The basepoint
    never disqualifies a ball.
    """
    allowed = frozenset(A) | {0}
    if p == 0 or p not in A:
        return 0.0
    for r in sorted(set(X.dist[p].tolist())):
        if not ball(X, p, r) <= allowed:
            return r
    return 1.0


def _random_moments(rng, X: PointedMetricSpace, density: float = 0.6) -> np.ndarray:
    v = np.zeros(X.n)
    k = X.n - 1
    mask = rng.random(k) < density
    if not mask.any():
        mask[rng.integers(k)] = True
    v[1:] = np.where(mask, rng.normal(size=k), 0.0)
    return v


def _random_carrier(rng, X: PointedMetricSpace) -> frozenset[int]:
    pts = [p for p in range(1, X.n) if rng.random() < 0.6]
    if rng.random() < 0.5:
        pts.append(0)
    return frozenset(pts)


def _random_function(rng, X: PointedMetricSpace) -> np.ndarray:
    f = rng.uniform(-1, 1, X.n)
    f[0] = 0.0
    return f


def _separated_pieces(rng, X: PointedMetricSpace, theta: float):
    """Components of a random point subset under the graph d < theta/2."""
    pts = [p for p in range(1, X.n) if rng.random() < 0.7] or [1]
    comps: list[list[int]] = []
    for p in pts:
        hit = [c for c in comps if any(X.dist[p, q] < theta / 2 for q in c)]
        merged = [p] + [q for c in hit for q in c]
        comps = [c for c in comps if c not in hit] + [sorted(merged)]
    pieces = []
    for S in comps:
        vals = rng.uniform(-1, 1, len(S))
        L = lip.lip_const_on(X, [0] + S, np.concatenate([[0.0], vals]))
        if L > 1:
            vals = vals / L
        pieces.append((S, vals))
    return pieces


def _random_decomposition(rng, X: PointedMetricSpace, A, total: float):
    """A random (plan, atoms) pair scaled to combined cost ``total``."""
    n = X.n
    plan = np.where(rng.random((n, n)) < 0.15, rng.random((n, n)), 0.0)
    np.fill_diagonal(plan, 0.0)
    atoms = idl.canonical_atoms(X, A, rng.normal(size=n))
    cost = fn.plan_cost(X, plan) + idl.atom_cost(X, A, atoms)
    if cost == 0:
        return plan, atoms
    return plan * total / cost, atoms * total / cost


def _metric_checks(t: _Trial, rng, X: PointedMetricSpace) -> None:
    d = X.dist
    # tri[i, j, k] = d(i, k) - d(i, j) - d(j, k)
    tri = d[:, None, :] - d[:, :, None] - d[None, :, :]
    t.check("metric.triangle", float(tri.max()), 0.0, tol=1e-12)
    t.equal("metric.basepoint_distance", float(np.abs(d[0, 1:] - 1).max()), 0.0, tol=0.0)
    for _ in range(4):
        p = int(rng.integers(X.n))
        r, s = sorted(rng.random(2))
        t.check("metric.ball_monotone", len(ball(X, p, r) - ball(X, p, s)), 0.0, tol=0.0)
        for q in ball(X, p, r):
            t.check("metric.ball_nesting", len(ball(X, q, s) - ball(X, p, r + s)), 0.0, tol=0.0)
        E = [q for q in range(X.n) if rng.random() < 0.3]
        BE = ball_of_set(X, E, r)
        bad = sum((x in BE) != (dist_to_set(X, E, x) <= r) for x in range(X.n))
        t.check("metric.ball_of_set_vs_distance", bad, 0.0, tol=0.0)


def _lip_checks(t: _Trial, rng, X: PointedMetricSpace) -> None:
    for _ in range(3):
        f, g = _random_function(rng, X), _random_function(rng, X)
        lf, lg = lip.lip_norm(X, f), lip.lip_norm(X, g)
        sf, sg = lip.sup_norm(f), lip.sup_norm(g)
        t.check("lip.sup_le_lip", sf, lf, tol=1e-12)
        t.check("lip.leibniz", lip.lip_norm(X, f * g), lf * sg + sf * lg, tol=1e-12)
        t.check("lip.lattice_max", lip.lip_norm(X, np.maximum(f, g)), max(lf, lg), tol=1e-12)
        t.check("lip.lattice_min", lip.lip_norm(X, np.minimum(f, g)), max(lf, lg), tol=1e-12)

        S = sorted({0} | {p for p in range(1, X.n) if rng.random() < 0.5})
        ext = lip.mcshane_extend(X, S, f[S])
        t.equal("mcshane.norm_preserved", lip.lip_norm(X, ext), lip.lip_const_on(X, S, f[S]), tol=1e-9)
        t.equal("mcshane.agrees_on_domain", float(np.abs(ext[S] - f[S]).max()), 0.0, tol=0.0)
        t.equal("mcshane.idempotent", float(np.abs(lip.mcshane_extend(X, range(X.n), f) - f).max()),
                0.0, tol=0.0)

        p = int(rng.integers(1, X.n))
        gp = lip.tent_bump(X, p, float(rng.random()))
        gm = -lip.tent_bump(X, int(rng.integers(1, X.n)), float(rng.random()))
        h = lip.truncate_between(gm, f, gp)
        bound = max(lip.lip_norm(X, gm), lf, lip.lip_norm(X, gp))
        t.check("truncate.lattice_bound", lip.lip_norm(X, h), bound, tol=1e-12)
        both_zero = (gm == 0) & (gp == 0)
        t.check("truncate.vanishes", float(np.abs(h[both_zero]).max(initial=0.0)), 0.0, tol=0.0)

    theta = float(rng.uniform(0.05, 2.0))
    pieces = _separated_pieces(rng, X, theta)
    glued, bound = lip.glue_separated(X, pieces, theta)
    t.check("glue.bound", lip.lip_norm(X, glued), bound, tol=1e-9)
    agree = max(float(np.abs(glued[S] - vals).max()) for S, vals in pieces)
    t.equal("glue.agrees_on_pieces", agree, 0.0, tol=0.0)
    if X.n >= 3:
        p, q = sorted(rng.choice(np.arange(1, X.n), 2, replace=False).tolist())
        theta = 2 * X.dist[p, q]
        glued, bound = lip.glue_separated(X, [([p], [1.0]), ([q], [-1.0])], theta)
        t.equal("glue.tight", lip.lip_norm(X, glued), bound, tol=1e-9)


def _free_checks(t: _Trial, rng, X: PointedMetricSpace, n_vectors: int) -> None:
    tol = t.tol
    for _ in range(n_vectors):
        v = _random_moments(rng, X)
        dual, f = fn.free_norm_dual(X, v)
        primal, B = fn.free_norm_primal(X, v)
        t.equal("duality.primal_vs_dual", primal, dual)
        t.equal("solver.plan_feasible", float(np.abs(fn.plan_moments(B) - v).max()), 0.0, tol=1e-9)
        t.equal("free.witness_value", fn.evaluate(v, f), dual)
        t.check("free.witness_lipschitz", lip.lip_norm(X, f), 1.0, tol=1e-9)
        t.check("free.weak_upper_bound", primal, float(np.abs(v).sum()))
    u, v = _random_moments(rng, X), _random_moments(rng, X)
    nu, nv = fn.free_norm(X, u), fn.free_norm(X, v)
    t.check("free.triangle", fn.free_norm(X, u + v), nu + nv)
    s = float(rng.normal())
    t.equal("free.homogeneity", fn.free_norm(X, s * u), abs(s) * nu)
    for p in range(1, X.n):
        t.equal("embedding.delta_unit", fn.free_norm(X, fn.delta(X, p)), 1.0)
    for p, q in itertools.combinations(range(1, X.n), 2):
        w = fn.delta(X, p) - fn.delta(X, q)
        t.equal("embedding.pair_isometry", fn.free_norm(X, w), X.dist[p, q])


def _ideal_checks(t: _Trial, rng, X: PointedMetricSpace) -> frozenset[int]:
    A = _random_carrier(rng, X)
    r = idl.rad_table(X, A)
    for p in range(X.n):
        t.equal("rad.closed_form_vs_ball_scan", r[p], rad_by_ball_scan(X, A, p), tol=0.0)
        t.check("rad.at_most_one", r[p], 1.0, tol=0.0)
        if p:
            t.equal("rad.zero_iff_off_carrier", float((r[p] == 0) != (p not in A)), 0.0, tol=0.0)
    for p, q in itertools.combinations(range(1, X.n), 2):
        if r[p] > 0 and r[q] > 0:
            t.check("rad.one_lipschitz", abs(r[p] - r[q]), X.dist[p, q], tol=1e-12)
    for p in range(1, X.n):
        t.equal("radnorm.delta", idl.ideal_norm(X, A, fn.delta(X, p))[0], r[p])
    for p, q in itertools.combinations(range(1, X.n), 2):
        w = fn.delta(X, p) - fn.delta(X, q)
        t.equal("radnorm.pair", idl.ideal_norm(X, A, w)[0], min(X.dist[p, q], r[p] + r[q]))

    v = _random_moments(rng, X)
    sub = frozenset(q for q in A if rng.random() < 0.6)
    n_sub, n_A, n_X = (idl.ideal_norm(X, B, v)[0] for B in (sub, A, range(X.n)))
    t.check("ideal.monotone_subcarrier", n_sub, n_A)
    t.check("ideal.monotone_full", n_A, n_X)
    t.equal("ideal.full_carrier_is_free_norm", n_X, fn.free_norm(X, v))
    off = fn.as_moments(X, {q: v[q] for q in range(1, X.n) if q not in A})
    t.equal("ideal.vanishing_off_carrier", idl.ideal_norm(X, A, off)[0], 0.0)
    val, wit = idl.ideal_norm(X, A, v)
    t.check("ideal.witness_lipschitz", lip.lip_norm(X, wit), 1.0, tol=1e-9)
    t.equal("ideal.witness_vanishes_off_carrier",
            float(np.abs([wit[q] for q in range(X.n) if q not in A] or [0.0]).max()), 0.0, tol=0.0)
    a = idl.canonical_atoms(X, A, rng.normal(size=X.n))
    t.check("ideal.qmap_contraction", idl.ideal_norm(X, A, idl.q_map(X, A, a))[0], idl.atom_cost(X, A, a))

    for p in sorted(A - {0}):
        rr = float(rng.uniform(0, r[p]))
        r_outer = float(rng.uniform(rr, r[p]))
        if not rr < r_outer < r[p]:
            continue
        t.check("radiinf.margin", r_outer - rr, idl.radiinf_margin(X, A, p, rr, r_outer), tol=1e-12)
    return A


def _operator_checks(t: _Trial, rng, X: PointedMetricSpace) -> None:
    v = _random_moments(rng, X)
    E = frozenset(int(q) for q in rng.choice(np.arange(X.n), int(rng.integers(1, X.n + 1)), replace=False))
    theta = float(rng.uniform(0.05, 1.5))
    prof = ops.weight(X, E, theta)
    w = prof.values
    dE = dist_to_set_all(X, E)
    expect = np.clip(2 - 2 * dE / theta, 0, 1)
    t.equal("weight.formula", float(np.abs(w - expect).max()), 0.0, tol=0.0)
    t.check("weight.lipschitz", lip.lip_norm(X, w), prof.lipschitz_bound, tol=1e-12)

    Tv = ops.apply_T(X, v, E, theta)
    sv = fn.support(v)
    t.check("operator.support_T", len(fn.support(Tv) - (sv & ball_of_set(X, E, theta))), 0.0, tol=0.0)
    t.check("operator.support_residual",
            len(fn.support(v - Tv) - (sv - ball_of_set(X, E, theta / 2))), 0.0, tol=0.0)
    f = _random_function(rng, X)
    Tf = ops.apply_T_star(X, f, E, theta)
    supp_f = frozenset(np.flatnonzero(f).tolist())
    supp_Tf = frozenset(np.flatnonzero(Tf).tolist())
    t.check("operator.support_T_star", len(supp_Tf - (supp_f & ball_of_set(X, E, theta))), 0.0, tol=0.0)
    t.check("operator.T_star_bound", lip.lip_norm(X, Tf), prof.operator_bound * lip.lip_norm(X, f), tol=1e-12)
    t.equal("operator.adjoint", fn.evaluate(Tv, f), fn.evaluate(v, Tf), tol=1e-12)
    t.check("operator.norm_bound", fn.free_norm(X, Tv), prof.operator_bound * fn.free_norm(X, v))
    u = _random_moments(rng, X)
    al, be = rng.normal(size=2)
    lin = ops.apply_T(X, al * u + be * v, E, theta) - (al * ops.apply_T(X, u, E, theta) + be * Tv)
    t.equal("operator.linearity", float(np.abs(lin).max()), 0.0, tol=1e-12)
    TTv = ops.apply_T(X, Tv, E, theta)
    t.equal("operator.square_weights", float(np.abs(TTv - w**2 * v).max()), 0.0, tol=1e-15)
    t.equal("fixed.support_set", float(not ops.fixed_point_check(X, v, theta)), 0.0, tol=0.0)
    t.equal("fixed.superset", float(not ops.fixed_point_check(X, v, theta, sv | E)), 0.0, tol=0.0)


def _decomposition_checks(t: _Trial, rng, X: PointedMetricSpace, A: frozenset[int]) -> None:
    tol = t.tol
    v = _random_moments(rng, X)
    norm, _ = idl.ideal_norm(X, A, v)
    lift = dec.optimal_lift(X, A, v)
    t.equal("lift.quotient_equality", lift.cost, norm)
    t.check("lift.reconstruction", lift.residual(v), 0.0, tol=1e-9)
    plan, atoms = _random_decomposition(rng, X, A, 1.0)
    atoms = idl.canonical_atoms(X, A, dec.restrict(X, A, v) - fn.plan_moments(plan))
    rand = dec.QuotientDecomposition(X, A, plan, atoms)
    t.check("lift.lower_bound", norm, rand.cost)

    if norm > 0:
        u = v * (1 - 1e-6) / norm
        for c in (0.5, 0.9, 0.99):
            cp = dec.close_pairs_decompose(X, A, u, c)
            t.equal("close.support", float(not cp.support_ok()), 0.0, tol=0.0)
            t.check("close.cost", cp.cost, 3.0 / c)
            t.check("close.cost_vs_lift", cp.cost, 3.0 / c * cp.lift_cost)
            t.check("close.reconstruction", cp.residual(u), 0.0, tol=1e-9)
            for cert in cp.far_pair_certificates(tol=0.0):
                t.check("far.pair_inequality", cert["lhs"], cert["rhs"], tol=1e-12)
            _rebalance_checks(t, X, A, u, cp.plan, cp.atoms, "pipeline")
            t.check("pipeline.cost", idl.ideal_norm(X, A, u)[0], cp.cost)

    plan, atoms = _random_decomposition(rng, X, A, 0.99)
    u = dec.QuotientDecomposition(X, A, plan, atoms).reconstruct()
    res = _rebalance_checks(t, X, A, u, plan, atoms, "rebalance")
    t.check("mass.combined_cost_below_one", res.costs[-1], 1.0, tol=0.0)
    r = idl.rad_table(X, A)
    for p in sorted(A - {0}):
        rr = float(rng.uniform(0, r[p]))
        if rr >= r[p]:
            continue
        bound, mass = dec.mass_bound_check(X, A, res.atoms, p, rr)
        t.check("mass.bound", mass, bound)


def _rebalance_checks(t: _Trial, X, A, u, plan, atoms, prefix: str):
    before = len(fn.support(idl.canonical_atoms(X, A, atoms)))
    res = dec.separated_rebalance(X, A, plan, atoms)
    out = dec.QuotientDecomposition(X, A, res.plan, res.atoms)
    t.check(f"{prefix}.steps", res.steps, before, tol=0.0)
    t.check(f"{prefix}.reconstruction", out.residual(u), 0.0, tol=1e-12)
    worst = max((b - a for a, b in zip(res.costs, res.costs[1:])), default=0.0)
    t.check(f"{prefix}.cost_monotone", worst, 0.0, tol=1e-9)
    t.equal(f"{prefix}.separated", len(dec.separation_violations(X, A, res.atoms)), 0.0, tol=0.0)
    return res


def run_trial(X: PointedMetricSpace, index: int, rng, tol: float = 1e-6, n_vectors: int = 10) -> list[dict]:
    t = _Trial(index, X.n - 1, tol)
    _metric_checks(t, rng, X)
    _lip_checks(t, rng, X)
    _free_checks(t, rng, X, n_vectors)
    A = _ideal_checks(t, rng, X)
    _operator_checks(t, rng, X)
    _decomposition_checks(t, rng, X, A)
    return t.records()


def verify(instance: PointedMetricSpace | None = None, trials: int = DEFAULT_TRIALS, seed: int = 0,
           sizes=DEFAULT_SIZES, tol: float = 1e-6, timing: bool = False) -> dict:
    """Run the battery and assemble a deterministic report.

    With ``instance`` every trial reuses that space. Otherwise, for each size
    ``n`` the t-th trial draws a fresh space from ``random_instance`` with seed
    ``seed + t`` and the generators taken in rotation.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    start = time.perf_counter()
    records: list[dict] = []
    instances: list[dict] = []
    index = 0
    if instance is not None:
        instances.append({"source": "given", **instance_to_json(instance)})
        for k in range(trials):
            rng = np.random.default_rng([seed, k])
            records += run_trial(instance, index, rng, tol)
            index += 1
    else:
        for n in sizes:
            for k in range(trials):
                gen = GENERATORS[k % len(GENERATORS)]
                X = random_instance(seed + k, n, gen)
                instances.append({"trial": index, "seed": seed + k, "n": n, "generator": gen})
                rng = np.random.default_rng([seed, n, k])
                records += run_trial(X, index, rng, tol)
                index += 1
    records.sort(key=lambda r: (r["name"], r["trial"]))
    failed = [r for r in records if not r["ok"]]
    report = {
        "schema": SCHEMA,
        "seed": seed,
        "trials": trials,
        "tolerance": tol,
        "instances": instances,
        "summary": {
            "checks": len(records),
            "passed": len(records) - len(failed),
            "failed": len(failed),
            "names": len({r["name"] for r in records}),
        },
        "failures": failed,
        "records": records,
    }
    if timing:
        report["duration_s"] = time.perf_counter() - start
    return report
