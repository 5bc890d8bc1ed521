"""Command-line front end; every command emits one JSON document.

Exit codes: 0 success, 1 a check failed, 2 bad input, 3 solver instability.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import decompose as dec
from . import freespace as fn
from . import ideals as idl
from . import operators as ops
from .instances import GENERATORS, instance_from_json, instance_to_json, random_instance
from .lipschitz import SeparationError
from .metric import MetricError, ball_of_set
from .solver import SolverInstabilityError
from .suite import DEFAULT_SIZES, DEFAULT_TRIALS, SCHEMA, rad_by_ball_scan, verify

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

RESCALE_TARGET = 1.0 - 1e-6


class InputError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}")


def _documents(args) -> tuple[dict, dict]:
    """(instance document, data document) from ``--instance`` and the optional input file."""
    inst_doc = _read_json(args.instance) if args.instance else None
    data = _read_json(args.input) if getattr(args, "input", None) else None
    if data is None:
        data = inst_doc if isinstance(inst_doc, dict) else {}
    if inst_doc is None:
        if "instance" not in data:
            raise InputError("no instance given; pass --instance or an input with an \"instance\" entry")
        inst_doc = data
    return inst_doc, data


def _load(args):
    inst_doc, data = _documents(args)
    X = instance_from_json(inst_doc)
    return X, data


def _moments(X, data) -> np.ndarray:
    if "moments" not in data:
        raise InputError('input needs a "moments" entry')
    try:
        return fn.as_moments(X, data["moments"])
    except (IndexError, TypeError, ValueError) as exc:
        raise InputError(f"bad moments: {exc}")


def _carrier(X, args, data) -> frozenset[int]:
    A = args.carrier if getattr(args, "carrier", None) is not None else data.get("carrier")
    if A is None:
        raise InputError('a carrier is required; pass --carrier or a "carrier" entry')
    try:
        return idl.carrier(X, A)
    except (IndexError, TypeError, ValueError) as exc:
        raise InputError(f"bad carrier: {exc}")


def _sparse(v) -> dict[str, float]:
    return {str(p): float(v[p]) for p in np.flatnonzero(v)}


def _certificate(command: str, X, inputs: dict, outputs: dict, checks: list[dict]) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "inputs": {"instance": instance_to_json(X), **inputs},
        "outputs": outputs,
        "asserted_inequalities": checks,
    }


def _decomposition_json(X, plan, atoms) -> dict:
    return {"plan": fn.plan_to_list(plan), "atoms": _sparse(atoms)}


def cmd_norm(args) -> dict:
    X, data = _load(args)
    v = _moments(X, data)
    tol = args.tolerance
    inputs = {"moments": _sparse(v)}
    if args.ideal:
        A = _carrier(X, args, data)
        inputs["carrier"] = sorted(A)
        dual, witness = idl.ideal_norm(X, A, v)
        lift = dec.optimal_lift(X, A, v)
        primal, plan = lift.cost, lift.plan
        extra = {"atoms": _sparse(lift.atoms)}
    else:
        dual, witness = fn.free_norm_dual(X, v)
        primal, plan = fn.free_norm_primal(X, v)
        extra = {}
    checks = [dec.inequality(abs(primal - dual), 0.0, tol, "primal equals dual")]
    out = {
        "value": primal,
        "primal_cost": primal,
        "dual_value": dual,
        "witness": witness.tolist(),
        "plan": fn.plan_to_list(plan),
        **extra,
    }
    doc = _certificate("norm", X, inputs, out, checks)
    return {**out, **doc}


def cmd_rad(args) -> dict:
    X, data = _load(args)
    A = _carrier(X, args, data)
    table = idl.rad_table(X, A)
    scan = np.array([rad_by_ball_scan(X, A, p) for p in range(X.n)])
    checks = [dec.inequality(float(np.abs(table - scan).max()), 0.0, 0.0, "closed form equals ball scan")]
    return _certificate("rad", X, {"carrier": sorted(A)}, {"rad": table.tolist()}, checks)


def cmd_lift(args) -> dict:
    X, data = _load(args)
    v = _moments(X, data)
    A = _carrier(X, args, data)
    lift = dec.optimal_lift(X, A, v)
    norm, _ = idl.ideal_norm(X, A, v)
    tol = args.tolerance
    checks = [
        dec.inequality(abs(lift.cost - norm), 0.0, tol, "lift cost equals ideal norm"),
        dec.inequality(lift.residual(v), 0.0, tol, "reconstruction on the carrier"),
    ]
    out = {"cost": lift.cost, "ideal_norm": norm, **_decomposition_json(X, lift.plan, lift.atoms)}
    return _certificate("lift", X, {"moments": _sparse(v), "carrier": sorted(A)}, out, checks)


def _rescaled(X, A, v, rescale: bool) -> tuple[np.ndarray, float]:
    norm, _ = idl.ideal_norm(X, A, v)
    if norm >= 1:
        if not rescale:
            raise InputError(f"ideal norm of the input is {norm:.6g}; it must be below 1 (or pass --rescale)")
        v = v * (RESCALE_TARGET / norm)
    elif rescale and norm > 0:
        v = v * (RESCALE_TARGET / norm)
    return v, idl.ideal_norm(X, A, v)[0]


def cmd_decompose(args) -> dict:
    X, data = _load(args)
    A = _carrier(X, args, data)
    u, norm = _rescaled(X, A, _moments(X, data), args.rescale)
    try:
        D = dec.close_pairs_decompose(X, A, u, args.c)
    except ValueError as exc:
        raise InputError(str(exc))
    tol = args.tolerance
    checks = [
        dec.inequality(D.cost, 3.0 / args.c, tol, "cost at most 3/c"),
        dec.inequality(D.cost, 3.0 / args.c * D.lift_cost, tol, "cost at most 3/c times lift cost"),
        dec.inequality(0.0 if D.support_ok() else 1.0, 0.0, 0.0, "plan only on close pairs"),
        dec.inequality(D.residual(u), 0.0, tol, "reconstruction on the carrier"),
    ]
    for rec in D.far_pair_certificates(tol):
        p, q = rec.pop("pair")
        checks.append({"name": f"far pair ({p}, {q})", **rec})
    out = {"cost": D.cost, "lift_cost": D.lift_cost, "moved": D.moved,
           **_decomposition_json(X, D.plan, D.atoms)}
    inputs = {"moments": _sparse(u), "ideal_norm": norm, "carrier": sorted(A), "c": args.c}
    return _certificate("decompose", X, inputs, out, checks)


def _starting_decomposition(X, A, data, args):
    """Plan and atoms from the input, or the close-pair decomposition of its moments."""
    if "atoms" in data:
        n = X.n
        plan = np.zeros((n, n))
        for p, q, m in data.get("plan", []):
            plan[int(p), int(q)] += float(m)
        atoms = fn.as_moments(X, data["atoms"])
        v = fn.plan_moments(plan) + atoms
        return v, plan, atoms
    u, _ = _rescaled(X, A, _moments(X, data), getattr(args, "rescale", True))
    D = dec.close_pairs_decompose(X, A, u, args.c)
    return u, D.plan, D.atoms


def cmd_rebalance(args) -> dict:
    X, data = _load(args)
    A = _carrier(X, args, data)
    try:
        v, plan, atoms = _starting_decomposition(X, A, data, args)
    except (IndexError, TypeError, ValueError) as exc:
        raise InputError(str(exc))
    atoms = idl.canonical_atoms(X, A, atoms)
    res = dec.separated_rebalance(X, A, plan, atoms)
    before = dec.restrict(X, A, fn.plan_moments(plan) + atoms)
    after = dec.restrict(X, A, fn.plan_moments(res.plan) + res.atoms)
    checks = [
        dec.inequality(res.steps, len(fn.support(atoms)), 0.0, "steps at most |supp a|"),
        dec.inequality(float(np.abs(after - before).max(initial=0.0)), 0.0, args.tolerance,
                       "reconstruction preserved"),
        dec.inequality(len(dec.separation_violations(X, A, res.atoms)), 0.0, 0.0, "atoms separated"),
    ]
    for k in range(res.steps):
        checks.append(dec.inequality(res.costs[k + 1], res.costs[k], 1e-9, f"cost step {k + 1}"))
    out = {"steps": res.steps, "costs": res.costs, **_decomposition_json(X, res.plan, res.atoms)}
    inputs = {"carrier": sorted(A), **_decomposition_json(X, plan, atoms)}
    return _certificate("rebalance", X, inputs, out, checks)


def cmd_masscheck(args) -> dict:
    X, data = _load(args)
    A = _carrier(X, args, data)
    try:
        v, plan, atoms = _starting_decomposition(X, A, data, args)
        atoms = idl.canonical_atoms(X, A, atoms)
        if "atoms" not in data:
            # every stage is homogeneous, so scale the separated result below cost 1
            res = dec.separated_rebalance(X, A, plan, atoms)
            total = fn.plan_cost(X, res.plan) + idl.atom_cost(X, A, res.atoms)
            scale = RESCALE_TARGET / total if total > 0 else 1.0
            plan, atoms = res.plan * scale, res.atoms * scale
        bound, mass = dec.mass_bound_check(X, A, atoms, args.p, args.r)
    except (IndexError, TypeError, ValueError) as exc:
        raise InputError(str(exc))
    cost = fn.plan_cost(X, plan) + idl.atom_cost(X, A, atoms)
    checks = [
        dec.inequality(cost, 1.0, 0.0, "combined cost below 1"),
        dec.inequality(len(dec.separation_violations(X, A, atoms)), 0.0, 0.0, "atoms separated"),
        dec.inequality(mass, bound, args.tolerance, "mass at most 4/theta"),
    ]
    if cost >= 1.0:
        checks[0]["ok"] = False
    out = {"mass": mass, "bound": bound, "theta": 4.0 / bound, "cost": cost,
           "note": "only the quantitative mass bound is checked; finiteness of the support "
                   "inside the ball is automatic on a finite space",
           **_decomposition_json(X, plan, atoms)}
    inputs = {"carrier": sorted(A), "p": args.p, "r": args.r}
    return _certificate("masscheck", X, inputs, out, checks)


def cmd_operator(args) -> dict:
    X, data = _load(args)
    v = _moments(X, data)
    E, theta = args.set, args.theta
    try:
        prof = ops.weight(X, E, theta)
    except (IndexError, ValueError) as exc:
        raise InputError(str(exc))
    Tv = v * prof.values
    supp, supp_T, supp_rest = fn.support(v), fn.support(Tv), fn.support(v - Tv)
    outer = supp & ball_of_set(X, prof.E, theta)
    inner = supp - ball_of_set(X, prof.E, theta / 2)
    norm_v = fn.free_norm(X, v)
    norm_T = fn.free_norm(X, Tv)
    checks = [
        dec.inequality(len(supp_T - outer), 0.0, 0.0, "supp Tv inside supp v and the theta-ball of E"),
        dec.inequality(len(supp_rest - inner), 0.0, 0.0, "supp (v - Tv) inside supp v off the theta/2-ball"),
        dec.inequality(norm_T, prof.operator_bound * norm_v, args.tolerance, "norm at most (1 + 2/theta) ||v||"),
    ]
    out = {"moments": _sparse(Tv), "weight": prof.values.tolist(), "norm": norm_T,
           "input_norm": norm_v, "bound": prof.operator_bound,
           "fixed_point": ops.fixed_point_check(X, v, theta, prof.E) if supp <= prof.E else None}
    inputs = {"moments": _sparse(v), "set": sorted(prof.E), "theta": theta}
    return _certificate("operator", X, inputs, out, checks)


def cmd_random(args) -> dict:
    try:
        X = random_instance(args.seed, args.n, args.generator)
    except ValueError as exc:
        raise InputError(str(exc))
    return {"schema": SCHEMA, "seed": args.seed, "n": args.n, "generator": args.generator,
            **instance_to_json(X)}


def cmd_verify(args) -> dict:
    X = None
    if args.instance:
        X = instance_from_json(_read_json(args.instance))
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    start = time.perf_counter()
    report = verify(X, trials=args.trials, seed=args.seed, sizes=tuple(args.sizes), tol=args.tolerance)
    elapsed = time.perf_counter() - start
    if args.timing:
        report["duration_s"] = elapsed
    print(f"verify: {report['summary']['passed']}/{report['summary']['checks']} checks passed "
          f"in {elapsed:.1f} s", file=sys.stderr)
    return report


def _failed(doc: dict) -> bool:
    if "summary" in doc:
        return doc["summary"]["failed"] > 0
    return not all(c["ok"] for c in doc.get("asserted_inequalities", []))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--instance", metavar="FILE", help="instance JSON (matrix or points)")
    common.add_argument("--seed", type=int, metavar="U64", help="random seed (default 0)")
    common.add_argument("--out", metavar="FILE", help="write JSON here instead of stdout")
    common.add_argument("--tolerance", type=float, help="check tolerance (default 1e-6)")

    parser = argparse.ArgumentParser(prog="lipfree", description=__doc__.splitlines()[0])
    parser.add_argument("--instance", default=None, metavar="FILE", help=argparse.SUPPRESS)
    parser.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    parser.add_argument("--out", default=None, help=argparse.SUPPRESS)
    parser.add_argument("--tolerance", type=float, default=1e-6, help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, data=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if data:
            p.add_argument("input", nargs="?", help="JSON with moments/carrier/plan/atoms "
                                                    "(defaults to the --instance file)")
        p.set_defaults(func=func)
        return p

    def carrier_flag(p):
        p.add_argument("--carrier", type=_int_list, metavar="I,J,...", help="ideal carrier indices")

    p = add("norm", cmd_norm, "free or ideal-restricted norm with primal and dual certificates")
    p.add_argument("--ideal", action="store_true", help="restrict to functions vanishing off the carrier")
    carrier_flag(p)
    p = add("rad", cmd_rad, "rad table of a carrier")
    carrier_flag(p)
    p = add("lift", cmd_lift, "optimal plan-plus-atoms lift")
    carrier_flag(p)
    for name, func, text in [("decompose", cmd_decompose, "close-pair decomposition"),
                             ("rebalance", cmd_rebalance, "cancel close opposite-sign atoms"),
                             ("masscheck", cmd_masscheck, "atom mass over a ball against 4/theta")]:
        p = add(name, func, text)
        carrier_flag(p)
        p.add_argument("--c", type=float, default=0.5, help="closeness factor in (0, 1)")
        if name != "masscheck":
            p.add_argument("--rescale", action="store_true", help="scale moments to ideal norm 1 - 1e-6")
        if name == "masscheck":
            p.add_argument("--p", type=int, required=True, help="ball centre")
            p.add_argument("--r", type=float, required=True, help="ball radius")
    p = add("operator", cmd_operator, "weighted multiplication operator T")
    p.add_argument("--set", type=_int_list, required=True, metavar="I,J,...", help="the set E")
    p.add_argument("--theta", type=float, required=True, help="scale theta > 0")
    p = add("random", cmd_random, "seeded random instance", data=False)
    p.add_argument("--n", type=int, required=True, help="number of points before the basepoint")
    p.add_argument("--generator", choices=GENERATORS, default=GENERATORS[0])
    p = add("verify", cmd_verify, "full randomized property suite", data=False)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--sizes", type=_int_list, default=list(DEFAULT_SIZES), metavar="N,M,...")
    p.add_argument("--timing", action="store_true", help="record wall-clock duration in the report")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = args.func(args)
    except SolverInstabilityError as exc:
        print(f"error: solver instability: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, MetricError, SeparationError, idl.CarrierError, IndexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if _failed(doc):
        for c in doc.get("failures", []) or [c for c in doc.get("asserted_inequalities", []) if not c["ok"]]:
            print(f"failed: {json.dumps(c)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
