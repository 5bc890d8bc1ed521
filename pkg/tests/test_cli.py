import json
import subprocess
import sys

import numpy as np
import pytest

from lipfree.cli import EXIT_CHECK, EXIT_INPUT, EXIT_OK, EXIT_SOLVER, main
from lipfree.instances import instance_to_json, random_instance


@pytest.fixture
def case(tmp_path):
    X = random_instance(3, 6, "two-scale")
    doc = {"instance": instance_to_json(X), "moments": {"1": 1.0, "2": -0.5, "4": 0.7}, "carrier": [1, 2, 3, 4]}
    path = tmp_path / "case.json"
    path.write_text(json.dumps(doc))
    return X, path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if out else None


def test_norm(case, capsys):
    X, path = case
    code, doc = run(capsys, "norm", "--instance", path)
    assert code == EXIT_OK
    assert abs(doc["primal_cost"] - doc["dual_value"]) <= 1e-6
    assert doc["value"] == doc["primal_cost"]
    assert len(doc["witness"]) == X.n
    assert all(len(edge) == 3 for edge in doc["plan"])


def test_norm_ideal(case, capsys):
    _, path = case
    code, doc = run(capsys, "--instance", path, "norm", "--ideal")
    assert code == EXIT_OK
    assert doc["inputs"]["carrier"] == [1, 2, 3, 4]
    code, doc2 = run(capsys, "norm", "--instance", path, "--ideal", "--carrier", "1,2,3,4,5,6")
    assert doc2["value"] >= doc["value"] - 1e-9


def test_rad(case, capsys):
    X, path = case
    code, doc = run(capsys, "rad", "--instance", path)
    assert code == EXIT_OK
    assert len(doc["outputs"]["rad"]) == X.n
    assert set(doc) >= {"schema", "inputs", "outputs", "asserted_inequalities"}


@pytest.mark.parametrize(
    "argv",
    [
        ["lift"],
        ["decompose", "--c", "0.9"],
        ["decompose", "--c", "0.5", "--rescale"],
        ["rebalance", "--rescale"],
        ["masscheck", "--p", "1", "--r", "0.05"],
        ["operator", "--set", "1,4", "--theta", "0.3"],
    ],
)
def test_certificates(case, capsys, argv):
    _, path = case
    code, doc = run(capsys, *argv, "--instance", path)
    assert code == EXIT_OK
    assert doc["asserted_inequalities"]
    assert all(c["ok"] for c in doc["asserted_inequalities"])
    assert all({"lhs", "rhs", "ok"} <= set(c) for c in doc["asserted_inequalities"])


def test_rebalance_given_atoms(tmp_path, capsys):
    X = random_instance(0, 5)
    doc = {"instance": instance_to_json(X), "carrier": [1, 2, 3, 4, 5],
           "plan": [[1, 2, 0.1]], "atoms": {"1": 0.2, "2": -0.1}}
    path = tmp_path / "d.json"
    path.write_text(json.dumps(doc))
    code, out = run(capsys, "rebalance", path)
    assert code == EXIT_OK
    assert out["outputs"]["steps"] <= 2


def test_masscheck_reports_failure(tmp_path, capsys):
    X = random_instance(0, 4, "two-scale")
    doc = {"instance": instance_to_json(X), "carrier": [1, 2, 3, 4], "atoms": {"1": 5.0}}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(doc))
    code, out = run(capsys, "masscheck", path, "--p", "1", "--r", "0")
    assert code == EXIT_CHECK
    assert not out["asserted_inequalities"][0]["ok"]


def test_decompose_needs_small_norm(tmp_path, capsys):
    X = random_instance(0, 4)
    path = tmp_path / "big.json"
    path.write_text(json.dumps({"instance": instance_to_json(X), "moments": {"1": 50.0}, "carrier": [1, 2]}))
    code, _ = run(capsys, "decompose", "--instance", path)
    assert code == EXIT_INPUT


def test_random_and_out(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _ = run(capsys, "random", "--n", "4", "--generator", "clustered", "--seed", "9", "--out", out)
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["pointed"] and len(doc["matrix"]) == 5
    np.testing.assert_array_equal(doc["matrix"], random_instance(9, 4, "clustered").dist)


def test_verify(tmp_path, capsys):
    X = random_instance(0, 1)
    inst = tmp_path / "tiny.json"
    inst.write_text(json.dumps(instance_to_json(X)))
    code, doc = run(capsys, "verify", "--instance", inst, "--trials", "1")
    assert code == EXIT_OK
    assert doc["summary"]["failed"] == 0
    code, doc = run(capsys, "verify", "--sizes", "4", "--trials", "1", "--timing")
    assert code == EXIT_OK and "duration_s" in doc


def test_corrupted_matrix(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"matrix": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
    assert main(["verify", "--instance", str(path)]) == EXIT_INPUT
    assert "triangle" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["norm", "--instance", "missing.json"],
        ["random", "--n", "0"],
        ["operator", "--set", "1", "--theta", "-1"],
    ],
)
def test_input_errors(argv, case, capsys):
    if argv[0] == "operator":
        argv = argv + ["--instance", str(case[1])]
    assert main(argv) == EXIT_INPUT


def test_solver_instability_exit(case, capsys, monkeypatch):
    from lipfree import cli
    from lipfree.solver import SolverInstabilityError

    def boom(*args, **kwargs):
        raise SolverInstabilityError("tiny pivot")

    monkeypatch.setattr(cli.fn, "free_norm_dual", boom)
    assert main(["norm", "--instance", str(case[1])]) == EXIT_SOLVER


def test_module_entry_point(case):
    proc = subprocess.run([sys.executable, "-m", "lipfree", "rad", "--instance", str(case[1])],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "rad"
