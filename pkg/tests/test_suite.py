import json

from lipfree.instances import instance_from_json
from lipfree.suite import ANCHORS, verify


def test_trivial_instance():
    X = instance_from_json({"matrix": [[0]]})
    rep = verify(X, trials=1)
    assert rep["summary"]["failed"] == 0
    assert rep["summary"]["checks"] == len(rep["records"])


def test_records_anchored_and_sorted():
    rep = verify(trials=2, sizes=(4,))
    keys = [(r["name"], r["trial"]) for r in rep["records"]]
    assert keys == sorted(keys)
    assert all(r["anchor"] in ANCHORS.values() for r in rep["records"])
    assert rep["summary"]["passed"] + rep["summary"]["failed"] == rep["summary"]["checks"]


def test_byte_stable():
    a = json.dumps(verify(trials=2, sizes=(5,), seed=3))
    b = json.dumps(verify(trials=2, sizes=(5,), seed=3))
    assert a == b


def test_timing_optional():
    assert "duration_s" not in verify(trials=1, sizes=(3,))
    assert verify(trials=1, sizes=(3,), timing=True)["duration_s"] >= 0


def test_every_check_group_present():
    rep = verify(trials=3, sizes=(6,))
    groups = {r["name"].split(".")[0] for r in rep["records"]}
    assert groups == set(ANCHORS)
