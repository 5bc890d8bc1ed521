"""Loading and generating metric instances."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .metric import MetricError, PointedMetricSpace, from_points, normalize_and_adjoin_basepoint

GENERATORS = ("uniform-cube", "clustered", "two-scale")


def instance_from_json(doc: dict) -> PointedMetricSpace:
    """Build a space from ``{"matrix": ...}`` or ``{"points": ..., "metric": ...}``.

    A matrix flagged ``"pointed": true`` is taken as an already normalized
    pointed space (index 0 the basepoint), which is how spaces are echoed.
    """
    if not isinstance(doc, dict):
        raise MetricError("instance must be a JSON object")
    if "instance" in doc and isinstance(doc["instance"], dict):
        doc = doc["instance"]
    if "matrix" in doc:
        if doc.get("pointed", False):
            return PointedMetricSpace(np.asarray(doc["matrix"], dtype=float))
        return normalize_and_adjoin_basepoint(doc["matrix"])
    if "points" in doc:
        return from_points(doc["points"], doc.get("metric", "euclidean"))
    raise MetricError('instance needs a "matrix" or "points" entry')


def instance_to_json(X: PointedMetricSpace) -> dict:
    return {"matrix": X.dist.tolist(), "pointed": True}


def load_instance(path) -> PointedMetricSpace:
    return instance_from_json(json.loads(Path(path).read_text()))


def random_instance(seed: int, n: int, generator: str = "uniform-cube",
                    clusters: int = 2) -> PointedMetricSpace:
    """Seeded random space with ``n`` points plus the adjoined basepoint.

    ``two-scale`` puts the points in ``clusters`` groups at mutual distance 1
    with intra-group diameters of order 0.1.
    """
    if n < 1:
        raise ValueError("need at least one point")
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}; choose from {GENERATORS}")
    rng = np.random.default_rng(seed)
    if generator == "uniform-cube":
        return from_points(rng.random((n, 2)))
    if generator == "clustered":
        k = max(1, n // 4)
        centers = rng.random((k, 2))
        labels = np.arange(n) % k
        return from_points(centers[labels] + 0.08 * rng.standard_normal((n, 2)))
    k = max(1, min(clusters, n))
    labels = np.arange(n) % k
    x = rng.random((n, 2))
    d = 0.1 * np.sqrt(((x[:, None] - x[None, :]) ** 2).sum(-1))
    d[labels[:, None] != labels[None, :]] = 1.0
    np.fill_diagonal(d, 0.0)
    return normalize_and_adjoin_basepoint(d)
