import itertools

import numpy as np
import pytest

from conftest import random_carrier, random_moments
from lipfree.freespace import delta, free_norm_dual
from lipfree.ideals import (
    CarrierError,
    atom_cost,
    canonical_atoms,
    ideal_norm,
    q_map,
    rad,
    rad_table,
    radiinf_margin,
)
from lipfree.suite import rad_by_ball_scan


def test_rad_off_carrier(line_space):
    assert rad(line_space, [1, 2], 3) == 0
    assert rad(line_space, [1, 2], 0) == 0


def test_rad_full_carrier(line_space):
    X = line_space
    for p in X.points:
        assert rad(X, range(1, X.n), p) == 1


def test_rad_three_point(three_point):
    assert rad(three_point, [1], 1) == rad_by_ball_scan(three_point, [1], 1) == 0.5


def test_rad_matches_ball_scan(small_space):
    rng = np.random.default_rng(1)
    X = small_space
    for _ in range(6):
        A = random_carrier(rng, X)
        for p in range(X.n):
            assert rad(X, A, p) == rad_by_ball_scan(X, A, p)


def test_ideal_norm_full_carrier(small_space):
    rng = np.random.default_rng(2)
    v = random_moments(rng, small_space)
    full, _ = ideal_norm(small_space, range(small_space.n), v)
    assert full == pytest.approx(free_norm_dual(small_space, v)[0], abs=1e-9)


def test_rad_identities(small_space):
    rng = np.random.default_rng(4)
    X = small_space
    A = random_carrier(rng, X)
    r = rad_table(X, A)
    for p in X.points:
        assert ideal_norm(X, A, delta(X, p))[0] == pytest.approx(r[p], abs=1e-9)
    for p, q in itertools.combinations(X.points, 2):
        val = ideal_norm(X, A, delta(X, p) - delta(X, q))[0]
        assert val == pytest.approx(min(X.dist[p, q], r[p] + r[q]), abs=1e-9)


def test_witness_vanishes_off_carrier(line_space):
    X = line_space
    A = {1, 2, 3}
    _, f = ideal_norm(X, A, [0, 1.0, -0.5, 2.0, 1.0, 1.0])
    assert f[4] == f[5] == f[0] == 0


def test_qmap_on_atoms(line_space):
    X = line_space
    A = frozenset({1, 2})
    assert atom_cost(X, A, np.zeros(X.n)) == 0
    a = np.zeros(X.n)
    a[2] = 1
    assert ideal_norm(X, A, q_map(X, A, a))[0] == pytest.approx(rad(X, A, 2)) == pytest.approx(atom_cost(X, A, a))
    b = np.zeros(X.n)
    b[4] = 1
    assert not canonical_atoms(X, A, b).any()


def test_radiinf_margin(line_space):
    X = line_space
    full = range(1, X.n)
    assert radiinf_margin(X, full, 2, 0.3, 1.0) == 1 >= 1 - 0.3
    A = {1, 2, 3}
    assert radiinf_margin(X, A, 2, 0.0, 0.35) >= 0.35
    assert radiinf_margin(X, A, 2, 0.1, 0.35) >= 0.25


def test_radiinf_rejects_leaking_ball(line_space):
    with pytest.raises(CarrierError) as err:
        radiinf_margin(line_space, {1, 2}, 2, 0.1, 0.5)
    assert err.value.witness == 3
    with pytest.raises(ValueError):
        radiinf_margin(line_space, {1, 2}, 2, 0.3, 0.2)
