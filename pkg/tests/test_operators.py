import numpy as np
import pytest

from conftest import random_moments
from lipfree.freespace import delta, free_norm, support
from lipfree.lipschitz import lip_norm
from lipfree.metric import PointedMetricSpace, ball_of_set
from lipfree.operators import apply_T, apply_T_star, fixed_point_check, weight


def test_weight_values(line_space):
    X = line_space
    theta = 0.4
    w = weight(X, {1}, theta)
    assert w.values[1] == 1
    # d(E, x) = 3 theta / 4 gives 1/2
    x = 0.3
    d = np.ones((3, 3))
    d[1, 2] = d[2, 1] = x
    np.fill_diagonal(d, 0)

    Y = PointedMetricSpace(d)
    assert weight(Y, {1}, x / 0.75).values[2] == pytest.approx(0.5)
    assert w.values[4] == w.values[5] == 0


def test_weight_rejects_bad_input(line_space):
    with pytest.raises(ValueError):
        weight(line_space, {1}, 0.0)
    with pytest.raises(ValueError):
        weight(line_space, [], 0.5)


def test_weight_lipschitz(small_space):
    prof = weight(small_space, {1, 2}, 0.3)
    assert lip_norm(small_space, prof.values) <= prof.lipschitz_bound + 1e-12
    assert prof.operator_bound == pytest.approx(1 + 2 / 0.3)


def test_T_star_extremes(line_space):
    X = line_space
    f = np.zeros(X.n)
    f[[1, 2]] = [0.1, -0.1]
    np.testing.assert_array_equal(apply_T_star(X, f, {1, 2}, 0.2), f)
    g = np.zeros(X.n)
    g[5] = 0.4
    assert not apply_T_star(X, g, {1}, 0.3).any()


def test_T_extremes(line_space):
    X = line_space
    v = delta(X, 1) - 2 * delta(X, 2)
    np.testing.assert_array_equal(apply_T(X, v, {1, 2}, 0.05), v)
    assert not apply_T(X, delta(X, 5), {1}, 0.5).any()


def test_fixed_point(line_space):
    X = line_space
    v = delta(X, 2) + 0.5 * delta(X, 4)
    assert fixed_point_check(X, v, 0.1)
    assert fixed_point_check(X, np.zeros(X.n), 0.1)
    # d(2, 4) = 0.5 lies strictly between theta/2 and theta
    assert not fixed_point_check(X, delta(X, 4), 0.6, {2})


def test_supports_and_bound(small_space):
    rng = np.random.default_rng(7)
    X = small_space
    for _ in range(5):
        v = random_moments(rng, X)
        E = {int(rng.integers(1, X.n))}
        theta = float(rng.uniform(0.05, 1.0))
        Tv = apply_T(X, v, E, theta)
        s = support(v)
        assert support(Tv) <= s & ball_of_set(X, E, theta)
        assert support(v - Tv) <= s - ball_of_set(X, E, theta / 2)
        bound = weight(X, E, theta).operator_bound
        assert free_norm(X, Tv) <= bound * free_norm(X, v) + 1e-6
