import numpy as np
import pytest

from lipfree.lipschitz import (
    SeparationError,
    as_lip_function,
    glue_separated,
    lip_const_on,
    lip_norm,
    mcshane_extend,
    sup_norm,
    tent_bump,
    truncate_between,
)
from lipfree.metric import normalize_and_adjoin_basepoint


def _pair_scan(X, f):
    return max(abs(f[p] - f[q]) / X.dist[p, q] for p in range(X.n) for q in range(p))


def test_lip_norm_zero(three_point):
    assert lip_norm(three_point, np.zeros(3)) == 0


def test_tent_on_two_points():
    X = normalize_and_adjoin_basepoint([[0]])
    f = tent_bump(X, 1, X.dist[1, 0])
    assert lip_norm(X, f) == 1


def test_lip_norm_three_point(three_point):
    f = np.array([0.0, 1.0, 1.0])
    assert lip_norm(three_point, f) == _pair_scan(three_point, f) == 1.0


def test_lip_norm_matches_pair_scan(small_space):
    rng = np.random.default_rng(0)
    for _ in range(5):
        f = rng.uniform(-1, 1, small_space.n)
        f[0] = 0
        assert lip_norm(small_space, f) == pytest.approx(_pair_scan(small_space, f), rel=1e-14)
        assert sup_norm(f) <= lip_norm(small_space, f) + 1e-12


def test_sup_norm_indicator(three_point):
    assert sup_norm(np.zeros(3)) == 0
    assert sup_norm([0.0, 1.0, 0.0]) == 1


def test_as_lip_function_validates(three_point):
    with pytest.raises(ValueError):
        as_lip_function(three_point, [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        as_lip_function(three_point, [0.0, 0.0])


def test_mcshane_full_domain_is_identity(small_space):
    f = np.linspace(0, 0.5, small_space.n) * 0.1
    f[0] = 0
    np.testing.assert_array_equal(mcshane_extend(small_space, range(small_space.n), f), f)


def test_mcshane_from_basepoint_only(three_point):
    np.testing.assert_array_equal(mcshane_extend(three_point, [0], [0.0]), np.zeros(3))


def test_mcshane_three_point(three_point):
    f = mcshane_extend(three_point, None, {0: 0.0, 1: 1.0})
    # f(q) = min(0 + d(0, q), 1 + d(p, q)) = min(1, 1.5)
    assert f[2] == 1.0
    assert lip_norm(three_point, f) == 1.0


def test_mcshane_preserves_norm(small_space):
    rng = np.random.default_rng(3)
    X = small_space
    for _ in range(10):
        S = sorted({0} | {int(p) for p in rng.choice(np.arange(1, X.n), 3, replace=False)})
        vals = rng.uniform(-1, 1, len(S))
        vals[0] = 0
        ext = mcshane_extend(X, S, vals)
        assert lip_norm(X, ext) == pytest.approx(lip_const_on(X, S, vals), abs=1e-12)
        np.testing.assert_array_equal(ext[S], vals)


def test_mcshane_requires_basepoint(three_point):
    with pytest.raises(ValueError):
        mcshane_extend(three_point, [1], [1.0])
    with pytest.raises(ValueError):
        mcshane_extend(three_point, [0, 1], [0.5, 1.0])


def test_tent_bump(line_space):
    X = line_space
    assert not tent_bump(X, 2, 0).any()
    f = tent_bump(X, 2, 0.15)
    assert f[2] == 0.15
    assert f[4] == f[5] == f[0] == 0
    assert lip_norm(X, f) <= 1
    with pytest.raises(ValueError):
        tent_bump(X, 2, 1.5)


def test_truncate_between(line_space):
    X = line_space
    z = np.zeros(X.n)
    f = np.full(X.n, 1.0)
    f[0] = 0
    np.testing.assert_array_equal(truncate_between(z, f, z), z)
    g = tent_bump(X, 2, 0.5)
    mid = 0.5 * g
    np.testing.assert_array_equal(truncate_between(-g, mid, g), mid)
    out = truncate_between(z, f, g)
    expect = np.minimum(1, np.maximum(0, 0.5 - X.dist[2]))
    expect[0] = 0
    np.testing.assert_allclose(out, expect)
    with pytest.raises(ValueError):
        truncate_between(g, f, g)


def test_glue_single_piece(line_space):
    X = line_space
    f, bound = glue_separated(X, [([1, 2], [0.3, 0.2])], theta=0.5)
    np.testing.assert_array_equal(f[[1, 2]], [0.3, 0.2])
    assert bound == max(1, 4 / 0.5)
    assert lip_norm(X, f) <= bound


def test_glue_tight_pair(line_space):
    X = line_space
    theta = 2 * X.dist[2, 3]
    f, bound = glue_separated(X, [([2], [1.0]), ([3], [-1.0])], theta)
    assert lip_norm(X, f) == pytest.approx(4 / theta, rel=1e-12)
    assert bound == pytest.approx(4 / theta)


def test_glue_zero_pieces(line_space):
    f, _ = glue_separated(line_space, [([1], [0.0]), ([4], [0.0])], theta=0.4)
    assert lip_norm(line_space, f) == 0


def test_glue_rejects_close_pieces(line_space):
    with pytest.raises(SeparationError) as err:
        glue_separated(line_space, [([1], [0.5]), ([2], [0.5])], theta=0.5)
    assert err.value.witness == (1, 2)


def test_glue_rejects_large_pieces(line_space):
    with pytest.raises(ValueError, match="Lipschitz"):
        glue_separated(line_space, [([1, 2], [0.0, 0.5])], theta=0.5)
    with pytest.raises(ValueError, match="basepoint"):
        glue_separated(line_space, [([0, 2], [0.0, 0.5])], theta=0.5)
