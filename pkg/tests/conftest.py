import numpy as np
import pytest

from lipfree import PointedMetricSpace, random_instance

# pass/fail lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def three_point():
    """Basepoint 0 plus p = 1, q = 2 with d(p, q) = 0.5."""
    return PointedMetricSpace(np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 0.5], [1.0, 0.5, 0.0]]))


@pytest.fixture
def line_space():
    """Five points on a line at 0, 0.1, 0.2, 0.6, 1.0 behind the basepoint."""
    x = np.array([0.0, 0.1, 0.2, 0.6, 1.0])
    d = np.ones((6, 6))
    d[1:, 1:] = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(d, 0.0)
    return PointedMetricSpace(d)


@pytest.fixture(params=[("uniform-cube", 5), ("clustered", 7), ("two-scale", 8)], ids=lambda p: p[0])
def small_space(request):
    gen, n = request.param
    return random_instance(11, n, gen)


def random_moments(rng, X, density=0.6):
    v = np.zeros(X.n)
    mask = rng.random(X.n - 1) < density
    if not mask.any():
        mask[0] = True
    v[1:] = np.where(mask, rng.normal(size=X.n - 1), 0.0)
    return v


def random_carrier(rng, X):
    return frozenset(p for p in range(1, X.n) if rng.random() < 0.6)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
