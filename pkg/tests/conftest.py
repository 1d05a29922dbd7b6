import numpy as np
import pytest

from bestiso.graph import Dag, WeightedFunction


def random_dag(rng, n, density=0.3):
    """Random dag on ``n`` vertices: edges go forward in a random permutation."""
    perm = rng.permutation(n)
    edges = [(int(perm[i]), int(perm[j])) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return Dag(n, np.array(edges, dtype=np.intp).reshape(-1, 2))


def random_fw(rng, n, vmax=5, wmax=1):
    f = rng.integers(-vmax, vmax + 1, n).astype(float)
    w = rng.integers(1, wmax + 1, n).astype(float)
    return WeightedFunction.from_values(f, w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one (criterion, passed, detail) entry per acceptance criterion, printed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
