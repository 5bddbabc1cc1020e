import numpy as np
import pytest

from mctl.data import Dataset
from mctl.kernel_graph import KernelSpec, build_gram_set, knn_graph
from mctl.state import SolverState


def random_instance(seed, n_S=8, n_T=6, m=4, d=None, k=2, mu=1.0, kernel=None):
    """Random grams/graph plus a fully populated state (random Phi, Z, J, R1)."""
    rng = np.random.default_rng(seed)
    X_S = Dataset(rng.standard_normal((m, n_S)))
    X_T = Dataset(rng.standard_normal((m, n_T)))
    grams = build_gram_set(X_S, X_T, kernel or KernelSpec())
    graph = knn_graph(X_T, k)
    n = n_S + n_T
    d = n if d is None else d
    state = SolverState(
        Phi=rng.standard_normal((n, d)) / np.sqrt(n),
        Z=rng.standard_normal((n_S, n_T)),
        J=rng.standard_normal((n_S, n_T)),
        R1=rng.standard_normal((n_S, n_T)),
        mu=mu,
    )
    return grams, graph, state


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
