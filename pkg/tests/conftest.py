import os

import numpy as np
import pytest
from hypothesis import settings

from firthfit import Dataset, LinkKind

LINKS = list(LinkKind)

# same examples on every run; set HYPOTHESIS_PROFILE=explore for fresh draws
settings.register_profile("repro", derandomize=True)
settings.register_profile("explore", derandomize=False)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))

# populated by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_instance(rng, max_n=8, max_p=3, beta_norm=2.0, max_m=5):
    """Full-rank random grouped-binomial dataset and a beta with ||beta|| <= beta_norm."""
    while True:
        p = int(rng.integers(1, max_p + 1))
        n = int(rng.integers(p, max_n + 1))
        X = rng.normal(size=(n, p))
        m = rng.integers(1, max_m + 1, size=n)
        y = rng.integers(0, m + 1)
        ds = Dataset(X, y, m)
        if ds.full_column_rank:
            break
    beta = rng.normal(size=p)
    beta *= rng.uniform(0, beta_norm) / np.linalg.norm(beta)
    return ds, beta


def central_gradient(f, beta, h):
    g = np.empty_like(beta)
    for j in range(beta.size):
        e = np.zeros_like(beta)
        e[j] = h
        g[j] = (f(beta + e) - f(beta - e)) / (2 * h)
    return g


def fd_relative_error(g, fd):
    """Sup-norm error relative to the gradient scale, floored at 1."""
    return np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(fd)))


@pytest.fixture
def two_point():
    return Dataset.binary([[-1.0], [1.0]], [0, 1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
