import warnings

import numpy as np
import pytest

from taskmech import (MarketParams, Models, RevenueModel, SatisfactionModel, SolverConfig,
                      make_grid, make_uniform, optimize_alpha0, solve)

# the worked example: uniform types on [4, 6], p = 10, z1 = q1 = 0.5, z2 = 3
P, Z1, Z2, Q1 = 10.0, 0.5, 3.0, 0.5


@pytest.fixture(scope="session")
def dist():
    return make_uniform(4.0, 6.0)


@pytest.fixture(scope="session")
def models():
    return Models(SatisfactionModel(Z1, Z2), RevenueModel(Q1), MarketParams(P))


@pytest.fixture(scope="session")
def grid(dist):
    return make_grid(dist, 201)


@pytest.fixture(scope="session")
def solved(models, dist):
    """Schedule solved to convergence at alpha0 = 0 (what the search picks)."""
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        schedule, trace = solve(SolverConfig(alpha0=0.0), models, dist)
    assert trace.converged
    return schedule, trace


@pytest.fixture(scope="session")
def search(models, dist):
    return optimize_alpha0(SolverConfig(), models, dist, (0.0, 9.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
