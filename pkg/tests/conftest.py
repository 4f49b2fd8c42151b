import sys

import numpy as np
import pytest

from spectrum_queue import SystemParams


@pytest.fixture
def base():
    """The reference experiment: lambda=7, xi=0.5, mu=3, eta=2, C=2, reward=3."""
    return SystemParams(lam=7.0, xi=0.5, mu=3.0, eta=2.0, cost=2.0, reward=3.0)


def draw_params(rng, n):
    """Random parameter sets: rates in [0.1, 10], cost and reward in [0.1, 20]."""
    out = []
    for _ in range(n):
        lam, xi, mu, eta = rng.uniform(0.1, 10.0, size=4)
        cost, reward = rng.uniform(0.1, 20.0, size=2)
        out.append(SystemParams(lam=lam, xi=xi, mu=mu, eta=eta, cost=cost, reward=reward))
    return out


@pytest.fixture(scope="session")
def random_draws():
    return draw_params(np.random.default_rng(20240611), 200)


def pytest_terminal_summary(terminalreporter):
    module = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(module, "VERDICTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
