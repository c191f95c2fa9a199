import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sympkit import SymplecticSystem, from_sturm_liouville

settings.register_profile(
    "sympkit",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("sympkit")


def free_sl(horizon=50):
    """p = 1, q = 0, w = 1."""
    return from_sturm_liouville(1.0, 0.0, 1.0, horizon=horizon)


def degenerate(horizon=50):
    """S = I, Psi = diag(1, 0): never definite."""
    return SymplecticSystem.constant(np.eye(2), np.diag([1.0, 0.0]), horizon)


def zero_weight(n=1, horizon=20):
    return SymplecticSystem.constant(np.eye(2 * n), np.zeros((2 * n, 2 * n)), horizon)


def limit_circle_toy(horizon=60, K=10):
    """Free system whose weight switches off after index K."""
    w = np.r_[np.ones(K + 1), np.zeros(horizon - K)]
    return from_sturm_liouville(1.0, 0.0, w, horizon=horizon)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record and print one ``ACCEPTANCE k: PASS|FAIL ...`` line, then assert."""

    def emit(number, passed, detail):
        line = f"ACCEPTANCE {number}: {'PASS' if passed else 'FAIL'} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
