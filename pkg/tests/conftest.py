import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def brualdi_cao(n):
    """Ones in column 0 and on the band i <= j <= i + 2."""
    return [[int(j == 0 or i <= j <= i + 2) for j in range(n)] for i in range(n)]


def reflect(m):
    """Reflection in the anti-diagonal: (A^R)_{i,j} = A_{n-1-j, n-1-i}."""
    n = len(m)
    return [[m[n - 1 - j][n - 1 - i] for j in range(n)] for i in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = mod.summary_lines() if mod else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
