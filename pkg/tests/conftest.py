from functools import lru_cache

import pytest

from coulomb2d.potential import make_potential
from coulomb2d.thermal import GridConfig, solve_thermal

ACCEPTANCE: list[str] = []


@lru_cache(maxsize=None)
def _solve(name, params, n, theta, m):
    pot = make_potential(name, **dict(params))
    return solve_thermal(pot, n, theta, GridConfig(m=m))


@pytest.fixture(scope="session")
def thermal():
    """Cached thermal solves keyed by (potential name, n, theta, m, **params)."""

    def get(name, n, theta, m=4096, **params):
        return _solve(name, tuple(sorted(params.items())), int(n), float(theta), int(m))

    return get


@pytest.fixture
def acceptance():
    def check(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} | {detail}"
        ACCEPTANCE.append(line)
        print(line)
        assert passed, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
