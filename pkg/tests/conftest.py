import functools
import warnings

import pytest

from artifact.hjb import solve
from artifact.model import ModelParams

warnings.filterwarnings("ignore", message="The TBB threading layer")

BASE = ModelParams()


@functools.lru_cache(maxsize=None)
def solved(params: ModelParams, profile: str = "fast", **overrides):
    """Memoized solve shared by all test modules."""
    return solve(params, profile, **overrides)


@pytest.fixture(scope="session")
def base_params() -> ModelParams:
    return BASE


@pytest.fixture(scope="session")
def fast_lam5():
    return solved(BASE.replace(lam=5.0), "fast")


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
