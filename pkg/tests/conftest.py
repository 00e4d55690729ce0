import numpy as np
import pytest
from hypothesis import settings

from asgldl.lattice import fibonacci_sphere

settings.register_profile("default", max_examples=50, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile("default")

# acceptance criterion -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture(scope="session")
def lat600():
    return fibonacci_sphere(600)


@pytest.fixture(scope="session")
def lat60():
    return fibonacci_sphere(60)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
