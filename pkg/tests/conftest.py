import pytest
from hypothesis import settings

from pvstrata.checks import load_fixtures

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fx1():
    return load_fixtures(1)


@pytest.fixture(scope="session")
def fx2():
    return load_fixtures(2)


@pytest.fixture(scope="session")
def fixtures(fx1, fx2):
    return {1: fx1, 2: fx2}


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "CRITERIA", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
