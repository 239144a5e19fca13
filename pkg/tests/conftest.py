import numpy as np
import pytest

from geroch_pencil import catalog

ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def maxwell_entry():
    return catalog.maxwell()


@pytest.fixture(scope="session")
def wave_entry():
    return catalog.wave()


@pytest.fixture(scope="session")
def toy_entry():
    return catalog.toy_weak()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
