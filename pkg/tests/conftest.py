import numpy as np
import pytest

from dmk.sphere import build_grid

ACCEPTANCE_LINES: list[str] = []


def criterion(num: int, description: str, ok: bool, detail: str) -> None:
    """Record the one-line verdict for an acceptance criterion and assert it."""
    line = f"criterion {num:02d} [{'PASS' if ok else 'FAIL'}] {description}: {detail}"
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def circle():
    return build_grid(2, 512)


@pytest.fixture(scope="session")
def sphere32():
    return build_grid(3, 32)


@pytest.fixture(scope="session")
def sphere48():
    return build_grid(3, 48)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(0)
