import numpy as np
import pytest

from ellcover.streams import SeededRng

# (criterion number, passed, detail) lines collected by the acceptance suite
ACCEPTANCE = []


@pytest.fixture
def rng():
    return SeededRng(20240601)


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE, key=lambda row: row[0]):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
