import numpy as np
import pytest

from hhcart.datasets import load_builtin

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def bc():
    return load_builtin("breast_cancer")


@pytest.fixture(scope="session")
def wine():
    return load_builtin("wine")


@pytest.fixture(scope="session")
def balance():
    return load_builtin("balance_scale")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
