import numpy as np
import pytest

from paramcirc.exactfield import DEFAULT_FIELD, FieldContext


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def F():
    return DEFAULT_FIELD


@pytest.fixture
def F101():
    return FieldContext(101)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
