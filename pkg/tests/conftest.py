from fractions import Fraction

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def xi3():
    return (Fraction(1, 3), Fraction(-2, 5), Fraction(3, 7))


@pytest.fixture
def xi4():
    return (Fraction(1, 3), Fraction(-2, 5), Fraction(3, 7), Fraction(1, 9))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
