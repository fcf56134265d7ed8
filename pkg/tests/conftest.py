from fractions import Fraction

import pytest

from pruneprice.model import Instance, gen_lower_bound

F = Fraction


@pytest.fixture
def d1():
    return Instance.build(4, [6, 4, 2], [2, 2, 2])


@pytest.fixture
def d2():
    return Instance.build(1, [1, 1, 1, 1], ["1/2"] * 4)


@pytest.fixture
def lower_bound():
    inst, _ = gen_lower_bound(F(1, 100), 1)
    return inst


@pytest.fixture
def single():
    return Instance.build(10, [5], [3])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
