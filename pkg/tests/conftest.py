from fractions import Fraction

import pytest

from nashcap.generators import envy_unit, gen_capped_envy, gen_lower_bound, gen_multicopy_envy
from nashcap.instance import make_instance

HUNDREDTH = Fraction(1, 100)
QUARTER = Fraction(1, 4)


def ladder(u, r):
    """Independent reference for rounding: walk r^0, r^1, ... until u is reached (u >= 1)."""
    t, v = 0, Fraction(1)
    while v < u:
        v *= r
        t += 1
    return t


@pytest.fixture
def s_unit():
    return envy_unit(HUNDREDTH)


@pytest.fixture
def multicopy():
    return gen_multicopy_envy(HUNDREDTH)


@pytest.fixture
def capped():
    return gen_capped_envy(HUNDREDTH)


@pytest.fixture
def lower_bound():
    return gen_lower_bound(3, 1, 666)


@pytest.fixture
def three_one_one():
    """Two uncapped agents, three single goods worth 3, 1 and 1 to both."""
    return make_instance([1, 1, 1], [None, None], [[[3], [1], [1]]] * 2)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
