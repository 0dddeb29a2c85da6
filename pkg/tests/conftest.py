import random

import pytest
from gmpy2 import mpq
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from toda2d.diffop import DiffOp
from toda2d.pair_algebra import PairElement
from toda2d.scalar_lattice import LatticeFunction

settings.register_profile("toda2d", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("toda2d")

N = 5

small_rational = st.builds(lambda p, q: mpq(p, q), st.integers(-9, 9), st.integers(1, 9))


def lattice_functions(period=N):
    return st.lists(small_rational, min_size=period, max_size=period).map(LatticeFunction)


def finite_ops(period=N, lo=-2, hi=2):
    degrees = st.lists(st.integers(lo, hi), min_size=0, max_size=3, unique=True)
    return degrees.flatmap(lambda ds: st.tuples(*[lattice_functions(period) for _ in ds]).map(
        lambda fs: DiffOp(period, dict(zip(ds, fs)))))


def pairs(period=N, lo=-2, hi=2):
    return st.builds(PairElement, finite_ops(period, lo, hi), finite_ops(period, lo, hi))


@pytest.fixture
def rng():
    return random.Random(20240611)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
