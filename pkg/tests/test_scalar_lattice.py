import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from toda2d.errors import NonZeroMean, PeriodMismatch
from toda2d.scalar_lattice import (LatticeFunction, invert_shift_minus_one, lattice_sum,
                                   rational, shift, summation)

from conftest import lattice_functions


def F(*vals):
    return LatticeFunction(vals)


def test_shift_examples():
    f = F(1, 2, 3, 4)
    assert shift(f, 1) == F(2, 3, 4, 1)
    assert shift(f, -1) == F(4, 1, 2, 3)
    assert shift(f, 0) == f
    assert shift(f, 5) == shift(f, 1)


def test_lattice_sum_example():
    assert lattice_sum(F(1, 2, 3, 4)) == 10


@given(lattice_functions(), st.integers(-7, 7))
def test_sum_is_translation_invariant(f, k):
    assert lattice_sum(shift(f, k)) == lattice_sum(f)


@given(lattice_functions())
def test_discrete_derivative_telescopes(g):
    assert lattice_sum(shift(g, 1) - g) == 0


def test_invert_examples():
    assert invert_shift_minus_one(F(1, -1, 0, 0)) == F(0, 1, 0, 0)
    assert invert_shift_minus_one(F(0, 0, 0, 0)) == F(0, 0, 0, 0)
    with pytest.raises(NonZeroMean):
        invert_shift_minus_one(F(1, 1, 1, 1))


@given(lattice_functions())
def test_invert_solves_the_difference_equation(g):
    f = shift(g, 1) - g
    h = invert_shift_minus_one(f)
    assert h[0] == 0
    assert shift(h, 1) - h == f
    # any two solutions differ by a constant
    d = g - h
    assert len(set(d.values)) == 1


def test_invert_float_tolerance():
    g = invert_shift_minus_one(LatticeFunction([0.5, -0.5 + 1e-13], exact=False))
    assert g.values[0] == 0.0
    with pytest.raises(NonZeroMean):
        invert_shift_minus_one(LatticeFunction([0.5, -0.4], exact=False))


@given(lattice_functions(), st.integers(-6, 6))
def test_summation_defining_relation(f, k):
    # (Λ - 1) 𝒟^k f = (Λ^k - 1) f, checked without inverting anything
    g = summation(f, k)
    assert shift(g, 1) - g == shift(f, k) - f


def test_summation_small_cases():
    f = F(1, 2, 3, 4, 5)
    assert summation(f, 0).is_zero()
    assert summation(f, 1) == f
    assert summation(f, 2) == f + shift(f, 1)
    assert summation(f, -1) == -shift(f, -1)


def test_exact_arithmetic_and_immutability():
    f = F(mpq(1, 3), 2)
    g = f * f + f.scale(mpq(3, 2))
    assert g == F(mpq(1, 9) + mpq(1, 2), 7)
    with pytest.raises(AttributeError):
        f.values = (1, 2)


def test_period_mismatch():
    with pytest.raises(PeriodMismatch):
        F(1, 2) + F(1, 2, 3)


def test_rational_coercion():
    assert rational("3/7") == mpq(3, 7)
    assert rational(2) == mpq(2)


def test_json_round_trip():
    f = F(mpq(-3, 7), 0, 5)
    assert LatticeFunction.from_json(f.to_json()) == f
