import random
from itertools import product

import pytest
from gmpy2 import mpq

from toda2d.coord_brackets import (VARIANTS, BracketTerm, CoordIndex, Symbol, admissible,
                                   bracket_terms, c_indicator, crosscheck, d_operator,
                                   evaluate_bracket, jacobi_matrix, jacobiator, term_difference,
                                   terms_to_json)
from toda2d.dirac_reduction import LaxState
from toda2d.errors import DepthExceeded, UnsupportedIndex
from toda2d.scalar_lattice import LatticeFunction

C = CoordIndex.parse


def strs(terms):
    return sorted(str(t) for t in terms)


@pytest.fixture(scope="module")
def state():
    return LaxState.random(random.Random(7), 7, 10, 6)


def test_c_indicator():
    assert (c_indicator(1), c_indicator(0), c_indicator(-5), c_indicator(3)) == (1, 0, 0, 1)


def test_d_operator():
    f = LatticeFunction([1, 2, 3, 4, 5])
    assert d_operator(2, f, 4) == f[4] + f[0]
    assert d_operator(0, f, 2) == 0
    assert d_operator(-1, f, 0) == -f[4]
    assert d_operator(-2, f, 1) == -(f[4] + f[0])


def test_coordinate_parsing():
    assert C("ubar-1", 3) == CoordIndex("ubar", -1, 3)
    assert C("u-2") == CoordIndex("u", -2, 0)
    with pytest.raises(UnsupportedIndex):
        C("u2")
    with pytest.raises(UnsupportedIndex):
        C("ubar-2")


def test_first_bracket_printed_terms():
    # {u0(n), ub_{-1}(m)}_1 with c(-1) = 0
    assert strs(bracket_terms(1, C("u0"), C("ubar-1"))) == strs([
        BracketTerm(1, (Symbol("ubar", -1, "m", 0),), 1),
        BracketTerm(-1, (Symbol("ubar", -1, "n", 0),), 0)])
    # ub_{-2} is zero, so nothing survives
    assert bracket_terms(1, C("ubar-1"), C("ubar-1")) == []


def test_second_bracket_at_u0_u0():
    assert strs(bracket_terms(2, C("u0"), C("u0"))) == strs([
        BracketTerm(1, (Symbol("u", -1, "m", 0),), 1),
        BracketTerm(-1, (Symbol("u", -1, "n", 0),), -1)])


def test_first_bracket_u0_u0_vanishes(state):
    for n, m in product(range(7), repeat=2):
        assert evaluate_bracket(1, C("u0", n), C("u0", m), state) == 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_antisymmetry(state, k):
    rng = random.Random(k)
    names = ["u0", "u-1", "u-2", "u-3", "ubar-1", "ubar0", "ubar1"]
    for _ in range(25):
        a = C(rng.choice(names), rng.randrange(7))
        b = C(rng.choice(names), rng.randrange(7))
        for v in VARIANTS:
            assert evaluate_bracket(k, a, b, state, v) == -evaluate_bracket(k, b, a, state, v)


@pytest.mark.parametrize("k", [1, 2])
def test_formulas_match_tensors_sample(state, k):
    rng = random.Random(10 + k)
    names = ["u0", "u-1", "u-3", "ubar-1", "ubar0", "ubar1"]
    for _ in range(20):
        a, b = C(rng.choice(names), rng.randrange(7)), C(rng.choice(names), rng.randrange(7))
        assert crosscheck(k, a, b, state) == 0


def test_third_bracket_printed_range_is_off_by_one(state):
    # the printed u-ubar sum misses exactly two terms at (u0, ub1)
    missing = term_difference(3, C("u0"), C("ubar1"))
    assert strs(missing) == strs([
        BracketTerm(1, (Symbol("ubar", -1, "m", 0), Symbol("ubar", 1, "n", 0)), 0),
        BracketTerm(-1, (Symbol("ubar", -1, "m", 0), Symbol("ubar", 1, "n", 1)), 1)])
    mism = [(n, m) for n, m in product(range(7), repeat=2)
            if crosscheck(3, C("u0", n), C("ubar1", m), state, "printed") != 0]
    assert mism
    for n, m in product(range(7), repeat=2):
        assert crosscheck(3, C("u0", n), C("ubar1", m), state, "corrected") == 0


def test_third_bracket_same_family_needs_no_correction():
    for a, b in (("u0", "u-1"), ("ubar0", "ubar1"), ("u-2", "u0")):
        assert term_difference(3, C(a), C(b)) == []


def test_depth_is_enforced():
    shallow = LaxState.random(random.Random(1), 7, 2, 2)
    with pytest.raises(DepthExceeded):
        evaluate_bracket(3, C("u-2"), C("u-2"), shallow)


def test_json_schema():
    js = terms_to_json(bracket_terms(1, C("u0"), C("ubar-1")))
    assert {"coeff": ["1", "ubar_-1(m)"], "delta": 1} in js


def test_admissibility_margin():
    assert admissible([C("u0"), C("u-1"), C("ubar0")], 9, 9)
    assert not admissible([C("u-2"), C("u0"), C("u0")], 9, 9)
    assert not admissible([C("ubar2"), C("u0"), C("u0")], 9, 9)


def test_jacobi_with_repeated_entry_vanishes(state):
    deep = LaxState.random(random.Random(3), 7, 9, 9)
    a, b = C("u0", 1), C("ubar0", 2)
    for k in (1, 2, 3, (mpq(2, 3), mpq(-1, 5))):
        assert jacobiator(k, a, a, b, deep, "corrected") == 0


def test_jacobi_matrix_structure():
    deep = LaxState.random(random.Random(4), 7, 9, 9)
    a, b, c = C("u0", 0), C("ubar-1", 1), C("u-1", 1)
    J = jacobi_matrix(a, b, c, deep, "corrected")
    # each bracket is Poisson and every pair is compatible
    for p in range(3):
        assert J[p][p] == 0
        for q in range(p + 1, 3):
            assert J[p][q] + J[q][p] == 0
    assert jacobiator((mpq(2, 3), mpq(-1, 5)), a, b, c, deep, "corrected") == 0
