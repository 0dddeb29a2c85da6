import random

from hypothesis import given

from toda2d.diffop import DiffOp
from toda2d.pair_algebra import (PairElement, basis, inner_pair, myb_residual, pair_commutator,
                                 r_adjoint, r_bracket, r_matrix, random_pair, skew_part, split_pi,
                                 split_pi_dual, split_pi_tilde, split_pi_tilde_dual,
                                 splitting_projections)
from toda2d.scalar_lattice import LatticeFunction

from conftest import N, pairs


def F(*vals):
    return LatticeFunction(vals)


def const(c, n=5):
    return LatticeFunction([c] * n)


a, b = F(1, 2, 3, 4, 5), F(2, 0, 1, 0, 7)
Z0 = DiffOp.zero(5)


def test_r_matrix_example():
    L = DiffOp(5, {1: const(1), -1: a})
    Z = PairElement(L, DiffOp.monomial(b, -1))
    expected = PairElement(DiffOp(5, {1: const(1), -1: b.scale(2) - a}),
                           DiffOp(5, {1: const(2), -1: b}))
    assert r_matrix(Z) == expected


def test_small_images():
    X0 = DiffOp.function(a)
    Xp = DiffOp.monomial(a, 2)
    assert r_adjoint(PairElement(Z0, X0)) == PairElement(X0.scale(2), -X0)
    assert r_adjoint(PairElement(X0, Z0)) == PairElement(X0, Z0)
    assert skew_part(PairElement(X0, Z0)) == PairElement(Z0, X0)
    assert r_matrix(PairElement(Xp, Z0)) == PairElement(Xp, Xp.scale(2))


def test_pi_example():
    L = DiffOp(5, {1: const(1), -1: a})
    Pi, _ = splitting_projections(PairElement(L, DiffOp.monomial(b, -1)))
    d = DiffOp(5, {1: const(1), -1: b})
    assert Pi == PairElement(d, d)


@given(pairs())
def test_splitting_is_a_direct_sum(Z):
    Pi, Pit = split_pi(Z), split_pi_tilde(Z)
    assert Pi + Pit == Z
    assert r_matrix(Z) == Pi - Pit
    assert split_pi(Pi) == Pi and split_pi_tilde(Pit) == Pit
    assert split_pi(Pit).is_zero()


@given(pairs(), pairs())
def test_adjoints_under_the_trace_pairing(Z, W):
    assert inner_pair(r_matrix(Z), W) == inner_pair(Z, r_adjoint(W))
    assert inner_pair(split_pi(Z), W) == inner_pair(Z, split_pi_dual(W))
    assert inner_pair(split_pi_tilde(Z), W) == inner_pair(Z, split_pi_tilde_dual(W))


@given(pairs(), pairs())
def test_skew_part_is_skew(Z, W):
    assert inner_pair(skew_part(Z), W) == -inner_pair(Z, skew_part(W))
    # A is the skew part of R
    assert r_matrix(Z) - r_adjoint(Z) == skew_part(Z).scale(2)


@given(pairs(), pairs())
def test_modified_yang_baxter(Z, W):
    assert myb_residual("R", Z, W).is_zero()
    assert myb_residual("A", Z, W).is_zero()


def test_modified_yang_baxter_on_basis():
    B = list(basis(N, 2))
    rng = random.Random(3)
    for Z, W in (rng.sample(B, 2) for _ in range(300)):
        assert myb_residual(r_matrix, Z, W).is_zero()


@given(pairs(), pairs(), pairs())
def test_r_bracket_jacobi(X, Y, Z):
    def br(P, Q):
        return r_bracket("R", P, Q)
    jac = br(X, br(Y, Z)) + br(Y, br(Z, X)) + br(Z, br(X, Y))
    assert jac.is_zero()


@given(pairs(), pairs())
def test_pair_commutator_antisymmetric(Z, W):
    assert (pair_commutator(Z, W) + pair_commutator(W, Z)).is_zero()


def test_random_pair_is_reproducible():
    Z1 = random_pair(random.Random(1), 5)
    Z2 = random_pair(random.Random(1), 5)
    assert Z1 == Z2
    assert PairElement.from_json(Z1.to_json()) == Z1
