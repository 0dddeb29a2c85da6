from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given

from toda2d.diffop import (INF, DiffOp, commutator, inner, minus_part, mul, plus_part, power,
                           project, residue, residue_primitive, trace)
from toda2d.errors import TruncationViolation
from toda2d.scalar_lattice import LatticeFunction, lattice_sum, shift

from conftest import N, finite_ops, lattice_functions


def F(*vals):
    return LatticeFunction(vals)


def matrix(op: DiffOp):
    """Dense N x N matrix of a finite-support operator: (aΛ^k f)(n) = a(n) f(n+k)."""
    n = op.period
    M = [[Fraction(0)] * n for _ in range(n)]
    for k, a in op.coeffs.items():
        for row in range(n):
            M[row][(row + k) % n] += Fraction(int(a[row].numerator), int(a[row].denominator))
    return M


def matmul(A, B):
    n = len(A)
    return [[sum(A[i][t] * B[t][j] for t in range(n)) for j in range(n)] for i in range(n)]


# --------------------------------------------------------------------------
# oracle agreement

@given(finite_ops(), finite_ops())
def test_mul_matches_matrix_product(X, Y):
    assert matrix(mul(X, Y)) == matmul(matrix(X), matrix(Y))


@given(finite_ops(), finite_ops())
def test_trace_matches_matrix_trace(X, Y):
    # degrees stay inside (-N, N), so the matrix diagonal is exactly the residue
    M = matrix(mul(X, Y))
    assert trace(mul(X, Y)) == sum(M[i][i] for i in range(N))


# --------------------------------------------------------------------------
# worked examples

def test_mul_examples():
    f = F(1, 2, 3, 4, 5)
    lam = DiffOp.shift_op(5)
    assert mul(lam, DiffOp.function(f)) == DiffOp.monomial(shift(f, 1), 1)
    L = DiffOp(5, {1: F(1, 1, 1, 1, 1), -1: f})
    assert mul(L, DiffOp.identity(5)) == L
    # (fΛ^-1)Λ = f with f unshifted
    assert mul(DiffOp.monomial(f, -1), lam) == DiffOp.function(f)


def test_commutator_examples():
    f = F(1, 2, 3, 4, 5)
    lam = DiffOp.shift_op(5)
    assert commutator(lam, DiffOp.function(f)) == DiffOp.monomial(shift(f, 1) - f, 1)
    assert commutator(lam, DiffOp.monomial(f, -1)) == DiffOp.function(shift(f, 1) - f)


@given(finite_ops())
def test_commutator_with_itself(X):
    assert commutator(X, X).is_zero()


def test_project_examples():
    u0, um1 = F(1, 2, 3, 4, 5), F(5, 0, 0, 1, 2)
    L = DiffOp(5, {1: F(1, 1, 1, 1, 1), 0: u0, -1: um1})
    assert project(L, 0, INF) == DiffOp(5, {1: F(1, 1, 1, 1, 1), 0: u0})
    assert project(L, 1, 0).is_zero()
    assert residue(L) == u0
    assert residue(DiffOp.shift_op(5, 3)).is_zero()


@given(finite_ops())
def test_plus_minus_partition(X):
    assert plus_part(X) + minus_part(X) == X


@given(finite_ops(), finite_ops())
def test_residue_of_commutator_has_zero_sum(X, Y):
    assert lattice_sum(residue(commutator(X, Y))) == 0
    assert trace(commutator(X, Y)) == 0


def test_trace_examples():
    f = F(1, 2, 3, 4, 5)
    assert trace(DiffOp.function(f)) == 15
    assert trace(DiffOp.shift_op(5)) == 0
    assert inner(DiffOp.shift_op(5), DiffOp.monomial(f, -1)) == 15


@given(finite_ops(), finite_ops(), finite_ops())
def test_inner_invariance(X, Y, Z):
    assert inner(X, Y) == inner(Y, X)
    assert inner(commutator(Z, X), Y) == -inner(X, commutator(Z, Y))


def test_power_examples():
    u0, um1 = F(1, 2, 3, 4, 5), F(5, 0, 0, 1, 2)
    L = DiffOp(5, {1: F(1, 1, 1, 1, 1), 0: u0, -1: um1})
    assert power(L, 1) == L
    assert power(L, 0) == DiffOp.identity(5)
    # hand expansion: res L^2 = u0^2 + u_{-1}(n) + u_{-1}(n+1)
    assert residue(power(L, 2)) == u0 * u0 + um1 + shift(um1, 1)


# --------------------------------------------------------------------------
# exactness windows

def test_truncated_tail_is_tracked():
    f = F(1, 2, 3, 4, 5)
    L = DiffOp(5, {1: F(1, 1, 1, 1, 1), 0: f}, acc=-2)
    L2 = mul(L, L)
    assert L2.knows(-1) and not L2.knows(-2)
    L2.coeff(-1)
    with pytest.raises(TruncationViolation):
        L2.coeff(-2)


def test_residue_requires_knowledge():
    L = DiffOp(5, {1: F(1, 1, 1, 1, 1)}, acc=1)
    with pytest.raises(TruncationViolation):
        residue(L)


@given(finite_ops(), finite_ops())
def test_residue_primitive_is_a_primitive(X, Y):
    F_ = residue_primitive(X, Y)
    assert shift(F_, 1) - F_ == residue(commutator(X, Y))


def test_json_round_trip():
    X = DiffOp(5, {2: F(1, 0, 0, 0, mpq(1, 3)), -1: F(2, 2, 2, 2, 2)}, acc=-3)
    assert DiffOp.from_json(X.to_json()) == X
