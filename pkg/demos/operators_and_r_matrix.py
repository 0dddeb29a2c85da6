"""Difference operators on Z/NZ, the trace form and the R-matrix.

Run:  python3 demos/operators_and_r_matrix.py
"""
import random

from toda2d.diffop import DiffOp, inner, power, residue
from toda2d.pair_algebra import PairElement, myb_residual, r_matrix, random_pair
from toda2d.scalar_lattice import LatticeFunction, shift

N = 5
u0 = LatticeFunction([1, 2, 3, 4, 5])
um1 = LatticeFunction([5, 0, 0, 1, 2])
L = DiffOp(N, {1: LatticeFunction.constant(1, N), 0: u0, -1: um1})

print("L   =", L)
print("L^2 =", power(L, 2))
# the residue of L^2 expands by hand to u0^2 + u_{-1}(n) + u_{-1}(n+1)
assert residue(power(L, 2)) == u0 * u0 + um1 + shift(um1, 1)
print("res L^2 =", residue(power(L, 2)))

# the trace pairing is invariant: (Λ, fΛ^-1) = Σ f
print("(Λ, u0 Λ^-1) =", inner(DiffOp.shift_op(N), DiffOp.monomial(u0, -1)))

# R acts on pairs (X, Xb) in A+ ⊕ A-
Z = PairElement(L, DiffOp.monomial(um1, -1))
print("R(L, u_{-1}Λ^-1) =", r_matrix(Z))

rng = random.Random(1)
for _ in range(20):
    X, Y = random_pair(rng, N), random_pair(rng, N)
    assert myb_residual("R", X, Y).is_zero()
print("modified Yang-Baxter holds exactly on 20 random pairs")
