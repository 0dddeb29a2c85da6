"""The three R-matrix Poisson tensors on 𝔄 and bracket evaluation.

Every tensor is written term by term in the grouping of its closed form; mixed
projections ``([L, X] + [Lb, Xb])_{<=k}`` are expanded by linearity so that an
A+ operator with a truncated tail and an A- operator with a truncated head are
never summed before projecting.
"""
from __future__ import annotations

from gmpy2 import mpq

from .diffop import INF, DiffOp, commutator, mul, project
from .pair_algebra import (PairElement, inner_pair, pair_commutator, r_adjoint, r_bracket,
                           r_matrix)

HALF = mpq(1, 2)
QUARTER = mpq(1, 4)


def _proj2(A: DiffOp, B: DiffOp, lo, hi) -> DiffOp:
    return project(A, lo, hi) + project(B, lo, hi)


def commutator_parts(point: PairElement, covector: PairElement) -> tuple[DiffOp, DiffOp]:
    """([L, X], [Lb, Xb])."""
    return commutator(point.plus, covector.plus), commutator(point.minus, covector.minus)


def p1(point: PairElement, covector: PairElement) -> PairElement:
    L, Lb = point.plus, point.minus
    X, Xb = covector.plus, covector.minus
    C, Cb = commutator(L, X), commutator(Lb, Xb)
    first = commutator(L, project(X, -INF, -1) - project(Xb, -INF, -1)) - _proj2(C, Cb, -INF, 0)
    second = commutator(Lb, project(Xb, 0, INF) - project(X, 0, INF)) - _proj2(C, Cb, 1, INF)
    return PairElement(first, second)


def p2(point: PairElement, covector: PairElement) -> PairElement:
    L, Lb = point.plus, point.minus
    X, Xb = covector.plus, covector.minus
    C, Cb = commutator(L, X), commutator(Lb, Xb)
    S = mul(L, X) + mul(X, L)
    Sb = mul(Lb, Xb) + mul(Xb, Lb)
    low = _proj2(C, Cb, -INF, 0)
    high = _proj2(C, Cb, 1, INF)
    first = (commutator(L, project(S, -INF, -1) - project(Sb, -INF, -1)).scale(HALF)
             - mul(L, low).scale(HALF) - mul(low, L).scale(HALF))
    second = (commutator(Lb, project(Sb, 0, INF) - project(S, 0, INF)).scale(HALF)
              - mul(Lb, high).scale(HALF) - mul(high, Lb).scale(HALF))
    return PairElement(first, second)


def p3(point: PairElement, covector: PairElement) -> PairElement:
    L, Lb = point.plus, point.minus
    X, Xb = covector.plus, covector.minus
    C, Cb = commutator(L, X), commutator(Lb, Xb)
    T = mul(mul(L, X), L)
    Tb = mul(mul(Lb, Xb), Lb)
    first = (commutator(L, project(T, -INF, -1) - project(Tb, -INF, -1))
             - mul(mul(L, _proj2(C, Cb, -INF, 0)), L))
    second = (commutator(Lb, project(Tb, 0, INF) - project(T, 0, INF))
              - mul(mul(Lb, _proj2(Cb, C, 1, INF)), Lb))
    return PairElement(first, second)


TENSORS = {1: p1, 2: p2, 3: p3}


def apply_tensor(k: int, point: PairElement, covector: PairElement) -> PairElement:
    """P_k at ``point`` applied to ``covector``."""
    if k not in TENSORS:
        raise ValueError(f"tensor index must be 1, 2 or 3, got {k}")
    return TENSORS[k](point, covector)


def bracket_functionals(k: int, point: PairElement, dF: PairElement, dG: PairElement):
    """{F, G}_k = (dF, P_k dG)."""
    return inner_pair(dF, apply_tensor(k, point, dG))


def lie_poisson_bracket(point: PairElement, dF: PairElement, dG: PairElement):
    """{F, G}(L) = (L, [dF, dG])."""
    return inner_pair(point, pair_commutator(dF, dG))


def bracket_via_r(k: int, point: PairElement, dF: PairElement, dG: PairElement):
    """The same brackets written directly in terms of R (independent route)."""
    L = point
    if k == 1:
        return inner_pair(L, r_bracket(r_matrix, dF, dG)) * HALF
    if k == 2:
        def sym(d):
            return L * d + d * L
        return (inner_pair(pair_commutator(L, dF), r_matrix(sym(dG)))
                - inner_pair(pair_commutator(L, dG), r_matrix(sym(dF)))) * QUARTER
    if k == 3:
        return (inner_pair(pair_commutator(L, dF), r_matrix(L * dG * L))
                - inner_pair(pair_commutator(L, dG), r_matrix(L * dF * L))) * HALF
    raise ValueError(f"tensor index must be 1, 2 or 3, got {k}")


def tensor_via_r(k: int, point: PairElement, covector: PairElement) -> PairElement:
    """P_k written with R and R* (the compact general form)."""
    L, d = point, covector
    Ld = pair_commutator(L, d)
    if k == 1:
        return (pair_commutator(r_matrix(d), L) - r_adjoint(Ld)).scale(HALF)
    if k == 2:
        rs = r_adjoint(Ld)
        return (pair_commutator(r_matrix(L * d + d * L), L).scale(QUARTER)
                - (L * rs).scale(QUARTER) - (rs * L).scale(QUARTER))
    if k == 3:
        return (pair_commutator(r_matrix(L * d * L), L).scale(HALF)
                - (L * r_adjoint(Ld) * L).scale(HALF))
    raise ValueError(f"tensor index must be 1, 2 or 3, got {k}")
