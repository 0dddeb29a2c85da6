"""The algebra 𝔄 = A+ ⊕ A- of operator pairs, its trace form and R-matrix.

Elements are pairs ``(X, Xbar)`` with ``X`` bounded above and ``Xbar`` bounded
below.  The same type is used for covectors, identified with 𝔄 through the
trace pairing.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterator

from .diffop import INF, DiffOp, commutator, inner, mul, project, trace
from .scalar_lattice import LatticeFunction


@dataclass(frozen=True)
class PairElement:
    plus: DiffOp
    minus: DiffOp

    def __post_init__(self):
        if self.plus.period != self.minus.period:
            raise ValueError("both components of a pair need the same period")

    @property
    def period(self) -> int:
        return self.plus.period

    @classmethod
    def zero(cls, period: int) -> "PairElement":
        z = DiffOp.zero(period)
        return cls(z, z)

    def __add__(self, other: "PairElement") -> "PairElement":
        return PairElement(self.plus + other.plus, self.minus + other.minus)

    def __sub__(self, other: "PairElement") -> "PairElement":
        return PairElement(self.plus - other.plus, self.minus - other.minus)

    def __neg__(self) -> "PairElement":
        return PairElement(-self.plus, -self.minus)

    def scale(self, c) -> "PairElement":
        return PairElement(self.plus.scale(c), self.minus.scale(c))

    def __mul__(self, other):
        if isinstance(other, PairElement):
            return PairElement(mul(self.plus, other.plus), mul(self.minus, other.minus))
        return self.scale(other)

    __rmul__ = scale

    def is_zero(self) -> bool:
        return self.plus.is_zero() and self.minus.is_zero()

    def agrees(self, other: "PairElement") -> bool:
        return self.plus.agrees(other.plus) and self.minus.agrees(other.minus)

    def max_abs(self) -> float:
        return max(self.plus.max_abs(), self.minus.max_abs())

    def to_json(self) -> dict:
        return {"plus": self.plus.to_json(), "minus": self.minus.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "PairElement":
        return cls(DiffOp.from_json(data["plus"]), DiffOp.from_json(data["minus"]))


def pair_commutator(Z: PairElement, W: PairElement) -> PairElement:
    return PairElement(commutator(Z.plus, W.plus), commutator(Z.minus, W.minus))


def trace_pair(Z: PairElement):
    return trace(Z.plus) + trace(Z.minus)


def inner_pair(Z: PairElement, W: PairElement):
    return inner(Z.plus, W.plus) + inner(Z.minus, W.minus)


def _p(X, lo, hi):
    return project(X, lo, hi)


def r_matrix(Z: PairElement) -> PairElement:
    """R(X, Xb) = (X+ - X- + 2 Xb-, Xb- - Xb+ + 2 X+)."""
    X, Xb = Z.plus, Z.minus
    Xp, Xm = _p(X, 0, INF), _p(X, -INF, -1)
    Xbp, Xbm = _p(Xb, 0, INF), _p(Xb, -INF, -1)
    return PairElement(Xp - Xm + Xbm.scale(2), Xbm - Xbp + Xp.scale(2))


def r_adjoint(Z: PairElement) -> PairElement:
    """R*(X, Xb) = (X<=0 - X>0 + 2 Xb<=0, Xb>0 - Xb<=0 + 2 X>0)."""
    X, Xb = Z.plus, Z.minus
    Xle, Xgt = _p(X, -INF, 0), _p(X, 1, INF)
    Xble, Xbgt = _p(Xb, -INF, 0), _p(Xb, 1, INF)
    return PairElement(Xle - Xgt + Xble.scale(2), Xbgt - Xble + Xgt.scale(2))


def skew_part(Z: PairElement) -> PairElement:
    """A(X, Xb) = (X>0 - X<0 - Xb_0, Xb<0 - Xb>0 + X_0), the skew part of R."""
    X, Xb = Z.plus, Z.minus
    return PairElement(
        _p(X, 1, INF) - _p(X, -INF, -1) - _p(Xb, 0, 0),
        _p(Xb, -INF, -1) - _p(Xb, 1, INF) + _p(X, 0, 0),
    )


def split_pi(Z: PairElement) -> PairElement:
    """Π(X, Xb) = (X+ + Xb-, X+ + Xb-)."""
    d = _p(Z.plus, 0, INF) + _p(Z.minus, -INF, -1)
    return PairElement(d, d)


def split_pi_tilde(Z: PairElement) -> PairElement:
    """Π~(X, Xb) = (X- - Xb-, Xb+ - X+)."""
    X, Xb = Z.plus, Z.minus
    return PairElement(_p(X, -INF, -1) - _p(Xb, -INF, -1), _p(Xb, 0, INF) - _p(X, 0, INF))


def split_pi_dual(Z: PairElement) -> PairElement:
    """Π*(X, Xb) = (X<=0 + Xb<=0, X>0 + Xb>0)."""
    X, Xb = Z.plus, Z.minus
    return PairElement(_p(X, -INF, 0) + _p(Xb, -INF, 0), _p(X, 1, INF) + _p(Xb, 1, INF))


def split_pi_tilde_dual(Z: PairElement) -> PairElement:
    """Π~*(X, Xb) = (X>0 - Xb<=0, Xb<=0 - X>0)."""
    X, Xb = Z.plus, Z.minus
    return PairElement(_p(X, 1, INF) - _p(Xb, -INF, 0), _p(Xb, -INF, 0) - _p(X, 1, INF))


def splitting_projections(Z: PairElement) -> tuple[PairElement, PairElement]:
    return split_pi(Z), split_pi_tilde(Z)


MAPS: dict[str, Callable[[PairElement], PairElement]] = {"R": r_matrix, "A": skew_part}


def _resolve(m) -> Callable[[PairElement], PairElement]:
    return MAPS[m] if isinstance(m, str) else m


def r_bracket(m, Z: PairElement, W: PairElement) -> PairElement:
    """[Z, W]_M = [M Z, W] + [Z, M W] for M in {R, A} (or any linear map)."""
    M = _resolve(m)
    return pair_commutator(M(Z), W) + pair_commutator(Z, M(W))


def myb_residual(m, Z: PairElement, W: PairElement) -> PairElement:
    """[M Z, M W] - M([Z, W]_M) + [Z, W]; zero when M solves modified Yang-Baxter."""
    M = _resolve(m)
    return pair_commutator(M(Z), M(W)) - M(r_bracket(M, Z, W)) + pair_commutator(Z, W)


# sampling ----------------------------------------------------------------

def random_pair(rng: random.Random, period: int, lo: int = -3, hi: int = 3,
                bound: int = 9, density: float = 0.7) -> PairElement:
    """Finite-support pair with coefficients in degrees ``lo..hi``."""
    return PairElement(DiffOp.random(rng, period, lo, hi, bound, density),
                       DiffOp.random(rng, period, lo, hi, bound, density))


def basis(period: int, kmax: int = 3) -> Iterator[PairElement]:
    """All pairs (δ_a Λ^k, 0) and (0, δ_a Λ^k) with |k| <= kmax."""
    zero = DiffOp.zero(period)
    for slot in (0, 1):
        for k in range(-kmax, kmax + 1):
            for a in range(period):
                e = DiffOp.monomial(LatticeFunction.delta(a, period), k)
                yield PairElement(e, zero) if slot == 0 else PairElement(zero, e)
