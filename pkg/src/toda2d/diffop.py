"""Difference operators sum_k a_k(n) Λ^k over the periodic coefficient ring.

An operator stores finitely many coefficients together with an *exactness
window* ``[acc, acc_hi]``.  Coefficients inside the window are exact (missing
keys are zero); outside it they are unknown.  ``acc = -inf`` and
``acc_hi = +inf`` mark an operator of finite support.  Operators bounded above
with a truncated tail (elements of A+) have finite ``acc``; operators bounded
below with a truncated head (elements of A-) have finite ``acc_hi``.

Degrees add freely: Λ^N is *not* identified with 1, only the coefficients live
on Z/NZ.
"""
from __future__ import annotations

import math
import random
from typing import Iterable, Mapping

from .errors import PeriodMismatch, TruncationViolation
from .scalar_lattice import LatticeFunction, lattice_sum, random_function, shift, summation

INF = math.inf

__all__ = [
    "DiffOp", "INF", "mul", "commutator", "project", "residue", "trace",
    "inner", "power", "plus_part", "minus_part", "residue_primitive",
]


def _low_bound(acc, other_max):
    # lowest exact degree of a product contributed by one factor's lower tail
    if acc == -INF or other_max == -INF:
        return -INF
    return acc + other_max


def _high_bound(acc_hi, other_min):
    if acc_hi == INF or other_min == INF:
        return INF
    return acc_hi + other_min


class DiffOp:
    """Immutable difference operator with an exactness window."""

    __slots__ = ("period", "coeffs", "acc", "acc_hi")

    def __init__(self, period: int, coeffs: Mapping[int, LatticeFunction] | None = None,
                 acc=-INF, acc_hi=INF):
        if acc > acc_hi + 1:
            raise ValueError(f"empty exactness window [{acc}, {acc_hi}]")
        clean = {}
        for k, f in (coeffs or {}).items():
            if not isinstance(f, LatticeFunction):
                f = LatticeFunction(f)
            if f.period != period:
                raise PeriodMismatch(f"coefficient of degree {k} has period {f.period}, expected {period}")
            if not (acc <= k <= acc_hi):
                raise ValueError(f"degree {k} outside exactness window [{acc}, {acc_hi}]")
            if not f.is_zero():
                clean[int(k)] = f
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "acc", acc)
        object.__setattr__(self, "acc_hi", acc_hi)

    @classmethod
    def _raw(cls, period, coeffs, acc, acc_hi):
        obj = object.__new__(cls)
        object.__setattr__(obj, "period", period)
        object.__setattr__(obj, "coeffs", coeffs)
        object.__setattr__(obj, "acc", acc)
        object.__setattr__(obj, "acc_hi", acc_hi)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("DiffOp is immutable")

    def __reduce__(self):
        return (DiffOp._raw, (self.period, self.coeffs, self.acc, self.acc_hi))

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, period: int) -> "DiffOp":
        return cls._raw(period, {}, -INF, INF)

    @classmethod
    def identity(cls, period: int) -> "DiffOp":
        return cls.monomial(LatticeFunction.constant(1, period), 0)

    @classmethod
    def shift_op(cls, period: int, k: int = 1) -> "DiffOp":
        """Λ^k."""
        return cls.monomial(LatticeFunction.constant(1, period), k)

    @classmethod
    def monomial(cls, f: LatticeFunction, k: int) -> "DiffOp":
        """f(n) Λ^k."""
        return cls(f.period, {k: f})

    @classmethod
    def function(cls, f: LatticeFunction) -> "DiffOp":
        return cls.monomial(f, 0)

    @classmethod
    def constant(cls, c, period: int) -> "DiffOp":
        return cls.function(LatticeFunction.constant(c, period))

    @classmethod
    def random(cls, rng: random.Random, period: int, lo: int, hi: int,
               bound: int = 9, density: float = 1.0) -> "DiffOp":
        """Finite-support operator with random coefficients in degrees ``lo..hi``."""
        coeffs = {}
        for k in range(lo, hi + 1):
            if rng.random() <= density:
                coeffs[k] = random_function(rng, period, bound)
        return cls(period, coeffs)

    # inspection -----------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        """True when every coefficient is known (finite support)."""
        return self.acc == -INF and self.acc_hi == INF

    @property
    def hi(self):
        """Highest degree that may carry a nonzero coefficient."""
        if self.acc_hi != INF:
            return INF
        cands = list(self.coeffs)
        if self.acc != -INF:
            cands.append(self.acc - 1)
        return max(cands) if cands else -INF

    @property
    def lo(self):
        """Lowest degree that may carry a nonzero coefficient."""
        if self.acc != -INF:
            return -INF
        cands = list(self.coeffs)
        if self.acc_hi != INF:
            cands.append(self.acc_hi + 1)
        return min(cands) if cands else INF

    def knows(self, k: int) -> bool:
        return self.acc <= k <= self.acc_hi

    def coeff(self, k: int) -> LatticeFunction:
        if not self.knows(k):
            raise TruncationViolation(
                f"degree {k} outside exactness window [{self.acc}, {self.acc_hi}]")
        f = self.coeffs.get(k)
        return f if f is not None else LatticeFunction.zeros(self.period, self.exact)

    @property
    def exact(self) -> bool:
        return all(f.exact for f in self.coeffs.values())

    def degrees(self) -> list[int]:
        return sorted(self.coeffs)

    def is_zero(self) -> bool:
        """True when every *known* coefficient vanishes."""
        return not self.coeffs

    def __repr__(self) -> str:
        if not self.coeffs:
            body = "0"
        else:
            body = " + ".join(f"{list(map(str, f.values))}Λ^{k}" for k, f in
                              sorted(self.coeffs.items(), reverse=True))
        return f"DiffOp({body}; window=[{self.acc}, {self.acc_hi}])"

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return (self.period == other.period and self.acc == other.acc
                and self.acc_hi == other.acc_hi and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.period, self.acc, self.acc_hi, tuple(sorted(self.coeffs.items()))))

    def agrees(self, other: "DiffOp") -> bool:
        """Equality on the common exactness window (which must be nonempty)."""
        lo = max(self.acc, other.acc)
        hi = min(self.acc_hi, other.acc_hi)
        if lo > hi:
            raise TruncationViolation("operators share no exactly known degree")
        for k in set(self.coeffs) | set(other.coeffs):
            if lo <= k <= hi and self.coeff(k) != other.coeff(k):
                return False
        return True

    def max_abs(self) -> float:
        return max((abs(float(v)) for f in self.coeffs.values() for v in f.values), default=0.0)

    # linear structure -----------------------------------------------------
    def _check(self, other: "DiffOp"):
        if self.period != other.period:
            raise PeriodMismatch(f"period {self.period} vs {other.period}")

    def __add__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        self._check(other)
        acc = max(self.acc, other.acc)
        acc_hi = min(self.acc_hi, other.acc_hi)
        out = {}
        for src in (self.coeffs, other.coeffs):
            for k, f in src.items():
                if acc <= k <= acc_hi:
                    g = out.get(k)
                    out[k] = f if g is None else g + f
        return DiffOp._raw(self.period, {k: f for k, f in out.items() if not f.is_zero()},
                           acc, acc_hi)

    def __neg__(self):
        return DiffOp._raw(self.period, {k: -f for k, f in self.coeffs.items()},
                           self.acc, self.acc_hi)

    def __sub__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "DiffOp":
        if c == 0:
            return DiffOp._raw(self.period, {}, self.acc, self.acc_hi)
        return DiffOp._raw(self.period, {k: f.scale(c) for k, f in self.coeffs.items()},
                           self.acc, self.acc_hi)

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return mul(self, other)
        if isinstance(other, LatticeFunction):
            return mul(self, DiffOp.function(other))
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, LatticeFunction):
            return mul(DiffOp.function(other), self)
        return self.scale(other)

    def __pow__(self, p: int) -> "DiffOp":
        return power(self, p)

    # projections ----------------------------------------------------------
    def project(self, lo=-INF, hi=INF) -> "DiffOp":
        return project(self, lo, hi)

    @property
    def plus(self) -> "DiffOp":
        """X_+ = X_{>=0}."""
        return project(self, 0, INF)

    @property
    def minus(self) -> "DiffOp":
        """X_- = X_{<0}."""
        return project(self, -INF, -1)

    def restrict(self, acc=-INF, acc_hi=INF) -> "DiffOp":
        """Forget every coefficient outside ``[acc, acc_hi]`` (declare it unknown)."""
        acc = max(acc, self.acc)
        acc_hi = min(acc_hi, self.acc_hi)
        return DiffOp._raw(self.period,
                           {k: f for k, f in self.coeffs.items() if acc <= k <= acc_hi},
                           acc, acc_hi)

    def map_coeffs(self, fn) -> "DiffOp":
        return DiffOp(self.period, {k: fn(k, f) for k, f in self.coeffs.items()},
                      self.acc, self.acc_hi)

    def to_float(self) -> "DiffOp":
        return DiffOp._raw(self.period, {k: f.to_float() for k, f in self.coeffs.items()},
                           self.acc, self.acc_hi)

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        def bound(x):
            return None if math.isinf(x) else int(x)
        return {
            "period": self.period,
            "hi": bound(self.hi) if not math.isinf(self.hi) else None,
            "acc": bound(self.acc),
            "acc_hi": bound(self.acc_hi),
            "coeffs": {str(k): f.to_json()["values"] for k, f in sorted(self.coeffs.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "DiffOp":
        n = data["period"]
        acc = -INF if data.get("acc") is None else data["acc"]
        acc_hi = INF if data.get("acc_hi") is None else data["acc_hi"]
        coeffs = {int(k): LatticeFunction.from_json({"period": n, "values": v})
                  for k, v in data["coeffs"].items()}
        return cls(n, coeffs, acc, acc_hi)


def mul(X: DiffOp, Y: DiffOp) -> DiffOp:
    """Operator product using Λ f = f(n+1) Λ.

    A degree-d coefficient is exact iff no contributing pair (j, k), j + k = d,
    touches an unknown coefficient of either factor.
    """
    X._check(Y)
    acc = max(_low_bound(X.acc, Y.hi), _low_bound(Y.acc, X.hi))
    acc_hi = min(_high_bound(X.acc_hi, Y.lo), _high_bound(Y.acc_hi, X.lo))
    if acc > acc_hi:
        raise TruncationViolation(
            "product has no exactly known coefficient (factors unbounded in opposite directions)")
    out: dict[int, LatticeFunction] = {}
    for j, a in X.coeffs.items():
        for k, b in Y.coeffs.items():
            d = j + k
            if d < acc or d > acc_hi:
                continue
            term = a * shift(b, j)
            g = out.get(d)
            out[d] = term if g is None else g + term
    return DiffOp._raw(X.period, {d: f for d, f in out.items() if not f.is_zero()}, acc, acc_hi)


def commutator(X: DiffOp, Y: DiffOp) -> DiffOp:
    """[X, Y] = XY - YX."""
    return mul(X, Y) - mul(Y, X)


def project(X: DiffOp, lo=-INF, hi=INF) -> DiffOp:
    """Keep the degrees ``lo <= k <= hi``.

    Unknown coefficients inside the requested window must form a one-sided
    infinite tail; a finite window that dips into the unknown region raises
    :class:`TruncationViolation`.
    """
    if lo > hi:
        return DiffOp.zero(X.period)
    acc, acc_hi = -INF, INF
    # unknown lower tail (-inf, X.acc) intersected with [lo, hi]
    if X.acc != -INF and lo <= min(hi, X.acc - 1):
        if lo != -INF:
            raise TruncationViolation(
                f"projection window [{lo}, {hi}] reaches below accuracy depth {X.acc}")
        acc = min(hi, X.acc - 1) + 1
    if X.acc_hi != INF and max(lo, X.acc_hi + 1) <= hi:
        if hi != INF:
            raise TruncationViolation(
                f"projection window [{lo}, {hi}] reaches above accuracy bound {X.acc_hi}")
        acc_hi = max(lo, X.acc_hi + 1) - 1
    coeffs = {k: f for k, f in X.coeffs.items() if lo <= k <= hi}
    return DiffOp._raw(X.period, coeffs, acc, acc_hi)


def plus_part(X: DiffOp) -> DiffOp:
    return project(X, 0, INF)


def minus_part(X: DiffOp) -> DiffOp:
    return project(X, -INF, -1)


def residue(X: DiffOp) -> LatticeFunction:
    """The degree-0 coefficient."""
    return X.coeff(0)


def trace(X: DiffOp):
    """Lattice sum of the residue."""
    return lattice_sum(residue(X))


def inner(X: DiffOp, Y: DiffOp):
    """tr(XY), computed from the degree-0 part of the product only."""
    X._check(Y)
    acc = max(_low_bound(X.acc, Y.hi), _low_bound(Y.acc, X.hi))
    acc_hi = min(_high_bound(X.acc_hi, Y.lo), _high_bound(Y.acc_hi, X.lo))
    if not (acc <= 0 <= acc_hi):
        raise TruncationViolation("the product's residue is not exactly known")
    total = None
    for j, a in X.coeffs.items():
        b = Y.coeffs.get(-j)
        if b is None:
            continue
        s = lattice_sum(a * b.shift(j))
        total = s if total is None else total + s
    if total is None:
        return lattice_sum(LatticeFunction.zeros(X.period, X.exact and Y.exact))
    return total


def residue_primitive(X: DiffOp, Y: DiffOp) -> LatticeFunction:
    """The local F with F(n+1) - F(n) = res[X, Y](n).

    Each pair x_k Λ^k, y_{-k} Λ^{-k} contributes (Λ^k - 1)[x_k(n-k) y_{-k}(n)],
    so F = sum_k 𝒟^k[x_k(n-k) y_{-k}(n)].  On Z with finitely supported data this
    is the primitive that vanishes away from the support; here it is its
    periodisation.
    """
    X._check(Y)
    commutator(X, Y).coeff(0)  # raises unless the residue is exactly known
    out = LatticeFunction.zeros(X.period, X.exact and Y.exact)
    for k, a in X.coeffs.items():
        b = Y.coeffs.get(-k)
        if b is not None:
            out = out + summation(shift(a, -k) * b, k)
    return out


def power(L: DiffOp, p: int) -> DiffOp:
    """L^p by repeated multiplication; ``p = 0`` gives the unit."""
    if p < 0:
        raise ValueError("power needs p >= 0")
    out = DiffOp.identity(L.period)
    if not L.exact:
        out = out.to_float()
    for _ in range(p):
        out = mul(out, L)
    return out


def from_terms(period: int, terms: Iterable[tuple[int, LatticeFunction]], acc=-INF,
               acc_hi=INF) -> DiffOp:
    coeffs: dict[int, LatticeFunction] = {}
    for k, f in terms:
        coeffs[k] = coeffs[k] + f if k in coeffs else f
    return DiffOp(period, coeffs, acc, acc_hi)
