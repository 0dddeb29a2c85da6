"""Scalars and functions on the periodic lattice Z/NZ.

Exact computations use ``gmpy2.mpq`` rationals; float mode is reserved for the
time integrator.  A :class:`LatticeFunction` is immutable and stores its values
as a plain tuple, which is considerably faster than object arrays for the small
periods used in verification.
"""
from __future__ import annotations

import random
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import NonZeroMean, PeriodMismatch

MPQ = type(mpq())

#: default tolerance used by float-mode zero-mean checks
FLOAT_TOL = 1e-9


def rational(x) -> MPQ:
    """Coerce ``x`` (int, Fraction, mpq, or ``"p/q"`` string) to an exact rational."""
    if isinstance(x, MPQ):
        return x
    if isinstance(x, float):
        raise TypeError("refusing to convert a float to an exact rational")
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def _coerce(values: Iterable, exact: bool | None):
    vals = list(values)
    if exact is None:
        exact = not any(isinstance(v, float) for v in vals)
    if exact:
        return tuple(rational(v) for v in vals), True
    return tuple(float(v) for v in vals), False


class LatticeFunction:
    """A scalar function on Z/NZ; ``f[n]`` reduces ``n`` modulo the period."""

    __slots__ = ("values", "exact")

    def __init__(self, values: Iterable, exact: bool | None = None):
        vals, ex = _coerce(values, exact)
        if not vals:
            raise ValueError("a lattice function needs a positive period")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "exact", ex)

    @classmethod
    def _raw(cls, values: tuple, exact: bool) -> "LatticeFunction":
        obj = object.__new__(cls)
        object.__setattr__(obj, "values", values)
        object.__setattr__(obj, "exact", exact)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("LatticeFunction is immutable")

    def __reduce__(self):
        return (LatticeFunction._raw, (self.values, self.exact))

    # constructors ---------------------------------------------------------
    @classmethod
    def zeros(cls, period: int, exact: bool = True) -> "LatticeFunction":
        zero = mpq(0) if exact else 0.0
        return cls._raw((zero,) * period, exact)

    @classmethod
    def constant(cls, c, period: int) -> "LatticeFunction":
        return cls([c] * period)

    @classmethod
    def delta(cls, site: int, period: int) -> "LatticeFunction":
        """The indicator of ``site`` (mod ``period``)."""
        site %= period
        return cls._raw(tuple(mpq(1) if n == site else mpq(0) for n in range(period)), True)

    # basic protocol -------------------------------------------------------
    @property
    def period(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int):
        return self.values[n % len(self.values)]

    def __iter__(self):
        return iter(self.values)

    def __repr__(self) -> str:
        return f"LatticeFunction([{', '.join(str(v) for v in self.values)}])"

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeFunction):
            return NotImplemented
        return self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def is_zero(self) -> bool:
        return not any(self.values)

    def to_float(self) -> "LatticeFunction":
        if not self.exact:
            return self
        return LatticeFunction._raw(tuple(float(v) for v in self.values), False)

    # arithmetic -----------------------------------------------------------
    def _pair(self, other: "LatticeFunction"):
        if len(self.values) != len(other.values):
            raise PeriodMismatch(f"period {len(self.values)} vs {len(other.values)}")
        if self.exact == other.exact:
            return self.values, other.values, self.exact
        return self.to_float().values, other.to_float().values, False

    def __add__(self, other):
        if not isinstance(other, LatticeFunction):
            return NotImplemented
        a, b, ex = self._pair(other)
        return LatticeFunction._raw(tuple(x + y for x, y in zip(a, b)), ex)

    def __sub__(self, other):
        if not isinstance(other, LatticeFunction):
            return NotImplemented
        a, b, ex = self._pair(other)
        return LatticeFunction._raw(tuple(x - y for x, y in zip(a, b)), ex)

    def __neg__(self):
        return LatticeFunction._raw(tuple(-x for x in self.values), self.exact)

    def __mul__(self, other):
        if isinstance(other, LatticeFunction):
            a, b, ex = self._pair(other)
            return LatticeFunction._raw(tuple(x * y for x, y in zip(a, b)), ex)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "LatticeFunction":
        if isinstance(c, float) or not self.exact:
            c = float(c)
            return LatticeFunction._raw(tuple(float(x) * c for x in self.values), False)
        c = rational(c)
        return LatticeFunction._raw(tuple(x * c for x in self.values), True)

    def __truediv__(self, c):
        if isinstance(c, float) or not self.exact:
            return self.scale(1.0 / float(c))
        return self.scale(1 / rational(c))

    def shift(self, k: int) -> "LatticeFunction":
        """Return ``n -> f(n + k)``."""
        return shift(self, k)

    def sum(self):
        return lattice_sum(self)

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        if self.exact:
            vals = [[str(v.numerator), str(v.denominator)] for v in self.values]
        else:
            vals = list(self.values)
        return {"period": self.period, "values": vals}

    @classmethod
    def from_json(cls, data: dict) -> "LatticeFunction":
        vals = data["values"]
        if len(vals) != data["period"]:
            raise ValueError("period does not match the number of values")
        if vals and isinstance(vals[0], list):
            return cls([mpq(int(p), int(q)) for p, q in vals])
        return cls([float(v) for v in vals], exact=False)


def shift(f: LatticeFunction, k: int) -> LatticeFunction:
    """Cyclic shift: ``shift(f, k)(n) = f(n + k mod N)``."""
    v = f.values
    k %= len(v)
    if k == 0:
        return f
    return LatticeFunction._raw(v[k:] + v[:k], f.exact)


def lattice_sum(f: LatticeFunction):
    """Sum of ``f`` over one period."""
    return sum(f.values, mpq(0) if f.exact else 0.0)


def invert_shift_minus_one(f: LatticeFunction, tol: float = FLOAT_TOL) -> LatticeFunction:
    """Solve ``g(n+1) - g(n) = f(n)`` with the normalisation ``g(0) = 0``.

    The solution exists iff ``f`` has zero lattice sum; any other normalisation
    differs by a constant, which commutes with every difference operator.
    """
    s = lattice_sum(f)
    if f.exact:
        if s != 0:
            raise NonZeroMean(f"lattice sum is {s}, not 0")
    elif abs(s) > tol:
        raise NonZeroMean(f"lattice sum is {s!r}, exceeds tolerance {tol}")
    acc = mpq(0) if f.exact else 0.0
    out = []
    for x in f.values:
        out.append(acc)
        acc = acc + x
    return LatticeFunction._raw(tuple(out), f.exact)


def summation(f: LatticeFunction, k: int) -> LatticeFunction:
    """The operator (Λ^k - 1)(Λ - 1)^-1 as a finite sum of shifts.

    ``k > 0``: ``sum_{i=0}^{k-1} f(n+i)``; ``k == 0``: 0; ``k < 0``:
    ``-sum_{i=k}^{-1} f(n+i)``.  Well defined for every ``f``, including those
    with nonzero mean.
    """
    out = LatticeFunction.zeros(f.period, f.exact)
    if k > 0:
        for i in range(k):
            out = out + shift(f, i)
    elif k < 0:
        for i in range(k, 0):
            out = out - shift(f, i)
    return out


def random_function(rng: random.Random, period: int, bound: int = 9,
                    nonzero: bool = False) -> LatticeFunction:
    """Random exact function with ``|numerator| <= bound`` and ``1 <= denominator <= bound``."""
    vals = []
    for _ in range(period):
        while True:
            p = rng.randint(-bound, bound)
            if p or not nonzero:
                break
        vals.append(mpq(p, rng.randint(1, bound)))
    return LatticeFunction(vals)


def as_function(values: Sequence | LatticeFunction) -> LatticeFunction:
    if isinstance(values, LatticeFunction):
        return values
    return LatticeFunction(values)


def is_scalar(x) -> bool:
    return isinstance(x, (int, float, Rational, MPQ))
