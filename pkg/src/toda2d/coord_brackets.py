"""Coordinate Poisson brackets of the 2D Toda hierarchy as explicit term lists.

A bracket ``{a(n), b(m)}_k`` is stored as a list of :class:`BracketTerm`:
a rational coefficient times a product of coordinate symbols, each evaluated
at ``n + offset`` or ``m + offset``, times ``δ(n - m + s)``.  The 𝒟^k sums of
the third bracket are expanded into such monomials, so every bracket is a
plain polynomial that can be differentiated symbolically (used by the
Jacobiator).

Conventions: ``u_1 = 1``, ``u_k = 0`` for ``k > 1`` and ``ubar_k = 0`` for
``k < -1``.  Terms touching a vanishing coordinate are pruned at build time.
On the periodic lattice ``δ(k) = 1`` iff ``N`` divides ``k``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from gmpy2 import mpq

from .dirac_reduction import LaxState, coordinate_differential, reduced_tensor
from .errors import DepthExceeded, UnsupportedIndex
from .pair_algebra import inner_pair
from .scalar_lattice import LatticeFunction, rational

FAMILIES = ("u", "ubar")


def c_indicator(i: int) -> int:
    """c(i) = 1 for i > 0, else 0."""
    return 1 if i > 0 else 0


def d_operator(k: int, f: LatticeFunction, n: int):
    """(𝒟^k f)(n) with 𝒟^k = (Λ^k - 1)(Λ - 1)^-1."""
    if k > 0:
        return sum((f[n + i] for i in range(k)), mpq(0))
    if k < 0:
        return -sum((f[n + i] for i in range(k, 0)), mpq(0))
    return mpq(0)


@dataclass(frozen=True, order=True)
class CoordIndex:
    """The coordinate ``u_i(site)`` or ``ubar_i(site)``."""

    family: str
    index: int
    site: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnsupportedIndex(f"unknown coordinate family {self.family!r}")
        if self.family == "u" and self.index > 0:
            raise UnsupportedIndex(f"u_{self.index} is not a coordinate (u_1 = 1, u_k = 0 beyond)")
        if self.family == "ubar" and self.index < -1:
            raise UnsupportedIndex(f"ubar_{self.index} is not a coordinate (ubar_k = 0 below -1)")

    def __str__(self):
        return f"{self.family}{self.index}({self.site})"

    @classmethod
    def parse(cls, token: str, site: int = 0) -> "CoordIndex":
        """``"u0"``, ``"u-2"``, ``"ubar-1"``, ``"ubar3"``."""
        token = token.strip()
        for fam in ("ubar", "u"):
            if token.startswith(fam):
                try:
                    idx = int(token[len(fam):])
                except ValueError:
                    break
                return cls(fam, idx, site)
        raise UnsupportedIndex(f"cannot parse coordinate {token!r}")

    def differential(self, period: int):
        return coordinate_differential(self.family, self.index, self.site, period)


@dataclass(frozen=True, order=True)
class Symbol:
    """A coordinate evaluated at ``n + offset`` (base "n") or ``m + offset``."""

    family: str
    index: int
    base: str
    offset: int

    def __str__(self):
        off = "" if self.offset == 0 else f"{self.offset:+d}"
        return f"{self.family}_{self.index}({self.base}{off})"

    def shifted(self, base: str, by: int) -> "Symbol":
        if self.base != base:
            return self
        return Symbol(self.family, self.index, self.base, self.offset + by)

    def swapped(self) -> "Symbol":
        return Symbol(self.family, self.index, "m" if self.base == "n" else "n", self.offset)


@dataclass(frozen=True)
class BracketTerm:
    """``coefficient * prod(symbols) * δ(n - m + delta)``."""

    coefficient: object
    symbols: tuple[Symbol, ...]
    delta: int

    def __str__(self):
        body = " ".join(str(s) for s in self.symbols) or "1"
        return f"{self.coefficient} {body} δ(n-m{self.delta:+d})"

    def to_json(self) -> dict:
        return {"coeff": [str(self.coefficient), *map(str, self.symbols)], "delta": self.delta}


# --------------------------------------------------------------------------
# building blocks for the term lists (an expression is a dict keyed by
# (symbols, delta) holding the coefficient)

_ZERO = object()


def _sym(family: str, index: int, base: str, offset: int = 0):
    """Apply the zero conventions: returns _ZERO, None (the constant 1), or a Symbol."""
    if family == "u":
        if index > 1:
            return _ZERO
        if index == 1:
            return None
    elif index < -1:
        return _ZERO
    return Symbol(family, index, base, offset)


def u(i, base, off=0):
    return _sym("u", i, base, off)


def ub(i, base, off=0):
    return _sym("ubar", i, base, off)


class Expr:
    __slots__ = ("terms",)

    def __init__(self):
        self.terms = defaultdict(lambda: mpq(0))

    def add(self, coef, factors: Sequence, delta: int):
        syms = []
        for f in factors:
            if f is _ZERO:
                return self
            if f is not None:
                syms.append(f)
        key = (tuple(sorted(syms)), delta)
        self.terms[key] += rational(coef)
        return self

    def extend(self, other: "Expr", coef=1, factors: Sequence = ()):
        """self += coef * prod(factors) * other."""
        for (syms, d), c in other.terms.items():
            self.add(c * coef, [*factors, *syms], d)
        return self

    def result(self) -> list[BracketTerm]:
        return [BracketTerm(c, syms, d) for (syms, d), c in sorted(self.terms.items(), key=str)
                if c != 0]


def _delta(s: int) -> Expr:
    return Expr().add(1, (), s)


def _shift_n(e: Expr, by: int) -> Expr:
    out = Expr()
    for (syms, d), c in e.terms.items():
        out.add(c, [s.shifted("n", by) for s in syms], d + by)
    return out


def _D(k: int, e: Expr) -> Expr:
    """𝒟^k acting on an expression regarded as a function of n."""
    out = Expr()
    if k > 0:
        for i in range(k):
            out.extend(_shift_n(e, i))
    elif k < 0:
        for i in range(k, 0):
            out.extend(_shift_n(e, i), -1)
    return out


def _sum_range(lo: int, hi: int) -> range:
    return range(lo, hi + 1)


# --------------------------------------------------------------------------
# first bracket

def _first(fa: str, i: int, fb: str, j: int) -> Expr:
    e = Expr()
    if fa == "u" and fb == "u":
        e.add(1, [u(i + j, "m")], -j).add(-1, [u(i + j, "n")], i)
    elif fa == "u" and fb == "ubar":
        cj = c_indicator(j)
        if cj:
            e.add(cj, [u(i + j, "m")], -j).add(-cj, [u(i + j, "n")], i)
        e.add(1, [ub(i + j, "m")], -j).add(-1, [ub(i + j, "n")], i)
    elif fa == "ubar" and fb == "ubar":
        c = 1 - c_indicator(i) - c_indicator(j)
        if c:
            e.add(c, [ub(i + j, "n")], i).add(-c, [ub(i + j, "m")], -j)
    return e


# --------------------------------------------------------------------------
# second bracket

def _second(fa: str, i: int, fb: str, j: int) -> Expr:
    e = Expr()
    if fa == "u" and fb == "u":
        for s in _sum_range(i, 0):
            e.add(1, [u(i, "n"), u(j, "m")], s - j).add(-1, [u(i, "n"), u(j, "m")], s)
        for s in _sum_range(1, 1 - i):
            e.add(1, [u(i + s, "n"), u(j - s, "m")], i - j + s)
            e.add(-1, [u(j - s, "n"), u(i + s, "m")], -s)
    elif fa == "u" and fb == "ubar":
        for s in _sum_range(i, 0):
            e.add(1, [u(i, "n"), ub(j, "m")], s - j).add(-1, [u(i, "n"), ub(j, "m")], s)
        for s in _sum_range(1, min(1 + j, 1 - i)):
            e.add(1, [u(i + s, "n", -s), ub(j - s, "m")], -j)
            e.add(-1, [u(i + s, "n"), ub(j - s, "m", s)], i)
    elif fa == "ubar" and fb == "ubar":
        if j != -1:
            for s in _sum_range(-j, 0):
                e.add(1, [ub(i, "n"), ub(j, "m")], s + i).add(-1, [ub(i, "n"), ub(j, "m")], s)
        for s in _sum_range(1, i + 1):
            e.add(1, [ub(i - s, "n"), ub(j + s, "m")], i - j - s)
            e.add(-1, [ub(j + s, "n"), ub(i - s, "m")], s)
    return e


# --------------------------------------------------------------------------
# third bracket

def _tail_third(e: Expr, fam_a, i, fam_b, j):
    """The 𝒟 terms shared by the three families (``fam_a``/``fam_b`` pick u or ubar)."""
    A = u if fam_a == "u" else ub
    B = u if fam_b == "u" else ub
    inner = Expr().extend(_D(-j, _delta(2)), 1, [u(0, "n", 1)])
    inner.extend(_D(-j, _delta(0)), -1, [u(0, "n")])
    e.extend(_D(i, inner), -1, [A(i, "n"), B(j, "m")])
    # B_j(m) ( A_{i-1}(n+1) 𝒟^{-j}[δ(n-m+1)] - A_{i-1}(n) 𝒟^{-j}[δ(n-m+i)] )
    e.extend(_D(-j, _delta(1)), 1, [B(j, "m"), A(i - 1, "n", 1)])
    e.extend(_D(-j, _delta(i)), -1, [B(j, "m"), A(i - 1, "n")])
    # A_i(n) ( B_{j-1}(m+1) 𝒟^i[δ(n-m)] - B_{j-1}(m) 𝒟^i[δ(n-m-j+1)] )
    e.extend(_D(i, _delta(0)), 1, [A(i, "n"), B(j - 1, "m", 1)])
    e.extend(_D(i, _delta(1 - j)), -1, [A(i, "n"), B(j - 1, "m")])


def _third(fa: str, i: int, fb: str, j: int, variant: str = "printed") -> Expr:
    e = Expr()
    if fa == "u" and fb == "u":
        def pair(c, k, s):
            r = i + j - k - s
            e.add(c, [u(s, "n"), u(k, "n", s), u(r, "m")], k + s - j)
            e.add(-c, [u(r, "n"), u(s, "n", i - s), u(k, "m")], i - k - s)
        for s in _sum_range(i + 1, 1):
            for k in _sum_range(i + j - 1 - s, 1):
                pair(1, k, s)
        for k in _sum_range(i + j - 2, j):
            for s in _sum_range(i + j - 1 - k, 1):
                pair(-1, k, s)
        _tail_third(e, "u", i, "u", j)
    elif fa == "u" and fb == "ubar":
        if variant == "printed":
            # summation range as printed: k+1 <= l <= 1, k >= -1, k+l <= i+j+1
            ranges = [(k, l) for k in _sum_range(-1, 0)
                      for l in _sum_range(k + 1, min(1, i + j + 1 - k))]
        else:
            # corrected range i+1 <= l <= 1 (the degree-i part of -[L, (Lb Xb Lb)_{<=-1}])
            ranges = [(k, l) for l in _sum_range(i + 1, 1)
                      for k in _sum_range(-1, i + j + 1 - l)]
        for k, l in ranges:
            r = i + j - l - k
            e.add(1, [ub(k, "n"), u(l, "n", i - l), ub(r, "m")], k - j)
            e.add(-1, [u(l, "n"), ub(k, "n", l), ub(r, "m")], l + k - j)
        for l in _sum_range(-1, j):
            for k in _sum_range(i + j - 1 - l, 1):
                r = j + i - k - l
                e.add(-1, [u(k, "n"), ub(l, "n", k), u(r, "m")], k + l - j)
                e.add(1, [u(k, "n"), u(r, "n", k - j + l), ub(l, "m")], k - j)
        _tail_third(e, "u", i, "ubar", j)
    elif fa == "ubar" and fb == "ubar":
        for k in _sum_range(-1, i):
            for s in _sum_range(-1, i + j + 1 - k):
                r = i + j - k - s
                e.add(1, [ub(k, "n"), ub(r, "n", k), ub(s, "m")], i - s)
                e.add(-1, [ub(r, "n"), ub(k, "n", i - k), ub(s, "m")], i - k - s)
        for s in _sum_range(-1, i):
            for l in _sum_range(j + 1, i + j + 1 - s):
                r = i + j - l - s
                e.add(-1, [ub(r, "n"), ub(l, "n", r), ub(s, "m")], i - s)
                e.add(1, [ub(r, "n"), ub(s, "n", i - s), ub(l, "m")], i - l - s)
        _tail_third(e, "ubar", i, "ubar", j)
    return e


#: "printed" reproduces the formulas verbatim; "corrected" differs only in the
#: first summation range of the mixed third bracket {u_i, ubar_j}_3
VARIANTS = ("printed", "corrected")


@lru_cache(maxsize=None)
def _terms(k: int, fa: str, i: int, fb: str, j: int, variant: str) -> tuple[BracketTerm, ...]:
    if k not in (1, 2, 3):
        raise ValueError(f"bracket index must be 1, 2 or 3, got {k}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown formula variant {variant!r}")
    if fa == "ubar" and fb == "u":
        # {ubar_i(n), u_j(m)} = -{u_j(m), ubar_i(n)}: swap the roles of n and m
        return tuple(BracketTerm(-t.coefficient, tuple(sorted(s.swapped() for s in t.symbols)),
                                 -t.delta)
                     for t in _terms(k, fb, j, fa, i, variant))
    if k == 1:
        e = _first(fa, i, fb, j)
    elif k == 2:
        e = _second(fa, i, fb, j)
    else:
        e = _third(fa, i, fb, j, variant)
    return tuple(e.result())


def bracket_terms(k: int, a: CoordIndex, b: CoordIndex,
                  variant: str = "printed") -> list[BracketTerm]:
    """Term list of ``{a(n), b(m)}_k`` (sites of ``a``/``b`` are ignored here)."""
    return list(_terms(k, a.family, a.index, b.family, b.index, variant))


def term_difference(k: int, a: CoordIndex, b: CoordIndex, variant: str = "corrected",
                    reference: str = "printed") -> list[BracketTerm]:
    """Terms of ``variant`` minus those of ``reference`` (empty when the two agree)."""
    acc: dict = {}
    for sign, v in ((1, variant), (-1, reference)):
        for t in bracket_terms(k, a, b, v):
            key = (t.symbols, t.delta)
            acc[key] = acc.get(key, 0) + sign * t.coefficient
    return [BracketTerm(c, sym, d) for (sym, d), c in sorted(acc.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            if c != 0]


def terms_to_json(terms: Iterable[BracketTerm]) -> list[dict]:
    return [t.to_json() for t in terms]


def _value(state: LaxState, sym: Symbol, n: int, m: int):
    site = (n if sym.base == "n" else m) + sym.offset
    return state.coordinate(sym.family, sym.index)[site]


def evaluate_terms(terms: Iterable[BracketTerm], state: LaxState, n: int, m: int):
    N = state.period
    total = mpq(0)
    for t in terms:
        if (n - m + t.delta) % N:
            continue
        v = t.coefficient
        for s in t.symbols:
            v = v * _value(state, s, n, m)
        total += v
    return total


def evaluate_bracket(k: int, a: CoordIndex, b: CoordIndex, state: LaxState,
                     variant: str = "printed"):
    """``{a, b}_k`` from the explicit formulas.

    Raises :class:`DepthExceeded` when any term (even one killed by its
    delta) references a coordinate beyond the stored depth, so a truncated
    state can never silently drop a live coordinate.
    """
    terms = bracket_terms(k, a, b, variant)
    for t in terms:
        for s in t.symbols:
            state.coordinate(s.family, s.index)
    return evaluate_terms(terms, state, a.site, b.site)


def tensor_bracket(k: int, a: CoordIndex, b: CoordIndex, state: LaxState, point=None):
    """``{a, b}_k = (da, P_k^red db)`` through the reduced tensors."""
    N = state.period
    Y = reduced_tensor(k, state if point is None else point, b.differential(N))
    return inner_pair(a.differential(N), Y)


def crosscheck(k: int, a: CoordIndex, b: CoordIndex, state: LaxState,
               variant: str = "printed"):
    """Formula value minus tensor value (zero when the formula is right)."""
    return evaluate_bracket(k, a, b, state, variant) - tensor_bracket(k, a, b, state)


# --------------------------------------------------------------------------
# Jacobi identity

def _nested(k: int, l: int, a: CoordIndex, b: CoordIndex, c: CoordIndex,
            state: LaxState, cache: dict, variant: str):
    """{{a, b}_k, c}_l by differentiating the term list of {a, b}_k."""
    N = state.period
    total = mpq(0)
    for t in bracket_terms(k, a, b, variant):
        if (a.site - b.site + t.delta) % N:
            continue
        vals = [_value(state, s, a.site, b.site) for s in t.symbols]
        for pos, s in enumerate(t.symbols):
            site = (a.site if s.base == "n" else b.site) + s.offset
            x = CoordIndex(s.family, s.index, site % N)
            key = (l, x, c)
            if key not in cache:
                cache[key] = evaluate_bracket(l, x, c, state, variant)
            d = cache[key]
            if d == 0:
                continue
            prod = t.coefficient * d
            for q, v in enumerate(vals):
                if q != pos:
                    prod = prod * v
            total += prod
    return total


def jacobi_matrix(a: CoordIndex, b: CoordIndex, c: CoordIndex, state: LaxState,
                  variant: str = "printed"):
    """J[k][l] = sum over cyclic permutations of {{a, b}_k, c}_l (k, l = 1..3).

    The Jacobiator of sum_k c_k P_k is sum_{k,l} c_k c_l J[k][l].
    """
    cache: dict = {}
    J = [[mpq(0)] * 3 for _ in range(3)]
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        for k in (1, 2, 3):
            for l in (1, 2, 3):
                J[k - 1][l - 1] += _nested(k, l, x, y, z, state, cache, variant)
    return J


def pencil_weights(k) -> tuple:
    """Weights (c_1, c_2, c_3): ``k`` is 1, 2, 3 or a pencil ``(lam, mu)`` for P1 + lam P2 + mu P3."""
    if isinstance(k, int):
        return tuple(mpq(int(k == i)) for i in (1, 2, 3))
    lam, mu = k
    return (mpq(1), rational(lam), rational(mu))


def jacobiator(k, a: CoordIndex, b: CoordIndex, c: CoordIndex, state: LaxState,
               variant: str = "printed"):
    """Cyclic sum of {{a, b}, c} for bracket ``k`` or a pencil ``(lam, mu)``."""
    w = pencil_weights(k)
    J = jacobi_matrix(a, b, c, state, variant)
    return sum((w[p] * w[q] * J[p][q] for p in range(3) for q in range(3) if w[p] and w[q]),
               mpq(0))


def admissible(triple: Sequence[CoordIndex], depth: int, depth_bar: int) -> bool:
    """Locality margin for nested brackets: 3 min - 6 >= -M and 3 max + 6 <= Mbar."""
    idx = [t.index for t in triple]
    return 3 * min(idx) - 6 >= -depth and 3 * max(idx) + 6 <= depth_bar
