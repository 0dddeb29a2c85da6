"""Dirac reduction of the three tensors to the affine space of Lax pairs.

Points are ``(L, Lb)`` with ``L = Λ + u_0 + u_{-1}Λ^-1 + ...`` and
``Lb = ub_{-1}Λ^-1 + ub_0 + ub_1 Λ + ...``.  With

    U  = (A+)_{<=0} ⊕ (A-)_{>=-1}     V  = (A+)_{>=1} ⊕ (A-)_{<=-2}
    U* = (A+)_{>=0} ⊕ (A-)_{<=1}      V* = (A+)_{<=-1} ⊕ (A-)_{>=2}

the reduced tensors are closed forms built from P_1, P_2, P_3 plus the ζ and
𝒵 = αΛ + β corrections.  :class:`DiracOracle` recomputes the same reduction by
explicit finite linear algebra, independently of those closed forms.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from gmpy2 import mpq

from .diffop import INF, DiffOp, commutator, mul, project, residue, residue_primitive
from .errors import (DepthExceeded, NonVanishingVComponent, NonZeroMean,
                     StarConditionViolated, TruncationViolation, UnsupportedIndex)
from .pair_algebra import PairElement
from .poisson_tensors import HALF, apply_tensor, p1, p2, p3
from .scalar_lattice import (LatticeFunction, invert_shift_minus_one, lattice_sum,
                             random_function, rational, shift, summation)


# --------------------------------------------------------------------------
# states and coordinate differentials

@dataclass(frozen=True)
class LaxState:
    """Coordinates ``u_i`` (``-M <= i <= 0``) and ``ub_j`` (``-1 <= j <= Mbar``)."""

    u: Mapping[int, LatticeFunction]
    ubar: Mapping[int, LatticeFunction]
    period: int = field(init=False)
    depth: int = field(init=False)
    depth_bar: int = field(init=False)

    def __post_init__(self):
        u = {int(i): LatticeFunction(f) if not isinstance(f, LatticeFunction) else f
             for i, f in self.u.items()}
        ub = {int(j): LatticeFunction(f) if not isinstance(f, LatticeFunction) else f
              for j, f in self.ubar.items()}
        if sorted(u) != list(range(min(u), 1)):
            raise ValueError("u must hold exactly the indices -M..0")
        if sorted(ub) != list(range(-1, max(ub) + 1)):
            raise ValueError("ubar must hold exactly the indices -1..Mbar")
        periods = {f.period for f in (*u.values(), *ub.values())}
        if len(periods) != 1:
            raise ValueError("all coordinates need the same period")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "ubar", ub)
        object.__setattr__(self, "period", periods.pop())
        object.__setattr__(self, "depth", -min(u))
        object.__setattr__(self, "depth_bar", max(ub))

    @property
    def exact(self) -> bool:
        return all(f.exact for f in (*self.u.values(), *self.ubar.values()))

    @classmethod
    def random(cls, rng: random.Random, period: int, depth: int, depth_bar: int,
               bound: int = 9) -> "LaxState":
        u = {i: random_function(rng, period, bound) for i in range(-depth, 1)}
        ub = {j: random_function(rng, period, bound, nonzero=(j == -1))
              for j in range(-1, depth_bar + 1)}
        return cls(u, ub)

    @classmethod
    def localized(cls, rng: random.Random, period: int, depth: int, depth_bar: int,
                  support, bound: int = 5) -> "LaxState":
        """Random coordinates vanishing off ``support`` (ub_{-1} nonzero on it)."""
        support = sorted({a % period for a in support})

        def fn(nonzero=False):
            vals = [mpq(0)] * period
            for a in support:
                x = mpq(0)
                while x == 0:
                    x = mpq(rng.randint(-bound, bound), rng.randint(1, bound))
                    if not nonzero:
                        break
                vals[a] = x
            return LatticeFunction(vals)
        return cls({i: fn() for i in range(-depth, 1)},
                   {j: fn(j == -1) for j in range(-1, depth_bar + 1)})

    @classmethod
    def from_pair(cls, point: PairElement, depth: int, depth_bar: int) -> "LaxState":
        L, Lb = point.plus, point.minus
        return cls({i: L.coeff(i) for i in range(-depth, 1)},
                   {j: Lb.coeff(j) for j in range(-1, depth_bar + 1)})

    def coordinate(self, family: str, i: int) -> LatticeFunction:
        """``u_i`` or ``ub_i`` with the conventions u_1 = 1, u_{>1} = 0, ub_{<-1} = 0."""
        n = self.period
        if family == "u":
            if i == 1:
                return LatticeFunction.constant(1, n)
            if i > 1:
                return LatticeFunction.zeros(n)
            if i < -self.depth:
                raise DepthExceeded(f"u_{i} lies below stored depth {-self.depth}")
            return self.u[i]
        if family == "ubar":
            if i < -1:
                return LatticeFunction.zeros(n)
            if i > self.depth_bar:
                raise DepthExceeded(f"ubar_{i} lies above stored depth {self.depth_bar}")
            return self.ubar[i]
        raise UnsupportedIndex(f"unknown coordinate family {family!r}")

    def to_pair(self, closed: bool = False) -> PairElement:
        """The point (L, Lb).

        By default the coefficients beyond the stored depth are *unknown*
        (``L.acc = -M``, ``Lb.acc_hi = Mbar``); ``closed=True`` sets them to zero.
        """
        n = self.period
        one = LatticeFunction.constant(1, n)
        if not self.exact:
            one = one.to_float()
        L = DiffOp(n, {1: one, **self.u}, -INF if closed else -self.depth, INF)
        Lb = DiffOp(n, dict(self.ubar), -INF, INF if closed else self.depth_bar)
        return PairElement(L, Lb)

    def translated(self, t) -> "LaxState":
        """(L + t, Lb + t): shifts u_0 and ub_0 by ``t``."""
        c = LatticeFunction.constant(rational(t) if self.exact else t, self.period)
        u = dict(self.u)
        ub = dict(self.ubar)
        u[0] = u[0] + c
        ub[0] = ub[0] + c
        return LaxState(u, ub)

    def to_float(self) -> "LaxState":
        return LaxState({i: f.to_float() for i, f in self.u.items()},
                        {j: f.to_float() for j, f in self.ubar.items()})

    def to_json(self) -> dict:
        def vals(f):
            return f.to_json()["values"]
        return {
            "N": self.period, "M": self.depth, "Mbar": self.depth_bar,
            "u": {str(i): vals(f) for i, f in sorted(self.u.items())},
            "ubar": {str(j): vals(f) for j, f in sorted(self.ubar.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "LaxState":
        n = data["N"]

        def fn(v):
            return LatticeFunction.from_json({"period": n, "values": v})
        st = cls({int(i): fn(v) for i, v in data["u"].items()},
                 {int(j): fn(v) for j, v in data["ubar"].items()})
        if st.depth != data["M"] or st.depth_bar != data["Mbar"]:
            raise ValueError("declared depths disagree with the stored coordinates")
        return st


def coordinate_differential(family: str, i: int, site: int, period: int) -> PairElement:
    """d u_i(m) = (Λ^{-i} δ(n-m), 0) and d ub_j(m) = (0, Λ^{-j} δ(n-m))."""
    zero = DiffOp.zero(period)
    if family == "u":
        if i > 0:
            raise UnsupportedIndex(f"u_{i} is not a coordinate (need i <= 0)")
        e = DiffOp.monomial(LatticeFunction.delta(site + i, period), -i)
        return PairElement(e, zero)
    if family == "ubar":
        if i < -1:
            raise UnsupportedIndex(f"ubar_{i} is not a coordinate (need j >= -1)")
        e = DiffOp.monomial(LatticeFunction.delta(site + i, period), -i)
        return PairElement(zero, e)
    raise UnsupportedIndex(f"unknown coordinate family {family!r}")


def project_u(Z: PairElement) -> PairElement:
    return PairElement(project(Z.plus, -INF, 0), project(Z.minus, -1, INF))


def project_v(Z: PairElement) -> PairElement:
    return PairElement(project(Z.plus, 1, INF), project(Z.minus, -INF, -2))


def in_u_star(covector: PairElement) -> bool:
    X, Xb = covector.plus, covector.minus
    return (X.is_finite and Xb.is_finite and all(k >= 0 for k in X.coeffs)
            and all(k <= 1 for k in Xb.coeffs))


def random_covector(rng: random.Random, period: int, width: int = 2, bound: int = 9,
                    density: float = 0.7) -> PairElement:
    """Finite-support element of U*: X in degrees 0..width, Xb in degrees 1-width..1."""
    return PairElement(DiffOp.random(rng, period, 0, width, bound, density),
                       DiffOp.random(rng, period, 1 - width, 1, bound, density))


def _require_u_star(covector: PairElement):
    if not in_u_star(covector):
        raise ValueError("covector must lie in U* = (A+)_{>=0} ⊕ (A-)_{<=1} with finite support")


def _point(state) -> PairElement:
    return state.to_pair() if isinstance(state, LaxState) else state


# --------------------------------------------------------------------------
# correction terms

def t1_tangent(state) -> PairElement:
    """T = ([L_+, L], [L_+, Lb]); P_uv of Ker P_vv^(3) is spanned by it on the periodic lattice."""
    P = state.to_pair(closed=True) if isinstance(state, LaxState) else state
    Lp = project(P.plus, 0, INF)
    return PairElement(commutator(Lp, P.plus), commutator(Lp, P.minus))


def commutator_residue(point: PairElement, covector: PairElement) -> LatticeFunction:
    """res([L, X] + [Lb, Xb])."""
    return (residue(commutator(point.plus, covector.plus))
            + residue(commutator(point.minus, covector.minus)))


@dataclass(frozen=True)
class ZetaTerm:
    zeta: LatticeFunction


@dataclass(frozen=True)
class CorrectionZ:
    """𝒵 = αΛ + β with (Λ-1)β = ``beta_source``.

    β itself exists on the periodic lattice only when ``beta_source`` has zero
    mean; commutators with β are always evaluated through
    (Λ^k - 1)(Λ - 1)^-1 = 𝒟^k, which needs no such condition.
    """

    alpha: LatticeFunction
    beta_source: LatticeFunction
    gamma: LatticeFunction

    @property
    def beta_mean(self):
        return lattice_sum(self.beta_source)

    @property
    def beta(self) -> LatticeFunction:
        return invert_shift_minus_one(self.beta_source)


def compute_zeta(state, covector: PairElement) -> ZetaTerm:
    """ζ = (Λ+1)(Λ-1)^-1 res([L, X] + [Lb, Xb]), normalised through g(0) = 0."""
    r = commutator_residue(_point(state), covector)
    g = invert_shift_minus_one(r)
    return ZetaTerm(shift(g, 1) + g)


def compute_correction_z(state, covector: PairElement) -> CorrectionZ:
    """𝒵 = αΛ + β for the third tensor.

    (Λ-1)α = Λ res([L, X] + [Lb, Xb]).  Unlike ζ, α is not defined up to a
    harmless constant (a constant shift of α moves [L, αΛ]), so α is built from
    the local primitive of the residue rather than from a normalisation.
    """
    point = _point(state)
    L, Lb = point.plus, point.minus
    X, Xb = covector.plus, covector.minus
    gamma = commutator(L, X).coeff(-1) + commutator(Lb, Xb).coeff(-1)
    alpha = shift(residue_primitive(L, X) + residue_primitive(Lb, Xb), 1)
    u0 = L.coeff(0)
    src = shift(u0, 1) * shift(alpha, 1) - u0 * shift(alpha, -1) + shift(gamma, 1)
    return CorrectionZ(alpha, src, gamma)


def commutator_with_primitive(X: DiffOp, source: LatticeFunction) -> DiffOp:
    """[X, β] where (Λ-1)β = ``source``: sum_k x_k(n) 𝒟^k[source](n) Λ^k."""
    return DiffOp._raw(X.period,
                       {k: c for k, a in X.coeffs.items()
                        if not (c := a * summation(source, k)).is_zero()},
                       X.acc, X.acc_hi)


def commutator_with_z(X: DiffOp, z: CorrectionZ) -> DiffOp:
    """[X, αΛ + β]."""
    return commutator(X, DiffOp.monomial(z.alpha, 1)) + commutator_with_primitive(X, z.beta_source)


# --------------------------------------------------------------------------
# reduced tensors

def _check_v_free(P: PairElement, label: str):
    v = project_v(P)
    if not v.is_zero():
        raise NonVanishingVComponent(f"{label}: V component {v}")


def reduced_p1(state, covector: PairElement) -> PairElement:
    """P1 restricted to U*; its V component vanishes on the affine space."""
    _require_u_star(covector)
    P = p1(_point(state), covector)
    _check_v_free(P, "P1")
    return project_u(P)


def reduced_p2(state, covector: PairElement) -> PairElement:
    _require_u_star(covector)
    point = _point(state)
    L, Lb = point.plus, point.minus
    X, Xb = covector.plus, covector.minus
    C, Cb = commutator(L, X), commutator(Lb, Xb)
    S = mul(L, X) + mul(X, L)
    Sb = mul(Lb, Xb) + mul(Xb, Lb)
    zeta = DiffOp.function(compute_zeta(point, covector).zeta)
    low = project(C, -INF, 0) + project(Cb, -INF, 0)
    high = project(C, 1, INF) + project(Cb, 1, INF)
    first = (commutator(L, project(S, -INF, -1) - project(Sb, -INF, -1)).scale(HALF)
             + commutator(L, zeta).scale(HALF)
             - mul(L, low).scale(HALF) - mul(low, L).scale(HALF))
    second = (commutator(Lb, project(Sb, 0, INF) - project(S, 0, INF)).scale(HALF)
              + commutator(Lb, zeta).scale(HALF)
              - mul(Lb, high).scale(HALF) - mul(high, Lb).scale(HALF))
    P = PairElement(first, second)
    _check_v_free(P, "P2red")
    return P


def reduced_p3(state, covector: PairElement) -> PairElement:
    _require_u_star(covector)
    point = _point(state)
    L, Lb = point.plus, point.minus
    X, Xb = covector.plus, covector.minus
    C, Cb = commutator(L, X), commutator(Lb, Xb)
    T = mul(mul(L, X), L)
    Tb = mul(mul(Lb, Xb), Lb)
    z = compute_correction_z(point, covector)
    deep = project(C, -INF, -2) + project(Cb, -INF, -2)
    mid = project(C, -1, 0) + project(Cb, -1, 0)
    high = project(Cb, 1, INF) + project(C, 1, INF)
    first = (commutator(L, project(T, -INF, -1) - project(Tb, -INF, -1))
             - mul(mul(L, deep), L)
             - project(mul(mul(L, mid), L), -INF, 0)
             + project(commutator_with_z(L, z), -INF, 0))
    second = (commutator(Lb, project(Tb, 0, INF) - project(T, 0, INF))
              - mul(mul(Lb, high), Lb)
              + project(commutator_with_z(Lb, z), -1, INF))
    return PairElement(first, second)


REDUCED = {1: reduced_p1, 2: reduced_p2, 3: reduced_p3}


def reduced_tensor(k: int, state, covector: PairElement) -> PairElement:
    if k not in REDUCED:
        raise ValueError(f"tensor index must be 1, 2 or 3, got {k}")
    return REDUCED[k](state, covector)


# --------------------------------------------------------------------------
# independent finite-dimensional Dirac reduction

def _rref(rows: list[list], ncols: int):
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    rows = [r[:] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _flatten(P: PairElement, keys: list[tuple[int, int]]) -> list:
    out = []
    for slot, k in keys:
        op = P.plus if slot == 0 else P.minus
        out.extend(op.coeff(k).values)
    return out


def _v_keys(P: PairElement) -> set[tuple[int, int]]:
    v = project_v(P)
    return {(0, k) for k in v.plus.coeffs} | {(1, k) for k in v.minus.coeffs}


def _common_keys(elems: list[PairElement]) -> list[tuple[int, int]]:
    """Degrees known exactly in every element and nonzero in at least one."""
    keys = []
    for slot in (0, 1):
        ops = [e.plus if slot == 0 else e.minus for e in elems]
        lo = max(op.acc for op in ops)
        hi = min(op.acc_hi for op in ops)
        degs = set().union(*(op.coeffs for op in ops))
        keys.extend((slot, k) for k in sorted(degs) if lo <= k <= hi)
    return keys


def in_span(vectors: list[PairElement], target: PairElement) -> bool:
    """Exact test of ``target`` ∈ span(vectors) on the commonly known degrees."""
    keys = _common_keys([target, *vectors])
    if not keys:
        return True
    cols = [_flatten(v, keys) for v in vectors]
    rhs = _flatten(target, keys)
    rows = [[c[i] for c in cols] + [rhs[i]] for i in range(len(rhs))]
    _, pivots = _rref(rows, len(vectors) + 1)
    return not (pivots and pivots[-1] == len(vectors))


class DiracOracle:
    """P_uu - P_uv (P_vv)^-1 P_vu by explicit linear algebra on a V* window.

    V* is clipped to degrees ``-window..-1`` (A+ slot) and ``2..window`` (A-
    slot), with coefficients supported on ``sites`` (all sites by default).
    Both relaxed invertibility conditions are checked: the V part of P(ξ)
    must lie in the image of P_vv, and every element of Ker P_vv must be
    annihilated by P_uv.

    When the second condition fails the reduction is only defined modulo
    ``gauge`` = P_uv(Ker P_vv).  ``strict=True`` (the default) raises
    :class:`StarConditionViolated`; ``strict=False`` records the gauge
    directions, returns one representative, and :meth:`equivalent` compares
    results modulo them.

    Restricting ``sites`` to a segment of a long period emulates the lattice Z
    for data supported away from the wrap-around.
    """

    def __init__(self, k: int, state, window: int | None = None,
                 sites=None, strict: bool = True):
        self.k = k
        self.point = _point(state)
        n = self.point.period
        if window is None:
            window = 2 * state.depth + 4 if isinstance(state, LaxState) else 8
        self.window = window
        self.sites = list(range(n)) if sites is None else sorted({a % n for a in sites})
        zero = DiffOp.zero(n)
        self.basis: list[PairElement] = []
        for d in range(-1, -window - 1, -1):
            for a in self.sites:
                self.basis.append(PairElement(DiffOp.monomial(LatticeFunction.delta(a, n), d), zero))
        for d in range(2, window + 1):
            for a in self.sites:
                self.basis.append(PairElement(zero, DiffOp.monomial(LatticeFunction.delta(a, n), d)))
        self.images = [apply_tensor(k, self.point, eta) for eta in self.basis]
        keys = set()
        for im in self.images:
            keys |= _v_keys(im)
        self.v_keys = sorted(keys)
        self._u_parts = [project_u(im) for im in self.images]
        self._columns = [_flatten(im, self.v_keys) for im in self.images]
        self.gauge = self._kernel_images()
        if strict and self.gauge:
            raise StarConditionViolated(
                f"Ker P_vv is not contained in Ker P_uv: P_uv maps the "
                f"{self.kernel_dim}-dimensional kernel onto a rank {len(self.gauge)} space")

    def _matrix_rows(self, rhs: list | None = None):
        nrows = len(self.v_keys) * self.point.period
        ncols = len(self.basis)
        rows = []
        for i in range(nrows):
            row = [self._columns[j][i] for j in range(ncols)]
            if rhs is not None:
                row.append(rhs[i])
            rows.append(row)
        return rows

    def _kernel_images(self) -> list[PairElement]:
        ncols = len(self.basis)
        rows, pivots = _rref(self._matrix_rows(), ncols)
        pivot_set = set(pivots)
        free = [c for c in range(ncols) if c not in pivot_set]
        self.kernel_dim = len(free)
        out = []
        for fcol in free:
            # kernel vector with x_f = 1 and pivots solved from the rref rows
            vec = {fcol: mpq(1)}
            for row, pc in zip(rows, pivots):
                if row[fcol] != 0:
                    vec[pc] = -row[fcol]
            acc = PairElement.zero(self.point.period)
            for j, c in vec.items():
                acc = acc + self._u_parts[j].scale(c)
            if not acc.is_zero() and not in_span(out, acc):
                out.append(acc)
        return out

    def solve(self, covector: PairElement) -> list:
        """Coefficients of η ∈ V* with P_vv η = P_vu ξ."""
        P = apply_tensor(self.k, self.point, covector)
        extra = _v_keys(P) - set(self.v_keys)
        if extra:
            raise StarConditionViolated(f"P_vu reaches V degrees {sorted(extra)} outside Im P_vv")
        rhs = _flatten(P, self.v_keys)
        ncols = len(self.basis)
        rows, pivots = _rref(self._matrix_rows(rhs), ncols + 1)
        if pivots and pivots[-1] == ncols:
            raise StarConditionViolated("Im P_vu is not contained in Im P_vv")
        x = [mpq(0)] * ncols
        for row, pc in zip(rows, pivots):
            x[pc] = row[ncols]
        self._last_p = P
        return x

    def __call__(self, covector: PairElement) -> PairElement:
        _require_u_star(covector)
        x = self.solve(covector)
        out = project_u(self._last_p)
        for c, up in zip(x, self._u_parts):
            if c != 0:
                out = out - up.scale(c)
        return out

    def equivalent(self, a: PairElement, b: PairElement) -> bool:
        """a == b modulo the gauge directions (plain equality when there are none)."""
        if not self.gauge:
            return a.agrees(b)
        return in_span(self.gauge, a - b)


def numeric_dirac_oracle(k: int, state, covector: PairElement,
                         window: int | None = None) -> PairElement:
    return DiracOracle(k, state, window)(covector)


# --------------------------------------------------------------------------
# push-forward along Φ^t(L, Lb) = (L + t, Lb + t)

def shift_pushforward_residual(state: LaxState, t, covector: PairElement):
    """Residuals of Φ^t_* P_i^red = P_i^red(L - t, Lb - t) against the pencil formulas."""
    t = rational(t)
    moved = state.translated(-t)
    r1, r2, r3 = (reduced_tensor(k, state, covector) for k in (1, 2, 3))
    m1, m2, m3 = (reduced_tensor(k, moved, covector) for k in (1, 2, 3))
    return (m1 - r1,
            m2 - (r2 - r1.scale(t)),
            m3 - (r3 - r2.scale(2 * t) + r1.scale(t * t)))
