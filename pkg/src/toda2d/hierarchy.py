"""Hamiltonians, Lax flows and the tri-Hamiltonian structure of the hierarchy.

Flows ``t_q`` use B = (L^q)_+ and flows ``tbar_q`` use B = (Lb^q)_-; both
act by (L, Lb) -> ([B, L], [B, Lb]).  Exact checks run on open states
(unknown tails); the float integrator runs on *closed* states whose
coefficients beyond the stored depth are zero.  That truncation is exact for
the retained coordinates: t_q keeps the zero tail of L and is triangular
(downward) on Lb, tbar_q keeps the zero head of Lb and is triangular (upward)
on L.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from gmpy2 import mpq

from .coord_brackets import CoordIndex
from .diffop import INF, DiffOp, commutator, mul, power, project, trace
from .dirac_reduction import LaxState, reduced_tensor
from .errors import StepRejected, TangencyViolation, TruncationViolation
from .pair_algebra import PairElement, inner_pair
from .scalar_lattice import LatticeFunction, rational

DIRECTIONS = ("t", "tbar")


@dataclass(frozen=True)
class FlowSpec:
    direction: str
    q: int

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"flow direction must be 't' or 'tbar', got {self.direction!r}")
        if self.q < 1:
            raise ValueError(f"flow index must be >= 1, got {self.q}")

    def __str__(self):
        return f"{self.direction}{self.q}"

    @classmethod
    def parse(cls, text: str) -> "FlowSpec":
        text = text.strip()
        d = "tbar" if text.startswith("tbar") else "t"
        return cls(d, int(text[len(d):]))


@dataclass(frozen=True)
class HamiltonianId:
    direction: str
    p: int

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be 't' or 'tbar', got {self.direction!r}")
        if self.p < 0:
            raise ValueError(f"Hamiltonian index must be >= 0, got {self.p}")

    def __str__(self):
        return ("h" if self.direction == "t" else "hbar") + str(self.p)


def _point(state, closed: bool = False) -> PairElement:
    return state.to_pair(closed) if isinstance(state, LaxState) else state


def _identity_like(op: DiffOp) -> DiffOp:
    one = LatticeFunction.constant(1, op.period)
    return DiffOp.function(one if op.exact else one.to_float())


def _power(op: DiffOp, p: int) -> DiffOp:
    return _identity_like(op) if p == 0 else power(op, p)


# --------------------------------------------------------------------------
# Hamiltonians and gradients

def hamiltonian(h: HamiltonianId, state, closed: bool = False):
    """h_p = tr L^{p+1}/(p+1), hbar_p = tr Lb^{p+1}/(p+1)."""
    P = _point(state, closed)
    op = P.plus if h.direction == "t" else P.minus
    val = trace(power(op, h.p + 1))
    return val / (h.p + 1) if not isinstance(val, float) else val / (h.p + 1)


def gradient(h: HamiltonianId, state, closed: bool = False) -> PairElement:
    """dh_p = (L^p, 0), dhbar_p = (0, Lb^p)."""
    P = _point(state, closed)
    zero = DiffOp.zero(P.period)
    if h.direction == "t":
        return PairElement(_power(P.plus, h.p), zero)
    return PairElement(zero, _power(P.minus, h.p))


def reduced_gradient(h: HamiltonianId, state, closed: bool = False) -> PairElement:
    """The differential restricted to the affine space, i.e. projected onto U*."""
    g = gradient(h, state, closed)
    return PairElement(project(g.plus, 0, INF), project(g.minus, -INF, 1))


def _interpolation_slope(values: Sequence, nodes: Sequence):
    """Exact derivative at 0 of the polynomial through (nodes, values)."""
    total = mpq(0)
    for a, (xa, ya) in enumerate(zip(nodes, values)):
        # d/dx of the Lagrange basis polynomial l_a at x = 0
        others = [xb for b, xb in enumerate(nodes) if b != a]
        denom = mpq(1)
        for xb in others:
            denom *= xa - xb
        deriv = mpq(0)
        for skip in range(len(others)):
            prod = mpq(1)
            for t, xb in enumerate(others):
                if t != skip:
                    prod *= -xb
            deriv += prod
        total += ya * deriv / denom
    return total


def directional_derivative(fn: Callable[[LaxState], object], state: LaxState,
                           tangent: LaxState, degree: int):
    """Exact d/dε fn(state + ε tangent) at ε = 0 for fn polynomial of ``degree`` in ε."""
    nodes = [mpq(k) for k in range(-(degree // 2) - 1, degree - degree // 2 + 1)]
    values = [fn(axpy(state, tangent, e)) for e in nodes]
    return _interpolation_slope(values, nodes)


def coordinate_tangent(state: LaxState, family: str, i: int, site: int) -> LaxState:
    """The unit tangent along u_i(site) or ubar_i(site)."""
    N = state.period
    u = {k: LatticeFunction.zeros(N) for k in state.u}
    ub = {k: LatticeFunction.zeros(N) for k in state.ubar}
    target = u if family == "u" else ub
    target[i] = LatticeFunction.delta(site, N)
    return LaxState(u, ub)


def tangent_as_pair(tangent: LaxState) -> PairElement:
    """(Σ δu_i Λ^i, Σ δub_j Λ^j) as a finite-support pair."""
    N = tangent.period
    return PairElement(DiffOp(N, dict(tangent.u)), DiffOp(N, dict(tangent.ubar)))


# --------------------------------------------------------------------------
# Lax flows

def flow_generator(flow: FlowSpec, point: PairElement, route: str = "plus") -> DiffOp:
    """B with ∂L = [B, L]: (L^q)_+ or (Lb^q)_- (``route="minus"``: -(L^q)_- or -(Lb^q)_+)."""
    if flow.direction == "t":
        Lq = power(point.plus, flow.q)
        return project(Lq, 0, INF) if route == "plus" else -project(Lq, -INF, -1)
    Lq = power(point.minus, flow.q)
    return project(Lq, -INF, -1) if route == "plus" else -project(Lq, 0, INF)


def lax_vector(flow: FlowSpec, state, closed: bool = False, route: str = "plus",
               tol: float = 1e-12) -> PairElement:
    """(∂L, ∂Lb) for ``flow``.

    ``route="minus"`` swaps the generator on the side where the two choices
    agree (L for t-flows, Lb for tbar-flows); the other side always uses the
    bounded generator, since the alternative commutator is not defined.
    """
    if route not in ("plus", "minus"):
        raise ValueError(f"route must be 'plus' or 'minus', got {route!r}")
    P = _point(state, closed)
    B = flow_generator(flow, P)
    if flow.direction == "t":
        dL = commutator(flow_generator(flow, P, route), P.plus)
        dLb = commutator(B, P.minus)
    else:
        dL = commutator(B, P.plus)
        dLb = commutator(flow_generator(flow, P, route), P.minus)
    _check_tangent(dL, dLb, tol)
    return PairElement(dL, dLb)


def _check_tangent(dL: DiffOp, dLb: DiffOp, tol: float):
    bad = [(k, f) for k, f in dL.coeffs.items() if k >= 1 and dL.knows(k)]
    bad += [(k, f) for k, f in dLb.coeffs.items() if k <= -2 and dLb.knows(k)]
    for k, f in bad:
        size = max(abs(float(v)) for v in f.values)
        if f.exact or size > tol:
            raise TangencyViolation(f"flow has a nonzero degree {k} component ({size:g})")


def lax_rhs(flow: FlowSpec, state: LaxState, closed: bool = False,
            route: str = "plus") -> LaxState:
    """Time derivatives of the stored coordinates.

    On an open state only coordinates whose derivative is exactly known are
    returned (the depth shrinks by ``q`` on the side the flow reads from
    below/above); ``closed=True`` keeps the full depth.
    """
    V = lax_vector(flow, state, closed, route)
    dL, dLb = V.plus, V.minus
    lo = max(-state.depth, dL.acc) if dL.acc != -INF else -state.depth
    hi = min(state.depth_bar, dLb.acc_hi) if dLb.acc_hi != INF else state.depth_bar
    zero = LatticeFunction.zeros(state.period, state.exact)
    u = {i: dL.coeffs.get(i, zero) for i in range(min(lo, 0), 1)}
    ub = {j: dLb.coeffs.get(j, zero) for j in range(-1, max(hi, -1) + 1)}
    return LaxState(u, ub)


def axpy(state: LaxState, tangent: LaxState, h) -> LaxState:
    """state + h * tangent (coordinates missing from ``tangent`` are left alone)."""
    u = {i: f + tangent.u[i].scale(h) if i in tangent.u else f for i, f in state.u.items()}
    ub = {j: f + tangent.ubar[j].scale(h) if j in tangent.ubar else f
          for j, f in state.ubar.items()}
    return LaxState(u, ub)


# --------------------------------------------------------------------------
# Zakharov-Shabat

def power_derivative(op: DiffOp, d_op: DiffOp, q: int) -> DiffOp:
    """∂(op^q) = Σ_a op^a ∂op op^{q-1-a}."""
    out = DiffOp.zero(op.period)
    for a in range(q):
        out = out + mul(mul(_power(op, a), d_op), _power(op, q - 1 - a))
    return out


def zs_residual(p: int, q: int, which: str, state) -> DiffOp:
    """Left side of the zero-curvature equations.

    pp:     ∂_{t_p}(L^q)_+ - ∂_{t_q}(L^p)_+ + [(L^q)_+, (L^p)_+]
    barbar: ∂_{tbar_p}(Lb^q)_- - ∂_{tbar_q}(Lb^p)_- + [(Lb^q)_-, (Lb^p)_-]
    mixed:  ∂_{tbar_p}(L^q)_+ - ∂_{t_q}(Lb^p)_- + [(L^q)_+, (Lb^p)_-]
    """
    P = _point(state)
    L, Lb = P.plus, P.minus

    def plus(op, k):
        return project(power(op, k), 0, INF)

    def minus(op, k):
        return project(power(op, k), -INF, -1)

    def d_plus(flow, k):
        return project(power_derivative(L, lax_vector(flow, P).plus, k), 0, INF)

    def d_minus(flow, k):
        return project(power_derivative(Lb, lax_vector(flow, P).minus, k), -INF, -1)

    if which == "pp":
        return (d_plus(FlowSpec("t", p), q) - d_plus(FlowSpec("t", q), p)
                + commutator(plus(L, q), plus(L, p)))
    if which == "barbar":
        return (d_minus(FlowSpec("tbar", p), q) - d_minus(FlowSpec("tbar", q), p)
                + commutator(minus(Lb, q), minus(Lb, p)))
    if which == "mixed":
        return (d_plus(FlowSpec("tbar", p), q) - d_minus(FlowSpec("t", q), p)
                + commutator(plus(L, q), minus(Lb, p)))
    raise ValueError(f"which must be 'pp', 'barbar' or 'mixed', got {which!r}")


def flow_commutator(f1: FlowSpec, f2: FlowSpec, state: LaxState,
                    coords: Iterable[CoordIndex]) -> dict:
    """∂_{f2}(∂_{f1} x) - ∂_{f1}(∂_{f2} x) for each coordinate x, exactly.

    Each vector field is polynomial in the coordinates, so its derivative along
    the other field is obtained by exact interpolation in ε.
    """
    coords = list(coords)
    V1 = lax_rhs(f1, state)
    V2 = lax_rhs(f2, state)
    deg = f1.q + f2.q + 2
    out = {}
    for x in coords:
        def comp(flow, st, x=x):
            return lax_rhs(flow, st).coordinate(x.family, x.index)[x.site]
        d12 = directional_derivative(lambda st: comp(f1, st), state, _pad(V2, state), deg)
        d21 = directional_derivative(lambda st: comp(f2, st), state, _pad(V1, state), deg)
        out[x] = d12 - d21
    return out


def _pad(tangent: LaxState, state: LaxState) -> LaxState:
    """Extend a tangent with zeros to the coordinates of ``state``."""
    N = state.period
    zero = LatticeFunction.zeros(N)
    u = {i: tangent.u.get(i, zero) for i in state.u}
    ub = {j: tangent.ubar.get(j, zero) for j in state.ubar}
    return LaxState(u, ub)


# --------------------------------------------------------------------------
# tri-Hamiltonian structure

def hamiltonian_bracket(k: int, a: CoordIndex, h: HamiltonianId, state) -> object:
    """{a, h}_k = (da, P_k^red dh)."""
    N = _point(state).period
    return inner_pair(a.differential(N), reduced_tensor(k, state, reduced_gradient(h, state)))


def recursion_residual(h: HamiltonianId, a: CoordIndex, state) -> tuple:
    """({a,h_p}_1 - {a,h_{p-1}}_2, {a,h_{p-1}}_2 - {a,h_{p-2}}_3); the second is None for p = 1.

    ``p = 0`` gives the Casimir check ({a, h_0}_1, None).
    """
    p = h.p
    b1 = hamiltonian_bracket(1, a, h, state)
    if p == 0:
        return b1, None
    b2 = hamiltonian_bracket(2, a, HamiltonianId(h.direction, p - 1), state)
    if p == 1:
        return b1 - b2, None
    b3 = hamiltonian_bracket(3, a, HamiltonianId(h.direction, p - 2), state)
    return b1 - b2, b2 - b3


def flow_residual(h: HamiltonianId, a: CoordIndex, state: LaxState):
    """{a, h_p}_1 minus the Lax time derivative of ``a`` along the matching flow."""
    flow = FlowSpec(h.direction, h.p)
    rhs = lax_rhs(flow, state)
    return hamiltonian_bracket(1, a, h, state) - rhs.coordinate(a.family, a.index)[a.site]


def involution(k: int, h1: HamiltonianId, h2: HamiltonianId, state):
    """{h1, h2}_k = (dh1, P_k^red dh2)."""
    return inner_pair(reduced_gradient(h1, state),
                      reduced_tensor(k, state, reduced_gradient(h2, state)))


# --------------------------------------------------------------------------
# time integration (float mode, closed states)

@dataclass
class Trajectory:
    """Step times, the Hamiltonian ledger at every step, and state snapshots."""

    times: list = field(default_factory=list)
    ledger: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)

    @property
    def final(self) -> LaxState:
        return self.snapshots[-1][1]

    def drift(self, h: str) -> float:
        """max |h(t) - h(0)| / |h(0)| (absolute when h(0) = 0)."""
        vals = self.ledger[h]
        ref = abs(vals[0]) or 1.0
        return max(abs(v - vals[0]) for v in vals) / ref

    def to_json(self) -> dict:
        return {
            "times": self.times,
            "ledger": self.ledger,
            "drift": {h: self.drift(h) for h in self.ledger},
            "snapshots": [{"t": t, "state": s.to_json()} for t, s in self.snapshots],
        }

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)


def _finite(state: LaxState) -> bool:
    return all(math.isfinite(v) for f in (*state.u.values(), *state.ubar.values())
               for v in f.values)


def rk4_step(flow: FlowSpec, state: LaxState, h) -> LaxState:
    """One classic RK4 step on a closed state (exact if ``state`` and ``h`` are)."""
    k1 = lax_rhs(flow, state, closed=True)
    k2 = lax_rhs(flow, axpy(state, k1, h / 2), closed=True)
    k3 = lax_rhs(flow, axpy(state, k2, h / 2), closed=True)
    k4 = lax_rhs(flow, axpy(state, k3, h), closed=True)
    out = state
    for k, w in ((k1, h / 6), (k2, h / 3), (k3, h / 3), (k4, h / 6)):
        out = axpy(out, k, w)
    if not _finite(out):
        raise StepRejected(f"non-finite state after a {flow} step of size {h}")
    return out


def integrate(flows: Sequence[tuple[FlowSpec, float, float]], state0: LaxState,
              hamiltonians: Iterable[HamiltonianId] | None = None,
              keep_states: bool = False) -> Trajectory:
    """Classic RK4 along each (flow, duration, step) in turn.

    The Hamiltonian ledger records every listed Hamiltonian after every step
    (default: the Hamiltonian of each flow).  Snapshots hold the initial and
    final states, or every state with ``keep_states``.
    """
    state = state0.to_float()
    if hamiltonians is None:
        hamiltonians = [HamiltonianId(f.direction, f.q) for f, _, _ in flows]
    hams = list(dict.fromkeys(hamiltonians))
    traj = Trajectory(ledger={str(h): [] for h in hams})

    def record(t, st, snapshot):
        traj.times.append(t)
        for h in hams:
            traj.ledger[str(h)].append(float(hamiltonian(h, st, closed=True)))
        if snapshot:
            traj.snapshots.append((t, st))

    t = 0.0
    record(t, state, True)
    plan = []
    for flow, duration, step in flows:
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(round(duration / step)) if duration > 0 else 0
        if n and abs(n * step - duration) > 1e-9 * max(1.0, duration):
            raise ValueError("duration must be an integer multiple of step")
        plan.append((flow, step, n))
    remaining = sum(n for _, _, n in plan)
    for flow, step, n in plan:
        for _ in range(n):
            state = rk4_step(flow, state, step)
            t += step
            remaining -= 1
            record(t, state, keep_states or remaining == 0)
    return traj


def flow_by(flow: FlowSpec, state: LaxState, duration: float, steps: int) -> LaxState:
    """Float state after ``duration`` along ``flow`` using ``steps`` RK4 steps (duration may be negative)."""
    state = state.to_float()
    if steps == 0 or duration == 0:
        return state
    h = duration / steps
    for _ in range(steps):
        state = rk4_step(flow, state, h)
    return state


# --------------------------------------------------------------------------
# the 2D Toda equation

def toda_initial_state(u, velocity, lower=None, upper=None) -> LaxState:
    """Lax data with ub_{-1}(n) = exp(u(n) - u(n-1)) and u_0 = ``velocity``.

    ``lower`` maps i < 0 to profiles of u_i and ``upper`` maps j >= 0 to
    profiles of ub_j; coordinates not given are zero (at least u_{-1} and
    ub_0 are stored).
    """
    uu = [float(v) for v in u]
    N = len(uu)

    def fn(vals):
        vals = [float(v) for v in vals]
        if len(vals) != N:
            raise ValueError("all profiles need the same length")
        return LatticeFunction(vals, exact=False)

    zero = fn([0.0] * N)
    lower = {int(i): fn(v) for i, v in (lower or {}).items()}
    upper = {int(j): fn(v) for j, v in (upper or {}).items()}
    if any(i >= 0 for i in lower) or any(j < 0 for j in upper):
        raise ValueError("lower takes indices < 0 and upper indices >= 0")
    depth = max([1, *(-i for i in lower)])
    depth_bar = max([0, *upper])
    us = {i: lower.get(i, zero) for i in range(-depth, 0)}
    us[0] = fn(velocity)
    ubs = {j: upper.get(j, zero) for j in range(0, depth_bar + 1)}
    ubs[-1] = fn([math.exp(uu[n] - uu[n - 1]) for n in range(N)])
    return LaxState(us, ubs)


def smooth_toda_data(period: int = 32) -> tuple:
    """Smooth test data ``(u, velocity, lower, upper)`` for :func:`toda_initial_state`.

    Low Fourier modes with O(1) amplitudes; u_{-1}, u_{-2}, ub_0 and ub_1 are
    nonzero so that neither flow is trivial on the data.
    """
    def wave(amp, k, phase, mean=0.0):
        return [mean + amp * math.sin(2 * math.pi * k * n / period + phase) for n in range(period)]
    u = [a + b for a, b in zip(wave(0.8, 1, 0.0), wave(0.3, 2, 1.0))]
    velocity = wave(0.5, 1, 0.4, 0.2)
    lower = {-1: wave(0.4, 1, 2.0, 0.3), -2: wave(0.2, 3, 0.5)}
    upper = {0: wave(0.4, 2, 1.0, 0.1), 1: wave(0.2, 1, 0.0)}
    return u, velocity, lower, upper


@dataclass(frozen=True)
class TodaCheck:
    mixed: float
    anchor_t: float
    anchor_tbar: float

    @property
    def residual(self) -> float:
        return max(self.mixed, self.anchor_t, self.anchor_tbar)


def toda_equation_check(u, velocity, step: float, lower=None, upper=None) -> TodaCheck:
    """Relative residuals of the 2D Toda equation, from the t1 and tbar1 flows.

    With ub_{-1} = exp(u(n) - u(n-1)) the lattice field u is fixed up to an
    n-independent function; ∂_{t1} u = u_0 pins it.  Three O(step^2)
    central-difference residuals are reported:

    * mixed: the 4-point stencil in (t1, tbar1) of u(n) - u(n-1) = log ub_{-1}
      against the right side differenced in n,
    * anchor_t: ∂_{t1} log ub_{-1} against u_0(n) - u_0(n-1),
    * anchor_tbar: ∂_{tbar1} u_0 against exp(u(n)-u(n-1)) - exp(u(n+1)-u(n)).

    The four single RK4 steps run in exact rational arithmetic on the
    (closed) initial data, so only the stencil and RK4 truncation errors
    remain.
    """
    t1, tb1 = FlowSpec("t", 1), FlowSpec("tbar", 1)
    s0 = _exactify(toda_initial_state(u, velocity, lower, upper))
    N = s0.period
    h = mpq(step)

    def ub(st):
        return st.ubar[-1].values

    def rhs(vals):
        return [float(vals[n] - vals[(n + 1) % N]) for n in range(N)]

    corners = {}
    for a in (1, -1):
        sa = rk4_step(t1, s0, a * h)
        for b in (1, -1):
            corners[a, b] = ub(rk4_step(tb1, sa, b * h))
    # logs of exact ratios, so that no cancellation happens in floating point
    mixed = [_log_ratio(corners[1, 1][n] * corners[-1, -1][n],
                        corners[1, -1][n] * corners[-1, 1][n]) / (4 * step * step)
             for n in range(N)]
    r0 = rhs(ub(s0))
    res_mixed = _rel(mixed, [r0[n] - r0[n - 1] for n in range(N)])

    plus, minus = ub(rk4_step(t1, s0, h)), ub(rk4_step(t1, s0, -h))
    dlog = [_log_ratio(a, b) / (2 * step) for a, b in zip(plus, minus)]
    u0 = s0.u[0].values
    res_t = _rel(dlog, [float(u0[n] - u0[n - 1]) for n in range(N)])

    plus, minus = rk4_step(tb1, s0, h).u[0].values, rk4_step(tb1, s0, -h).u[0].values
    du0 = [float(a - b) / (2 * step) for a, b in zip(plus, minus)]
    res_tb = _rel(du0, r0)
    return TodaCheck(res_mixed, res_t, res_tb)


def _log_ratio(a, b) -> float:
    # log1p of the exact excess keeps full relative precision near 1
    return math.log1p(float(a / b - 1))


def _exactify(state: LaxState) -> LaxState:
    """The same state with every float replaced by its exact binary value."""
    def conv(f):
        return LatticeFunction([mpq(v) for v in f.values])
    return LaxState({i: conv(f) for i, f in state.u.items()},
                    {j: conv(f) for j, f in state.ubar.items()})


def _rel(approx: Sequence[float], exact: Sequence[float]) -> float:
    scale = max((abs(v) for v in exact), default=0.0)
    err = max((abs(a - b) for a, b in zip(approx, exact)), default=0.0)
    return err / scale if scale > 0 else err
