"""Seeded verification suites and their line-oriented reports.

Each suite draws its random inputs from ``random.Random(f"{seed}:{suite}")``
in the parent process, turns them into independent *cases*, evaluates the
cases (optionally in worker processes) and folds the per-case residuals into
one :class:`Record` per identity.  No timing or host data enters a report,
so the same configuration always produces byte-identical output.
"""
from __future__ import annotations

import itertools
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

from gmpy2 import mpq

from .coord_brackets import (VARIANTS, CoordIndex, admissible, evaluate_bracket,
                             jacobi_matrix, pencil_weights, term_difference)
from .diffop import DiffOp, power
from .dirac_reduction import (DiracOracle, LaxState, coordinate_differential, in_span,
                              random_covector, reduced_tensor, shift_pushforward_residual,
                              t1_tangent)
from .errors import StarConditionViolated, TodaError
from .hierarchy import HamiltonianId, recursion_residual, zs_residual
from .pair_algebra import (MAPS, PairElement, basis, inner_pair, myb_residual, r_adjoint,
                           r_matrix, random_pair, skew_part)
from .poisson_tensors import (apply_tensor, bracket_functionals, bracket_via_r,
                              lie_poisson_bracket, tensor_via_r)
from .scalar_lattice import LatticeFunction

SUITES = ("myb", "tensors", "reduction", "crosscheck", "jacobi", "pencil",
          "recursion", "zs", "pushforward")
FLOAT_SUITES = frozenset({"myb", "tensors", "zs"})
THIRD_BRACKET_SUITES = frozenset({"tensors", "reduction", "crosscheck", "jacobi", "pencil",
                                  "recursion", "pushforward"})

# default sample counts; ``RunConfig.samples`` overrides all of them
DEFAULT_SAMPLES = {
    "myb": 100, "tensors": 10, "reduction": 50, "crosscheck": 10, "jacobi": 200,
    "pencil": 200, "recursion": 2, "zs": 5, "pushforward": 10,
}


class ConfigError(TodaError, ValueError):
    """Invalid run configuration (exit status 2 on the command line)."""


@dataclass(frozen=True)
class RunConfig:
    n: int = 7
    depth: int = 4
    depth_bar: int = 4
    seed: int = 0
    mode: str = "exact"
    tol: float = 1e-9
    out: str | None = None
    variant: str = "printed"
    samples: int | None = None
    jobs: int = 1

    def validate(self, suites: Iterable[str] = ()) -> None:
        if self.n < 5:
            raise ConfigError(f"lattice period must be >= 5, got {self.n}")
        if self.depth < 1 or self.depth_bar < 1:
            raise ConfigError("depths must be >= 1")
        if self.mode not in ("exact", "float"):
            raise ConfigError(f"mode must be 'exact' or 'float', got {self.mode!r}")
        if self.mode == "float" and not self.tol > 0:
            raise ConfigError("float mode needs a positive tolerance")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.samples is not None and self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        for s in suites:
            if s not in SUITES:
                raise ConfigError(f"unknown suite {s!r}")
            if s in THIRD_BRACKET_SUITES and self.depth < 3:
                raise ConfigError(f"suite {s} needs depth >= 3 (locality margin)")

    def count(self, suite: str) -> int:
        return self.samples if self.samples is not None else DEFAULT_SAMPLES[suite]

    def rng(self, suite: str) -> random.Random:
        return random.Random(f"{self.seed}:{suite}")


# --------------------------------------------------------------------------
# records and reports

@dataclass
class Record:
    suite: str
    identity: str
    cases: int = 0
    failures: int = 0
    residual: float = 0.0
    counterexample: dict | None = None
    note: str | None = None

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.failures == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        res = "0" if self.residual == 0 else f"{self.residual:.3e}"
        text = (f"{status} {self.suite} {self.identity} cases={self.cases} "
                f"failures={self.failures} max_residual={res}")
        if self.note:
            text += f" note={json.dumps(self.note)}"
        if self.counterexample is not None:
            text += f" first_failure={json.dumps(self.counterexample, sort_keys=True)}"
        return text


@dataclass
class Report:
    config: RunConfig
    records: list[Record] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.records) and all(r.passed for r in self.records)

    def summary(self) -> dict:
        suites: dict = {}
        for r in self.records:
            entry = suites.setdefault(r.suite, {"passed": True, "identities": 0, "failed": []})
            entry["identities"] += 1
            if not r.passed:
                entry["passed"] = False
                entry["failed"].append(r.identity)
        cfg = asdict(self.config)
        cfg.pop("out")
        cfg.pop("jobs")
        return {"config": cfg, "passed": self.passed, "suites": suites,
                "skipped": self.skipped,
                "records": [{**asdict(r), "passed": r.passed} for r in self.records]}

    def text(self) -> str:
        lines = [r.line() for r in self.records]
        lines += [f"SKIP {s} (exact mode only)" for s in self.skipped]
        lines.append("SUMMARY " + json.dumps(self.summary(), sort_keys=True))
        return "\n".join(lines) + "\n"


def _magnitude(x) -> float:
    if x is None:
        return 0.0
    if isinstance(x, (PairElement, DiffOp)):
        return x.max_abs()
    if isinstance(x, LatticeFunction):
        return max((abs(float(v)) for v in x.values), default=0.0)
    return abs(float(x))


def _is_zero(x, mode: str, tol: float) -> bool:
    if x is None:
        return True
    if mode == "float":
        return _magnitude(x) <= tol
    if isinstance(x, (PairElement, DiffOp, LatticeFunction)):
        return x.is_zero()
    return x == 0


class _Tally:
    """Folds (identity, case label, residual) triples into ordered records."""

    def __init__(self, suite: str, cfg: RunConfig):
        self.suite, self.cfg = suite, cfg
        self.records: dict[str, Record] = {}

    def record(self, identity: str) -> Record:
        if identity not in self.records:
            self.records[identity] = Record(self.suite, identity)
        return self.records[identity]

    def add(self, identity: str, label, value) -> None:
        rec = self.record(identity)
        rec.cases += 1
        rec.residual = max(rec.residual, _magnitude(value))
        if not _is_zero(value, self.cfg.mode, self.cfg.tol):
            rec.failures += 1
            if rec.counterexample is None:
                rec.counterexample = {"case": label, "residual": _describe(value)}

    def fail(self, identity: str, label, message: str) -> None:
        rec = self.record(identity)
        rec.cases += 1
        rec.failures += 1
        if rec.counterexample is None:
            rec.counterexample = {"case": label, "error": message}

    def extend(self, results: Iterable[tuple]) -> None:
        for item in results:
            if len(item) == 4 and item[0] == "error":
                self.fail(*item[1:])
            else:
                self.add(*item)


def _describe(value) -> str:
    if isinstance(value, (PairElement, DiffOp, LatticeFunction)):
        return f"max|.|={_magnitude(value):.6g}"
    return str(value)


def _map(fn: Callable, cases: list, jobs: int) -> list:
    if jobs <= 1 or len(cases) < 2:
        return [fn(c) for c in cases]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, cases, chunksize=max(1, len(cases) // (4 * jobs))))


def _flat(results: list[list]) -> Iterable[tuple]:
    return itertools.chain.from_iterable(results)


def _floatify(x, mode):
    if mode != "float":
        return x
    if isinstance(x, PairElement):
        return PairElement(_float_op(x.plus), _float_op(x.minus))
    return x


def _float_op(op: DiffOp) -> DiffOp:
    return DiffOp(op.period, {k: f.to_float() for k, f in op.coeffs.items()}, op.acc, op.acc_hi)


def window_coordinates(period: int, sites=None) -> list[CoordIndex]:
    """u_i (-3 <= i <= 0) and ubar_j (-1 <= j <= 1) at every site: the -3..1 index window."""
    sites = range(period) if sites is None else sites
    return [CoordIndex(f, i, s) for f, idx in (("u", range(-3, 1)), ("ubar", range(-1, 2)))
            for i in idx for s in sites]


# --------------------------------------------------------------------------
# myb: modified Yang-Baxter, adjointness and the skew part

def _myb_case(case):
    label, X, Y, mode = case
    out = []
    for m in MAPS:
        out.append((f"mYB[{m}] {label[0]}", label[1], myb_residual(m, X, Y)))
    if label[0] == "basis":
        out.append(("R* adjoint basis", label[1],
                    inner_pair(r_matrix(X), Y) - inner_pair(X, r_adjoint(Y))))
    return out


def _skew_case(case):
    label, X = case
    return [("A = (R - R*)/2 basis", label,
             skew_part(X) - (r_matrix(X) - r_adjoint(X)).scale(mpq(1, 2)))]


def suite_myb(cfg: RunConfig) -> list[Record]:
    rng = cfg.rng("myb")
    N = cfg.n
    tally = _Tally("myb", cfg)
    cases = []
    for t in range(cfg.count("myb")):
        X, Y = random_pair(rng, N), random_pair(rng, N)
        cases.append((("random", t), _floatify(X, cfg.mode), _floatify(Y, cfg.mode), cfg.mode))
    B = [_floatify(b, cfg.mode) for b in basis(N, 3)]
    for a, X in enumerate(B):
        for b, Y in enumerate(B):
            cases.append((("basis", [a, b]), X, Y, cfg.mode))
    tally.extend(_flat(_map(_myb_case, cases, cfg.jobs)))
    tally.extend(_flat(_map(_skew_case, list(enumerate(B)), cfg.jobs)))
    return list(tally.records.values())


# --------------------------------------------------------------------------
# tensors: the unreduced P_1, P_2, P_3

def _tensor_case(case):
    t, P, F, G, scale = case
    out = []
    for k in (1, 2, 3):
        b = bracket_functionals(k, P, F, G)
        out.append((f"P{k} skew", t, b + bracket_functionals(k, P, G, F)))
        out.append((f"P{k} R-route bracket", t, b - bracket_via_r(k, P, F, G)))
        out.append((f"P{k} R-route tensor", t, apply_tensor(k, P, G) - tensor_via_r(k, P, G)))
        out.append((f"P{k} homogeneity", t,
                    apply_tensor(k, P.scale(scale), G) - apply_tensor(k, P, G).scale(scale ** k)))
    L = PairElement(P.plus, DiffOp.zero(P.period))
    for p in (1, 2):
        dH = PairElement(power(P.plus, p), DiffOp.zero(P.period))
        out.append((f"Lie-Poisson Casimir p={p}", t, lie_poisson_bracket(L, dH, G)))
    return out


def suite_tensors(cfg: RunConfig) -> list[Record]:
    rng = cfg.rng("tensors")
    tally = _Tally("tensors", cfg)
    cases = []
    for t in range(cfg.count("tensors")):
        P = _floatify(random_pair(rng, cfg.n, -2, 2), cfg.mode)
        F = _floatify(random_pair(rng, cfg.n, -2, 2), cfg.mode)
        G = _floatify(random_pair(rng, cfg.n, -2, 2), cfg.mode)
        s = mpq(rng.randint(-9, 9) or 1, rng.randint(1, 9))
        cases.append((t, P, F, G, float(s) if cfg.mode == "float" else s))
    tally.extend(_flat(_map(_tensor_case, cases, cfg.jobs)))
    return list(tally.records.values())


# --------------------------------------------------------------------------
# reduction: closed forms against the generic Dirac oracle

def _reduction_case(case):
    t, state, covectors = case
    out = []
    for k in (1, 2):
        oracle = DiracOracle(k, state)
        for c, xi in enumerate(covectors):
            out.append((f"P{k}red = Dirac oracle", [t, c], reduced_tensor(k, state, xi) - oracle(xi)))
    try:
        oracle = DiracOracle(3, state)
    except StarConditionViolated as exc:
        out.append(("error", "P3red = Dirac oracle (strict)", [t, 0], str(exc)))
    else:
        for c, xi in enumerate(covectors):
            out.append(("P3red = Dirac oracle (strict)", [t, c],
                        reduced_tensor(3, state, xi) - oracle(xi)))
    # the quotient check: equality modulo P_uv(Ker P_vv), on <xi, T> = 0
    loose = DiracOracle(3, state, strict=False)
    T = t1_tangent(state)
    gauge_ok = all(in_span([T], g) for g in loose.gauge)
    out.append(("P3 gauge = span(t1 tangent)", [t], 0 if gauge_ok else 1))
    for c, xi in enumerate(covectors):
        xi = _annihilate(xi, T, covectors[(c + 1) % len(covectors)])
        a, b = reduced_tensor(3, state, xi), loose(xi)
        out.append(("P3red = Dirac oracle mod gauge", [t, c], 0 if loose.equivalent(a, b) else a - b))
    return out


def _annihilate(xi: PairElement, T: PairElement, other: PairElement) -> PairElement:
    """xi moved into the annihilator of T using ``other`` (or itself if already there)."""
    s = inner_pair(xi, T)
    if s == 0:
        return xi
    s2 = inner_pair(other, T)
    if s2 == 0:
        return other
    return xi - other.scale(s / s2)


def _embedded_case(case):
    t, state, picks, sites = case
    P = state.to_pair(closed=True)
    N = P.period
    T = t1_tangent(P)
    oracle = DiracOracle(3, P, window=6, sites=sites)
    out = [("P3 Z-embedded oracle has no gauge", [t], len(oracle.gauge))]
    for c, (x1, x2) in enumerate(picks):
        d1 = coordinate_differential(*x1, N)
        d2 = coordinate_differential(*x2, N)
        xi = _annihilate(d1, T, d2)
        out.append(("P3red = Z-embedded Dirac oracle", [t, c], reduced_tensor(3, P, xi) - oracle(xi)))
    return out


def suite_reduction(cfg: RunConfig) -> list[Record]:
    rng = cfg.rng("reduction")
    tally = _Tally("reduction", cfg)
    total = cfg.count("reduction")
    per_state = 5
    cases = []
    for t in range((total + per_state - 1) // per_state):
        state = LaxState.random(rng, cfg.n, cfg.depth, cfg.depth_bar)
        cases.append((t, state, [random_covector(rng, cfg.n) for _ in range(per_state)]))
    tally.extend(_flat(_map(_reduction_case, cases, cfg.jobs)))
    # the lattice Z, emulated by localized data on a long period
    N, M = 22, 2
    fams = [("u", i) for i in range(-M, 1)] + [("ubar", j) for j in range(-1, M + 1)]
    cases = []
    for t in range(3):
        state = LaxState.localized(rng, N, M, M, range(9, 13))
        picks = [((*rng.choice(fams), rng.randint(9, 12)), (*rng.choice(fams), rng.randint(9, 12)))
                 for _ in range(5)]
        cases.append((t, state, picks, range(3, 19)))
    tally.extend(_flat(_map(_embedded_case, cases, cfg.jobs)))
    recs = tally.records
    if "P3red = Dirac oracle (strict)" in recs:
        recs["P3red = Dirac oracle (strict)"].note = (
            "P_uv(Ker P_vv) is spanned by the t1 tangent on the periodic lattice; "
            "see the mod-gauge and Z-embedded records")
    return list(recs.values())


# --------------------------------------------------------------------------
# crosscheck: coordinate formulas against the tensor route

def crosscheck_depths(depth: int, depth_bar: int) -> tuple[int, int]:
    """Depths large enough that no term of the -3..1 window reaches past the stored data."""
    return max(depth, 10), max(depth_bar, 6)


def _crosscheck_case(case):
    t, state, variant = case
    N = state.period
    coords = window_coordinates(N)
    diffs = {a: a.differential(N) for a in coords}
    out = []
    for k in (1, 2, 3):
        for b in coords:
            Y = reduced_tensor(k, state, diffs[b])
            for a in coords:
                value = evaluate_bracket(k, a, b, state, variant) - inner_pair(diffs[a], Y)
                out.append((f"k={k} {a.family}-{b.family}", [t, str(a), str(b)], value))
    return out


def suite_crosscheck(cfg: RunConfig) -> list[Record]:
    rng = cfg.rng("crosscheck")
    tally = _Tally("crosscheck", cfg)
    M, Mb = crosscheck_depths(cfg.depth, cfg.depth_bar)
    cases = [(t, LaxState.random(rng, cfg.n, M, Mb), cfg.variant)
             for t in range(cfg.count("crosscheck"))]
    tally.extend(_flat(_map(_crosscheck_case, cases, cfg.jobs)))
    for rec in tally.records.values():
        rec.note = f"variant={cfg.variant} M={M} Mbar={Mb}"
        if rec.counterexample is not None:
            rec.counterexample["offending_terms"] = _offending_terms(rec, cfg.variant)
    return list(tally.records.values())


def _offending_terms(rec: Record, variant: str) -> list[str]:
    """Terms the other stored variant adds to ``variant`` at the first failure."""
    k = int(rec.identity.split()[0][2:])
    _, a, b = rec.counterexample["case"]
    a, b = CoordIndex.parse(a.split("(")[0]), CoordIndex.parse(b.split("(")[0])
    return [f"{v}: {t}" for v in VARIANTS if v != variant
            for t in term_difference(k, a, b, v, variant)]


# --------------------------------------------------------------------------
# jacobi and pencil

def jacobi_depths(depth: int, depth_bar: int) -> tuple[int, int]:
    return max(depth, 9), max(depth_bar, 9)


def sample_triples(rng: random.Random, period: int, count: int, depth: int, depth_bar: int,
                   spread: int = 2) -> list[tuple[CoordIndex, CoordIndex, CoordIndex]]:
    """Distinct admissible triples with sites inside a window of width ``spread``."""
    pool = [(f, i) for f, idx in (("u", range(-3, 1)), ("ubar", range(-1, 2))) for i in idx]
    seen, out = set(), []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 100 * count:
            raise ConfigError("too few admissible triples for this depth")
        base = rng.randrange(period)
        triple = tuple(CoordIndex(*rng.choice(pool), (base + rng.randint(0, spread)) % period)
                       for _ in range(3))
        key = tuple(sorted(map(str, triple)) + sorted(str(c.site) for c in triple))
        if key in seen or not admissible(triple, depth, depth_bar):
            continue
        seen.add(key)
        out.append(triple)
    return out


def _jacobi_case(case):
    t, state, triple, weights, variant = case
    J = jacobi_matrix(*triple, state, variant)
    label = [t, *map(str, triple)]
    out = []
    for name, w in weights:
        value = sum((w[p] * w[q] * J[p][q] for p in range(3) for q in range(3)
                     if w[p] and w[q]), mpq(0))
        out.append((name, label, value))
    return out, any(J[p][q] for p in range(3) for q in range(3))


def _jacobi_suite(cfg: RunConfig, suite: str) -> list[Record]:
    rng = cfg.rng(suite)
    tally = _Tally(suite, cfg)
    M, Mb = jacobi_depths(cfg.depth, cfg.depth_bar)
    states = [LaxState.random(rng, cfg.n, M, Mb) for _ in range(2)]
    if suite == "jacobi":
        weights = [(f"P{k} Jacobiator", pencil_weights(k)) for k in (1, 2, 3)]
    else:
        weights = []
        for _ in range(5):
            lam = mpq(rng.randint(-9, 9), rng.randint(1, 9))
            mu = mpq(rng.choice([x for x in range(-9, 10) if x]), rng.randint(1, 9))
            weights.append((f"pencil lam={lam} mu={mu}", pencil_weights((lam, mu))))
    triples = sample_triples(rng, cfg.n, cfg.count(suite), M, Mb)
    cases = [(t, states[t % 2], tr, weights, cfg.variant) for t, tr in enumerate(triples)]
    results = _map(_jacobi_case, cases, cfg.jobs)
    nontrivial = 0
    for res, nz in results:
        tally.extend(res)
        nontrivial += nz
    for rec in tally.records.values():
        rec.note = f"variant={cfg.variant} M={M} Mbar={Mb} nontrivial={nontrivial}"
    return list(tally.records.values())


def suite_jacobi(cfg: RunConfig) -> list[Record]:
    return _jacobi_suite(cfg, "jacobi")


def suite_pencil(cfg: RunConfig) -> list[Record]:
    return _jacobi_suite(cfg, "pencil")


# --------------------------------------------------------------------------
# recursion, zero curvature, push-forward

def recursion_depths(depth: int, depth_bar: int) -> tuple[int, int]:
    return max(depth, 9), max(depth_bar, 9)


def _recursion_case(case):
    t, state = case
    out = []
    for d in ("t", "tbar"):
        name = "h" if d == "t" else "hbar"
        for a in window_coordinates(state.period):
            for p in range(4):
                r12, r23 = recursion_residual(HamiltonianId(d, p), a, state)
                if p == 0:
                    out.append((f"{{.,{name}0}}_1 = 0 (Casimir)", [t, str(a)], r12))
                    continue
                out.append((f"{{.,{name}{p}}}_1 = {{.,{name}{p - 1}}}_2", [t, str(a)], r12))
                if r23 is not None:
                    out.append((f"{{.,{name}{p - 1}}}_2 = {{.,{name}{p - 2}}}_3", [t, str(a)], r23))
    return out


def suite_recursion(cfg: RunConfig) -> list[Record]:
    rng = cfg.rng("recursion")
    tally = _Tally("recursion", cfg)
    M, Mb = recursion_depths(cfg.depth, cfg.depth_bar)
    cases = [(t, LaxState.random(rng, cfg.n, M, Mb)) for t in range(cfg.count("recursion"))]
    tally.extend(_flat(_map(_recursion_case, cases, cfg.jobs)))
    return list(tally.records.values())


def _zs_case(case):
    t, state = case
    out = []
    for which in ("pp", "barbar", "mixed"):
        for p in (1, 2):
            for q in (1, 2):
                out.append((f"ZS {which}", [t, p, q], zs_residual(p, q, which, state)))
    return out


def suite_zs(cfg: RunConfig) -> list[Record]:
    rng = cfg.rng("zs")
    tally = _Tally("zs", cfg)
    M, Mb = max(cfg.depth, 6), max(cfg.depth_bar, 6)
    cases = []
    for t in range(cfg.count("zs")):
        state = LaxState.random(rng, cfg.n, M, Mb)
        cases.append((t, state.to_float() if cfg.mode == "float" else state))
    tally.extend(_flat(_map(_zs_case, cases, cfg.jobs)))
    return list(tally.records.values())


def _pushforward_case(case):
    t, state, xi = case
    out = []
    for s in (mpq(1), mpq(-3, 7)):
        r = shift_pushforward_residual(state, s, xi)
        for k in (1, 2, 3):
            out.append((f"push-forward P{k}red t={s}", [t], r[k - 1]))
    return out


def suite_pushforward(cfg: RunConfig) -> list[Record]:
    rng = cfg.rng("pushforward")
    tally = _Tally("pushforward", cfg)
    M, Mb = max(cfg.depth, 6), max(cfg.depth_bar, 6)
    cases = [(t, LaxState.random(rng, cfg.n, M, Mb), random_covector(rng, cfg.n))
             for t in range(cfg.count("pushforward"))]
    tally.extend(_flat(_map(_pushforward_case, cases, cfg.jobs)))
    return list(tally.records.values())


SUITE_FUNCTIONS = {
    "myb": suite_myb, "tensors": suite_tensors, "reduction": suite_reduction,
    "crosscheck": suite_crosscheck, "jacobi": suite_jacobi, "pencil": suite_pencil,
    "recursion": suite_recursion, "zs": suite_zs, "pushforward": suite_pushforward,
}


def run(suite: str, cfg: RunConfig) -> Report:
    """Run one suite (or ``"all"``) and collect the report."""
    names = list(SUITES) if suite == "all" else [suite]
    cfg.validate(names)
    report = Report(cfg)
    for name in names:
        if cfg.mode == "float" and name not in FLOAT_SUITES:
            if suite != "all":
                raise ConfigError(f"suite {name} runs in exact mode only")
            report.skipped.append(name)
            continue
        report.records.extend(SUITE_FUNCTIONS[name](cfg))
    return report
