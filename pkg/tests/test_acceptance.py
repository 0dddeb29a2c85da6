"""Acceptance criteria 1-9, one reported line each.

Every identity is checked in exact rational arithmetic (residual must be 0)
except criterion 9, whose float tolerances are pinned below.  Where a literal
criterion does not hold, the test fails and the line says why; supplementary
lines report the related checks that do hold.
"""
import time

import pytest
from gmpy2 import mpq

from toda2d.hierarchy import (FlowSpec, HamiltonianId, integrate, smooth_toda_data,
                              toda_equation_check, toda_initial_state)
from toda2d.pair_algebra import basis, inner_pair, r_adjoint, r_matrix, skew_part
from toda2d.verify import RunConfig, run

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.slow

# pinned tolerances and budgets (seconds)
TODA_RESIDUAL = 1e-5
TODA_RATIO = (3.5, 4.5)
DRIFT = 1e-8
BUDGET = {1: 30, 2: 10, 3: 300, 4: 300, 5: 600, 6: 60, 7: 120, 8: 60, 9: 60}


def report(n, ok, elapsed, detail, extra=()):
    within = elapsed < BUDGET[n]
    status = "PASS" if ok and within else "FAIL"
    ACCEPTANCE_LINES.append(f"criterion {n}: {status} ({elapsed:.1f}s of {BUDGET[n]}s) {detail}")
    ACCEPTANCE_LINES.extend(f"    {line}" for line in extra)
    if not (ok and within):
        pytest.fail(ACCEPTANCE_LINES[-1 - len(extra)], pytrace=False)
    return True


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def records(rep, prefix=""):
    return {r.identity: r for r in rep.records if r.identity.startswith(prefix)}


def failing(rep):
    return [f"{r.identity}: {r.failures}/{r.cases}" for r in rep.records if not r.passed]


def test_criterion_1_modified_yang_baxter():
    rep, dt = timed(lambda: run("myb", RunConfig(n=5, seed=0)))
    myb = records(rep, "mYB")
    random_cases = min(r.cases for name, r in myb.items() if "random" in name)
    ok = (all(r.passed and r.residual == 0 for r in myb.values()) and random_cases >= 100)
    assert report(1, ok, dt, f"mYB for R and A: {random_cases} random pairs + "
                              f"{myb['mYB[R] basis'].cases} basis pairs, N=5 |k|<=3, "
                              f"failures={failing(rep)}")


def test_criterion_2_adjoint_and_skew():
    def check():
        B = list(basis(5, 3))
        bad, n = 0, 0
        for X in B:
            n += 1
            bad += not (skew_part(X) - (r_matrix(X) - r_adjoint(X)).scale(mpq(1, 2))).is_zero()
            for Y in B:
                n += 1
                bad += inner_pair(r_matrix(X), Y) != inner_pair(X, r_adjoint(Y))
        return bad, n
    (bad, n), dt = timed(check)
    assert report(2, bad == 0, dt, f"R* adjointness and A = (R-R*)/2 on the basis: {n} checks, "
                                   f"{bad} failures")


def test_criterion_3_dirac_oracle():
    rep, dt = timed(lambda: run("reduction", RunConfig(n=7, depth=4, depth_bar=4)))
    recs = records(rep)
    p2 = recs["P2red = Dirac oracle"]
    strict = recs["P3red = Dirac oracle (strict)"]
    extra = [r.line() for r in rep.records]
    ok = p2.passed and p2.cases >= 50 and strict.passed and strict.cases >= 50
    detail = (f"P2red: {p2.cases - p2.failures}/{p2.cases} exact; P3red strict: "
              f"{'PASS' if strict.passed else 'FAIL'} (Ker P_vv is not annihilated by P_uv on "
              "the periodic lattice; the gauge is span(t1 tangent), P3red agrees modulo it and "
              "exactly on the embedded lattice Z)")
    assert report(3, ok, dt, detail, extra)


def test_criterion_4_crosscheck():
    cfg = RunConfig(n=7, depth=4, depth_bar=4, samples=10)
    rep, dt = timed(lambda: run("crosscheck", cfg))
    corrected, dt2 = timed(lambda: run("crosscheck", RunConfig(n=7, depth=4, depth_bar=4,
                                                               samples=10, variant="corrected")))
    bad = [r for r in rep.records if not r.passed]
    extra = [r.line() for r in bad]
    extra.append(f"corrected third-bracket variant: {'PASS' if corrected.passed else 'FAIL'} "
                 f"({sum(r.cases for r in corrected.records)} values, {dt2:.1f}s)")
    total = sum(r.cases for r in rep.records)
    detail = (f"printed formulas vs tensor route, window -3..1, N=7, 10 states: "
              f"{sum(r.failures for r in rep.records)}/{total} mismatches in {[r.identity for r in bad]}")
    assert report(4, rep.passed, dt, detail, extra)


def test_criterion_5_jacobi_and_pencil():
    def go():
        return (run("jacobi", RunConfig(variant="corrected")),
                run("pencil", RunConfig(variant="corrected")))
    (jac, pen), dt = timed(go)
    printed = run("jacobi", RunConfig(variant="printed", samples=50))
    triples = min(r.cases for r in (*jac.records, *pen.records))
    ok = jac.passed and pen.passed and triples >= 200 and len(pen.records) == 5
    extra = [r.line() for r in (*jac.records, *pen.records)]
    extra.append(f"printed third-bracket variant (50 triples): failing {failing(printed) or 'none'}")
    assert report(5, ok, dt, f"{triples} admissible triples, P1/P2/P3 and 5 pencils, "
                             f"tensor-validated term lists; failures={failing(jac) + failing(pen)}",
                  extra)


def test_criterion_6_pushforward():
    rep, dt = timed(lambda: run("pushforward", RunConfig()))
    assert report(6, rep.passed, dt, f"t in {{1, -3/7}}, P1..P3red, "
                                     f"{rep.records[0].cases} states; failures={failing(rep)}")


def test_criterion_7_recursion():
    rep, dt = timed(lambda: run("recursion", RunConfig()))
    names = sorted(records(rep))
    assert report(7, rep.passed, dt, f"{len(names)} identities (p<=3, t and tbar, Casimirs) "
                                     f"over the window; failures={failing(rep)}")


def test_criterion_8_zero_curvature():
    rep, dt = timed(lambda: run("zs", RunConfig()))
    assert report(8, rep.passed, dt, f"pp/barbar/mixed for p,q<=2 on "
                                     f"{RunConfig().count('zs')} states; failures={failing(rep)}")


def test_criterion_9_numeric_toda():
    def go():
        data = smooth_toda_data(32)
        coarse = toda_equation_check(*data[:2], 1e-3, *data[2:])
        fine = toda_equation_check(*data[:2], 5e-4, *data[2:])
        s0 = toda_initial_state(*data)
        drifts = {}
        for flow, hid in (("t", 1), ("t", 2), ("tbar", 1), ("tbar", 2)):
            H = HamiltonianId(flow, hid)
            traj = integrate([(FlowSpec(flow, hid), 1.0, 1e-3)], s0, [H])
            drifts[str(H)] = traj.drift(str(H))
        return coarse, fine, drifts
    (coarse, fine, drifts), dt = timed(go)
    ratio = coarse.mixed / fine.mixed
    ok = (coarse.residual < TODA_RESIDUAL and TODA_RATIO[0] < ratio < TODA_RATIO[1]
          and all(v < DRIFT for v in drifts.values()))
    detail = (f"N=32 step=1e-3 mixed={coarse.mixed:.2e} anchors=({coarse.anchor_t:.2e}, "
              f"{coarse.anchor_tbar:.2e}) < {TODA_RESIDUAL:g}; halving ratio={ratio:.3f}; "
              + " ".join(f"drift[{k}]={v:.1e}" for k, v in drifts.items()) + f" < {DRIFT:g}")
    assert report(9, ok, dt, detail)
