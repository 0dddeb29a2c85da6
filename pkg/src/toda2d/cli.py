"""Command-line entry point: ``toda2d {verify, bracket, evolve, state, toda}``.

Exit status: 0 when everything requested passed, 1 on a failed identity or a
rejected integration step, 2 on configuration, parse or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from .coord_brackets import CoordIndex, bracket_terms, evaluate_bracket, tensor_bracket, terms_to_json
from .dirac_reduction import LaxState
from .errors import StepRejected, TodaError
from .hierarchy import (FlowSpec, HamiltonianId, integrate, smooth_toda_data, toda_equation_check,
                        toda_initial_state)
from .verify import SUITES, ConfigError, RunConfig, crosscheck_depths, run

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--n", type=int, default=7, help="lattice period N (>= 5)")
    g.add_argument("--depth", type=int, default=4, help="stored depth M of L")
    g.add_argument("--depth-bar", type=int, default=4, help="stored depth Mbar of Lb")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mode", choices=("exact", "float"), default=None,
                   help="arithmetic (verify/bracket default exact, evolve needs float)")
    g.add_argument("--tol", type=float, default=1e-9, help="zero tolerance in float mode")
    g.add_argument("--out", default=None, help="write the report / trajectory / state here")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="toda2d", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=(*SUITES, "all"))
    v.add_argument("--variant", choices=("printed", "corrected"), default="printed",
                   help="third-bracket formula variant for crosscheck/jacobi/pencil")
    v.add_argument("--samples", type=int, default=None, help="override per-suite sample counts")
    v.add_argument("--jobs", type=int, default=1, help="worker processes")

    b = sub.add_parser("bracket", parents=[common], help="print and evaluate {a(n), b(m)}_k")
    b.add_argument("k", type=int, choices=(1, 2, 3))
    b.add_argument("a", help="coordinate such as u0, u-2, ubar-1, ubar1")
    b.add_argument("site_a", metavar="n", type=int, help="site of the first coordinate")
    b.add_argument("b")
    b.add_argument("site_b", metavar="m", type=int, help="site of the second coordinate")
    b.add_argument("--state", default=None, help="LaxState JSON (default: seeded random state)")
    b.add_argument("--variant", choices=("printed", "corrected"), default="printed")

    e = sub.add_parser("evolve", parents=[common], help="RK4 along a flow with a Hamiltonian ledger")
    e.add_argument("flow", help="t1, t2, ..., tbar1, ...")
    e.add_argument("duration", type=float)
    e.add_argument("step", type=float)
    e.add_argument("--state", default=None, help="LaxState JSON (default: smooth Toda data)")
    e.add_argument("--hamiltonians", default=None,
                   help="comma list such as h1,h2,hbar1 (default: index 1 and 2 of the flow side)")
    e.add_argument("--keep-states", action="store_true")

    s = sub.add_parser("state", parents=[common], help="write a state file")
    s.add_argument("kind", choices=("random", "toda"))

    t = sub.add_parser("toda", parents=[common], help="2D Toda equation residual and its step refinement")
    t.add_argument("--step", type=float, default=1e-3)
    return parser


def _config(args, mode_default: str) -> RunConfig:
    return RunConfig(n=args.n, depth=args.depth, depth_bar=args.depth_bar, seed=args.seed,
                     mode=args.mode or mode_default, tol=args.tol, out=args.out,
                     variant=getattr(args, "variant", "printed"),
                     samples=getattr(args, "samples", None), jobs=getattr(args, "jobs", 1))


def _emit(text: str, out: str | None) -> None:
    sys.stdout.write(text)
    if out:
        with open(out, "w") as fh:
            fh.write(text)


def _load_state(path: str) -> LaxState:
    with open(path) as fh:
        return LaxState.from_json(json.load(fh))


def _hamiltonian(token: str) -> HamiltonianId:
    token = token.strip()
    d = "tbar" if token.startswith("hbar") else "t"
    return HamiltonianId(d, int(token[4:] if d == "tbar" else token[1:]))


def cmd_verify(args) -> int:
    cfg = _config(args, "exact")
    report = run(args.suite, cfg)
    _emit(report.text(), cfg.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_bracket(args) -> int:
    cfg = _config(args, "exact")
    cfg.validate()
    a = CoordIndex.parse(args.a, args.site_a % cfg.n)
    b = CoordIndex.parse(args.b, args.site_b % cfg.n)
    if args.state:
        state = _load_state(args.state)
    else:
        state = LaxState.random(cfg.rng("bracket"), cfg.n, *crosscheck_depths(cfg.depth, cfg.depth_bar))
    if cfg.mode == "float":
        state = state.to_float()
    terms = bracket_terms(args.k, a, b, args.variant)
    formula = evaluate_bracket(args.k, a, b, state, args.variant)
    tensor = tensor_bracket(args.k, a, b, state)
    agree = (abs(float(formula - tensor)) <= cfg.tol if cfg.mode == "float"
             else formula == tensor)
    lines = [f"{{{args.a}({args.site_a}), {args.b}({args.site_b})}}_{args.k}  [{args.variant} formula]"]
    lines += [f"  {t}" for t in terms] or ["  (no terms)"]
    lines += [f"formula value: {formula}", f"tensor value:  {tensor}",
              f"agree: {'yes' if agree else 'NO'}"]
    sys.stdout.write("\n".join(lines) + "\n")
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump({"k": args.k, "a": str(a), "b": str(b), "variant": args.variant,
                       "terms": terms_to_json(terms), "formula": str(formula),
                       "tensor": str(tensor), "agree": agree}, fh, indent=1)
    return EXIT_PASS if agree else EXIT_FAIL


def cmd_evolve(args) -> int:
    cfg = _config(args, "float")
    cfg.validate()
    if cfg.mode != "float":
        raise ConfigError("evolve runs in float mode only")
    flow = FlowSpec.parse(args.flow)
    if args.duration < 0:
        raise ConfigError("duration must be >= 0")
    state = _load_state(args.state) if args.state else toda_initial_state(*smooth_toda_data(cfg.n))
    hams = ([_hamiltonian(h) for h in args.hamiltonians.split(",")] if args.hamiltonians
            else [HamiltonianId(flow.direction, 1), HamiltonianId(flow.direction, 2)])
    try:
        traj = integrate([(flow, args.duration, args.step)], state, hams, args.keep_states)
    except StepRejected as exc:
        sys.stderr.write(f"step rejected: {exc}\n")
        return EXIT_FAIL
    if cfg.out:
        traj.dump(cfg.out)
    steps = len(traj.times) - 1
    for h in traj.ledger:
        vals = traj.ledger[h]
        sys.stdout.write(f"{h}: initial={vals[0]:.15g} final={vals[-1]:.15g} "
                         f"relative_drift={traj.drift(h):.3e} steps={steps}\n")
    return EXIT_PASS


def cmd_state(args) -> int:
    cfg = _config(args, "exact")
    cfg.validate()
    if args.kind == "random":
        state = LaxState.random(cfg.rng("state"), cfg.n, cfg.depth, cfg.depth_bar)
        if cfg.mode == "float":
            state = state.to_float()
    else:
        state = toda_initial_state(*smooth_toda_data(cfg.n))
    _emit(json.dumps(state.to_json(), indent=1) + "\n", cfg.out)
    return EXIT_PASS


def cmd_toda(args) -> int:
    cfg = _config(args, "float")
    cfg.validate()
    data = smooth_toda_data(cfg.n)
    coarse = toda_equation_check(*data[:2], args.step, *data[2:])
    fine = toda_equation_check(*data[:2], args.step / 2, *data[2:])
    ratio = coarse.mixed / fine.mixed if fine.mixed else float("inf")
    ok = coarse.mixed < 1e-5 and 3.0 <= ratio <= 5.0
    text = (f"step={args.step:g} mixed={coarse.mixed:.3e} anchor_t={coarse.anchor_t:.3e} "
            f"anchor_tbar={coarse.anchor_tbar:.3e}\n"
            f"step={args.step / 2:g} mixed={fine.mixed:.3e} anchor_t={fine.anchor_t:.3e} "
            f"anchor_tbar={fine.anchor_tbar:.3e}\n"
            f"refinement ratio={ratio:.3f} {'PASS' if ok else 'FAIL'}\n")
    _emit(text, cfg.out)
    return EXIT_PASS if ok else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "bracket": cmd_bracket, "evolve": cmd_evolve,
            "state": cmd_state, "toda": cmd_toda}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, TodaError, ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
