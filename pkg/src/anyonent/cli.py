"""Command-line interface: model reports, measure evaluation, sweeps, verification.

Exit codes: 0 success, 1 verification violation, 2 model parse/validation
failure, 3 invalid state or inadmissible mixing parameter, 4 closed form
unavailable for the requested input.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import fibonacci, measures, verify
from .fibonacci import IsotropicParams, NotPositive
from .measures import LN2, ClosedFormUnavailable, MeasureResult
from .model import BUILTIN_MODELS, ModelError, builtin_model, load_model, solve_qdims
from .states import StateError, validate

EXIT_VIOLATION = 1
EXIT_MODEL = 2
EXIT_STATE = 3
EXIT_NO_CLOSED_FORM = 4


def _unit(args) -> str:
    return "bits" if args.bits else "nats"


def _convert(value: float, args) -> float:
    return value / LN2 if args.bits else value


def cmd_model(args) -> int:
    try:
        model = builtin_model(args.builtin) if args.builtin else load_model(args.path)
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"cannot read model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    print(f"model {model.name}")
    print("charges: " + " ".join(c.name for c in model.charges))
    for i, a in enumerate(model.charges):
        for b in model.charges[i:]:
            outs = " + ".join(
                (f"{m}*{c.name}" if m > 1 else c.name) for c, m in model.outcomes(a, b)
            )
            print(f"  {a.name} x {b.name} = {outs}")
    for c in model.charges:
        print(f"d_{c.name} = {model.d(c):.12f}")
    qd = solve_qdims(model.fusion)
    residual = max(
        abs(model.d(a) * model.d(b) - sum(m * qd[c] for c, m in model.outcomes(a, b)))
        for a in model.charges
        for b in model.charges
    )
    print(f"associativity: ok; dimension-identity residual {residual:.3e}")
    return 0


def _resolve_state(args):
    if args.builtin:
        n = args.n if args.n is not None else 3
        if args.builtin == "mes":
            return fibonacci.build_mes(n)
        alpha = args.alpha if args.alpha is not None else 1.0
        return fibonacci.build_isotropic(n, alpha)
    if not args.state:
        raise StateError("provide --state PATH or --builtin mes|isotropic")
    with open(args.state, encoding="utf-8") as fh:
        text = fh.read()
    first = next((ln for ln in text.splitlines() if ln.strip()), "")
    model_name = first.split()[1] if len(first.split()) > 1 else ""
    if args.model:
        model = load_model(args.model)
    elif model_name in BUILTIN_MODELS:
        model = builtin_model(model_name)
    else:
        raise StateError(f"state references model {model_name!r}; pass --model PATH")
    rho = parse_state_file(text, model)
    return rho


def parse_state_file(text: str, model):
    from .states import parse_state

    rho = parse_state(text, model)
    diag = validate(rho)
    if not diag.ok():
        raise StateError(
            "state fails validation: "
            f"hermiticity {diag.hermiticity_residual:.2e}, "
            f"min eigenvalue {diag.min_eigenvalue:.2e}, "
            f"quantum-trace deviation {diag.qtrace_deviation:.2e}"
        )
    return rho


def _closed_params(rho) -> IsotropicParams:
    if not isinstance(rho.origin, IsotropicParams):
        raise ClosedFormUnavailable("closed forms exist only for the isotropic family")
    return rho.origin


def _apply_preset_channel(rho, preset: str):
    from . import channels

    if preset == "identity":
        ch = channels.identity_channel(rho.space)
    else:
        name, _, arg = preset.partition(":")
        if name == "charge-measure" and arg in ("A", "B"):
            ch = channels.local_charge_projector_channel(rho.space, arg)
        elif name == "random-local":
            seed = int(arg) if arg else 0
            ch = channels.random_local_channel(rho.space, "A" if seed % 2 == 0 else "B", seed)
        else:
            raise ValueError(
                f"unknown channel preset {preset!r}; "
                "use identity, charge-measure:A|B, or random-local:<seed>"
            )
    return channels.apply_channel(rho, ch)


def cmd_measure(args) -> int:
    try:
        rho = _resolve_state(args)
        if args.channel:
            rho = _apply_preset_channel(rho, args.channel)
    except (StateError, NotPositive, ModelError, OSError, ValueError) as exc:
        print(f"state error: {exc}", file=sys.stderr)
        return EXIT_STATE
    from .frankwolfe import FrankWolfeConfig

    config = FrankWolfeConfig(seed=args.seed)
    try:
        results: dict[str, MeasureResult] = {}
        if args.method == "closed":
            params = _closed_params(rho)
            ace = MeasureResult(fibonacci.e_ace_closed(params), "closed_form")
            ce = MeasureResult(fibonacci.e_ce_closed(params), "closed_form")
            results["ace"], results["ce"] = ace, ce
            results["total"] = MeasureResult(ace.value + ce.value, "closed_form")
        else:
            if args.which in ("ace", "total"):
                results["ace"] = measures.e_ace(rho)
            if args.which in ("ce", "total"):
                results["ce"] = measures.e_ce(rho, method="frank_wolfe", config=config)
            if args.which == "total":
                ace, ce = results["ace"], results["ce"]
                results["total"] = MeasureResult(ace.value + ce.value, ce.method, ce.gap, ce.iterations)
    except ClosedFormUnavailable as exc:
        print(f"closed form unavailable: {exc}", file=sys.stderr)
        return EXIT_NO_CLOSED_FORM
    res = results[args.which]
    label = {"ace": "E_ACE", "ce": "E_CE", "total": "E_total"}[args.which]
    print(f"{label} = {_convert(res.value, args):.12g} {_unit(args)}")
    print(f"method = {res.method}")
    if res.gap is not None:
        print(f"gap = {_convert(res.gap, args):.6g} {_unit(args)}")
    if res.iterations is not None:
        print(f"iterations = {res.iterations}")
    return 0


def cmd_sweep(args) -> int:
    if args.steps < 1:
        print("steps must be >= 1", file=sys.stderr)
        return EXIT_STATE
    if args.alpha_max < args.alpha_min:
        print("alpha-max must be >= alpha-min", file=sys.stderr)
        return EXIT_STATE
    grid = np.linspace(args.alpha_min, args.alpha_max, args.steps)
    try:
        rows = fibonacci.sweep(args.n, [float(a) for a in grid], method=args.method)
    except (NotPositive, ValueError) as exc:
        print(f"sweep error: {exc}", file=sys.stderr)
        return EXIT_STATE
    if args.bits:
        rows = [
            fibonacci.SweepRow(
                r.alpha,
                r.e_ace / LN2,
                r.e_ce / LN2,
                r.e_total / LN2,
                r.method,
                None if r.gap is None else r.gap / LN2,
            )
            for r in rows
        ]
    fibonacci.write_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out} ({_unit(args)})")
    return 0


def cmd_verify(args) -> int:
    if args.tol is not None and args.tol <= 0:
        print("verify error: --tol must be positive", file=sys.stderr)
        return EXIT_MODEL
    try:
        reports = verify.run_suites(args.suite, args.trials, args.seed, args.tol)
    except ValueError as exc:
        print(f"verify error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    all_passed = True
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"suite {r.suite}: trials={r.trials} max_violation={r.max_violation:.3e} "
            f"tol={r.tol:.1e} {status}"
        )
        all_passed &= r.passed
    return 0 if all_passed else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anyonent",
        description="Entanglement measures for bipartite anyonic states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_model = sub.add_parser("model", help="parse a model spec and report its data")
    p_model.add_argument("path", nargs="?", help="model-spec file")
    p_model.add_argument("--builtin", choices=sorted(BUILTIN_MODELS), help="use a builtin model")
    p_model.set_defaults(fn=cmd_model)

    p_measure = sub.add_parser("measure", help="evaluate a measure on a state")
    p_measure.add_argument("--state", help="state file")
    p_measure.add_argument("--model", help="model-spec file for the state")
    p_measure.add_argument(
        "--builtin", choices=("mes", "isotropic"), help="builtin Fibonacci state family"
    )
    p_measure.add_argument("--n", type=int, help="anyons per party for builtin states")
    p_measure.add_argument("--alpha", type=float, help="isotropic mixing parameter")
    p_measure.add_argument("--which", choices=("ace", "ce", "total"), default="total")
    p_measure.add_argument("--method", choices=("closed", "generic", "fw"), default="generic")
    p_measure.add_argument("--seed", type=int, default=0)
    p_measure.add_argument(
        "--channel",
        help="apply a preset channel first: identity, charge-measure:A|B, random-local:<seed>",
    )
    p_measure.add_argument("--bits", action="store_true", help="report in bits instead of nats")
    p_measure.set_defaults(fn=cmd_measure)

    p_sweep = sub.add_parser("sweep", help="three-measure sweep over the mixing parameter")
    p_sweep.add_argument("--n", type=int, default=3)
    p_sweep.add_argument("--alpha-min", type=float, default=0.0)
    p_sweep.add_argument("--alpha-max", type=float, default=1.0)
    p_sweep.add_argument("--steps", type=int, default=101)
    p_sweep.add_argument("--method", choices=("closed", "generic", "fw"), default="closed")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--bits", action="store_true")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the identity and monotonicity suites")
    p_verify.add_argument(
        "--suite", choices=("all",) + verify.SUITE_NAMES, default="all"
    )
    p_verify.add_argument("--trials", type=int, default=100)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--tol", type=float, default=None)
    p_verify.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "model" and not args.path and not args.builtin:
        print("model: provide a path or --builtin NAME", file=sys.stderr)
        return EXIT_MODEL
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
