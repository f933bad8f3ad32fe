"""``qnd`` command-line front end.

Exit codes: 0 success, 1 parse/validation/usage error, 2 when the heralding
event has zero probability.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import dsl, report
from .circuit import (
    D_PRIME,
    EQUAL_SUPERPOSITION,
    STRONG,
    WEAK,
    CircuitConfig,
    PolarizationQubit,
    ZeroSuccessError,
    characterize,
    meter_from_alpha,
    prepare_meter,
    run,
    signal_output_density_matrix,
    standard_inputs,
    weak_sweep,
)
from .fock import purity

EXIT_OK, EXIT_USAGE, EXIT_PHYSICS = 0, 1, 2
STRONG_ALPHA = math.sqrt(3) / 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QND_THREADS", "1")))
    except ValueError:
        return 1


def _emit(out, text: str = "") -> None:
    print(text, file=out)


# --- plan -> physics ------------------------------------------------------


def _qubit(spec) -> PolarizationQubit:
    if isinstance(spec, dsl.NamedInput):
        return standard_inputs()[spec.name]
    return PolarizationQubit.normalized(float(spec.h), float(spec.v))


def _meter(spec) -> PolarizationQubit:
    if spec is None or isinstance(spec, dsl.DPrime):
        return D_PRIME
    if isinstance(spec, dsl.DEta):
        return prepare_meter(float(spec.eta))
    return _qubit(spec)


def plan_config(plan: dsl.ExperimentPlan) -> CircuitConfig:
    return CircuitConfig(eta=float(plan.eta), balanced_loss=plan.balanced_loss)


def execute_plan(plan: dsl.ExperimentPlan, out=sys.stdout, raw_input_dist: bool = False) -> None:
    config = plan_config(plan)
    meter = _meter(plan.meter)
    files = {}

    if plan.action_name == "sweep":
        sw = plan.action
        signal = EQUAL_SUPERPOSITION if plan.signal is None else _qubit(plan.signal)
        alphas = np.linspace(float(sw.lo), float(sw.hi), sw.steps)
        rows = weak_sweep(signal, [float(a) for a in alphas], config, workers=_threads())
        _print_sweep(rows, out)
        files["csv"] = report.sweep_csv(rows)
        json_data = report.sweep_json(rows)
    elif plan.action_name == "densmat":
        signal = EQUAL_SUPERPOSITION if plan.signal is None else _qubit(plan.signal)
        rho = signal_output_density_matrix(signal, meter, config)
        p = purity(rho)
        _emit(out, report.densmat_table(rho))
        _emit(out, f"purity {report.term_num(p)}")
        files["csv"] = report.densmat_csv(rho)
        json_data = report.densmat_json(rho, p)
    else:
        if plan.action_name == "table":
            inputs = standard_inputs()
        else:
            inputs = {_label(plan.signal): _qubit(plan.signal)}
        reports = [
            characterize(name, q, meter, config, raw_input_dist=raw_input_dist)
            for name, q in inputs.items()
        ]
        _emit(out, report.metrics_table(reports))
        if len(reports) > 1:
            avg = sum(r.f_qsp for r in reports) / len(reports)
            _emit(out, f"F_QSP average {report.term_num(avg)}")
        files["csv"] = report.metrics_csv(reports)
        json_data = report.metrics_json(reports)

    for fmt, path in plan.outputs:
        if fmt == "csv":
            report.write_text(path, files["csv"])
        else:
            report.write_json(path, json_data)
        _emit(out, f"wrote {path}")


def _label(spec) -> str:
    if isinstance(spec, dsl.NamedInput):
        return spec.name
    return f"state({dsl.format_number(spec.h)},{dsl.format_number(spec.v)})"


def _print_sweep(rows, out) -> None:
    totals = [r.k2_plus_v2 for r in rows]
    _emit(out, f"{len(rows)} points; K^2+V^2 min {min(totals):.12g} max {max(totals):.12g}")


# --- commands -------------------------------------------------------------


def cmd_run(args, out) -> int:
    try:
        with open(args.plan, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        print(f"qnd: cannot read plan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        plan = dsl.parse(source)
    except dsl.PlanError as exc:
        for err in exc.errors:
            print(f"{args.plan}:{err.render(source)}", file=sys.stderr)
        return EXIT_USAGE
    execute_plan(plan, out, raw_input_dist=args.raw_input_dist)
    return EXIT_OK


def cmd_table(args, out) -> int:
    reports = [
        characterize(name, q, D_PRIME, STRONG, raw_input_dist=args.raw_input_dist)
        for name, q in standard_inputs().items()
    ]
    _emit(out, "ideal simulation (eta = 1/3, meter D')")
    _emit(out, report.metrics_table(reports))
    avg = sum(r.f_qsp for r in reports) / len(reports)
    _emit(out, f"F_QSP average {report.term_num(avg)}")
    _emit(out)
    _emit(out, report.reference_table())
    if args.json:
        report.write_json(args.json, report.metrics_json(reports))
        _emit(out, f"wrote {args.json}")
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    if args.steps < 2:
        raise UsageError(f"--steps must be at least 2, got {args.steps}")
    alphas = [float(a) for a in np.linspace(0.0, STRONG_ALPHA, args.steps)]
    rows = weak_sweep(EQUAL_SUPERPOSITION, alphas, WEAK, workers=_threads())
    report.write_text(args.out, report.sweep_csv(rows))
    _print_sweep(rows, out)
    _emit(out, f"wrote {args.out}")
    return EXIT_OK


def cmd_densmat(args, out) -> int:
    alpha = float(Fraction(args.alpha)) if "/" in args.alpha else float(args.alpha)
    if not 0.0 <= alpha <= 1.0:
        raise UsageError(f"--alpha must lie in [0, 1], got {args.alpha}")
    rho = signal_output_density_matrix(EQUAL_SUPERPOSITION, meter_from_alpha(alpha), WEAK)
    p = purity(rho)
    _emit(out, f"signal output, input (|H>+|V>)/sqrt(2), alpha = {report.term_num(alpha)}")
    _emit(out, report.densmat_table(rho))
    _emit(out, f"purity {report.term_num(p)}")
    _emit(out, f"p_success {report.term_num(run(EQUAL_SUPERPOSITION, meter_from_alpha(alpha), WEAK).success_probability)}")
    if math.isclose(alpha, 0.0, abs_tol=1e-9):
        _emit(out, f"{report.REFERENCE_LABEL} purity {report.REFERENCE_PURITY['no measurement']}")
    elif math.isclose(alpha, STRONG_ALPHA, abs_tol=1e-6):
        _emit(out, f"{report.REFERENCE_LABEL} purity {report.REFERENCE_PURITY['strong measurement']}")
    if args.json:
        report.write_json(args.json, report.densmat_json(rho, p, alpha))
        _emit(out, f"wrote {args.json}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qnd", description="Ideal linear-optics QND measurement of a photonic qubit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="execute a .qnd experiment plan")
    p.add_argument("plan")
    p.add_argument("--raw-input-dist", action="store_true",
                   help="use bare input populations instead of success-weighted ones")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("table", help="joint distributions and fidelities for the six standard inputs")
    p.add_argument("--raw-input-dist", action="store_true")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("sweep", help="K, V and purity versus meter amplitude alpha (CSV)")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True, metavar="CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("densmat", help="signal output density matrix for meter amplitude alpha")
    p.add_argument("--alpha", required=True)
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_densmat)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"qnd {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ZeroSuccessError as exc:
        print(f"qnd {args.command}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ValueError as exc:
        print(f"qnd {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
