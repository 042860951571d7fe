"""Command-line front end.

Subcommands: ``regime``, ``solve``, ``evaluate``, ``sweep``, ``oracle``.
Every subcommand accepts ``--config`` (default: the shipped base case),
``--seed``, ``--samples``, ``--method {saa,quad}`` and ``--out-dir``.

Exit codes: 0 success, 2 configuration or input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config
from .errors import ConfigError, CrossTrainError, FeasibilityError
from .expect import Evaluator, ExpectationConfig, Quadrature, SAA, expected_cost
from .model import Pair, Scenario, classify_regime, with_overrides
from .oracle import grid_minimize
from .recourse import FirstStage, classify_region, recourse_closed_form, recourse_oracle
from .report import PlotStyle, csv_text, emit_csv, emit_svg, surface_csv
from .solver import SolverConfig, solve
from .sweep import OUTPUTS, SUITE, Normalization, SweepKind, SweepSpec, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=None, help="instance file (default: shipped base case)")
    p.add_argument("--seed", type=int, default=None, help="SAA seed (required with --method saa)")
    p.add_argument("--samples", type=int, default=200_000, help="SAA sample size")
    p.add_argument("--method", choices=("saa", "quad"), default="saa")
    p.add_argument("--nodes", type=int, default=512, help="quadrature nodes per demand axis")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a parameter, e.g. h=8000 or c2_alpha=2800")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="crosstrain", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("regime", parents=[common], help="classify the instance")

    p = sub.add_parser("solve", parents=[common], help="optimal first-stage levels")
    p.add_argument("--no-cross-check", action="store_true")

    p = sub.add_parser("evaluate", parents=[common], help="recourse or expected cost at given levels")
    p.add_argument("--x1", nargs=2, type=float, required=True, metavar=("ALPHA", "GAMMA"))
    p.add_argument("--scenario", nargs=6, type=float, default=None,
                   metavar=("D_A", "D_G", "D1_A", "D1_G", "D2_A", "D2_G"))
    p.add_argument("--evaluator", choices=[e.value for e in Evaluator], default="closed_form")

    p = sub.add_parser("sweep", parents=[common], help="parameter sweeps with CSV and SVG output")
    p.add_argument("--experiment", action="append", default=[],
                   help=f"suite experiment or 'all' ({', '.join(SUITE)})")
    p.add_argument("--kind", choices=[k.value for k in SweepKind])
    p.add_argument("--axis", default=None, help="comma-separated axis values")
    p.add_argument("--normalization", choices=[n.value for n in Normalization], default="none")
    p.add_argument("--outputs", default=",".join(OUTPUTS))
    p.add_argument("--name", default="sweep", help="file stem for a custom sweep")
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("oracle", parents=[common], help="lattice search, cost surface as CSV")
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--evaluator", choices=[e.value for e in Evaluator], default="closed_form")
    return ap


def _overrides(items) -> dict:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise ConfigError(f"--set {key}: not a number") from exc
    return out


def _expectation(args, evaluator="closed_form") -> ExpectationConfig:
    if args.method == "quad":
        return ExpectationConfig(Quadrature(args.nodes), Evaluator(evaluator))
    if args.seed is None:
        raise ConfigError("--seed is required with --method saa")
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    return ExpectationConfig(SAA(args.samples, args.seed), Evaluator(evaluator))


def _print_pairs(rows, out) -> None:
    out.write(csv_text(("field", "value"), rows))


def _fmt(v) -> object:
    return getattr(v, "value", v)


def cmd_regime(args, inst, out) -> int:
    tag = classify_regime(inst)
    _print_pairs([
        ("label", tag.label), ("allocation_case", tag.allocation_case.value),
        ("stage2_alpha", tag.stage2_alpha.value), ("stage2_gamma", tag.stage2_gamma.value),
        ("consistent_delta", tag.consistent_delta), ("relabelled", tag.swapped),
    ], out)
    return EXIT_OK


def cmd_solve(args, inst, out) -> int:
    cfg = SolverConfig(_expectation(args), cross_check=not args.no_cross_check,
                       check_samples=min(20_000, args.samples))
    res = solve(inst, cfg)
    e = res.expected
    rows = [
        ("x1_alpha", res.x1.x1_alpha), ("x1_gamma", res.x1.x1_gamma),
        ("method_alpha", _fmt(res.method.alpha)), ("method_gamma", _fmt(res.method.gamma)),
        ("foc_residual_alpha", res.foc_residual.alpha), ("foc_residual_gamma", res.foc_residual.gamma),
        ("first_stage", e.first_stage), ("second_stage", e.second_stage_training),
        ("opportunity", e.opportunity), ("total", e.total), ("stderr", e.stderr),
        ("regime", res.regime.label),
    ]
    check = res.diagnostics.get("cross_check")
    if check:
        rows.append(("global_better", check["global_better"]))
    _print_pairs(rows, out)
    return EXIT_OK


def cmd_evaluate(args, inst, out) -> int:
    x1 = FirstStage(*args.x1)
    if args.scenario:
        da, dg, d1a, d1g, d2a, d2g = args.scenario
        s = Scenario(da, dg, Pair(d1a, d1g), Pair(d2a, d2g))
        orc = recourse_oracle(inst, x1, s)
        rows = [("region", classify_region(inst, x1, s).value)]
        try:
            cf = recourse_closed_form(inst, x1, s)
            rows.append(("closed_form_cost", cf.cost))
        except CrossTrainError as exc:
            rows.append(("closed_form_cost", f"n/a ({exc})"))
        rows += [
            ("oracle_cost", orc.cost), ("flexible_to_alpha", orc.flexible_to_alpha),
            ("flexible_to_gamma", orc.flexible_to_gamma),
            ("stage2_train_alpha", orc.stage2_train_alpha),
            ("stage2_train_gamma", orc.stage2_train_gamma),
            ("lost_alpha", orc.lost_alpha), ("lost_gamma", orc.lost_gamma),
        ]
        _print_pairs(rows, out)
        return EXIT_OK
    e = expected_cost(inst, x1, _expectation(args, args.evaluator))
    _print_pairs([("first_stage", e.first_stage), ("second_stage", e.second_stage_training),
                  ("opportunity", e.opportunity), ("total", e.total), ("stderr", e.stderr)], out)
    return EXIT_OK


def cmd_sweep(args, inst, out) -> int:
    cfg = SolverConfig(_expectation(args), check_samples=min(20_000, args.samples))
    jobs = []
    names = list(SUITE) if "all" in args.experiment else args.experiment
    for name in names:
        if name not in SUITE:
            raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(SUITE)}")
        jobs.append((name, lambda e=SUITE[name]: e.run(inst, cfg)))
    if args.kind:
        axis = tuple(float(v) for v in args.axis.split(",")) if args.axis else ()
        spec = SweepSpec(args.kind, axis, outputs=tuple(args.outputs.split(",")),
                         normalization=args.normalization)
        jobs.append((args.name, lambda: run_sweep(inst, spec, cfg, args.name)))
    if not jobs:
        raise ConfigError("sweep needs --experiment or --kind")
    status = EXIT_OK
    for name, job in jobs:
        table = job()
        written = [emit_csv(table, args.out_dir / f"{name}.csv")]
        if not args.no_plot:
            written.append(emit_svg(table, args.out_dir / f"{name}.svg", PlotStyle()))
        failed = sum(1 for r in table.rows if str(r[-1]).startswith("error"))
        if failed:
            status = EXIT_NUMERIC
        out.write(f"{name}: {len(table.rows)} rows, {failed} failed -> "
                  + ", ".join(str(p) for p in written) + "\n")
    return status


def cmd_oracle(args, inst, out) -> int:
    rep = grid_minimize(inst, args.step, _expectation(args, args.evaluator))
    path = surface_csv(rep, args.out_dir / "surface.csv")
    _print_pairs([("best_x1_alpha", rep.best_x1.x1_alpha), ("best_x1_gamma", rep.best_x1.x1_gamma),
                  ("best_cost", rep.best_cost), ("grid_step", rep.grid_step),
                  ("surface", str(path))], out)
    return EXIT_OK


COMMANDS = {"regime": cmd_regime, "solve": cmd_solve, "evaluate": cmd_evaluate,
            "sweep": cmd_sweep, "oracle": cmd_oracle}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        inst = config.load(args.config)
        over = _overrides(args.set)
        if over:
            inst = with_overrides(inst, **over)
        return COMMANDS[args.command](args, inst, out)
    except (ConfigError, FeasibilityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CrossTrainError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
