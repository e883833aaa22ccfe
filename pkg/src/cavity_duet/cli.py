"""``cavity-duet`` command line.

Exit codes: 0 ok, 2 parse, 3 validation, 4 numerical failure,
5 factorization breakdown, 6 I/O.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .analytic import ProductEvolution
from .config import RunConfig, parse_config
from .errors import CavityDuetError, FactorizationBreakdown
from .observables import COMPARED, classify_regime, compute_series, run_table, tau_grid
from .output import emit_coeffs, emit_csv, emit_svg
from .params import TABLE_ROWS, WINDOWS
from .sector import basis_state, build_sector_basis

EXIT_OK = 0
EXIT_PARSE = 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat TOML run configuration")
    common.add_argument("--preset", choices=("fig1", "fig2", "fig3", "table"))
    common.add_argument("--tau-max", type=float, help="end of the time window, in periods of cavity one")
    common.add_argument("--tau-step", type=float, help="output grid spacing")
    common.add_argument("--out", type=str, help="output directory")
    common.add_argument("--csv", action="store_const", const=True, help="write the observable CSV")
    common.add_argument("--svg", action="store_const", const=True, help="write the SVG panels")

    parser = argparse.ArgumentParser(
        prog="cavity-duet",
        description="Product-form vs exact evolution of two hopping-coupled JC cavities.")
    sub = parser.add_subparsers(dest="command", metavar="{run,figure,table,coeffs}")
    sub.required = True
    sub.add_parser("run", parents=[common], help="propagate one configuration on both paths")
    fig = sub.add_parser("figure", parents=[common], help="reproduce one of the figure regimes")
    fig.add_argument("name", choices=("fig1", "fig2", "fig3"))
    sub.add_parser("table", parents=[common], help="classify the five regimes of the validity table")
    sub.add_parser("coeffs", parents=[common], help="dump the gamma/beta coefficient table")
    return parser


def _config(args, **forced) -> RunConfig:
    overrides = dict(preset=args.preset, tau_max=args.tau_max, tau_step=args.tau_step,
                     out=args.out, csv=args.csv, svg=args.svg)
    overrides.update(forced)
    return parse_config(args.config, **overrides)


def _series(cfg: RunConfig):
    basis = build_sector_basis(sum(cfg.initial_state))
    psi0 = basis_state(basis, cfg.initial_state)
    return compute_series(cfg.params, psi0, tau_grid(cfg.tau_max, cfg.tau_step))


def _summary(series, stream) -> None:
    diffs = series.max_abs_diff()
    report = classify_regime(series)
    cols = ", ".join(f"{k}={diffs[k]:.3e}" for k in COMPARED)
    print(f"max |A - N| over tau in [0, {series.tau[-1]:g}]: {cols}", file=stream)
    print(f"verdict: {report.verdict.value}", file=stream)


def _cmd_run(args, stream) -> int:
    cfg = _config(args)
    series = _series(cfg)
    stem = cfg.preset or "run"
    if cfg.csv:
        print(f"wrote {emit_csv(series, cfg.out / f'{stem}.csv')}", file=stream)
    if cfg.svg:
        layout = stem if stem in ("fig1", "fig2", "fig3") else "run"
        print(f"wrote {emit_svg(series, cfg.out / f'{stem}.svg', layout)}", file=stream)
    if cfg.coeffs:
        _write_coeffs(cfg, stem, stream)
    _summary(series, stream)
    return EXIT_OK


def _cmd_figure(args, stream) -> int:
    if args.config is not None:
        # a config may adjust the window and outputs, never the figure's physics
        cfg = parse_config(args.config, preset=args.name, tau_max=args.tau_max,
                           tau_step=args.tau_step, out=args.out)
    else:
        cfg = parse_config(None, preset=args.name, tau_max=args.tau_max,
                           tau_step=args.tau_step, out=args.out)
    series = _series(cfg)
    print(f"wrote {emit_csv(series, cfg.out / f'{args.name}.csv')}", file=stream)
    print(f"wrote {emit_svg(series, cfg.out / f'{args.name}.svg', args.name)}", file=stream)
    _summary(series, stream)
    return EXIT_OK


def _cmd_table(args, stream) -> int:
    tau_max = args.tau_max if args.tau_max is not None else WINDOWS["table"]
    tau_step = args.tau_step if args.tau_step is not None else 0.05
    reports = run_table([p for p, _ in TABLE_ROWS], tau_max=tau_max, tau_step=tau_step)
    print(f"{'g1/w1':>7} {'g2/w2':>7} {'lam/w1':>7} {'max|dA-N|':>10}  verdict  (expected)", file=stream)
    for (params, expected), rep in zip(TABLE_ROWS, reports):
        worst = max(rep.max_abs_diff[k] for k in COMPARED)
        print(f"{params.g1:7.3g} {params.g2 / params.omega2:7.3g} {params.lam:7.3g} "
              f"{worst:10.3e}  {rep.verdict.value}  ({expected})", file=stream)
    return EXIT_OK


def _write_coeffs(cfg: RunConfig, stem: str, stream) -> None:
    basis = build_sector_basis(sum(cfg.initial_state))
    evo = ProductEvolution.build(cfg.params, basis, tau_grid(cfg.tau_max, cfg.tau_step))
    print(f"wrote {emit_coeffs(evo, cfg.out / f'{stem}_coeffs.csv')}", file=stream)


def _cmd_coeffs(args, stream) -> int:
    cfg = _config(args)
    _write_coeffs(cfg, cfg.preset or "run", stream)
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "figure": _cmd_figure, "table": _cmd_table, "coeffs": _cmd_coeffs}


def run_main(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    try:
        with np.errstate(invalid="raise", divide="raise", over="raise"):
            return COMMANDS[args.command](args, stream)
    except FactorizationBreakdown as exc:
        print(f"cavity-duet: factorization breakdown at tau={exc.tau}: {exc}", file=sys.stderr)
        return exc.exit_code
    except CavityDuetError as exc:
        print(f"cavity-duet: {exc}", file=sys.stderr)
        return exc.exit_code
    except FloatingPointError as exc:
        print(f"cavity-duet: numerical failure: {exc}", file=sys.stderr)
        return 4


def main() -> None:
    sys.exit(run_main())
