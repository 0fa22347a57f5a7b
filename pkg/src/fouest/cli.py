"""Command line interface.

Subcommands: `constants` (closed-form table), `simulate` (write one path as
CSV), `estimate` (run an estimator on a path CSV), `experiment` (run a JSON
config and write its report). Exit codes: 0 success, 1 verdict failure,
2 usage/config error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .asymptotics import constants_table
from .errors import (
    CholeskyFailed,
    CirculantEmbeddingFailed,
    ConfigError,
    DegeneratePath,
    DomainError,
    SchemeUnstable,
)
from .estimators import theta_hat_ito, theta_hat_oracle, theta_hat_prime, theta_tilde
from .fbm import LABEL_FOU, SamplePath, TimeGrid, generate_fbm
from .fou import FouParams, simulate_fou
from .harness import load_config, run_experiment, write_report

_NUMERICAL_ERRORS = (
    DomainError,
    DegeneratePath,
    SchemeUnstable,
    CirculantEmbeddingFailed,
    CholeskyFailed,
    FloatingPointError,
)

_CLI_ESTIMATORS = ("tilde", "hat-oracle", "hat-prime", "hat-ito")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fou",
        description="Fractional Ornstein-Uhlenbeck simulation and drift estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_const = sub.add_parser("constants", help="print the closed-form constants table")
    p_const.add_argument("--h", type=float, required=True)
    p_const.add_argument("--theta", type=float, default=1.0)
    p_const.add_argument("--sigma", type=float, default=1.0)
    p_const.add_argument("--json", action="store_true", dest="as_json")

    p_sim = sub.add_parser("simulate", help="simulate one fOU path and write it as CSV")
    p_sim.add_argument("--h", type=float, required=True)
    p_sim.add_argument("--theta", type=float, required=True)
    p_sim.add_argument("--sigma", type=float, required=True)
    p_sim.add_argument("--t", type=float, required=True, help="time horizon T")
    p_sim.add_argument("--delta", type=float, required=True, help="grid spacing")
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--out", type=Path, required=True, help="output CSV (header t,x)")

    p_est = sub.add_parser("estimate", help="run a drift estimator on a path CSV")
    p_est.add_argument("--estimator", choices=_CLI_ESTIMATORS, required=True)
    p_est.add_argument("--in", dest="path_csv", type=Path, required=True)
    p_est.add_argument("--theta-true", type=float, default=None)
    p_est.add_argument("--sigma", type=float, default=None)
    p_est.add_argument("--h", type=float, default=None)

    p_exp = sub.add_parser("experiment", help="run a JSON experiment config")
    p_exp.add_argument("--config", type=Path, required=True)
    p_exp.add_argument("--out", type=Path, required=True, help="output directory")
    return parser


def _cmd_constants(args: argparse.Namespace) -> int:
    table = constants_table(args.h, theta=args.theta, sigma=args.sigma)
    data = asdict(table)
    if args.as_json:
        print(json.dumps(data, indent=2, sort_keys=True))
        return 0
    width = max(len(k) for k in data)
    for key, value in data.items():
        shown = "n/a" if value is None else f"{value:.12g}"
        print(f"{key:<{width}}  {shown}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    steps = args.t / args.delta
    if args.t <= 0 or args.delta <= 0 or abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
        print(f"error: --t {args.t} must be a positive integer multiple of --delta {args.delta}",
              file=sys.stderr)
        return 2
    grid = TimeGrid(t_max=args.t, n_steps=round(steps))
    params = FouParams(theta=args.theta, sigma=args.sigma, h=args.h)
    path = simulate_fou(params, generate_fbm(grid, args.h, args.seed))
    lines = ["t,x"]
    for t, x in zip(grid.times(), path.values):
        lines.append(f"{t:.17g},{x:.17g}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(path.values)} points to {args.out}")
    return 0


def _read_path_csv(csv_path: Path, hurst: float | None) -> SamplePath:
    rows = csv_path.read_text().strip().splitlines()
    if not rows or rows[0].strip() != "t,x":
        raise ConfigError(f"{csv_path}: expected CSV with header 't,x'")
    data = np.array([[float(cell) for cell in row.split(",")] for row in rows[1:]])
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise ConfigError(f"{csv_path}: expected two columns and at least two rows")
    t, x = data[:, 0], data[:, 1]
    spacings = np.diff(t)
    if t[0] != 0.0 or spacings.min() <= 0 or np.ptp(spacings) > 1e-9 * spacings[0]:
        raise ConfigError(f"{csv_path}: time column must be a uniform grid starting at 0")
    grid = TimeGrid(t_max=float(t[-1]), n_steps=len(t) - 1)
    return SamplePath(grid=grid, values=x, label=LABEL_FOU, hurst=hurst)


def _cmd_estimate(args: argparse.Namespace) -> int:
    name = args.estimator.replace("-", "_")
    needs_sigma_h = name in ("tilde", "hat_oracle")
    if needs_sigma_h and (args.sigma is None or args.h is None):
        print(f"error: --estimator {args.estimator} requires --sigma and --h", file=sys.stderr)
        return 2
    if name == "hat_oracle" and args.theta_true is None:
        print("error: --estimator hat-oracle requires --theta-true", file=sys.stderr)
        return 2
    path = _read_path_csv(args.path_csv, args.h)
    if name == "tilde":
        result = theta_tilde(path, args.sigma, args.h)
    elif name == "hat_oracle":
        result = theta_hat_oracle(path, args.sigma, args.h, args.theta_true)
    elif name == "hat_prime":
        result = theta_hat_prime(path)
    else:
        result = theta_hat_ito(path, h=args.h)
    print(json.dumps(asdict(result)))
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    report = run_experiment(config)
    json_path, csv_path = write_report(report, args.out)
    for verdict in report.verdicts:
        status = "PASS" if verdict.passed else "FAIL"
        print(f"[{status}] {verdict.name}: observed={verdict.observed:.6g} "
              f"target={verdict.target:.6g} tolerance={verdict.tolerance:.6g}")
    for flag in report.flags:
        print(f"[flag] {flag}")
    print(f"report: {json_path}")
    print(f"records: {csv_path}")
    return 0 if report.passed else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "constants": _cmd_constants,
        "simulate": _cmd_simulate,
        "estimate": _cmd_estimate,
        "experiment": _cmd_experiment,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
