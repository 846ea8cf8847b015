"""Command-line entry point for batch solves, rebalances, backtests, solver
verification, and synthetic data generation.

Exit codes are a stable contract: 0 success, 1 input error, 2 solver
non-convergence or infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .backtest import (
    BacktestConfig,
    run_backtest,
    write_cumpnl_csv,
    write_report_csv,
    write_weights_csv,
)
from .bounded_regression import (
    BoundSpec,
    SolverConfig,
    solve_bounded,
)
from .errors import BoundedRegError, ConvergenceError, ValidationError
from .loadings import (
    augment_style_columns,
    classification_loadings,
    intercept_loadings,
    pca_loadings,
    sample_covariance,
)
from .panel import PricePanel, load_panel, serialize_panel, TimeSeriesPanel
from .portfolio import PositionLimits, rebalancing_bounds
from .synthetic import generate_synthetic_prices, synthetic_labels, synthetic_styles
from .verify import run_verification
from .weighted_regression import RegressionWeights

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (BoundedRegError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundedreg",
        description="Bounded weighted cross-sectional regression toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one bounded allocation problem")
    p.add_argument("--alpha", required=True, help="CSV id,alpha")
    p.add_argument("--loadings", required=True, help=(
        "intercept | classification=<file> | classification+styles=<file>,<file> "
        "| pca=<panel file>,<eigen_tol>"))
    p.add_argument("--weights", help="CSV id,z (defaults to inverse variances for pca)")
    p.add_argument("--bounds", help="CSV id,lower,upper in weight units; default none")
    p.add_argument("--config", help="key=value file for solver settings")
    p.add_argument("--out", required=True, help="output CSV id,weight")
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("rebalance", help="solve with prior holdings and trade bounds")
    p.add_argument("--alpha", required=True, help="CSV id,alpha (expected returns)")
    p.add_argument("--loadings", required=True)
    p.add_argument("--weights", help="CSV id,z")
    p.add_argument("--prior", required=True, help="CSV id,dollars of current holdings")
    p.add_argument("--investment", required=True, type=float,
                   help="total dollar investment level (long plus short)")
    p.add_argument("--trade-bounds", help="CSV id,lower,upper in trade dollars")
    p.add_argument("--limits", help="xi=..,xi_tilde=..,xi_prime=.. (needs --addv)")
    p.add_argument("--addv", help="CSV id,addv (dollars/day), used with --limits")
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output CSV id,weight,trade_weight")
    p.set_defaults(handler=_cmd_rebalance)

    p = sub.add_parser("backtest", help="run the daily open-to-close protocol")
    p.add_argument("--data-dir", required=True,
                   help="directory with open.csv, close_adj.csv, volume.csv")
    p.add_argument("--config", help="key=value file for backtest/solver settings")
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--cumpnl", help="cumulative pnl CSV path (default <out dir>/cumpnl.csv)")
    p.add_argument("--weights-out", help="optional per-day weights CSV")
    p.set_defaults(handler=_cmd_backtest)

    p = sub.add_parser("verify", help="cross-check the solver against the oracle")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--instances", required=True, type=int)
    p.add_argument("--max-n", type=int, default=8)
    p.add_argument("--max-k", type=int, default=3)
    p.add_argument("--solver-prec", type=float, default=1e-10)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic dataset")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--instruments", type=int, default=5)
    p.add_argument("--days", type=int, default=100)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--reversion", type=float, default=1.0)
    p.add_argument("--sigma-gap", type=float, default=0.01)
    p.add_argument("--sigma-walk", type=float, default=0.0)
    p.add_argument("--base-volume-low", type=float, default=1e6)
    p.add_argument("--base-volume-high", type=float, default=1e7)
    p.add_argument("--categories", type=int, default=2)
    p.add_argument("--styles", type=int, default=1)
    p.set_defaults(handler=_cmd_gen_synthetic)
    return parser


# ---------------------------------------------------------------- file formats

def _read_rows(path, expected_fields, what):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ValidationError(f"{what} file {path} is empty")
    header = [c.strip() for c in rows[0]]
    if len(header) != expected_fields:
        raise ValidationError(
            f"{what} file {path} header has {len(header)} fields, "
            f"expected {expected_fields}"
        )
    out = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != expected_fields:
            raise ValidationError(f"{what} file {path} row {i} has {len(row)} fields")
        out.append([c.strip() for c in row])
    return out


def _read_vector(path, what) -> tuple[list[str], np.ndarray]:
    rows = _read_rows(path, 2, what)
    ids = [r[0] for r in rows]
    values = np.array([float(r[1]) for r in rows])
    return ids, values


def _read_bounds(path) -> tuple[list[str], np.ndarray, np.ndarray]:
    rows = _read_rows(path, 3, "bounds")
    ids = [r[0] for r in rows]
    lower = np.array([float(r[1]) for r in rows])
    upper = np.array([float(r[2]) for r in rows])
    return ids, lower, upper


def _read_labels(path) -> tuple[list[str], list[str]]:
    rows = _read_rows(path, 2, "classification")
    return [r[0] for r in rows], [r[1] for r in rows]


def _read_styles(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 2:
        raise ValidationError(f"styles file {path} needs a header and data rows")
    width = len(rows[0])
    if width < 2:
        raise ValidationError(f"styles file {path} needs at least one style column")
    ids, values = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ValidationError(f"styles file {path} row {i} has {len(row)} fields")
        ids.append(row[0].strip())
        values.append([float(c) for c in row[1:]])
    return ids, np.array(values)


def _align(ref_ids, ids, values, what):
    if ids == ref_ids:
        return values
    index = {inst: i for i, inst in enumerate(ids)}
    missing = [inst for inst in ref_ids if inst not in index]
    if missing or len(ids) != len(ref_ids):
        raise ValidationError(
            f"{what} ids do not match the alpha file (missing: {missing[:5]})"
        )
    order = [index[inst] for inst in ref_ids]
    if isinstance(values, list):
        return [values[i] for i in order]
    return values[order]


def _read_config_file(path) -> dict:
    settings = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"config line {line_no} is not key=value: {line!r}")
            key, value = line.split("=", 1)
            settings[key.strip()] = value.strip()
    return settings


_SOLVER_KEYS = {"tol": float, "prec": float, "max_inner": int, "max_outer": int}
_BACKTEST_KEYS = {
    "universe_size": int, "window": int, "refresh_period": int,
    "investment_level": float, "bound_mode": str, "addv_fraction": float,
    "loadings_incarnation": str,
}


def _solver_config(settings: dict) -> SolverConfig:
    kwargs = {}
    for key, cast in _SOLVER_KEYS.items():
        if key in settings:
            kwargs[key] = cast(settings[key])
    return SolverConfig(**kwargs)


def _backtest_config(settings: dict) -> BacktestConfig:
    kwargs = {}
    for key, cast in _BACKTEST_KEYS.items():
        if key in settings:
            kwargs[key] = cast(settings[key])
    unknown = set(settings) - set(_BACKTEST_KEYS) - set(_SOLVER_KEYS)
    if unknown:
        raise ValidationError(f"unknown config key(s): {sorted(unknown)}")
    return BacktestConfig(solver=_solver_config(settings), **kwargs)


def _build_loadings(spec: str, ref_ids: list[str]):
    """Parse the --loadings argument and build the matrix plus optional z."""
    n = len(ref_ids)
    if spec == "intercept":
        return intercept_loadings(n), None
    if spec.startswith("classification+styles="):
        paths = spec.split("=", 1)[1].split(",")
        if len(paths) != 2:
            raise ValidationError("classification+styles needs two file paths")
        ids, labels = _read_labels(paths[0])
        labels = _align(ref_ids, ids, labels, "classification")
        sids, styles = _read_styles(paths[1])
        styles = _align(ref_ids, sids, styles, "styles")
        return augment_style_columns(classification_loadings(labels), styles), None
    if spec.startswith("classification="):
        ids, labels = _read_labels(spec.split("=", 1)[1])
        labels = _align(ref_ids, ids, labels, "classification")
        return classification_loadings(labels), None
    if spec.startswith("pca="):
        parts = spec.split("=", 1)[1].split(",")
        if len(parts) != 2:
            raise ValidationError("pca needs <panel file>,<eigen_tol>")
        panel = load_panel(parts[0])
        if panel.instrument_ids != ref_ids:
            raise ValidationError("pca panel ids do not match the alpha file")
        cov = sample_covariance(panel)
        lam = pca_loadings(cov, eigen_tol=float(parts[1]))
        return lam, RegressionWeights(1.0 / cov.diag)
    raise ValidationError(f"cannot parse loadings spec {spec!r}")


def _resolve_z(args, ref_ids, derived: RegressionWeights | None) -> RegressionWeights:
    if args.weights:
        ids, z = _read_vector(args.weights, "regression weights")
        return RegressionWeights(_align(ref_ids, ids, z, "regression weights"))
    if derived is not None:
        return derived
    raise ValidationError("--weights is required unless --loadings pca=... provides them")


def _neutrality(lam: np.ndarray, weights: np.ndarray) -> float:
    return float(np.abs(lam.T @ weights).max())


# ------------------------------------------------------------------- commands

def _cmd_solve(args) -> int:
    ids, alpha = _read_vector(args.alpha, "alpha")
    lam, derived_z = _build_loadings(args.loadings, ids)
    z = _resolve_z(args, ids, derived_z)
    if args.bounds:
        bids, lower, upper = _read_bounds(args.bounds)
        lower = _align(ids, bids, lower, "bounds")
        upper = _align(ids, bids, upper, "bounds")
        bounds = BoundSpec(lower, upper)
    else:
        bounds = BoundSpec.unbounded(len(ids))
    config = _solver_config(_read_config_file(args.config)) if args.config else SolverConfig()

    solution = solve_bounded(alpha, lam, z, bounds, config)
    _write_weight_csv(args.out, ids, [("weight", solution.weights)])
    print(f"sum_abs_weight={np.abs(solution.weights).sum():.12g}")
    print(f"neutrality_residual={_neutrality(lam.values, solution.weights):.3e}")
    print(f"outer_iterations={solution.state.outer_iterations}")
    print(f"inner_iterations={solution.state.total_inner_iterations}")
    return EXIT_OK


def _cmd_rebalance(args) -> int:
    ids, alpha = _read_vector(args.alpha, "alpha")
    lam, derived_z = _build_loadings(args.loadings, ids)
    z = _resolve_z(args, ids, derived_z)
    pids, prior_dollars = _read_vector(args.prior, "prior holdings")
    prior_dollars = _align(ids, pids, prior_dollars, "prior holdings")
    investment = args.investment
    if investment <= 0:
        raise ValidationError("--investment must be positive")
    prior_weights = prior_dollars / investment

    if args.trade_bounds:
        bids, lower, upper = _read_bounds(args.trade_bounds)
        lower = _align(ids, bids, lower, "trade bounds")
        upper = _align(ids, bids, upper, "trade bounds")
        dollar_bounds = BoundSpec(lower, upper)
    elif args.limits and args.addv:
        limits = _parse_limits(args.limits)
        aids, addv = _read_vector(args.addv, "addv")
        addv = _align(ids, aids, addv, "addv")
        dollar_bounds = rebalancing_bounds(limits, investment, addv, prior_dollars)
    else:
        raise ValidationError("provide --trade-bounds or both --limits and --addv")
    trade_bounds = dollar_bounds.scaled(1.0 / investment)
    config = _solver_config(_read_config_file(args.config)) if args.config else SolverConfig()

    from .bounded_regression import bounded_regression_rebalance

    weights, trades = bounded_regression_rebalance(alpha, lam, z, trade_bounds,
                                                   prior_weights, config)
    _write_weight_csv(args.out, ids, [("weight", weights), ("trade_weight", trades)])
    print(f"sum_abs_weight={np.abs(weights).sum():.12g}")
    print(f"neutrality_residual={_neutrality(lam.values, weights):.3e}")
    print(f"gross_trade={np.abs(trades).sum():.12g}")
    return EXIT_OK


def _parse_limits(text: str) -> PositionLimits:
    values = {}
    for part in text.split(","):
        if "=" not in part:
            raise ValidationError(f"cannot parse limits field {part!r}")
        key, val = part.split("=", 1)
        values[key.strip()] = float(val)
    try:
        return PositionLimits(**values)
    except TypeError:
        raise ValidationError("limits must set xi, xi_tilde, and optionally xi_prime")


def _cmd_backtest(args) -> int:
    data_dir = args.data_dir
    panels = {}
    for name in ("open", "close_adj", "volume"):
        path = os.path.join(data_dir, f"{name}.csv")
        if not os.path.exists(path):
            raise ValidationError(f"missing panel file {path}")
        panels[name] = load_panel(path)
    prices = PricePanel.from_panels(panels["open"], panels["close_adj"], panels["volume"])

    settings = _read_config_file(args.config) if args.config else {}
    config = _backtest_config(settings)
    if args.weights_out:
        config.store_weights = True

    classification = styles = None
    cls_path = os.path.join(data_dir, "classification.csv")
    if os.path.exists(cls_path):
        ids, labels = _read_labels(cls_path)
        classification = _align(prices.instrument_ids, ids, labels, "classification")
    styles_path = os.path.join(data_dir, "styles.csv")
    if os.path.exists(styles_path):
        sids, style_values = _read_styles(styles_path)
        styles = _align(prices.instrument_ids, sids, style_values, "styles")

    report = run_backtest(config, prices, classification=classification, styles=styles)
    write_report_csv(report, args.out)
    cumpnl_path = args.cumpnl or os.path.join(os.path.dirname(args.out) or ".",
                                              "cumpnl.csv")
    write_cumpnl_csv(report, cumpnl_path)
    if args.weights_out:
        write_weights_csv(report, args.weights_out)
    sr_text = "undefined" if report.sr is None else f"{report.sr:.6g}"
    print(f"days_traded={len(report.days)} days_skipped={len(report.skipped)}")
    print(f"roc={report.roc:.6g} sr={sr_text} cps={report.cps:.6g}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.instances < 0:
        raise ValidationError("--instances must be >= 0")
    if args.instances == 0:
        print("warning: 0 instances requested; trivially passing")
        return EXIT_OK
    if args.max_n > 12:
        raise ValidationError("--max-n must be <= 12 (oracle enumeration cap)")
    report = run_verification(args.seed, args.instances, max_n=args.max_n,
                              max_k=args.max_k, solver_prec=args.solver_prec)
    print(f"instances={report.instances} compared={report.compared} "
          f"solver_only_failed={report.solver_failures} "
          f"oracle_only_failed={report.oracle_failures} "
          f"both_failed={report.both_failed}")
    print(f"max_discrepancy={report.max_discrepancy:.3e} "
          f"elapsed={report.elapsed_seconds:.2f}s")
    if not report.passed():
        for idx, disc in report.failures[:10]:
            print(f"FAIL instance {idx}: discrepancy {disc:.3e}")
        print("verification FAILED")
        return EXIT_SOLVER
    print("verification passed")
    return EXIT_OK


def _cmd_gen_synthetic(args) -> int:
    prices = generate_synthetic_prices(
        args.instruments, args.days, args.seed, reversion=args.reversion,
        sigma_gap=args.sigma_gap, sigma_walk=args.sigma_walk,
        base_volume_range=(args.base_volume_low, args.base_volume_high),
    )
    os.makedirs(args.out_dir, exist_ok=True)
    for name, values in (("open", prices.open), ("close_adj", prices.close_adj),
                         ("volume", prices.volume)):
        panel = TimeSeriesPanel(prices.instrument_ids, prices.dates, values)
        with open(os.path.join(args.out_dir, f"{name}.csv"), "w") as fh:
            fh.write(serialize_panel(panel))
    labels = synthetic_labels(args.instruments, args.categories)
    with open(os.path.join(args.out_dir, "classification.csv"), "w") as fh:
        fh.write("id,label\n")
        for inst, lab in zip(prices.instrument_ids, labels):
            fh.write(f"{inst},{lab}\n")
    if args.styles > 0:
        styles = synthetic_styles(args.instruments, args.styles, args.seed + 1)
        with open(os.path.join(args.out_dir, "styles.csv"), "w") as fh:
            header = ",".join(["id"] + [f"style{j}" for j in range(args.styles)])
            fh.write(header + "\n")
            for inst, row in zip(prices.instrument_ids, styles):
                fh.write(",".join([inst] + [f"{v:.17g}" for v in row]) + "\n")
    print(f"wrote synthetic dataset to {args.out_dir}")
    return EXIT_OK


def _write_weight_csv(path, ids, columns):
    header = ",".join(["id"] + [name for name, _ in columns])
    lines = [header]
    for i, inst in enumerate(ids):
        cells = [f"{values[i]:.17g}" for _, values in columns]
        lines.append(",".join([inst] + cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
