"""Bounded weighted cross-sectional regression for combining trading signals
and constructing long-short portfolios.

The package covers the full path from raw panels to weights: panel loading
and universe selection, loadings construction (principal components, binary
classifications, intercept, style columns), plain weighted regression, the
bounded solver with its nested pinned-set and normalization iterations, an
exhaustive test oracle, dollar-space bound policies, and a daily
open-to-close backtest harness.
"""

from .errors import (
    BoundedRegError,
    ConvergenceError,
    DegenerateProblemError,
    InfeasibleError,
    PanelFormatError,
    SingularMatrixError,
    ValidationError,
)
from .panel import (
    PricePanel,
    TimeSeriesPanel,
    UniverseSelection,
    compute_addv,
    load_panel,
    select_universe,
    serialize_panel,
)
from .loadings import (
    CovarianceMatrix,
    LoadingsMatrix,
    augment_style_columns,
    classification_loadings,
    intercept_loadings,
    pca_loadings,
    sample_covariance,
)
from .weighted_regression import (
    RegressionResult,
    RegressionWeights,
    gamma_seed,
    regression_weights_from_cov,
    unbounded_weights,
    weighted_residuals,
)
from .bounded_regression import (
    BoundPolicy,
    BoundSpec,
    BoundedSolution,
    KKTReport,
    SolveState,
    SolverConfig,
    bounded_regression,
    bounded_regression_rebalance,
    bounds_from_policy,
    clip_step,
    kkt_certificate,
    restricted_normal_matrix,
    solve_bounded,
    solve_fixed_gamma,
)
from .oracle import (
    AT_LOWER,
    AT_UPPER,
    FREE,
    OracleSolution,
    oracle_bounded_regression,
    oracle_fixed_gamma,
)
from .portfolio import (
    HoldingsVector,
    PositionLimits,
    TradeVector,
    establishing_bounds,
    load_bound_overrides,
    rebalancing_bounds,
    weights_to_holdings,
)
from .backtest import (
    BacktestConfig,
    BacktestReport,
    DayRecord,
    mean_reversion_returns,
    run_backtest,
    shares_traded,
    summarize,
    write_cumpnl_csv,
    write_report_csv,
    write_weights_csv,
)
from .synthetic import generate_synthetic_prices, synthetic_labels, synthetic_styles
from .verify import RandomInstance, VerifyReport, random_instance, run_verification

__version__ = "0.1.0"

__all__ = [
    "AT_LOWER", "AT_UPPER", "FREE",
    "BacktestConfig", "BacktestReport", "BoundPolicy", "BoundSpec",
    "BoundedRegError", "BoundedSolution", "ConvergenceError", "CovarianceMatrix",
    "DayRecord", "DegenerateProblemError", "HoldingsVector", "InfeasibleError",
    "KKTReport", "LoadingsMatrix", "OracleSolution", "PanelFormatError",
    "PositionLimits", "PricePanel", "RandomInstance", "RegressionResult",
    "RegressionWeights", "SingularMatrixError", "SolveState", "SolverConfig",
    "TimeSeriesPanel", "TradeVector", "UniverseSelection", "ValidationError",
    "VerifyReport", "augment_style_columns", "bounded_regression",
    "bounded_regression_rebalance", "bounds_from_policy", "classification_loadings",
    "clip_step", "compute_addv", "establishing_bounds", "gamma_seed",
    "generate_synthetic_prices", "intercept_loadings", "kkt_certificate",
    "load_bound_overrides", "load_panel", "mean_reversion_returns",
    "oracle_bounded_regression", "oracle_fixed_gamma", "pca_loadings",
    "random_instance", "rebalancing_bounds", "regression_weights_from_cov",
    "restricted_normal_matrix", "run_backtest", "run_verification",
    "sample_covariance", "select_universe", "serialize_panel", "shares_traded",
    "solve_bounded", "solve_fixed_gamma", "summarize", "synthetic_labels",
    "synthetic_styles", "unbounded_weights", "weighted_residuals",
    "weights_to_holdings", "write_cumpnl_csv", "write_report_csv",
    "write_weights_csv",
]
