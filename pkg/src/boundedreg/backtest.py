"""Daily open-to-close paper backtest for mean-reversion signals.

Positions are established at the open and liquidated at the close of the
same day, with no transaction costs or slippage. Expected returns are the
negated overnight gap (open against the prior adjusted close). The universe,
the per-name signal variances, and the dollar-volume figures refresh on a
fixed cadence rather than daily. Weights come from the plain regression or,
in bounded mode, from the bounded solver with each name's dollar position
capped at a fraction of its average daily dollar volume.

Days the solver cannot price (zero signal variance everywhere, infeasible
bounds, non-convergence) are skipped, logged on the report, and excluded
from the summary statistics rather than zero-filled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .bounded_regression import BoundSpec, SolverConfig, bounded_regression
from .errors import ConvergenceError, DegenerateProblemError, SingularMatrixError, \
    ValidationError
from .loadings import (
    KIND_CLASSIFICATION,
    KIND_CLASSIFICATION_STYLES,
    KIND_INTERCEPT,
    augment_style_columns,
    classification_loadings,
    intercept_loadings,
)
from .panel import PricePanel, compute_addv, select_universe
from .portfolio import HoldingsVector, PositionLimits, establishing_bounds, \
    weights_to_holdings
from .weighted_regression import RegressionWeights, unbounded_weights

log = logging.getLogger(__name__)

TRADING_DAYS_PER_YEAR = 252

BOUND_MODE_NONE = "none"
BOUND_MODE_ADDV_FRACTION = "addv_fraction"


@dataclass
class BacktestConfig:
    universe_size: int = 2000
    window: int = 21
    refresh_period: int = 21
    investment_level: float = 2e7
    bound_mode: str = BOUND_MODE_NONE
    addv_fraction: float = 0.01
    loadings_incarnation: str = KIND_INTERCEPT
    store_weights: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.universe_size < 1:
            raise ValidationError("universe_size must be >= 1")
        if self.window < 2:
            raise ValidationError("window must be >= 2 (variances need two points)")
        if self.refresh_period < 1:
            raise ValidationError("refresh_period must be >= 1")
        if self.investment_level <= 0:
            raise ValidationError("investment_level must be positive")
        if self.bound_mode not in (BOUND_MODE_NONE, BOUND_MODE_ADDV_FRACTION):
            raise ValidationError(f"unknown bound_mode {self.bound_mode!r}")
        if not (0.0 < self.addv_fraction <= 1.0):
            raise ValidationError("addv_fraction must be in (0, 1]")
        if self.loadings_incarnation not in (
            KIND_INTERCEPT, KIND_CLASSIFICATION, KIND_CLASSIFICATION_STYLES,
        ):
            raise ValidationError(
                f"unknown loadings_incarnation {self.loadings_incarnation!r}"
            )


@dataclass
class DayRecord:
    date: str
    pnl: float
    gross_investment: float
    shares_traded: float


@dataclass
class BacktestReport:
    """Daily results plus annualized summary.

    ``roc`` is 252 * mean(daily pnl) / investment level, ``sr`` is
    sqrt(252) * mean / sample stdev (None when the stdev is zero or no day
    traded), ``cps`` is cents per share: 100 * total pnl / total shares
    traded (0 when nothing traded).
    """

    days: list[DayRecord]
    skipped: list[tuple[str, str]]
    investment_level: float
    roc: float
    sr: float | None
    cps: float
    daily_weights: list[tuple[str, list[str], np.ndarray]] | None = None

    @property
    def daily_pnl(self) -> np.ndarray:
        return np.array([d.pnl for d in self.days])

    @property
    def dates(self) -> list[str]:
        return [d.date for d in self.days]

    @property
    def total_pnl(self) -> float:
        return float(self.daily_pnl.sum()) if self.days else 0.0

    @property
    def has_gaps(self) -> bool:
        return bool(self.skipped)


def summarize(daily_pnl: np.ndarray, total_shares: float,
              investment_level: float) -> tuple[float, float | None, float]:
    """Recompute (roc, sr, cps) from a daily series; the report must match."""
    if daily_pnl.size == 0:
        return 0.0, None, 0.0
    mean = float(daily_pnl.mean())
    roc = TRADING_DAYS_PER_YEAR * mean / investment_level
    if daily_pnl.size < 2:
        sr = None
    else:
        std = float(daily_pnl.std(ddof=1))
        sr = math.sqrt(TRADING_DAYS_PER_YEAR) * mean / std if std > 0 else None
    cps = 100.0 * float(daily_pnl.sum()) / total_shares if total_shares > 0 else 0.0
    return roc, sr, cps


def mean_reversion_returns(open_today: np.ndarray,
                           close_prev_adj: np.ndarray) -> np.ndarray:
    """Negated overnight log gap: fade the move from prior close to the open."""
    open_today = np.asarray(open_today, dtype=float)
    close_prev_adj = np.asarray(close_prev_adj, dtype=float)
    if (open_today <= 0).any() or (close_prev_adj <= 0).any():
        raise ValidationError("prices must be strictly positive")
    return -np.log(open_today / close_prev_adj)


def shares_traded(holdings: HoldingsVector, open_prices: np.ndarray) -> np.ndarray:
    """Establishing plus liquidating shares: 2|H| / open."""
    open_prices = np.asarray(open_prices, dtype=float)
    if (open_prices <= 0).any():
        raise ValidationError("open prices must be strictly positive")
    return 2.0 * np.abs(holdings.dollars) / open_prices


def run_backtest(config: BacktestConfig, prices: PricePanel,
                 classification: list | None = None,
                 styles: np.ndarray | None = None) -> BacktestReport:
    """Run the daily protocol over the whole panel.

    ``classification`` (labels aligned with the panel's instruments) is
    required for the classification incarnations; ``styles`` additionally for
    the style-augmented one.
    """
    if config.loadings_incarnation in (KIND_CLASSIFICATION, KIND_CLASSIFICATION_STYLES):
        if classification is None:
            raise ValidationError("classification labels required for this incarnation")
        if len(classification) != len(prices.instrument_ids):
            raise ValidationError("one label per instrument required")
    if config.loadings_incarnation == KIND_CLASSIFICATION_STYLES:
        if styles is None:
            raise ValidationError("style columns required for this incarnation")
        styles = np.atleast_2d(np.asarray(styles, dtype=float))
        if styles.shape[0] != len(prices.instrument_ids):
            raise ValidationError("style rows must match the instrument count")

    # work in chronological order; panels are stored newest-first
    open_c = prices.open[:, ::-1]
    close_c = prices.close_adj[:, ::-1]
    volume_c = prices.volume[:, ::-1]
    dates_c = prices.dates[::-1]
    n, n_days = open_c.shape

    first_day = config.window + 1  # signal history needs a prior close per day
    if first_day >= n_days:
        raise ValidationError(
            f"panel has {n_days} dates; window {config.window} needs at least "
            f"{config.window + 2}"
        )

    investment = config.investment_level
    days: list[DayRecord] = []
    skipped: list[tuple[str, str]] = []
    weights_log = [] if config.store_weights else None
    total_shares = 0.0

    members = None
    z_vec = lam = addv_univ = None
    for t in range(first_day, n_days):
        if (t - first_day) % config.refresh_period == 0:
            members, z_vec, lam, addv_univ = _refresh(
                config, open_c, close_c, volume_c, prices, t, classification, styles,
            )
        date = dates_c[t]
        if members is None or members.size == 0:
            skipped.append((date, "empty universe"))
            log.info("skipping %s: empty universe", date)
            continue

        expected = mean_reversion_returns(open_c[members, t], close_c[members, t - 1])
        try:
            if config.bound_mode == BOUND_MODE_NONE:
                weights = unbounded_weights(expected, lam, RegressionWeights(z_vec))
            else:
                limits = PositionLimits(xi=1.0, xi_tilde=config.addv_fraction,
                                        xi_prime=1.0)
                dollar_bounds = establishing_bounds(limits, investment, addv_univ)
                weight_bounds = dollar_bounds.scaled(1.0 / investment)
                weights = bounded_regression(expected, lam, RegressionWeights(z_vec),
                                             weight_bounds, config.solver)
        except (DegenerateProblemError, ConvergenceError, SingularMatrixError) as exc:
            skipped.append((date, str(exc)))
            log.info("skipping %s: %s", date, exc)
            continue

        holdings = weights_to_holdings(weights, investment, prec=config.solver.prec)
        open_today = open_c[members, t]
        close_today = close_c[members, t]
        pnl = float(np.sum(holdings.dollars * (close_today / open_today - 1.0)))
        shares = float(shares_traded(holdings, open_today).sum())
        total_shares += shares
        days.append(DayRecord(date=date, pnl=pnl,
                              gross_investment=float(np.abs(holdings.dollars).sum()),
                              shares_traded=shares))
        if weights_log is not None:
            ids = [prices.instrument_ids[i] for i in members]
            weights_log.append((date, ids, weights.copy()))

    roc, sr, cps = summarize(np.array([d.pnl for d in days]), total_shares, investment)
    return BacktestReport(days=days, skipped=skipped, investment_level=investment,
                          roc=roc, sr=sr, cps=cps, daily_weights=weights_log)


def _refresh(config, open_c, close_c, volume_c, prices, t, classification, styles):
    """Recompute universe, signal variances, and dollar volumes at day t."""
    window = config.window
    span = np.arange(t - window, t)
    hist = -np.log(open_c[:, span] / close_c[:, span - 1])
    variance = hist.var(axis=1, ddof=1)

    # dollar volume over the window just before t, evaluation day excluded
    sliced = PricePanel(
        prices.instrument_ids, [prices.dates[::-1][s] for s in span[::-1]],
        open_c[:, span][:, ::-1], close_c[:, span][:, ::-1],
        volume_c[:, span][:, ::-1],
    )
    addv = compute_addv(sliced, window)

    valid = np.flatnonzero(variance > 0.0)
    if valid.size == 0:
        return np.array([], dtype=int), None, None, None
    selection = select_universe(addv[valid], config.universe_size,
                                rebalance_period=config.refresh_period)
    members = valid[selection.member_indices]

    z_vec = 1.0 / variance[members]
    addv_univ = addv[members]
    if config.loadings_incarnation == KIND_INTERCEPT:
        lam = intercept_loadings(members.size)
    else:
        labels = [classification[i] for i in members]
        lam = classification_loadings(labels)
        if config.loadings_incarnation == KIND_CLASSIFICATION_STYLES:
            lam = augment_style_columns(lam, styles[members])
    return members, z_vec, lam, addv_univ


def write_report_csv(report: BacktestReport, path) -> None:
    """Day rows, then skipped-day comments, then the summary block."""
    lines = ["date,pnl,gross_investment,shares_traded"]
    for day in report.days:
        lines.append(
            f"{day.date},{day.pnl:.17g},{day.gross_investment:.17g},"
            f"{day.shares_traded:.17g}"
        )
    for date, reason in report.skipped:
        lines.append(f"# skipped {date}: {reason}")
    lines.append("# summary")
    lines.append("roc,sr,cps")
    sr_text = "" if report.sr is None else f"{report.sr:.17g}"
    if report.sr is None:
        lines.append("# sr undefined (zero variance or no traded days)")
    lines.append(f"{report.roc:.17g},{sr_text},{report.cps:.17g}")
    _write_lines(path, lines)


def write_cumpnl_csv(report: BacktestReport, path) -> None:
    """Cumulative daily total, one row per traded day, ready for plotting."""
    lines = ["date,cum_pnl"]
    total = 0.0
    for day in report.days:
        total += day.pnl
        lines.append(f"{day.date},{total:.17g}")
    _write_lines(path, lines)


def write_weights_csv(report: BacktestReport, path) -> None:
    if report.daily_weights is None:
        raise ValidationError("report was built without store_weights")
    lines = ["date,id,weight"]
    for date, ids, weights in report.daily_weights:
        for inst, w in zip(ids, weights):
            lines.append(f"{date},{inst},{w:.17g}")
    _write_lines(path, lines)


def _write_lines(path, lines):
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
