"""Dollar holdings, trade limits, and bound construction for stock portfolios.

Weights map to dollars through the total (long plus short) investment level.
Establishing a book from flat caps each position by a fraction of the
investment level and a fraction of the name's average daily dollar volume;
rebalancing additionally caps the traded amount and the standing position so
the book stays quick to unwind.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .bounded_regression import BoundSpec
from .errors import ValidationError


@dataclass
class HoldingsVector:
    """Dollar positions plus the investment level they were sized against."""

    dollars: np.ndarray
    investment_level: float

    def __post_init__(self):
        self.dollars = np.asarray(self.dollars, dtype=float)
        if self.investment_level <= 0:
            raise ValidationError("investment level must be positive")


@dataclass
class TradeVector:
    """Traded dollars relative to prior holdings."""

    dollars: np.ndarray
    prior: np.ndarray

    def __post_init__(self):
        self.dollars = np.asarray(self.dollars, dtype=float)
        self.prior = np.asarray(self.prior, dtype=float)
        if self.dollars.shape != self.prior.shape:
            raise ValidationError("trade and prior vectors must have equal length")

    @property
    def target(self) -> np.ndarray:
        return self.prior + self.dollars


@dataclass
class PositionLimits:
    """Caps as fractions: xi of the investment level per name, xi_tilde of a
    name's daily dollar volume per trade, xi_prime of daily dollar volume per
    standing position."""

    xi: float
    xi_tilde: float
    xi_prime: float = 1.0

    def __post_init__(self):
        for name, value in (("xi", self.xi), ("xi_tilde", self.xi_tilde),
                            ("xi_prime", self.xi_prime)):
            if not (0.0 < value <= 1.0):
                raise ValidationError(f"{name} must be in (0, 1], got {value}")


def establishing_bounds(limits: PositionLimits, investment_level: float,
                        addv: np.ndarray) -> BoundSpec:
    """Symmetric dollar bounds min(xi*I, xi_tilde*V) for a book built from flat.

    Names with zero daily volume get zero-width bounds and are therefore held
    flat by the solver rather than rejected; halted names stay in multi-day
    runs this way. Divide by the investment level for weight-space bounds.
    """
    addv = np.asarray(addv, dtype=float)
    if investment_level <= 0:
        raise ValidationError("investment level must be positive")
    if (addv < 0).any():
        raise ValidationError("addv must be nonnegative")
    cap = np.minimum(limits.xi * investment_level, limits.xi_tilde * addv)
    return BoundSpec(-cap, cap)


def rebalancing_bounds(limits: PositionLimits, investment_level: float,
                       addv: np.ndarray, prior: np.ndarray) -> BoundSpec:
    """Dollar bounds on the traded amounts given standing holdings.

    The standing position cap is min(xi*I, xi_prime*V); the prior must
    already satisfy it. Trades are further capped at xi_tilde*V in either
    direction. Under the precondition the lower trade bound is <= 0 and the
    upper is >= 0, so holding still is always admissible.
    """
    addv = np.asarray(addv, dtype=float)
    prior = np.asarray(prior, dtype=float)
    if investment_level <= 0:
        raise ValidationError("investment level must be positive")
    if addv.shape != prior.shape:
        raise ValidationError("addv and prior must have equal length")
    position_cap = np.minimum(limits.xi * investment_level, limits.xi_prime * addv)
    over = np.flatnonzero(np.abs(prior) > position_cap)
    if over.size:
        raise ValidationError(
            f"prior holdings exceed the position cap at element(s) {over.tolist()}"
        )
    trade_cap = limits.xi_tilde * addv
    upper = np.minimum(position_cap - prior, trade_cap)
    lower = np.maximum(-position_cap - prior, -trade_cap)
    return BoundSpec(lower, upper)


def weights_to_holdings(weights: np.ndarray, investment_level: float,
                        prec: float = 1e-5) -> HoldingsVector:
    """Scale unit-gross weights to dollar holdings."""
    weights = np.asarray(weights, dtype=float)
    gross = float(np.abs(weights).sum())
    if abs(gross - 1.0) > prec:
        raise ValidationError(
            f"weights have gross exposure {gross:.6f}, expected 1 within {prec}"
        )
    return HoldingsVector(dollars=investment_level * weights,
                          investment_level=investment_level)


def load_bound_overrides(source, instrument_ids: list[str],
                         bounds: BoundSpec) -> BoundSpec:
    """Apply per-instrument dollar bound overrides from a CSV.

    Format: ``id,lower_override,upper_override`` with empty fields meaning no
    override; used for hard-to-borrow names (lower override of 0) and similar
    per-name exceptions.
    """
    text = source.read() if hasattr(source, "read") else open(source).read()
    lower = bounds.lower.copy()
    upper = bounds.upper.copy()
    index = {inst: i for i, inst in enumerate(instrument_ids)}
    rows = [r for r in csv.reader(text.splitlines()) if r]
    if not rows or [c.strip() for c in rows[0]] != ["id", "lower_override", "upper_override"]:
        raise ValidationError(
            "overrides file must have header id,lower_override,upper_override"
        )
    for row in rows[1:]:
        if len(row) != 3:
            raise ValidationError(f"override row has {len(row)} fields, expected 3")
        inst = row[0].strip()
        if inst not in index:
            raise ValidationError(f"override for unknown instrument {inst!r}")
        i = index[inst]
        if row[1].strip():
            lower[i] = float(row[1])
        if row[2].strip():
            upper[i] = float(row[2])
    return BoundSpec(lower, upper)
