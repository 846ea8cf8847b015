"""Seeded synthetic market data for tests, demos, and dry runs.

Closes follow a geometric random walk; each day's open gaps away from the
prior close and the reversion strength decides how much of that gap is gone
by the close. Full reversion with a flat walk makes every close equal the
prior close, the cleanest setting for exercising open-to-close strategies.
"""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np

from .errors import ValidationError
from .panel import PricePanel


def generate_synthetic_prices(n_instruments: int, n_days: int, seed: int,
                              reversion: float = 1.0,
                              sigma_gap: float = 0.01,
                              sigma_walk: float = 0.0,
                              sigma_volume: float = 0.1,
                              base_price_range: tuple[float, float] = (20.0, 200.0),
                              base_volume_range: tuple[float, float] = (1e6, 1e7),
                              start: str = "2020-01-01") -> PricePanel:
    """Build a strictly positive open/close/volume panel, newest date first.

    ``reversion`` in [0, 1]: 1 means the open gap is fully gone by the close,
    0 means it persists entirely.
    """
    if n_instruments < 1 or n_days < 2:
        raise ValidationError("need at least 1 instrument and 2 days")
    if not (0.0 <= reversion <= 1.0):
        raise ValidationError("reversion must be in [0, 1]")
    rng = np.random.default_rng(seed)
    n, d = n_instruments, n_days

    base_price = rng.uniform(*base_price_range, size=n)
    log_lo, log_hi = np.log(base_volume_range[0]), np.log(base_volume_range[1])
    base_volume = np.exp(rng.uniform(log_lo, log_hi, size=n))

    gaps = rng.normal(0.0, sigma_gap, size=(n, d))
    walks = rng.normal(0.0, sigma_walk, size=(n, d)) if sigma_walk > 0 else np.zeros((n, d))
    vol_noise = rng.normal(0.0, sigma_volume, size=(n, d))

    close = np.empty((n, d))
    opens = np.empty((n, d))
    close[:, 0] = base_price
    opens[:, 0] = base_price * np.exp(gaps[:, 0])
    for t in range(1, d):
        opens[:, t] = close[:, t - 1] * np.exp(gaps[:, t])
        close[:, t] = close[:, t - 1] * np.exp(walks[:, t] + (1.0 - reversion) * gaps[:, t])
    volume = base_volume[:, None] * np.exp(vol_noise)

    start_day = date.fromisoformat(start)
    dates = [(start_day + timedelta(days=t)).isoformat() for t in range(d)]
    ids = [f"S{i:03d}" for i in range(n)]
    # panels are stored newest-first
    return PricePanel(ids, dates[::-1], opens[:, ::-1].copy(), close[:, ::-1].copy(),
                      volume[:, ::-1].copy())


def synthetic_labels(n_instruments: int, n_categories: int) -> list[str]:
    """Round-robin group labels, deterministic."""
    if n_categories < 1:
        raise ValidationError("need at least one category")
    return [f"G{i % n_categories}" for i in range(n_instruments)]


def synthetic_styles(n_instruments: int, n_styles: int, seed: int) -> np.ndarray:
    """Standard normal style columns with a fixed seed."""
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n_instruments, n_styles))
