"""Time-series panel ingestion, validation, and universe selection.

Panels are rectangular: one row per instrument, one column per date, newest
date first. Files declare their column order on line 1 and the loader
normalizes to newest-first. Panels with missing cells are rejected outright;
downstream covariance estimation relies on every series being complete.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import PanelFormatError, ValidationError

ORDER_FLAG_NEWEST = "# order=newest-first"
ORDER_FLAG_OLDEST = "# order=oldest-first"


@dataclass
class TimeSeriesPanel:
    """N instruments by (M+1) dated observations, newest date in column 0."""

    instrument_ids: list[str]
    dates: list[str]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n, cols = self.values.shape
        if n != len(self.instrument_ids):
            raise ValidationError(
                f"{len(self.instrument_ids)} instrument ids for {n} value rows"
            )
        if cols != len(self.dates):
            raise ValidationError(f"{len(self.dates)} dates for {cols} value columns")
        if n < 1 or cols < 1:
            raise ValidationError("panel needs at least one instrument and one date")
        if len(set(self.instrument_ids)) != n:
            dupes = sorted({i for i in self.instrument_ids if self.instrument_ids.count(i) > 1})
            raise ValidationError(f"duplicate instrument id(s): {', '.join(dupes)}")
        if not np.isfinite(self.values).all():
            bad = np.argwhere(~np.isfinite(self.values))[0]
            raise ValidationError(
                f"non-finite value for instrument {self.instrument_ids[bad[0]]} "
                f"on {self.dates[bad[1]]}"
            )
        parsed = [_parse_date(d) for d in self.dates]
        if any(b >= a for a, b in zip(parsed, parsed[1:])):
            raise ValidationError("dates must be strictly ordered newest-first")

    @property
    def n_instruments(self) -> int:
        return self.values.shape[0]

    @property
    def n_dates(self) -> int:
        return self.values.shape[1]


@dataclass
class PricePanel:
    """Aligned open/adjusted-close/volume panels, newest date first.

    ``close_adj`` is split and dividend adjusted upstream; all entries of all
    three matrices must be strictly positive.
    """

    instrument_ids: list[str]
    dates: list[str]
    open: np.ndarray
    close_adj: np.ndarray
    volume: np.ndarray

    def __post_init__(self):
        self.open = np.asarray(self.open, dtype=float)
        self.close_adj = np.asarray(self.close_adj, dtype=float)
        self.volume = np.asarray(self.volume, dtype=float)
        shape = (len(self.instrument_ids), len(self.dates))
        for name, mat in (("open", self.open), ("close_adj", self.close_adj),
                          ("volume", self.volume)):
            if mat.shape != shape:
                raise ValidationError(f"{name} panel shape {mat.shape} != {shape}")
            if not (np.isfinite(mat).all() and (mat > 0).all()):
                bad = np.argwhere(~(np.isfinite(mat) & (mat > 0)))[0]
                raise ValidationError(
                    f"{name} must be strictly positive: instrument "
                    f"{self.instrument_ids[bad[0]]} on {self.dates[bad[1]]}"
                )

    @classmethod
    def from_panels(cls, open_panel: TimeSeriesPanel, close_adj_panel: TimeSeriesPanel,
                    volume_panel: TimeSeriesPanel) -> "PricePanel":
        ref_ids, ref_dates = open_panel.instrument_ids, open_panel.dates
        for name, p in (("close_adj", close_adj_panel), ("volume", volume_panel)):
            if p.instrument_ids != ref_ids or p.dates != ref_dates:
                raise ValidationError(f"{name} panel ids/dates do not match open panel")
        return cls(ref_ids, ref_dates, open_panel.values, close_adj_panel.values,
                   volume_panel.values)


@dataclass
class UniverseSelection:
    """Index set of tradable instruments plus the dollar-volume ranking input."""

    member_indices: np.ndarray
    addv: np.ndarray
    rebalance_period: int = 21
    clamped: bool = False  # requested size exceeded the instrument count

    def __post_init__(self):
        self.member_indices = np.asarray(self.member_indices, dtype=int)
        self.addv = np.asarray(self.addv, dtype=float)
        if len(np.unique(self.member_indices)) != len(self.member_indices):
            raise ValidationError("universe member indices must be distinct")
        if (self.addv < 0).any():
            raise ValidationError("addv must be nonnegative")
        if self.rebalance_period < 1:
            raise ValidationError("rebalance_period must be >= 1")


def _parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise PanelFormatError(f"date column {text!r} is not an ISO date")


def load_panel(source) -> TimeSeriesPanel:
    """Load and validate one panel CSV.

    ``source`` may be a path, a text stream, or a binary stream. Line 1 must
    carry the order flag; the result is always newest-first regardless of the
    file's declared order.
    """
    text = _read_text(source)
    lines = text.splitlines()
    if not lines:
        raise PanelFormatError("empty panel file")
    flag = lines[0].strip()
    if flag == ORDER_FLAG_NEWEST:
        newest_first = True
    elif flag == ORDER_FLAG_OLDEST:
        newest_first = False
    else:
        raise PanelFormatError(
            f"line 1 must be {ORDER_FLAG_NEWEST!r} or {ORDER_FLAG_OLDEST!r}, got {flag!r}"
        )

    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise PanelFormatError("panel needs a header row and at least one instrument row")
    header = rows[0]
    if not header or header[0].strip() != "id":
        raise PanelFormatError("header row must start with 'id'")
    dates = [c.strip() for c in header[1:]]
    if not dates:
        raise PanelFormatError("panel needs at least one date column")

    ids: list[str] = []
    values = np.empty((len(rows) - 1, len(dates)))
    for r, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise PanelFormatError(
                f"row {r + 2} has {len(row)} fields, header has {len(header)}"
            )
        inst = row[0].strip()
        if not inst:
            raise PanelFormatError(f"row {r + 2} has an empty instrument id")
        if inst in ids:
            raise PanelFormatError(f"duplicate instrument id {inst!r}")
        ids.append(inst)
        for c, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                raise PanelFormatError(
                    f"missing value for instrument {inst} on {dates[c]}"
                )
            try:
                val = float(cell)
            except ValueError:
                raise PanelFormatError(
                    f"non-numeric value {cell!r} for instrument {inst} on {dates[c]}"
                )
            if not np.isfinite(val):
                raise PanelFormatError(
                    f"non-finite value {cell!r} for instrument {inst} on {dates[c]}"
                )
            values[r, c] = val

    if not newest_first:
        dates = dates[::-1]
        values = values[:, ::-1].copy()
    try:
        return TimeSeriesPanel(ids, dates, values)
    except ValidationError as exc:
        raise PanelFormatError(str(exc))


def serialize_panel(panel: TimeSeriesPanel) -> str:
    """Write a panel back to its CSV form (newest-first, flag on line 1)."""
    out = [ORDER_FLAG_NEWEST, ",".join(["id"] + list(panel.dates))]
    for i, inst in enumerate(panel.instrument_ids):
        cells = [f"{v:.17g}" for v in panel.values[i]]
        out.append(",".join([inst] + cells))
    return "\n".join(out) + "\n"


def _read_text(source) -> str:
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    if isinstance(source, bytes):
        return source.decode("utf-8")
    with open(source, "rb") as fh:
        return fh.read().decode("utf-8")


def compute_addv(prices: PricePanel, window: int) -> np.ndarray:
    """Average daily dollar volume over the ``window`` most recent dates.

    The caller controls alignment by slicing the panel; a panel that should
    not include the evaluation date must be sliced to exclude it.
    """
    if window < 1:
        raise ValidationError(f"addv window must be >= 1, got {window}")
    if prices.close_adj.shape[1] < window:
        raise ValidationError(
            f"addv window {window} needs {window} dates, panel has "
            f"{prices.close_adj.shape[1]}"
        )
    dollar = prices.close_adj[:, :window] * prices.volume[:, :window]
    return dollar.mean(axis=1)


def select_universe(addv: np.ndarray, top_n: int,
                    rebalance_period: int = 21) -> UniverseSelection:
    """Pick the ``top_n`` instruments by dollar volume.

    Ties break toward the lower instrument index. Requesting more instruments
    than exist returns all of them with ``clamped`` set.
    """
    addv = np.asarray(addv, dtype=float)
    if top_n < 1:
        raise ValidationError(f"top_n must be >= 1, got {top_n}")
    n = addv.shape[0]
    clamped = top_n > n
    take = min(top_n, n)
    # stable sort on descending addv keeps the lower index first among ties
    order = np.argsort(-addv, kind="stable")
    members = np.sort(order[:take])
    return UniverseSelection(members, addv, rebalance_period=rebalance_period,
                             clamped=clamped)
