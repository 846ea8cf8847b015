import io

import numpy as np
import pytest

from boundedreg import (
    PanelFormatError,
    PricePanel,
    TimeSeriesPanel,
    ValidationError,
    compute_addv,
    load_panel,
    select_universe,
    serialize_panel,
)

WELL_FORMED = """\
# order=newest-first
id,2024-01-03,2024-01-02,2024-01-01
AAA,1.5,2.5,3.5
BBB,-0.25,0.0,4.0
"""


def test_load_well_formed():
    panel = load_panel(io.StringIO(WELL_FORMED))
    assert panel.instrument_ids == ["AAA", "BBB"]
    assert panel.n_instruments == 2 and panel.n_dates == 3
    assert panel.values[1, 2] == 4.0


def test_load_accepts_bytes():
    panel = load_panel(WELL_FORMED.encode())
    assert panel.dates[0] == "2024-01-03"


def test_oldest_first_is_normalized():
    text = (
        "# order=oldest-first\n"
        "id,2024-01-01,2024-01-02,2024-01-03\n"
        "AAA,3.5,2.5,1.5\n"
        "BBB,4.0,0.0,-0.25\n"
    )
    panel = load_panel(io.StringIO(text))
    reference = load_panel(io.StringIO(WELL_FORMED))
    assert panel.dates == reference.dates
    assert np.array_equal(panel.values, reference.values)


def test_missing_cell_names_location():
    text = WELL_FORMED.replace("-0.25", "")
    with pytest.raises(PanelFormatError, match="BBB.*2024-01-03"):
        load_panel(io.StringIO(text))


def test_non_numeric_cell_names_location():
    text = WELL_FORMED.replace("2.5", "oops")
    with pytest.raises(PanelFormatError, match="oops"):
        load_panel(io.StringIO(text))


def test_duplicate_id_rejected():
    text = WELL_FORMED.replace("BBB", "AAA")
    with pytest.raises(PanelFormatError, match="duplicate"):
        load_panel(io.StringIO(text))


def test_missing_order_flag_rejected():
    text = WELL_FORMED.split("\n", 1)[1]
    with pytest.raises(PanelFormatError, match="order="):
        load_panel(io.StringIO(text))


def test_ragged_row_rejected():
    text = WELL_FORMED + "CCC,1.0,2.0\n"
    with pytest.raises(PanelFormatError, match="fields"):
        load_panel(io.StringIO(text))


def test_unordered_dates_rejected():
    text = WELL_FORMED.replace("2024-01-02", "2023-01-02")
    with pytest.raises(PanelFormatError, match="ordered"):
        load_panel(io.StringIO(text))


def test_nan_rejected():
    text = WELL_FORMED.replace("3.5", "nan")
    with pytest.raises(PanelFormatError, match="non-finite"):
        load_panel(io.StringIO(text))


def test_serialize_round_trip():
    rng = np.random.default_rng(7)
    panel = TimeSeriesPanel(
        [f"I{i}" for i in range(4)],
        ["2024-03-05", "2024-03-04", "2024-03-01"],
        rng.normal(size=(4, 3)),
    )
    again = load_panel(io.StringIO(serialize_panel(panel)))
    assert again.instrument_ids == panel.instrument_ids
    assert again.dates == panel.dates
    assert np.array_equal(again.values, panel.values)


def _price_panel(close, volume):
    close = np.asarray(close, dtype=float)
    volume = np.asarray(volume, dtype=float)
    n, d = close.shape
    dates = [f"2024-02-{d - j:02d}" for j in range(d)]
    return PricePanel([f"I{i}" for i in range(n)], dates, close.copy(), close, volume)


def test_addv_constant_series():
    panel = _price_panel(np.full((3, 21), 10.0), np.full((3, 21), 100.0))
    assert np.allclose(compute_addv(panel, 21), 1000.0)


def test_addv_two_point_mean():
    panel = _price_panel([[10.0, 20.0]], [[100.0, 100.0]])
    assert np.allclose(compute_addv(panel, 2), 1500.0)


def test_addv_window_validation():
    panel = _price_panel([[10.0, 20.0]], [[100.0, 100.0]])
    with pytest.raises(ValidationError):
        compute_addv(panel, 0)
    with pytest.raises(ValidationError):
        compute_addv(panel, 3)


def test_addv_permutation_equivariant():
    rng = np.random.default_rng(3)
    close = rng.uniform(5, 50, size=(6, 10))
    volume = rng.uniform(1e3, 1e6, size=(6, 10))
    base = compute_addv(_price_panel(close, volume), 10)
    perm = rng.permutation(6)
    shuffled = compute_addv(_price_panel(close[perm], volume[perm]), 10)
    assert np.allclose(shuffled, base[perm])


def test_select_universe_top_two():
    sel = select_universe(np.array([5.0, 1.0, 9.0]), 2)
    assert set(sel.member_indices.tolist()) == {0, 2}
    assert not sel.clamped


def test_select_universe_tie_breaks_low_index():
    sel = select_universe(np.array([3.0, 3.0, 1.0]), 1)
    assert sel.member_indices.tolist() == [0]


def test_select_universe_clamps_with_warning():
    sel = select_universe(np.array([1.0, 2.0, 3.0]), 10)
    assert sel.member_indices.tolist() == [0, 1, 2]
    assert sel.clamped


def test_select_universe_monotone_invariance():
    rng = np.random.default_rng(11)
    addv = rng.uniform(0.1, 10.0, size=9)
    base = select_universe(addv, 4).member_indices
    for transform in (lambda v: 3.0 * v, lambda v: v ** 2, np.log1p):
        assert np.array_equal(select_universe(transform(addv), 4).member_indices, base)


def test_price_panel_rejects_nonpositive():
    with pytest.raises(ValidationError, match="strictly positive"):
        _price_panel([[10.0, 0.0]], [[1.0, 1.0]])
