import io

import numpy as np
import pytest

from boundedreg import (
    BoundSpec,
    PositionLimits,
    RegressionWeights,
    ValidationError,
    establishing_bounds,
    intercept_loadings,
    load_bound_overrides,
    rebalancing_bounds,
    solve_bounded,
    weights_to_holdings,
)


def test_establishing_liquidity_binds():
    limits = PositionLimits(xi=0.01, xi_tilde=0.01)
    spec = establishing_bounds(limits, 1e7, np.array([5e5]))
    assert np.allclose(spec.upper, 5e3) and np.allclose(spec.lower, -5e3)


def test_establishing_diversification_binds():
    limits = PositionLimits(xi=0.01, xi_tilde=0.01)
    spec = establishing_bounds(limits, 1e7, np.array([1e12]))
    assert np.allclose(spec.upper, 1e5)


def test_establishing_zero_volume_fixes_flat():
    limits = PositionLimits(xi=0.5, xi_tilde=0.01)
    investment = 1e6
    addv = np.array([1e9, 1e9, 0.0, 1e9])
    spec = establishing_bounds(limits, investment, addv).scaled(1.0 / investment)
    assert spec.upper[2] == 0.0 and spec.lower[2] == 0.0
    alpha = np.array([1.0, -0.4, 2.0, -0.6])
    sol = solve_bounded(alpha, intercept_loadings(4), RegressionWeights(np.ones(4)),
                        spec)
    assert sol.weights[2] == 0.0


def test_establishing_monotone_in_parameters():
    rng = np.random.default_rng(44)
    addv = rng.uniform(1e5, 1e8, size=6)
    base = establishing_bounds(PositionLimits(0.02, 0.02), 1e7, addv).upper
    assert (establishing_bounds(PositionLimits(0.03, 0.02), 1e7, addv).upper
            >= base).all()
    assert (establishing_bounds(PositionLimits(0.02, 0.03), 1e7, addv).upper
            >= base).all()
    assert (establishing_bounds(PositionLimits(0.02, 0.02), 2e7, addv).upper
            >= base).all()
    assert (establishing_bounds(PositionLimits(0.02, 0.02), 1e7, 2 * addv).upper
            >= base).all()


def _rebalance_limits():
    # position cap min(xi*I, xi_prime*V) = min(1e5, 8e4) = 8e4; trade cap 2e4
    return PositionLimits(xi=0.01, xi_tilde=0.025, xi_prime=0.1), 1e7, np.array([8e5])


def test_rebalancing_formula():
    limits, inv, addv = _rebalance_limits()
    spec = rebalancing_bounds(limits, inv, addv, np.array([5e4]))
    assert np.allclose(spec.upper, 2e4)
    assert np.allclose(spec.lower, -2e4)


def test_rebalancing_at_position_cap():
    limits, inv, addv = _rebalance_limits()
    spec = rebalancing_bounds(limits, inv, addv, np.array([8e4]))
    assert np.allclose(spec.upper, 0.0)
    assert np.allclose(spec.lower, -2e4)


def test_rebalancing_prior_over_cap():
    limits, inv, addv = _rebalance_limits()
    with pytest.raises(ValidationError, match="position cap"):
        rebalancing_bounds(limits, inv, addv, np.array([9e4]))


def test_rebalancing_signs_under_precondition():
    rng = np.random.default_rng(13)
    limits = PositionLimits(xi=0.02, xi_tilde=0.01, xi_prime=0.05)
    for _ in range(50):
        addv = rng.uniform(1e5, 1e9, size=8)
        cap = np.minimum(limits.xi * 1e7, limits.xi_prime * addv)
        prior = rng.uniform(-1.0, 1.0, size=8) * cap
        spec = rebalancing_bounds(limits, 1e7, addv, prior)
        assert (spec.upper >= 0).all() and (spec.lower <= 0).all()


def test_weights_to_holdings_scaling():
    h = weights_to_holdings(np.array([0.5, -0.5]), 2e7)
    assert np.allclose(h.dollars, [1e7, -1e7])

    h2 = weights_to_holdings(np.array([0.3, 0.2, -0.2, -0.3]), 1e6)
    assert np.allclose(h2.dollars, [3e5, 2e5, -2e5, -3e5])


def test_weights_to_holdings_rejects_bad_gross():
    with pytest.raises(ValidationError, match="gross"):
        weights_to_holdings(np.array([0.4, -0.5]), 1e6)


def test_weights_to_holdings_round_trip():
    rng = np.random.default_rng(30)
    w = rng.normal(size=7)
    w /= np.abs(w).sum()
    h = weights_to_holdings(w, 3.3e7)
    assert np.array_equal(h.dollars / 3.3e7, w)


def test_bound_overrides():
    base = BoundSpec(np.array([-10.0, -10.0, -10.0]), np.array([10.0, 10.0, 10.0]))
    text = "id,lower_override,upper_override\nB,0,\nC,,5\n"
    spec = load_bound_overrides(io.StringIO(text), ["A", "B", "C"], base)
    assert spec.lower.tolist() == [-10.0, 0.0, -10.0]  # hard-to-borrow name
    assert spec.upper.tolist() == [10.0, 10.0, 5.0]


def test_bound_overrides_unknown_instrument():
    base = BoundSpec(np.array([-1.0]), np.array([1.0]))
    with pytest.raises(ValidationError, match="unknown"):
        load_bound_overrides(io.StringIO("id,lower_override,upper_override\nZZ,0,0\n"),
                             ["A"], base)


def test_position_limits_validation():
    with pytest.raises(ValidationError):
        PositionLimits(xi=0.0, xi_tilde=0.5)
    with pytest.raises(ValidationError):
        PositionLimits(xi=0.5, xi_tilde=1.5)
