import itertools

import numpy as np
import pytest

from boundedreg import (
    AT_LOWER,
    AT_UPPER,
    FREE,
    BoundSpec,
    InfeasibleError,
    RegressionWeights,
    ValidationError,
    bounded_regression,
    intercept_loadings,
    oracle_bounded_regression,
    oracle_fixed_gamma,
    unbounded_weights,
)
from boundedreg.verify import random_instance

CANONICAL_ALPHA = np.array([4.0, 1.0, -1.0, -4.0])


def dumb_enumerate(alpha_tilde, lam, z, lower, upper):
    """Slow reference for the reference: per-pattern KKT assembly via lstsq.

    Returns (best weights, best objective) over primal-feasible patterns, or
    (None, inf). Feasibility = equality system consistent, free members in
    the box, neutrality satisfied.
    """
    n, k = lam.shape
    best_w, best_obj = None, np.inf
    target = z * alpha_tilde
    for pattern in itertools.product((0, 1, 2), repeat=n):
        pattern = np.array(pattern)
        free = pattern == 0
        w = np.where(pattern == 1, upper, np.where(pattern == 2, lower, 0.0))
        if free.any():
            # minimize sum((w_f - t_f)^2 / z_f) s.t. lam_f' w_f = -lam_p' w_p
            rhs = -lam[~free].T @ w[~free] if (~free).any() else np.zeros(k)
            lam_f = lam[free]
            z_f = z[free]
            t_f = target[free]
            # KKT system in (w_f, v)
            m = free.sum()
            kkt = np.zeros((m + k, m + k))
            kkt[:m, :m] = np.diag(1.0 / z_f)
            kkt[:m, m:] = lam_f
            kkt[m:, :m] = lam_f.T
            rhs_full = np.concatenate([t_f / z_f, rhs])
            sol, *_ = np.linalg.lstsq(kkt, rhs_full, rcond=None)
            if np.abs(kkt @ sol - rhs_full).max() > 1e-9:
                continue  # inconsistent equality system
            w[free] = sol[:m]
            if (w[free] < lower[free] - 1e-11).any() or (w[free] > upper[free] + 1e-11).any():
                continue
        if np.abs(lam.T @ w).max() > 1e-9:
            continue
        obj = float(np.sum((w - target) ** 2 / z))
        if obj < best_obj - 1e-12:
            best_obj, best_w = obj, w.copy()
    return best_w, best_obj


def test_canonical_pattern_and_weights():
    sol = oracle_fixed_gamma(0.2 * CANONICAL_ALPHA, intercept_loadings(4),
                             RegressionWeights(np.ones(4)),
                             BoundSpec(-0.3 * np.ones(4), 0.3 * np.ones(4)))
    assert np.allclose(sol.weights, [0.3, 0.2, -0.2, -0.3], atol=1e-12)
    assert sol.active_pattern.tolist() == [AT_UPPER, FREE, FREE, AT_LOWER]
    assert sol.kkt_ok
    assert np.isclose(sol.objective, 0.5)


def test_non_binding_bounds_all_free():
    rng = np.random.default_rng(14)
    n = 5
    z = RegressionWeights(rng.uniform(0.5, 2.0, n))
    alpha_tilde = 0.05 * rng.normal(size=n)
    sol = oracle_fixed_gamma(alpha_tilde, intercept_loadings(n), z,
                             BoundSpec.unbounded(n))
    assert (sol.active_pattern == FREE).all()
    resid = alpha_tilde - (z.z * alpha_tilde).sum() / z.z.sum()
    assert np.allclose(sol.weights, z.z * resid, atol=1e-12)


def test_matches_dumb_enumerator():
    rng = np.random.default_rng(101)
    checked = 0
    while checked < 30:
        inst = random_instance(rng, max_n=5)
        gamma = float(rng.uniform(0.1, 1.5))
        lam = inst.loadings.values
        ref_w, ref_obj = dumb_enumerate(gamma * inst.alpha, lam, inst.z.z,
                                        inst.bounds.lower, inst.bounds.upper)
        try:
            sol = oracle_fixed_gamma(gamma * inst.alpha, inst.loadings, inst.z,
                                     inst.bounds)
        except InfeasibleError:
            assert ref_w is None
            checked += 1
            continue
        assert ref_w is not None
        assert np.abs(sol.weights - ref_w).max() < 1e-7
        assert sol.objective <= ref_obj + 1e-9  # global optimality by exhaustion
        checked += 1


def test_accepted_objective_is_minimal():
    rng = np.random.default_rng(303)
    for _ in range(10):
        inst = random_instance(rng, max_n=4)
        gamma = 0.6
        try:
            sol = oracle_fixed_gamma(gamma * inst.alpha, inst.loadings, inst.z,
                                     inst.bounds)
        except InfeasibleError:
            continue
        _, ref_obj = dumb_enumerate(gamma * inst.alpha, inst.loadings.values,
                                    inst.z.z, inst.bounds.lower, inst.bounds.upper)
        assert sol.objective <= ref_obj + 1e-9


def test_full_solve_matches_production_solver():
    from boundedreg import SolverConfig
    lam = intercept_loadings(4)
    z = RegressionWeights(np.ones(4))
    bounds = BoundSpec(-0.3 * np.ones(4), 0.3 * np.ones(4))
    ref = oracle_bounded_regression(CANONICAL_ALPHA, lam, z, bounds)
    w = bounded_regression(CANONICAL_ALPHA, lam, z, bounds,
                           SolverConfig(prec=1e-10, max_outer=200))
    assert np.abs(w - ref).max() < 1e-10
    assert abs(np.abs(ref).sum() - 1.0) < 1e-10


def test_full_solve_unbounded_limit():
    rng = np.random.default_rng(9)
    n = 6
    lam = intercept_loadings(n)
    z = RegressionWeights(rng.uniform(0.5, 2.0, n))
    alpha = rng.normal(size=n)
    ref = oracle_bounded_regression(alpha, lam, z, BoundSpec.unbounded(n))
    assert np.abs(ref - unbounded_weights(alpha, lam, z)).max() < 1e-12


def test_full_solve_reports_infeasible():
    with pytest.raises(InfeasibleError):
        oracle_bounded_regression(np.array([1.0, 3.0]), intercept_loadings(2),
                                  RegressionWeights(np.ones(2)),
                                  BoundSpec(-0.4 * np.ones(2), 0.4 * np.ones(2)))


def test_boundary_solution_via_pinned_pattern():
    # the optimum sits exactly on both bounds; only the fully pinned
    # assignment is accepted and its sign conditions need the LP route
    sol_w = oracle_bounded_regression(np.array([1.0, 3.0]), intercept_loadings(2),
                                      RegressionWeights(np.ones(2)),
                                      BoundSpec(-0.5 * np.ones(2), 0.5 * np.ones(2)))
    assert np.allclose(sol_w, [-0.5, 0.5], atol=1e-12)


def test_enumeration_cap():
    n = 13
    with pytest.raises(ValidationError, match="capped"):
        oracle_fixed_gamma(np.zeros(n), intercept_loadings(n),
                           RegressionWeights(np.ones(n)), BoundSpec.unbounded(n))


def test_oracle_determinism():
    rng = np.random.default_rng(71)
    inst = random_instance(rng)
    w1 = oracle_bounded_regression(inst.alpha, inst.loadings, inst.z, inst.bounds)
    w2 = oracle_bounded_regression(inst.alpha.copy(), inst.loadings, inst.z,
                                   inst.bounds)
    assert np.array_equal(w1, w2)
