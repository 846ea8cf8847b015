import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boundedreg import (
    CovarianceMatrix,
    DegenerateProblemError,
    LoadingsMatrix,
    RegressionWeights,
    SingularMatrixError,
    ValidationError,
    gamma_seed,
    intercept_loadings,
    regression_weights_from_cov,
    unbounded_weights,
    weighted_residuals,
)


def test_weights_are_reciprocal_variances():
    cov = CovarianceMatrix(np.diag([1.0, 4.0]))
    assert np.allclose(regression_weights_from_cov(cov).z, [1.0, 0.25])


def test_weights_identity():
    cov = CovarianceMatrix(np.eye(3))
    assert np.allclose(regression_weights_from_cov(cov).z, 1.0)


def test_weights_small_variance():
    cov = CovarianceMatrix(np.array([[0.01]]))
    assert np.allclose(regression_weights_from_cov(cov).z, 100.0)


def test_weights_must_be_positive():
    with pytest.raises(ValidationError):
        RegressionWeights(np.array([1.0, 0.0]))


def test_residuals_equal_weight_demeaning():
    result = weighted_residuals(np.array([1.0, 3.0]), intercept_loadings(2),
                                RegressionWeights(np.ones(2)))
    assert np.allclose(result.residuals, [-1.0, 1.0])


def test_residuals_weighted_demeaning():
    # frozen by hand: Q = 1 + 3 = 4, rhs = 1*1 + 3*3 = 10, fit = 2.5
    result = weighted_residuals(np.array([1.0, 3.0]), intercept_loadings(2),
                                RegressionWeights(np.array([1.0, 3.0])))
    assert np.allclose(result.fitted_coeffs, [2.5])
    assert np.allclose(result.residuals, [-1.5, 0.5])


def test_square_loadings_fit_perfectly():
    rng = np.random.default_rng(4)
    lam = LoadingsMatrix(rng.normal(size=(3, 3)), kind="principal_components")
    alpha = rng.normal(size=3)
    result = weighted_residuals(alpha, lam, RegressionWeights(rng.uniform(0.5, 2, 3)))
    assert np.abs(result.residuals).max() < 1e-12


def test_orthogonality_invariant():
    rng = np.random.default_rng(12)
    for _ in range(25):
        n = int(rng.integers(3, 15))
        k = int(rng.integers(1, min(n, 4) + 1))
        lam = LoadingsMatrix(rng.normal(size=(n, k)), kind="principal_components")
        z = RegressionWeights(rng.uniform(0.5, 2.0, n))
        alpha = rng.normal(size=n)
        result = weighted_residuals(alpha, lam, z)
        resid = np.abs(lam.values.T @ (z.z * result.residuals)).max()
        scale = np.abs(lam.values.T @ (z.z * np.abs(alpha))).max()
        assert resid <= 1e-10 * max(scale, 1e-300)


def test_matches_lstsq_oracle():
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 21))
        k = int(rng.integers(1, min(n, 5) + 1))
        lam = rng.normal(size=(n, k))
        z = rng.uniform(0.5, 2.0, n)
        alpha = rng.normal(size=n)
        sqrt_z = np.sqrt(z)
        coeffs, *_ = np.linalg.lstsq(sqrt_z[:, None] * lam, sqrt_z * alpha, rcond=None)
        expected = alpha - lam @ coeffs
        got = weighted_residuals(alpha, LoadingsMatrix(lam, kind="principal_components"),
                                 RegressionWeights(z)).residuals
        worst = max(worst, float(np.abs(got - expected).max()))
    assert worst < 1e-9


def test_singular_normal_matrix_reported():
    lam = LoadingsMatrix(np.array([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]),
                         kind="principal_components")
    with pytest.raises(SingularMatrixError, match="rcond"):
        weighted_residuals(np.array([1.0, 2.0, 3.0]), lam, RegressionWeights(np.ones(3)))


def test_unbounded_weights_two_names():
    w = unbounded_weights(np.array([1.0, 3.0]), intercept_loadings(2),
                          RegressionWeights(np.ones(2)))
    assert np.allclose(w, [-0.5, 0.5])


def test_unbounded_weights_four_names():
    # residuals equal alpha (already mean zero), scale = 1/sum|alpha| = 0.1
    w = unbounded_weights(np.array([4.0, 1.0, -1.0, -4.0]), intercept_loadings(4),
                          RegressionWeights(np.ones(4)))
    assert np.allclose(w, [0.4, 0.1, -0.1, -0.4])


def test_unbounded_weights_degenerate():
    with pytest.raises(DegenerateProblemError):
        unbounded_weights(np.array([2.0, 2.0]), intercept_loadings(2),
                          RegressionWeights(np.ones(2)))


def test_unbounded_weights_contracts():
    rng = np.random.default_rng(20)
    for _ in range(20):
        n = int(rng.integers(3, 12))
        lam = intercept_loadings(n)
        z = RegressionWeights(rng.uniform(0.5, 2.0, n))
        w = unbounded_weights(rng.normal(size=n), lam, z)
        assert abs(np.abs(w).sum() - 1.0) < 1e-12
        assert np.abs(lam.values.T @ w).max() < 1e-10


@settings(deadline=None, max_examples=40)
@given(st.floats(min_value=1e-6, max_value=1e6, allow_nan=False))
def test_unbounded_weights_scale_equivariant(c):
    alpha = np.array([0.3, -1.2, 0.9, 0.4])
    lam = intercept_loadings(4)
    z = RegressionWeights(np.array([1.1, 0.7, 1.9, 0.5]))
    base = unbounded_weights(alpha, lam, z)
    scaled = unbounded_weights(c * alpha, lam, z)
    assert np.allclose(base, scaled, atol=1e-12)


def test_gamma_seed_values():
    z = RegressionWeights(np.ones(2))
    result = weighted_residuals(np.array([1.0, 3.0]), intercept_loadings(2), z)
    assert np.isclose(gamma_seed(result, z), 0.5)

    z3 = RegressionWeights(np.array([1.0, 3.0]))
    result3 = weighted_residuals(np.array([1.0, 3.0]), intercept_loadings(2), z3)
    # residuals (-1.5, 0.5): 1/(1*1.5 + 3*0.5) = 1/3
    assert np.isclose(gamma_seed(result3, z3), 1.0 / 3.0)


def test_gamma_seed_degenerate():
    z = RegressionWeights(np.ones(2))
    result = weighted_residuals(np.array([2.0, 2.0]), intercept_loadings(2), z)
    with pytest.raises(DegenerateProblemError):
        gamma_seed(result, z)
