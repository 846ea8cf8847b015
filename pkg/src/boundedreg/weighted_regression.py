"""Unbounded weighted cross-sectional regression.

Signals are regressed across instruments on the loadings columns with
per-instrument weights equal to inverse sample variances. The residuals of
that regression, rescaled to unit gross exposure, are the allocation weights:
they are orthogonal to every loadings column under the regression weights,
which is exactly the factor-neutrality constraint the bounded solver also
enforces. No intercept is ever added implicitly; callers that want one must
put it in the loadings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import spd_solve
from .errors import DegenerateProblemError, ValidationError
from .loadings import CovarianceMatrix, LoadingsMatrix


@dataclass
class RegressionWeights:
    """Strictly positive per-instrument regression weights."""

    z: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        if self.z.ndim != 1:
            raise ValidationError("regression weights must be a vector")
        if not (np.isfinite(self.z).all() and (self.z > 0).all()):
            raise ValidationError("regression weights must be finite and positive")


@dataclass
class RegressionResult:
    residuals: np.ndarray
    fitted_coeffs: np.ndarray
    normal_matrix: np.ndarray
    fitted: np.ndarray  # loadings @ fitted_coeffs, per instrument


def regression_weights_from_cov(cov: CovarianceMatrix) -> RegressionWeights:
    """Inverse sample variances, the canonical regression weighting."""
    return RegressionWeights(1.0 / cov.diag)


def weighted_residuals(alpha: np.ndarray, loadings: LoadingsMatrix,
                       z: RegressionWeights) -> RegressionResult:
    """Residuals of the z-weighted regression of ``alpha`` on the loadings.

    The normal matrix Q = loadings' diag(z) loadings must be well conditioned;
    a singular Q means collinear columns and is reported, not regularized.
    """
    alpha = np.asarray(alpha, dtype=float)
    lam = loadings.values
    n, k = lam.shape
    if alpha.shape != (n,):
        raise ValidationError(f"alpha has shape {alpha.shape}, expected ({n},)")
    if z.z.shape != (n,):
        raise ValidationError(f"z has shape {z.z.shape}, expected ({n},)")
    w_lam = lam * z.z[:, None]
    q = lam.T @ w_lam
    coeffs = spd_solve(q, w_lam.T @ alpha, context="regression normal matrix Q")
    fitted = lam @ coeffs
    return RegressionResult(residuals=alpha - fitted, fitted_coeffs=coeffs,
                            normal_matrix=q, fitted=fitted)


def unbounded_weights(alpha: np.ndarray, loadings: LoadingsMatrix,
                      z: RegressionWeights) -> np.ndarray:
    """Allocation weights z*residual, rescaled so gross exposure is one.

    Neutral against every loadings column by the normal equations; rescaling
    a positive multiple of ``alpha`` changes nothing because the scale is
    absorbed by the normalization.
    """
    result = weighted_residuals(alpha, loadings, z)
    raw = z.z * result.residuals
    gross = np.abs(raw).sum()
    # a residual mass at rounding level means the loadings explain the whole
    # signal and any direction would be noise
    if gross <= 1e-12 * float(np.sum(z.z * np.abs(alpha))):
        raise DegenerateProblemError(
            "all residuals are zero; no direction to allocate"
        )
    return raw / gross


def gamma_seed(result: RegressionResult, z: RegressionWeights) -> float:
    """Starting scale for the bounded solver's normalization iteration."""
    denom = float(np.sum(z.z * np.abs(result.residuals)))
    fitted_mass = float(np.sum(z.z * np.abs(result.fitted)))
    if denom <= 1e-12 * fitted_mass or denom == 0.0:
        raise DegenerateProblemError("all residuals are zero; scale seed undefined")
    return 1.0 / denom
