"""Risk-factor loadings construction.

A loadings matrix is N instruments by K factor columns. Columns can be
principal components of the signal covariance, binary group memberships, a
plain intercept, or externally supplied style columns appended to a binary
block. Portfolios built downstream are constrained to zero exposure against
every column, so the choice of columns decides what "neutral" means.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .panel import TimeSeriesPanel

KIND_PCA = "principal_components"
KIND_INTERCEPT = "intercept"
KIND_CLASSIFICATION = "classification"
KIND_CLASSIFICATION_STYLES = "classification_plus_styles"

DEFAULT_EIGEN_TOL = 1e-10
_SYMMETRY_RTOL = 1e-12


@dataclass
class CovarianceMatrix:
    """Sample covariance of the signal time series, diagonal strictly positive."""

    values: np.ndarray
    instrument_ids: list[str] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.values.shape[0]
        if self.values.shape != (n, n):
            raise ValidationError(f"covariance must be square, got {self.values.shape}")
        scale = np.abs(self.values).max()
        if scale > 0 and np.abs(self.values - self.values.T).max() > _SYMMETRY_RTOL * scale:
            raise ValidationError("covariance matrix is not symmetric")
        diag = np.diag(self.values)
        if (diag <= 0).any():
            idx = int(np.argmax(diag <= 0))
            name = self.instrument_ids[idx] if self.instrument_ids else str(idx)
            raise ValidationError(f"zero-variance instrument {name}")

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.values)


@dataclass
class LoadingsMatrix:
    """N x K factor loadings.

    ``n_class_columns`` marks how many leading columns form a binary
    classification block; each row of that block must sum to exactly one.
    """

    values: np.ndarray
    kind: str
    n_class_columns: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValidationError("loadings must be a 2-d matrix")
        n, k = self.values.shape
        if k < 1:
            raise ValidationError("loadings need at least one column")
        zero_cols = np.flatnonzero(np.abs(self.values).sum(axis=0) == 0.0)
        if zero_cols.size:
            raise ValidationError(f"all-zero loading column(s): {zero_cols.tolist()}")
        if self.kind in (KIND_INTERCEPT, KIND_CLASSIFICATION, KIND_CLASSIFICATION_STYLES):
            block = self.values[:, : self.n_class_columns]
            if self.n_class_columns < 1:
                raise ValidationError(f"{self.kind} loadings need a classification block")
            if not np.isin(block, (0.0, 1.0)).all():
                raise ValidationError("classification block entries must be 0 or 1")
            if not (block.sum(axis=1) == 1.0).all():
                raise ValidationError("classification block rows must sum to exactly 1")

    @property
    def K(self) -> int:
        return self.values.shape[1]


def sample_covariance(panel: TimeSeriesPanel) -> CovarianceMatrix:
    """Unbiased sample covariance across the panel's dated observations."""
    if panel.n_dates < 2:
        raise ValidationError("covariance needs at least two observations per series")
    values = np.cov(panel.values, ddof=1)
    values = np.atleast_2d(values)
    diag = np.diag(values)
    if (diag <= 0).any():
        idx = int(np.argmax(diag <= 0))
        raise ValidationError(f"zero-variance instrument {panel.instrument_ids[idx]}")
    return CovarianceMatrix(values, instrument_ids=list(panel.instrument_ids))


def pca_loadings(cov: CovarianceMatrix, eigen_tol: float = DEFAULT_EIGEN_TOL) -> LoadingsMatrix:
    """Orthonormal eigenvectors of the covariance for eigenvalues clearly above zero.

    ``eigen_tol`` is relative to the largest eigenvalue; a short history makes
    the covariance singular and the tiny eigenvalues are rounding artifacts,
    not structure. Columns come out eigenvalue-descending with the sign fixed
    so each column's largest-magnitude entry is positive.
    """
    evals, evecs = np.linalg.eigh(cov.values)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    lam_max = evals[0]
    if lam_max <= 0:
        raise ValidationError("covariance has no positive eigenvalues")
    keep = evals > eigen_tol * lam_max
    k = int(keep.sum())
    if k == 0:
        raise ValidationError("all eigenvalues fall below the tolerance")
    cols = evecs[:, :k].copy()
    for j in range(k):
        lead = np.argmax(np.abs(cols[:, j]))
        if cols[lead, j] < 0:
            cols[:, j] = -cols[:, j]
    return LoadingsMatrix(cols, kind=KIND_PCA)


def intercept_loadings(n: int) -> LoadingsMatrix:
    """Single all-ones column; neutrality against it is dollar neutrality."""
    if n < 1:
        raise ValidationError("need at least one instrument")
    return LoadingsMatrix(np.ones((n, 1)), kind=KIND_INTERCEPT, n_class_columns=1)


def classification_loadings(labels) -> LoadingsMatrix:
    """One binary column per distinct label, in first-appearance order."""
    labels = list(labels)
    if not labels:
        raise ValidationError("need at least one label")
    categories: list = []
    for lab in labels:
        if lab not in categories:
            categories.append(lab)
    values = np.zeros((len(labels), len(categories)))
    col = {lab: j for j, lab in enumerate(categories)}
    for i, lab in enumerate(labels):
        values[i, col[lab]] = 1.0
    kind = KIND_INTERCEPT if len(categories) == 1 else KIND_CLASSIFICATION
    return LoadingsMatrix(values, kind=kind, n_class_columns=len(categories))


def augment_style_columns(base: LoadingsMatrix, styles: np.ndarray) -> LoadingsMatrix:
    """Append style columns to a loadings matrix.

    Style columns are kept as given (no orthogonalization against the base
    block); a collinear combination surfaces later as a singular normal
    matrix rather than being silently repaired here.
    """
    styles = np.atleast_2d(np.asarray(styles, dtype=float))
    if styles.shape[0] != base.values.shape[0]:
        if styles.shape[1] == base.values.shape[0]:
            styles = styles.T
        else:
            raise ValidationError(
                f"styles have {styles.shape[0]} rows for {base.values.shape[0]} instruments"
            )
    if styles.shape[1] < 1:
        raise ValidationError("need at least one style column")
    zero = np.flatnonzero(np.abs(styles).sum(axis=0) == 0.0)
    if zero.size:
        raise ValidationError(f"all-zero style column(s): {zero.tolist()}")
    values = np.hstack([base.values, styles])
    if base.kind in (KIND_INTERCEPT, KIND_CLASSIFICATION, KIND_CLASSIFICATION_STYLES):
        return LoadingsMatrix(values, kind=KIND_CLASSIFICATION_STYLES,
                              n_class_columns=base.n_class_columns)
    return LoadingsMatrix(values, kind=base.kind)
