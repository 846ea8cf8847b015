"""Small shared helpers for symmetric positive definite solves."""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import SingularMatrixError

RCOND_FLOOR = 1e-12


def spd_rcond(mat: np.ndarray) -> float:
    """Reciprocal condition estimate of a symmetric matrix (min/max eigenvalue)."""
    if mat.shape[0] == 0:
        return 1.0
    evals = np.linalg.eigvalsh(mat)
    lo, hi = float(evals[0]), float(evals[-1])
    if hi <= 0.0:
        return 0.0
    return lo / hi


def spd_solve(mat: np.ndarray, rhs: np.ndarray, context: str = "normal matrix") -> np.ndarray:
    """Solve ``mat @ x = rhs`` for symmetric positive definite ``mat``.

    Raises SingularMatrixError with a condition estimate when the matrix is
    singular or its reciprocal condition falls below ``RCOND_FLOOR``.
    """
    if mat.shape[0] == 0:
        return np.zeros(0)
    rcond = spd_rcond(mat)
    if rcond < RCOND_FLOOR:
        raise SingularMatrixError(f"{context} is singular or ill-conditioned", rcond=rcond)
    try:
        factor = cho_factor(mat, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rcond check screens first
        raise SingularMatrixError(f"{context} is not positive definite: {exc}", rcond=rcond)
    return cho_solve(factor, rhs)
