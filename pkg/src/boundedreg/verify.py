"""Randomized cross-checking of the production solver against the oracle.

Instances are small (the oracle enumerates 3^N assignments) with mixed
loadings shapes, inverse-variance weights away from one, and bounds drawn
wide enough that most instances are feasible but tight enough that pinning
happens. Both solvers run the same scale fixpoint; comparisons only count
when both converge.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bounded_regression import BoundSpec, SolverConfig, bounded_regression
from .errors import BoundedRegError
from .loadings import LoadingsMatrix, augment_style_columns, classification_loadings, \
    intercept_loadings
from .oracle import oracle_bounded_regression
from .weighted_regression import RegressionWeights


@dataclass
class RandomInstance:
    alpha: np.ndarray
    loadings: LoadingsMatrix
    z: RegressionWeights
    bounds: BoundSpec
    form: str


@dataclass
class VerifyReport:
    instances: int
    compared: int
    solver_failures: int
    oracle_failures: int
    both_failed: int
    max_discrepancy: float
    failures: list[tuple[int, float]] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    def passed(self, threshold: float = 1e-8) -> bool:
        return self.max_discrepancy <= threshold and not self.failures


def random_instance(rng: np.random.Generator, max_n: int = 8,
                    max_k: int = 3) -> RandomInstance:
    n = int(rng.integers(2, max_n + 1))
    forms = ["intercept"]
    if max_k >= 2:
        forms += ["classification", "classification_plus_style"]
    form = str(rng.choice(forms))
    if form == "intercept":
        lam = intercept_loadings(n)
    elif form == "classification":
        groups = int(rng.integers(2, min(max_k, n) + 1))
        labels = rng.integers(0, groups, size=n)
        lam = classification_loadings(labels.tolist())
    else:
        groups = int(rng.integers(1, min(max_k - 1, n) + 1))
        labels = rng.integers(0, groups, size=n)
        base = classification_loadings(labels.tolist())
        style = rng.normal(size=(n, 1))
        lam = augment_style_columns(base, style)
    alpha = rng.normal(size=n)
    z = RegressionWeights(rng.uniform(0.5, 2.0, size=n))
    upper = rng.uniform(0.1, 1.0, size=n)
    lower = -rng.uniform(0.1, 1.0, size=n)
    return RandomInstance(alpha=alpha, loadings=lam, z=z,
                          bounds=BoundSpec(lower, upper), form=form)


def run_verification(seed: int, instances: int, max_n: int = 8, max_k: int = 3,
                     solver_prec: float = 1e-10, solver_tol: float = 1e-6,
                     max_outer: int = 200, threshold: float = 1e-8) -> VerifyReport:
    """Solve ``instances`` random problems both ways and compare.

    ``solver_prec`` should match the oracle's normalization stop (1e-10) or
    the comparison measures nothing but the stopping gap.
    """
    rng = np.random.default_rng(seed)
    config = SolverConfig(tol=solver_tol, prec=solver_prec, max_outer=max_outer)
    started = time.perf_counter()
    compared = 0
    solver_failures = 0
    oracle_failures = 0
    both_failed = 0
    max_disc = 0.0
    failures: list[tuple[int, float]] = []
    for i in range(instances):
        inst = random_instance(rng, max_n=max_n, max_k=max_k)
        solver_w = oracle_w = None
        try:
            solver_w = bounded_regression(inst.alpha, inst.loadings, inst.z,
                                          inst.bounds, config)
        except BoundedRegError:
            pass
        try:
            oracle_w = oracle_bounded_regression(inst.alpha, inst.loadings, inst.z,
                                                 inst.bounds)
        except BoundedRegError:
            pass
        if solver_w is None and oracle_w is None:
            both_failed += 1
            continue
        if solver_w is None:
            solver_failures += 1
            continue
        if oracle_w is None:
            oracle_failures += 1
            continue
        compared += 1
        disc = float(np.abs(solver_w - oracle_w).max())
        max_disc = max(max_disc, disc)
        if disc > threshold:
            failures.append((i, disc))
    return VerifyReport(
        instances=instances, compared=compared, solver_failures=solver_failures,
        oracle_failures=oracle_failures, both_failed=both_failed,
        max_discrepancy=max_disc, failures=failures,
        elapsed_seconds=time.perf_counter() - started,
    )
