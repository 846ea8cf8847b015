"""Bounded weighted cross-sectional regression.

The solver finds allocation weights that are simultaneously

* neutral against every loadings column,
* normalized to unit gross exposure, and
* inside per-element lower/upper bounds that straddle zero.

Plain regression delivers the first property and the normalization fixes the
overall scale, but pinning elements to bounds naively would break both. The
algorithm therefore runs two nested iterations. The inner iteration works at
a fixed overall scale: elements are partitioned into a free set and sets
pinned at the upper or lower bound, the free elements are solved by the
weighted regression restricted to them (with the pinned values folded into
the right-hand side so neutrality survives), and the current feasible
iterate is moved along the ray toward that candidate until the first bound
is hit. Elements landing on a bound join the pinned sets and the pass
repeats until the partition stops changing. The outer iteration rescales the
inputs by the gross exposure of the inner solution until the exposure is one
within ``prec``.

Both loops are restarted from scratch on every outer pass (empty pinned
sets, zero iterate), which keeps every iterate feasible and neutral: the ray
step is a convex combination of two neutral vectors and never leaves the
bound box. Columns that lose all free support during a pass are dropped from
the restricted normal matrix for that pass; their neutrality is already
carried by the pinned values.

Rebalancing from existing holdings runs the same inner iteration on the
traded amounts (bounds apply to trades) while the outer normalization still
measures the resulting total position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import RCOND_FLOOR, spd_rcond, spd_solve
from .errors import (
    ConvergenceError,
    DegenerateProblemError,
    InfeasibleError,
    SingularMatrixError,
    ValidationError,
)
from .loadings import LoadingsMatrix
from .weighted_regression import RegressionWeights

NO_BOUND = 1.0  # "unbounded" convention: weights can never exceed unit gross

POLICY_UNIFORM_CAP = "uniform_cap"
POLICY_TURNOVER_CAP = "turnover_cap"
POLICY_EXPLICIT = "explicit"


@dataclass
class BoundSpec:
    """Per-element bounds with lower <= 0 <= upper.

    Elements with equal bounds (necessarily both zero) are fixed at zero and
    excluded from the iteration; everything else must leave room on both
    sides of zero. Absence of a bound is encoded as +-1.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValidationError("bounds must be two equal-length vectors")
        if not (np.isfinite(self.lower).all() and np.isfinite(self.upper).all()):
            raise ValidationError("bounds must be finite")
        bad = np.flatnonzero(self.lower > 0)
        if bad.size:
            raise ValidationError(f"lower bound must be <= 0 at element {bad[0]}")
        bad = np.flatnonzero(self.upper < 0)
        if bad.size:
            raise ValidationError(f"upper bound must be >= 0 at element {bad[0]}")

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @classmethod
    def unbounded(cls, n: int) -> "BoundSpec":
        return cls(-np.ones(n) * NO_BOUND, np.ones(n) * NO_BOUND)

    def scaled(self, factor: float) -> "BoundSpec":
        if factor <= 0:
            raise ValidationError("scale factor must be positive")
        return BoundSpec(self.lower * factor, self.upper * factor)


@dataclass
class BoundPolicy:
    """How to derive bounds: a uniform cap, a turnover-triggered cap, or
    explicit per-element values."""

    kind: str
    xi: float | None = None
    xi_tilde: float | None = None
    tau_star: float | None = None
    tau: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    @classmethod
    def uniform_cap(cls, xi: float) -> "BoundPolicy":
        _check_fraction(xi, "xi")
        return cls(kind=POLICY_UNIFORM_CAP, xi=xi)

    @classmethod
    def turnover_cap(cls, xi_tilde: float, tau_star: float, tau) -> "BoundPolicy":
        _check_fraction(xi_tilde, "xi_tilde")
        tau = np.asarray(tau, dtype=float)
        if (tau < 0).any():
            raise ValidationError("turnover must be nonnegative")
        if tau_star < 0:
            raise ValidationError("turnover cutoff must be nonnegative")
        return cls(kind=POLICY_TURNOVER_CAP, xi_tilde=xi_tilde, tau_star=tau_star, tau=tau)

    @classmethod
    def explicit(cls, lower, upper) -> "BoundPolicy":
        return cls(kind=POLICY_EXPLICIT, lower=np.asarray(lower, dtype=float),
                   upper=np.asarray(upper, dtype=float))


def _check_fraction(value: float, name: str):
    if not (0.0 < value <= 1.0):
        raise ValidationError(f"{name} must be in (0, 1], got {value}")


@dataclass
class SolverConfig:
    """Iteration tolerances and caps.

    ``tol`` decides when an element counts as sitting on a bound, ``prec`` is
    the allowed gap between gross exposure and one at exit. ``max_inner``
    defaults to 4N when left unset.
    """

    tol: float = 1e-6
    prec: float = 1e-5
    max_inner: int | None = None
    max_outer: int = 100

    def __post_init__(self):
        if self.tol <= 0 or self.prec <= 0:
            raise ValidationError("tol and prec must be positive")
        if self.max_inner is not None and self.max_inner < 1:
            raise ValidationError("max_inner must be positive")
        if self.max_outer < 1:
            raise ValidationError("max_outer must be positive")

    def inner_cap(self, n: int) -> int:
        return self.max_inner if self.max_inner is not None else 4 * n


@dataclass
class SolveState:
    """Partition and iterate of the nested iteration, in original indices."""

    j_plus: np.ndarray
    j_minus: np.ndarray
    w_hat: np.ndarray
    gamma: float
    inner_iterations: int
    outer_iterations: int
    total_inner_iterations: int = 0
    fixed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


@dataclass
class BoundedSolution:
    """Full solve output: weights, trades (equal to weights for establishing
    solves), and the final iteration state."""

    weights: np.ndarray
    trades: np.ndarray
    state: SolveState


def bounds_from_policy(policy: BoundPolicy, n: int) -> BoundSpec:
    """Materialize a bound policy for ``n`` elements."""
    if policy.kind == POLICY_UNIFORM_CAP:
        return BoundSpec(-policy.xi * np.ones(n), policy.xi * np.ones(n))
    if policy.kind == POLICY_TURNOVER_CAP:
        tau = policy.tau
        if tau.shape != (n,):
            raise ValidationError(f"turnover vector has shape {tau.shape}, expected ({n},)")
        cap = np.where(tau >= policy.tau_star, policy.xi_tilde, NO_BOUND)
        return BoundSpec(-cap, cap)
    if policy.kind == POLICY_EXPLICIT:
        if policy.lower.shape != (n,) or policy.upper.shape != (n,):
            raise ValidationError("explicit bounds do not match element count")
        return BoundSpec(policy.lower, policy.upper)
    raise ValidationError(f"unknown bound policy kind {policy.kind!r}")


def restricted_normal_matrix(loadings: LoadingsMatrix, z: RegressionWeights,
                             free_set) -> tuple[np.ndarray, np.ndarray]:
    """Normal matrix over the free elements with null columns dropped.

    Columns of the loadings that vanish identically on the free set carry no
    information for the restricted regression and would make the matrix
    singular; they are removed and reported via ``kept_columns``. A matrix
    still singular after removal means genuinely collinear columns.
    """
    lam = loadings.values
    free = _as_mask(free_set, lam.shape[0])
    if not free.any():
        raise ValidationError("free set is empty")
    lam_free = lam[free]
    kept = np.flatnonzero(np.abs(lam_free).sum(axis=0) > 0.0)
    if kept.size == 0:
        return np.zeros((0, 0)), kept
    sub = lam_free[:, kept]
    q = sub.T @ (sub * z.z[free, None])
    rcond = spd_rcond(q)
    if rcond < RCOND_FLOOR:
        raise SingularMatrixError(
            "restricted normal matrix is singular after null-column removal",
            rcond=rcond,
        )
    return q, kept


def _as_mask(index_set, n: int) -> np.ndarray:
    arr = np.asarray(index_set)
    if arr.dtype == bool:
        if arr.shape != (n,):
            raise ValidationError("boolean free set has wrong length")
        return arr
    mask = np.zeros(n, dtype=bool)
    mask[arr.astype(int)] = True
    return mask


def clip_step(w_hat: np.ndarray, x_target: np.ndarray, bounds: BoundSpec) -> np.ndarray:
    """Move from ``w_hat`` toward ``x_target`` as far as the bound box allows.

    Returns ``x_target`` itself when it is already inside the box, and
    ``w_hat`` unchanged when there is nowhere to move.
    """
    w_hat = np.asarray(w_hat, dtype=float)
    x_target = np.asarray(x_target, dtype=float)
    return _clip(w_hat, x_target, bounds.lower, bounds.upper)


def _clip(w_hat, x, lower, upper):
    q = x - w_hat
    moving = q != 0.0
    if not moving.any():
        return w_hat.copy()
    p = np.where(q > 0.0, np.minimum(x, upper), np.maximum(x, lower))
    t_star = np.min((p[moving] - w_hat[moving]) / q[moving])
    return w_hat + t_star * q


_RELEASE_TOL = 1e-9  # inward pull on a pinned element beyond this means a wrong pin


def _inner_solve(alpha_eff, lam, z, lower, upper, tol, max_inner):
    """Pinned-set iteration at a fixed overall scale.

    ``alpha_eff`` already carries the scale (and any prior-holdings shift).
    Returns the converged iterate, the pinned masks, and the pass count.

    The ray step only ever adds elements to the pinned sets, which can
    strand one on a bound its stationarity condition no longer supports.
    When the sets stabilize, the candidate values of the pinned elements are
    therefore validated against their bounds and the worst violator is
    released before convergence is declared; elements whose conditions
    depend on a dropped column are left alone (their multiplier component is
    not determined by the restricted solve).
    """
    n, k = lam.shape
    w_lam = lam * z[:, None]
    target = z * alpha_eff
    j_up = np.zeros(n, dtype=bool)
    j_dn = np.zeros(n, dtype=bool)
    w_hat = np.zeros(n)
    for s in range(1, max_inner + 1):
        free = ~(j_up | j_dn)
        cand = target.copy()
        decided = np.ones(n, dtype=bool)  # candidate carries the full multiplier
        if free.any():
            y = w_lam[free].T @ alpha_eff[free]
            if j_up.any():
                y += lam[j_up].T @ upper[j_up]
            if j_dn.any():
                y += lam[j_dn].T @ lower[j_dn]
            keep = np.abs(lam[free]).sum(axis=0) > 0.0
            if keep.any():
                sub = lam[free][:, keep]
                q_mat = sub.T @ (sub * z[free, None])
                v = spd_solve(q_mat, y[keep], context="restricted normal matrix")
                cand = target - w_lam[:, keep] @ v
            if not keep.all():
                decided = np.abs(lam[:, ~keep]).sum(axis=1) == 0.0
        else:
            decided[:] = False
        x = cand.copy()
        x[j_up] = upper[j_up]
        x[j_dn] = lower[j_dn]
        w_hat = _clip(w_hat, x, lower, upper)
        new_up = np.abs(w_hat - upper) < tol
        # an element within tol of both bounds must not land in both sets
        new_dn = (np.abs(w_hat - lower) < tol) & ~new_up
        if np.array_equal(new_up, j_up) and np.array_equal(new_dn, j_dn):
            violation = np.zeros(n)
            violation[j_up & decided] = upper[j_up & decided] - cand[j_up & decided]
            violation[j_dn & decided] = cand[j_dn & decided] - lower[j_dn & decided]
            worst = int(np.argmax(violation))
            if violation[worst] <= _RELEASE_TOL:
                return w_hat, new_up, new_dn, s
            j_up = j_up.copy(); j_dn = j_dn.copy()
            j_up[worst] = False
            j_dn[worst] = False
            continue
        j_up, j_dn = new_up, new_dn
    raise ConvergenceError(
        f"pinned-set iteration did not settle in {max_inner} passes",
        state=SolveState(
            j_plus=np.flatnonzero(j_up), j_minus=np.flatnonzero(j_dn),
            w_hat=w_hat, gamma=math.nan, inner_iterations=max_inner,
            outer_iterations=0,
        ),
    )


@dataclass
class _Reduced:
    """Problem with zero-width-bound elements removed."""

    active: np.ndarray  # boolean mask over original elements
    active_idx: np.ndarray
    lam: np.ndarray
    z: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def _reduce(loadings: LoadingsMatrix, z: RegressionWeights, bounds: BoundSpec) -> _Reduced:
    lam = loadings.values
    n = lam.shape[0]
    if z.z.shape != (n,):
        raise ValidationError(f"z has shape {z.z.shape}, expected ({n},)")
    if bounds.n != n:
        raise ValidationError(f"bounds have {bounds.n} elements, expected {n}")
    active = bounds.lower < bounds.upper  # equal bounds are both zero: fixed out
    idx = np.flatnonzero(active)
    return _Reduced(
        active=active, active_idx=idx, lam=lam[active], z=z.z[active],
        lower=bounds.lower[active], upper=bounds.upper[active],
    )


def _expand(reduced: _Reduced, x_active: np.ndarray) -> np.ndarray:
    full = np.zeros(reduced.active.shape[0])
    full[reduced.active_idx] = x_active
    return full


def _state_from(reduced: _Reduced, j_up, j_dn, w_hat_active, gamma, inner, outer,
                total_inner) -> SolveState:
    return SolveState(
        j_plus=reduced.active_idx[j_up],
        j_minus=reduced.active_idx[j_dn],
        w_hat=_expand(reduced, w_hat_active),
        gamma=gamma,
        inner_iterations=inner,
        outer_iterations=outer,
        total_inner_iterations=total_inner,
        fixed=np.flatnonzero(~reduced.active),
    )


def solve_fixed_gamma(alpha_tilde: np.ndarray, loadings: LoadingsMatrix,
                      z: RegressionWeights, bounds: BoundSpec,
                      config: SolverConfig | None = None,
                      gamma: float = math.nan) -> tuple[np.ndarray, SolveState]:
    """One full pinned-set solve for pre-scaled targets ``alpha_tilde``.

    The result is neutral, inside the bounds, and stationary for the
    restricted regression at this scale; its gross exposure is whatever it
    is, fixing that is the outer loop's job.
    """
    config = config or SolverConfig()
    alpha_tilde = np.asarray(alpha_tilde, dtype=float)
    reduced = _reduce(loadings, z, bounds)
    if reduced.active_idx.size == 0:
        state = _state_from(reduced, np.zeros(0, bool), np.zeros(0, bool),
                            np.zeros(0), gamma, 0, 0, 0)
        return np.zeros(alpha_tilde.shape[0]), state
    w_act, j_up, j_dn, s = _inner_solve(
        alpha_tilde[reduced.active], reduced.lam, reduced.z,
        reduced.lower, reduced.upper, config.tol,
        config.inner_cap(alpha_tilde.shape[0]),
    )
    state = _state_from(reduced, j_up, j_dn, w_act, gamma, s, 0, s)
    return _expand(reduced, w_act), state


_RESIDUAL_RTOL = 1e-12  # residual mass below this fraction of the signal is noise


def _seed_gamma(alpha, lam, z):
    """Scale seed 1 / sum(z |residual|) from the unbounded regression."""
    keep = np.abs(lam).sum(axis=0) > 0.0
    resid = alpha
    if keep.any():
        sub = lam[:, keep]
        w_sub = sub * z[:, None]
        q = sub.T @ w_sub
        coeffs = spd_solve(q, w_sub.T @ alpha, context="regression normal matrix Q")
        resid = alpha - sub @ coeffs
    denom = float(np.sum(z * np.abs(resid)))
    if denom <= _RESIDUAL_RTOL * float(np.sum(z * np.abs(alpha))):
        raise DegenerateProblemError("all residuals are zero; no direction to allocate")
    return 1.0 / denom


def solve_bounded(alpha: np.ndarray, loadings: LoadingsMatrix, z: RegressionWeights,
                  bounds: BoundSpec, config: SolverConfig | None = None,
                  prior_weights: np.ndarray | None = None) -> BoundedSolution:
    """Run the full two-level iteration.

    ``bounds`` constrain the traded amounts; with ``prior_weights`` of zero
    (the establishing case) trades and final weights coincide. The outer loop
    stops when total gross exposure of the final weights is one within
    ``prec`` and raises InfeasibleError when the cap on outer passes runs out,
    which is how bound sets too tight to reach unit exposure surface.
    """
    config = config or SolverConfig()
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.shape[0]
    if prior_weights is None:
        prior = np.zeros(n)
    else:
        prior = np.asarray(prior_weights, dtype=float)
        if prior.shape != (n,):
            raise ValidationError(f"prior weights have shape {prior.shape}, expected ({n},)")
    reduced = _reduce(loadings, z, bounds)

    if reduced.active_idx.size == 0:
        weights = prior.copy()
        gross = np.abs(weights).sum()
        if abs(gross - 1.0) < config.prec:
            state = _state_from(reduced, np.zeros(0, bool), np.zeros(0, bool),
                                np.zeros(0), math.nan, 0, 0, 0)
            return BoundedSolution(weights, np.zeros(n), state)
        raise InfeasibleError("normalization infeasible under bounds")

    alpha_act = alpha[reduced.active]
    prior_act = prior[reduced.active]
    fixed_gross = float(np.abs(prior[~reduced.active]).sum())
    shift = prior_act / reduced.z
    gamma = _seed_gamma(alpha_act, reduced.lam, reduced.z)
    gamma_seed_value = gamma
    inner_cap = config.inner_cap(n)

    total_inner = 0
    state = None
    for outer in range(1, config.max_outer + 1):
        alpha_eff = gamma * alpha_act - shift
        try:
            x_act, j_up, j_dn, s = _inner_solve(
                alpha_eff, reduced.lam, reduced.z, reduced.lower, reduced.upper,
                config.tol, inner_cap,
            )
        except ConvergenceError as exc:
            exc.state = _state_from(reduced, exc.state.j_plus, exc.state.j_minus,
                                    exc.state.w_hat, gamma, exc.state.inner_iterations,
                                    outer, total_inner)
            raise
        total_inner += s
        gross = float(np.abs(x_act + prior_act).sum()) + fixed_gross
        state = _state_from(reduced, j_up, j_dn, x_act, gamma, s, outer, total_inner)
        if abs(gross - 1.0) < config.prec:
            trades = _expand(reduced, x_act)
            return BoundedSolution(weights=trades + prior, trades=trades, state=state)
        if gross == 0.0:
            raise DegenerateProblemError("scale iteration collapsed to zero exposure")
        gamma /= gross
        # a scale drifting many orders from its seed means the gross exposure
        # is saturating away from one; past this point the scaled targets also
        # lose the precision the iteration relies on
        if not (1e-8 * gamma_seed_value < gamma < 1e8 * gamma_seed_value):
            raise InfeasibleError("normalization infeasible under bounds", state=state)
    raise InfeasibleError("normalization infeasible under bounds", state=state)


def bounded_regression(alpha: np.ndarray, loadings: LoadingsMatrix,
                       z: RegressionWeights, bounds: BoundSpec,
                       config: SolverConfig | None = None) -> np.ndarray:
    """Weights neutral to the loadings, unit gross exposure, inside bounds."""
    return solve_bounded(alpha, loadings, z, bounds, config).weights


def bounded_regression_rebalance(expected_returns: np.ndarray, loadings: LoadingsMatrix,
                                 z: RegressionWeights, trade_bounds: BoundSpec,
                                 prior_weights: np.ndarray,
                                 config: SolverConfig | None = None,
                                 ) -> tuple[np.ndarray, np.ndarray]:
    """Rebalance from neutral prior holdings with bounds on the trades.

    Returns ``(weights, trades)`` with ``trades = weights - prior_weights``.
    The prior must itself be neutral against the loadings or the neutrality
    of the result would be unattainable.
    """
    prior = np.asarray(prior_weights, dtype=float)
    lam = loadings.values
    resid = lam.T @ prior
    scale = np.abs(lam).T @ np.abs(prior)
    bad = np.abs(resid) > 1e-8 * np.maximum(1.0, scale)
    if bad.any():
        raise ValidationError(
            f"prior holdings are not neutral: column {int(np.flatnonzero(bad)[0])} "
            f"residual {resid[bad][0]:.3e}"
        )
    solution = solve_bounded(expected_returns, loadings, z, trade_bounds, config,
                             prior_weights=prior)
    return solution.weights, solution.trades


@dataclass
class KKTReport:
    """Post-hoc stationarity certificate for a returned solution."""

    ok: bool
    max_free_residual: float
    max_upper_violation: float
    max_lower_violation: float
    neutrality_residual: float
    gross_gap: float
    max_bound_violation: float
    used_lp: bool = False
    message: str = ""


def kkt_certificate(alpha: np.ndarray, loadings: LoadingsMatrix, z: RegressionWeights,
                    bounds: BoundSpec, weights: np.ndarray, gamma: float,
                    prior_weights: np.ndarray | None = None,
                    membership_tol: float = 1e-6, tol: float = 1e-8) -> KKTReport:
    """Check the returned weights against the fixed-scale stationarity system.

    Free elements must reproduce the restricted-regression formula, elements
    on the upper bound must have a candidate at or above it, elements on the
    lower bound at or below it. When columns drop out on the free set the
    multiplier is not unique and feasibility of the sign conditions is
    decided by a small linear program instead.
    """
    alpha = np.asarray(alpha, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n = alpha.shape[0]
    prior = np.zeros(n) if prior_weights is None else np.asarray(prior_weights, dtype=float)
    x = weights - prior
    lam = loadings.values
    zz = z.z
    lower, upper = bounds.lower, bounds.upper

    fixed = lower == upper
    j_up = (np.abs(x - upper) < membership_tol) & ~fixed
    j_dn = (np.abs(x - lower) < membership_tol) & ~fixed & ~j_up
    free = ~(j_up | j_dn | fixed)

    neutrality = float(np.abs(lam.T @ x).max()) if lam.size else 0.0
    gross_gap = abs(float(np.abs(weights).sum()) - 1.0)
    bound_violation = float(np.maximum(np.maximum(lower - x, x - upper), 0.0).max())

    alpha_eff = gamma * alpha - prior / zz
    k = lam.shape[1]
    used_lp = False

    keep = np.abs(lam[free]).sum(axis=0) > 0.0 if free.any() else np.zeros(k, dtype=bool)
    if free.any() and keep.all():
        y = (lam[free] * zz[free, None]).T @ alpha_eff[free]
        if j_up.any():
            y += lam[j_up].T @ upper[j_up]
        if j_dn.any():
            y += lam[j_dn].T @ lower[j_dn]
        q = lam[free].T @ (lam[free] * zz[free, None])
        v = spd_solve(q, y, context="certificate normal matrix")
    else:
        v, feasible = _multiplier_lp(alpha_eff, lam, zz, x, lower, upper,
                                     free, j_up, j_dn, tol)
        used_lp = True
        if not feasible:
            return KKTReport(
                ok=False, max_free_residual=math.nan, max_upper_violation=math.nan,
                max_lower_violation=math.nan, neutrality_residual=neutrality,
                gross_gap=gross_gap, max_bound_violation=bound_violation,
                used_lp=True, message="no feasible multiplier for the sign conditions",
            )

    cand = zz * (alpha_eff - lam @ v)
    free_resid = float(np.abs(x[free] - cand[free]).max()) if free.any() else 0.0
    up_viol = float(np.maximum(upper[j_up] - cand[j_up], 0.0).max()) if j_up.any() else 0.0
    dn_viol = float(np.maximum(cand[j_dn] - lower[j_dn], 0.0).max()) if j_dn.any() else 0.0
    ok = free_resid <= tol and up_viol <= tol and dn_viol <= tol
    return KKTReport(
        ok=ok, max_free_residual=free_resid, max_upper_violation=up_viol,
        max_lower_violation=dn_viol, neutrality_residual=neutrality,
        gross_gap=gross_gap, max_bound_violation=bound_violation, used_lp=used_lp,
    )


def _multiplier_lp(alpha_eff, lam, zz, x, lower, upper, free, j_up, j_dn, tol):
    """Find any multiplier vector satisfying the stationarity conditions.

    Free elements constrain it within ``tol`` of an equality, pinned elements
    one-sidedly. Returns (v, feasible).
    """
    from scipy.optimize import linprog

    k = lam.shape[1]
    rows = []
    rhs = []
    for i in np.flatnonzero(free):
        b = alpha_eff[i] - x[i] / zz[i]
        slack = tol / zz[i]
        rows.append(lam[i]); rhs.append(b + slack)
        rows.append(-lam[i]); rhs.append(-b + slack)
    for i in np.flatnonzero(j_up):
        rows.append(lam[i]); rhs.append(alpha_eff[i] - (upper[i] - tol) / zz[i])
    for i in np.flatnonzero(j_dn):
        rows.append(-lam[i]); rhs.append(-(alpha_eff[i] - (lower[i] + tol) / zz[i]))
    if not rows:
        return np.zeros(k), True
    res = linprog(c=np.zeros(k), A_ub=np.asarray(rows), b_ub=np.asarray(rhs),
                  bounds=[(None, None)] * k, method="highs")
    if res.status == 0:
        return np.asarray(res.x), True
    return np.zeros(k), False
