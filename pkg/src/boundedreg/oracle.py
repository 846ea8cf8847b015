"""Exhaustive reference solver, for tests only.

For a fixed overall scale the bounded problem is a strictly convex quadratic
program: minimize sum((w_i - z_i*t_i)^2 / z_i) over the neutrality plane
inside the bound box, where t is the scaled target vector. Its optimum sits
at some assignment of every element to {free, at upper bound, at lower
bound}, so enumerating all 3^N assignments, solving each equality-restricted
subproblem, and keeping the feasible solution with the smallest objective
recovers the optimum by exhaustion, with no dependence on the production
solver's iteration order. The overall scale is then fixed by the same
gross-exposure fixpoint the production solver uses.

Per assignment the free elements solve the restricted regression with the
pinned values folded into the right-hand side. Columns with no support on
the free elements drop out; such an assignment is only consistent when the
pinned values alone are already neutral on the dropped columns. Assignments
whose restricted normal matrix is singular even after dropping null columns
are skipped. The enumeration is vectorized: for every assignment the
candidate is affine in the scale, so the per-scale work is a handful of
elementwise passes over precomputed coefficient tables.

Sign (stationarity) conditions at the pinned elements are reported through
``kkt_ok``. They are checked directly when every column survives on the free
set; otherwise the multiplier is not unique and existence is decided by a
small linear program.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProblemError, InfeasibleError, ValidationError
from .loadings import LoadingsMatrix
from .weighted_regression import RegressionWeights
from .bounded_regression import BoundSpec

FREE = 0
AT_UPPER = 1
AT_LOWER = 2

MAX_ORACLE_N = 12
_FEAS_SLACK = 1e-11
_CONSISTENCY_TOL = 1e-9
_SIGN_TOL = 1e-9
_TIE_RTOL = 1e-12
_RCOND_MIN = 1e-12


@dataclass
class OracleSolution:
    weights: np.ndarray
    active_pattern: np.ndarray  # int8 per element: FREE, AT_UPPER, AT_LOWER
    kkt_ok: bool
    objective: float = math.nan
    tie_broken: bool = False


class _Tables:
    """Scale-independent per-assignment coefficients.

    For assignment p the free-element candidate is gamma*R[p] + S[p], the
    full vector uses the pinned values elsewhere, and the objective follows
    from the same affine pieces. Assignments are grouped by which columns
    survive on their free set so each group shares one batched inverse.
    """

    def __init__(self, alpha, lam, z, lower, upper, shift):
        n, k = lam.shape
        if n > MAX_ORACLE_N:
            raise ValidationError(
                f"oracle enumeration capped at {MAX_ORACLE_N} elements, got {n}"
            )
        self.n, self.k = n, k
        self.alpha, self.lam, self.z = alpha, lam, z
        self.lower, self.upper, self.shift = lower, upper, shift

        n_patterns = 3 ** n
        codes = (np.arange(n_patterns)[:, None] // 3 ** np.arange(n)) % 3
        self.codes = codes.astype(np.int8)
        self.free_m = self.codes == FREE
        up_m = self.codes == AT_UPPER
        dn_m = self.codes == AT_LOWER
        self.pinned = up_m * upper[None, :] + dn_m * lower[None, :]

        support = np.abs(lam) > 0.0  # (n, k)
        keep_m = self.free_m @ support.astype(np.int64) > 0  # (p, k)
        keys = keep_m @ (1 << np.arange(k))

        self.groups = []
        for key in np.unique(keys):
            rows = np.flatnonzero(keys == key)
            cols = np.flatnonzero((key >> np.arange(k)) & 1)
            self.groups.append(self._build_group(rows, cols))

    def _build_group(self, rows, cols):
        lam, z, alpha, shift = self.lam, self.z, self.alpha, self.shift
        n = self.n
        free = self.free_m[rows]  # (g, n)
        pinned = self.pinned[rows]
        dropped = np.setdiff1d(np.arange(self.k), cols)
        consistency = (
            np.abs(pinned @ lam[:, dropped]).max(axis=1) if dropped.size else
            np.zeros(rows.size)
        )
        if cols.size == 0:
            # no surviving columns: free candidates are the bare targets
            r_coef = np.where(free, (z * alpha)[None, :], 0.0)
            s_coef = np.where(free, (-z * shift)[None, :], 0.0)
            regular = np.ones(rows.size, dtype=bool)
            return _Group(rows, cols, free, pinned, consistency, regular,
                          r_coef, s_coef, has_dropped=dropped.size > 0)
        sub = lam[:, cols]
        gram = z[:, None, None] * sub[:, :, None] * sub[:, None, :]  # (n, kc, kc)
        q_all = np.einsum("pn,nab->pab", free, gram)
        evals = np.linalg.eigvalsh(q_all)
        regular = (evals[:, 0] > _RCOND_MIN * np.maximum(evals[:, -1], 1e-300)) & (
            evals[:, -1] > 0.0
        )
        kc = cols.size
        inv = np.zeros((rows.size, kc, kc))
        if regular.any():
            inv[regular] = np.linalg.inv(q_all[regular])
        u = (free * (z * alpha)[None, :]) @ sub  # gamma coefficient of y
        c = pinned @ sub - (free * (z * shift)[None, :]) @ sub  # constant part
        a = np.einsum("pab,pb->pa", inv, u)
        b = np.einsum("pab,pb->pa", inv, c)
        # candidate over every element: gamma * r + s
        r_coef = (z * alpha)[None, :] - (a @ sub.T) * z[None, :]
        s_coef = (-z * shift)[None, :] - (b @ sub.T) * z[None, :]
        return _Group(rows, cols, free, pinned, consistency, regular,
                      r_coef, s_coef, has_dropped=dropped.size > 0)


@dataclass
class _Group:
    rows: np.ndarray
    cols: np.ndarray
    free: np.ndarray
    pinned: np.ndarray
    consistency: np.ndarray
    regular: np.ndarray
    r_coef: np.ndarray
    s_coef: np.ndarray
    has_dropped: bool


def _solve_tables(tables: _Tables, gamma: float) -> OracleSolution:
    lower, upper, z = tables.lower, tables.upper, tables.z
    target = z * (gamma * tables.alpha - tables.shift)
    # in-box vectors keep the neutrality residual below a gamma-free scale;
    # anything larger is numerical corruption, not a solution
    neutral_tol = _CONSISTENCY_TOL * max(
        1.0, float((np.abs(tables.lam).T @ np.maximum(np.abs(lower), upper)).max())
    )

    best = None  # (objective, pattern_id, weights, pattern_row, group)
    tie = False
    for grp in tables.groups:
        cand = gamma * grp.r_coef + grp.s_coef
        w = np.where(grp.free, cand, grp.pinned)
        in_box = (cand >= lower[None, :] - _FEAS_SLACK) & (
            cand <= upper[None, :] + _FEAS_SLACK
        )
        neutrality = np.abs(w @ tables.lam).max(axis=1)
        feasible = (
            grp.regular
            & (grp.consistency <= _CONSISTENCY_TOL)
            & (in_box | ~grp.free).all(axis=1)
            & (neutrality <= neutral_tol)
        )
        if not feasible.any():
            continue
        diff = w - target[None, :]
        objective = ((diff * diff) / z[None, :]).sum(axis=1)
        objective[~feasible] = np.inf
        local = int(np.argmin(objective))
        obj = float(objective[local])
        pattern_id = int(grp.rows[local])
        near = feasible & (objective <= obj + _TIE_RTOL * max(1.0, abs(obj)))
        local_tie = int(near.sum()) > 1
        if local_tie:
            # deterministic: lowest pattern id among the tied assignments
            local = int(np.flatnonzero(near)[0])
            obj = float(objective[local])
            pattern_id = int(grp.rows[local])
        if best is None or (obj, pattern_id) < (best[0], best[1]):
            best = (obj, pattern_id, w[local].copy(), local, grp)
            tie = local_tie
        elif abs(obj - best[0]) <= _TIE_RTOL * max(1.0, abs(best[0])):
            tie = True

    if best is None:
        raise InfeasibleError("no assignment is feasible at this scale")

    obj, pattern_id, weights, local, grp = best
    pattern = tables.codes[pattern_id].copy()
    kkt = _check_signs(tables, grp, local, gamma, weights)
    return OracleSolution(weights=weights, active_pattern=pattern, kkt_ok=kkt,
                          objective=obj, tie_broken=tie)


def _check_signs(tables: _Tables, grp: _Group, local: int, gamma: float,
                 weights: np.ndarray) -> bool:
    free = grp.free[local]
    up = tables.codes[grp.rows[local]] == AT_UPPER
    dn = tables.codes[grp.rows[local]] == AT_LOWER
    if not grp.has_dropped:
        cand = gamma * grp.r_coef[local] + grp.s_coef[local]
        ok_up = (cand[up] >= tables.upper[up] - _SIGN_TOL).all() if up.any() else True
        ok_dn = (cand[dn] <= tables.lower[dn] + _SIGN_TOL).all() if dn.any() else True
        return bool(ok_up and ok_dn)
    return _sign_lp(tables, free, up, dn, gamma, weights)


def _sign_lp(tables: _Tables, free, up, dn, gamma, weights) -> bool:
    """Multiplier-existence check when the free set does not pin it down."""
    from scipy.optimize import linprog

    lam, z = tables.lam, tables.z
    alpha_eff = gamma * tables.alpha - tables.shift
    rows, rhs = [], []
    for i in np.flatnonzero(free):
        b = alpha_eff[i] - weights[i] / z[i]
        slack = _SIGN_TOL / z[i]
        rows.append(lam[i]); rhs.append(b + slack)
        rows.append(-lam[i]); rhs.append(-b + slack)
    for i in np.flatnonzero(up):
        rows.append(lam[i]); rhs.append(alpha_eff[i] - (tables.upper[i] - _SIGN_TOL) / z[i])
    for i in np.flatnonzero(dn):
        rows.append(-lam[i]); rhs.append(-(alpha_eff[i] - (tables.lower[i] + _SIGN_TOL) / z[i]))
    if not rows:
        return True
    res = linprog(c=np.zeros(tables.k), A_ub=np.asarray(rows), b_ub=np.asarray(rhs),
                  bounds=[(None, None)] * tables.k, method="highs")
    return res.status == 0


def _validate_inputs(alpha, loadings, z, bounds):
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.shape[0]
    lam = loadings.values
    if lam.shape[0] != n or z.z.shape != (n,) or bounds.n != n:
        raise ValidationError("alpha, loadings, z, and bounds must agree on N")
    return alpha, lam


def oracle_fixed_gamma(alpha_tilde: np.ndarray, loadings: LoadingsMatrix,
                       z: RegressionWeights, bounds: BoundSpec) -> OracleSolution:
    """Globally optimal fixed-scale solution by exhaustive enumeration.

    ``alpha_tilde`` is the pre-scaled target vector. Raises InfeasibleError
    when no assignment is feasible.
    """
    alpha_tilde, lam = _validate_inputs(alpha_tilde, loadings, z, bounds)
    tables = _Tables(alpha_tilde, lam, z.z, bounds.lower, bounds.upper,
                     shift=np.zeros(alpha_tilde.shape[0]))
    return _solve_tables(tables, gamma=1.0)


def oracle_bounded_regression(alpha: np.ndarray, loadings: LoadingsMatrix,
                              z: RegressionWeights, bounds: BoundSpec,
                              prior_weights: np.ndarray | None = None,
                              prec: float = 1e-10,
                              max_iterations: int = 200) -> np.ndarray:
    """Full bounded solve with the enumeration oracle inside the scale loop.

    The scale update and seed match the production solver; only the
    fixed-scale subproblem is solved differently. With ``prior_weights`` the
    bounds apply to the trades and the exposure target to the total position.
    """
    alpha, lam = _validate_inputs(alpha, loadings, z, bounds)
    n = alpha.shape[0]
    prior = np.zeros(n) if prior_weights is None else np.asarray(prior_weights, dtype=float)

    active = bounds.lower < bounds.upper  # equal bounds pin the trade at zero
    idx = np.flatnonzero(active)
    fixed_gross = float(np.abs(prior[~active]).sum())
    if idx.size == 0:
        weights = prior.copy()
        if abs(np.abs(weights).sum() - 1.0) < prec:
            return weights
        raise InfeasibleError("normalization infeasible under bounds")

    alpha_a = alpha[active]
    z_a = z.z[active]
    lam_a = lam[active]
    shift = prior[active] / z_a

    # seed from the plain weighted regression, solved by least squares so the
    # production solver's factorization path is not reused here
    sqrt_z = np.sqrt(z_a)
    keep = np.abs(lam_a).sum(axis=0) > 0.0
    resid = alpha_a
    if keep.any():
        coeffs, *_ = np.linalg.lstsq(sqrt_z[:, None] * lam_a[:, keep],
                                     sqrt_z * alpha_a, rcond=None)
        resid = alpha_a - lam_a[:, keep] @ coeffs
    denom = float(np.sum(z_a * np.abs(resid)))
    if denom <= 1e-12 * float(np.sum(z_a * np.abs(alpha_a))):
        raise DegenerateProblemError("all residuals are zero; no direction to allocate")
    gamma = 1.0 / denom

    gamma_seed_value = gamma
    tables = _Tables(alpha_a, lam_a, z_a, bounds.lower[active], bounds.upper[active],
                     shift=shift)
    for _ in range(max_iterations):
        solution = _solve_tables(tables, gamma)
        x_act = solution.weights
        gross = float(np.abs(x_act + prior[active]).sum()) + fixed_gross
        if abs(gross - 1.0) < prec:
            full = prior.copy()
            full[idx] += x_act
            return full
        if gross == 0.0:
            raise DegenerateProblemError("scale iteration collapsed to zero exposure")
        gamma /= gross
        # same divergence guard as the production solver: a scale this far
        # from its seed cannot reach unit gross exposure
        if not (1e-8 * gamma_seed_value < gamma < 1e8 * gamma_seed_value):
            raise InfeasibleError("normalization infeasible under bounds")
    raise InfeasibleError(
        f"scale fixpoint did not converge in {max_iterations} iterations"
    )
