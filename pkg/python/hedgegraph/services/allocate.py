"""
Portfolio allocation for hedgegraph

Closed forms for the short-selling Markowitz problems, an active-set solver
for their simplex-constrained versions, and the 1/N rule.
"""

import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from scipy import linalg

from ..config.settings import settings
from ..models.allocation import (
    AllocationParams,
    AllocationResult,
    Diagnostics,
    Formulation,
    Method,
)
from ..models.estimate import CovEstimate, EstimateKind
from ..utils.error_handling import (
    ErrorCode,
    NumericalError,
    SolverError,
    TargetError,
    ValidationError,
)
from ..utils.vector_utils import format_float, snap_weights

logger = logging.getLogger(__name__)

# Relative tolerances of the active-set iteration
CURVATURE_TOL = 1e-12
DUAL_TOL = 1e-12
STEP_TOL = 1e-14
PSD_TOL = 1e-10


def _covariance_matrix(cov: CovEstimate, jitter: bool | None) -> np.ndarray:
    if cov.kind != EstimateKind.COVARIANCE:
        raise ValidationError(
            "Allocation needs a covariance estimate", ErrorCode.WRONG_ESTIMATE_KIND
        )
    matrix = np.array(cov.matrix, dtype=float)
    if settings.ALLOW_JITTER if jitter is None else jitter:
        n = matrix.shape[0]
        bump = settings.JITTER_SCALE * np.trace(matrix) / n
        matrix[np.diag_indices(n)] += bump
        logger.debug("Added diagonal jitter %.3g", bump)
    return matrix


def _check_conditioning(matrix: np.ndarray) -> float:
    condition = float(np.linalg.cond(matrix))
    if not np.isfinite(condition) or condition > settings.CONDITION_LIMIT:
        raise NumericalError(
            f"Covariance is singular or near-singular (condition {condition:.3g})",
            ErrorCode.SINGULAR_COVARIANCE,
            {"condition_number": condition if np.isfinite(condition) else None},
        )
    return condition


def _check_psd(matrix: np.ndarray) -> None:
    eigenvalues = linalg.eigvalsh(matrix)
    scale = max(float(np.abs(eigenvalues).max()), np.finfo(float).tiny)
    if eigenvalues.min() < -PSD_TOL * scale:
        raise NumericalError(
            f"Covariance is not positive semidefinite "
            f"(min eigenvalue {eigenvalues.min():.3g})",
            ErrorCode.NOT_PSD,
            {"min_eigenvalue": float(eigenvalues.min())},
        )


def _result(
    cov: CovEstimate,
    weights: np.ndarray,
    method: Method,
    formulation: Formulation | None,
    params: AllocationParams,
    diagnostics: Diagnostics,
) -> AllocationResult:
    return AllocationResult(
        tickers=cov.tickers,
        weights=snap_weights(weights),
        method=method,
        formulation=formulation,
        params=params,
        diagnostics=diagnostics,
    )


def ewp(tickers: Sequence[str]) -> AllocationResult:
    """Equal weights 1/K"""
    tickers = tuple(tickers)
    if not tickers:
        raise ValidationError("Cannot allocate an empty universe", ErrorCode.TOO_FEW_ASSETS)
    k = len(tickers)
    return AllocationResult(
        tickers=tickers, weights=np.full(k, 1.0 / k), method=Method.EWP
    )


def omv2_closed_form(
    cov: CovEstimate, gamma: float, jitter: bool | None = None
) -> AllocationResult:
    """
    Short-selling solution of min -mu'w + gamma w'Sw s.t. 1'w = 1.

    w = (S^-1 mu + nu S^-1 1) / (2 gamma) with
    nu = (2 gamma - 1'S^-1 mu) / (1'S^-1 1).
    """
    if gamma is None or gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    matrix = _covariance_matrix(cov, jitter)
    condition = _check_conditioning(matrix)
    mu = cov.mean
    ones = np.ones(cov.n_assets)

    inv_ones, inv_mu = linalg.solve(
        matrix, np.column_stack([ones, mu]), assume_a="sym"
    ).T
    nu = (2.0 * gamma - ones @ inv_mu) / (ones @ inv_ones)
    weights = (inv_mu + nu * inv_ones) / (2.0 * gamma)

    residual = 2.0 * gamma * matrix @ weights - mu - nu * ones
    violation = max(float(np.abs(residual).max()), abs(float(weights.sum()) - 1.0))
    return _result(
        cov,
        weights,
        Method.MP,
        Formulation.OMV2,
        AllocationParams(gamma=gamma),
        Diagnostics(
            objective=float(-mu @ weights + gamma * weights @ matrix @ weights),
            max_kkt_violation=violation,
            multipliers=(float(nu),),
            condition_number=condition,
        ),
    )


def omv1_short(
    cov: CovEstimate, epsilon: float, jitter: bool | None = None
) -> AllocationResult:
    """
    Minimum variance w'Sw subject to mu'w = epsilon and 1'w = 1, shorts allowed.

    With a = 1'S^-1 1, b = 1'S^-1 mu, c = mu'S^-1 mu and D = ac - b^2 the
    solution is w = S^-1 (l1 mu + l2 1), l1 = (a eps - b)/D, l2 = (c - b eps)/D.
    """
    if epsilon is None:
        raise ValidationError("OMV1 needs a target return epsilon")
    matrix = _covariance_matrix(cov, jitter)
    condition = _check_conditioning(matrix)
    mu = cov.mean
    ones = np.ones(cov.n_assets)

    inv_ones, inv_mu = linalg.solve(
        matrix, np.column_stack([ones, mu]), assume_a="sym"
    ).T
    a, b, c = ones @ inv_ones, ones @ inv_mu, mu @ inv_mu
    det = a * c - b * b

    if det <= 1e-12 * a * c or det <= 0:
        # mu is parallel to 1: every budget-feasible portfolio earns b / a
        forced = b / a
        if abs(epsilon - forced) > 1e-12 * max(1.0, abs(forced)):
            raise TargetError(
                f"Target return {epsilon} is unreachable: every portfolio "
                f"returns {forced:.6g}",
                ErrorCode.DEGENERATE_TARGET,
                epsilon,
                {"forced_return": float(forced)},
            )
        l1, l2 = 0.0, 1.0 / a
    else:
        l1 = (a * epsilon - b) / det
        l2 = (c - b * epsilon) / det

    weights = l1 * inv_mu + l2 * inv_ones
    residual = matrix @ weights - l1 * mu - l2 * ones
    violation = max(
        float(np.abs(residual).max()),
        abs(float(weights.sum()) - 1.0),
        abs(float(mu @ weights) - epsilon),
    )
    return _result(
        cov,
        weights,
        Method.MP,
        Formulation.OMV1,
        AllocationParams(epsilon=epsilon),
        Diagnostics(
            objective=float(weights @ matrix @ weights),
            max_kkt_violation=violation,
            multipliers=(float(l1), float(l2)),
            condition_number=condition,
        ),
    )


class QPSolution(BaseModel):
    """Certified optimum of a simplex QP"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: np.ndarray
    iterations: int
    max_kkt_violation: float
    multipliers: tuple[float, ...]


class ActiveSetSolver:
    """
    Primal active-set method for

        min 1/2 x'Qx + c'x   s.t.  A x = b,  x >= 0

    with Q positive semidefinite and a feasible starting point whose zero
    coordinates form an independent working set. Each equality-constrained
    subproblem is solved in the null space of the free columns of A.
    """

    def __init__(self, max_outer: int | None = None, tolerance: float | None = None):
        self.max_outer = max_outer
        self.tolerance = settings.KKT_TOLERANCE if tolerance is None else tolerance

    def _step(
        self, Q: np.ndarray, g: np.ndarray, A: np.ndarray, free: np.ndarray
    ) -> tuple[np.ndarray, bool]:
        """Step on the free coordinates and whether it is a descent ray"""
        p = np.zeros_like(g)
        Z = linalg.null_space(A[:, free])
        if Z.shape[1] == 0:
            return p, False

        reduced = Z.T @ Q[np.ix_(free, free)] @ Z
        gradient = Z.T @ g[free]
        curvature, basis = linalg.eigh(reduced)
        flat = curvature <= CURVATURE_TOL * max(1.0, float(np.abs(curvature).max()))
        along = basis.T @ gradient

        g_scale = max(1.0, float(np.abs(g).max()))
        if np.any(np.abs(along[flat]) > STEP_TOL * g_scale):
            # Zero curvature with a downhill slope: follow it to a bound
            p[free] = -Z @ (basis[:, flat] @ along[flat])
            return p, True

        curved = ~flat
        p[free] = -Z @ (basis[:, curved] @ (along[curved] / curvature[curved]))
        return p, False

    def _multipliers(
        self, g: np.ndarray, A: np.ndarray, free: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        lam = linalg.lstsq(A[:, free].T, g[free])[0]
        return lam, g - A.T @ lam

    def solve(
        self,
        Q: np.ndarray,
        c: np.ndarray,
        A: np.ndarray,
        b: np.ndarray,
        x0: np.ndarray,
    ) -> QPSolution:
        n = Q.shape[0]
        max_outer = self.max_outer or n * n
        scale = max(1.0, float(np.abs(Q).max()), float(np.abs(c).max()))

        x = np.array(x0, dtype=float)
        active = x <= 0.0
        x[active] = 0.0
        outer = steps = 0

        while True:
            steps += 1
            g = Q @ x + c
            free = ~active
            p, ray = self._step(Q, g, A, free)

            if np.abs(p).max(initial=0.0) > STEP_TOL * max(1.0, float(np.abs(x).max())):
                shrinking = free & (p < 0)
                limit = np.inf if ray else 1.0
                if shrinking.any():
                    ratios = np.full(n, np.inf)
                    ratios[shrinking] = np.maximum(x[shrinking], 0.0) / -p[shrinking]
                    blocking = int(np.argmin(ratios))
                    if ratios[blocking] < limit:
                        x = x + ratios[blocking] * p
                        x[blocking] = 0.0
                        active[blocking] = True
                        continue
                if ray:
                    raise SolverError(
                        "Quadratic program is unbounded on the feasible set",
                        ErrorCode.KKT_VIOLATION,
                        {"iterations": steps},
                    )
                x = x + p
                g = Q @ x + c

            outer += 1
            if outer > max_outer:
                raise SolverError(
                    f"Active-set iteration cap of {max_outer} exceeded",
                    ErrorCode.ITERATION_CAP,
                    {"iterations": steps, "max_outer": max_outer},
                )
            lam, z = self._multipliers(g, A, free)
            if active.any():
                candidates = np.where(active, z, np.inf)
                worst = int(np.argmin(candidates))
                if candidates[worst] < -DUAL_TOL * scale:
                    active[worst] = False
                    continue
            break

        x = np.maximum(x, 0.0)
        violation = max(
            float(np.abs(z[~active]).max(initial=0.0)) / scale,
            float(np.maximum(-z[active], 0.0).max(initial=0.0)) / scale,
            float(np.abs(A @ x - b).max()),
        )
        if violation > self.tolerance:
            raise SolverError(
                f"KKT violation {violation:.3g} exceeds {self.tolerance:.3g}",
                ErrorCode.KKT_VIOLATION,
                {"violation": violation, "iterations": steps},
            )
        logger.debug("Active-set solve: %d steps, %d KKT checks", steps, outer)
        return QPSolution(
            x=x,
            iterations=steps,
            max_kkt_violation=violation,
            multipliers=tuple(float(v) for v in lam),
        )


def _simplex_solve(Q: np.ndarray, c: np.ndarray, mu: np.ndarray | None, epsilon):
    """Solve on the simplex, adding mu'x = epsilon when a target is given"""
    n = Q.shape[0]
    if epsilon is None:
        A = np.ones((1, n))
        b = np.ones(1)
        x0 = np.full(n, 1.0 / n)
    else:
        lo, hi = int(np.argmin(mu)), int(np.argmax(mu))
        share = (epsilon - mu[lo]) / (mu[hi] - mu[lo])
        A = np.vstack([np.ones(n), mu])
        b = np.array([1.0, epsilon])
        x0 = np.zeros(n)
        x0[lo] = 1.0 - share
        x0[hi] = share
    return ActiveSetSolver().solve(Q, c, A, b, x0)


def omv1_no_short(
    cov: CovEstimate, epsilon: float | None = None, jitter: bool | None = None
) -> AllocationResult:
    """
    Minimum variance on the simplex, optionally with mu'w = epsilon.

    A target at max(mu) or min(mu) pins the portfolio to the assets attaining
    it; anything outside that range is infeasible.
    """
    matrix = _covariance_matrix(cov, jitter)
    _check_psd(matrix)
    mu = cov.mean
    n = cov.n_assets
    params = AllocationParams(epsilon=epsilon)

    support = np.ones(n, dtype=bool)
    target = epsilon
    if epsilon is not None:
        lo, hi = float(mu.min()), float(mu.max())
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if epsilon > hi + tol or epsilon < lo - tol:
            raise TargetError(
                f"Target return {epsilon} outside [{lo:.6g}, {hi:.6g}]",
                ErrorCode.INFEASIBLE_TARGET,
                epsilon,
                {"min_mean": lo, "max_mean": hi},
            )
        if epsilon >= hi - tol:
            support = mu >= hi - tol
            target = None
        elif epsilon <= lo + tol:
            support = mu <= lo + tol
            target = None

    weights = np.zeros(n)
    idx = np.flatnonzero(support)
    if idx.size == 1:
        weights[idx] = 1.0
        diagnostics = Diagnostics(objective=float(matrix[idx[0], idx[0]]))
    else:
        sub = matrix[np.ix_(idx, idx)]
        solution = _simplex_solve(2.0 * sub, np.zeros(idx.size), mu[idx], target)
        weights[idx] = solution.x
        diagnostics = Diagnostics(
            objective=float(weights @ matrix @ weights),
            iterations=solution.iterations,
            max_kkt_violation=solution.max_kkt_violation,
            multipliers=solution.multipliers,
        )
    return _result(cov, weights, Method.MPNS, Formulation.OMV1, params, diagnostics)


def omv2_no_short(
    cov: CovEstimate, gamma: float, jitter: bool | None = None
) -> AllocationResult:
    """Minimize -mu'w + gamma w'Sw on the simplex"""
    if gamma is None or gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    matrix = _covariance_matrix(cov, jitter)
    _check_psd(matrix)
    mu = cov.mean
    params = AllocationParams(gamma=gamma)

    if cov.n_assets == 1:
        weights = np.ones(1)
        diagnostics = Diagnostics(objective=float(-mu[0] + gamma * matrix[0, 0]))
    else:
        solution = _simplex_solve(2.0 * gamma * matrix, -mu, None, None)
        weights = solution.x
        diagnostics = Diagnostics(
            objective=float(-mu @ weights + gamma * weights @ matrix @ weights),
            iterations=solution.iterations,
            max_kkt_violation=solution.max_kkt_violation,
            multipliers=solution.multipliers,
        )
    return _result(cov, weights, Method.MPNS, Formulation.OMV2, params, diagnostics)


def allocate(
    cov: CovEstimate,
    method: Method,
    formulation: Formulation = Formulation.OMV1,
    gamma: float | None = None,
    epsilon: float | None = None,
    jitter: bool | None = None,
) -> AllocationResult:
    """Dispatch MP / MPNS / EWP to the solver of the chosen formulation"""
    if method == Method.EWP:
        return ewp(cov.tickers)
    if formulation == Formulation.OMV2:
        if method == Method.MP:
            return omv2_closed_form(cov, gamma, jitter)
        return omv2_no_short(cov, gamma, jitter)
    if method == Method.MP:
        return omv1_short(cov, epsilon, jitter)
    return omv1_no_short(cov, epsilon, jitter)


def write_weights_csv(result: AllocationResult, path: str | Path) -> Path:
    """``ticker,weight`` rows in universe order"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"ticker": list(result.tickers), "weight": result.weights})
    frame.to_csv(
        path,
        index=False,
        float_format=format_float,
        lineterminator="\n",
    )
    return path
