"""L1-penalized least squares by cyclic coordinate descent.

Objective (intercept unpenalized):

    (1 / (2n)) * ||y - alpha - X beta||^2 + lambda * ||beta||_1

Each coordinate subproblem is solved exactly by soft-thresholding the
partial residual correlation; the intercept is handled by centering, which
is equivalent to re-optimizing alpha = mean(y - X beta) after every update.
The sweep order is the feature order, so fits are fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, SchemaError, SizeError, UsageError
from .preprocess import DesignMatrix


@dataclass(frozen=True)
class LassoConfig:
    """Penalty weight (per-sample 1/(2n) scaling), sweep cap, and stop tolerance."""

    lambda_: float
    max_iter: int = 10_000
    tol: float = 1e-7

    def __post_init__(self):
        if self.lambda_ < 0:
            raise UsageError(f"lambda must be >= 0, got {self.lambda_}")
        if self.tol <= 0:
            raise UsageError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise UsageError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class LassoFit:
    """Fitted intercept and named coefficients plus convergence metadata.

    objective_history holds the penalized objective after each full sweep;
    coordinate descent guarantees it is non-increasing.
    """

    intercept: float
    coefficients: dict[str, float]
    lambda_: float
    n_iter: int
    converged: bool
    objective_history: list[float] = field(default_factory=list, repr=False)

    @property
    def beta(self) -> np.ndarray:
        return np.array(list(self.coefficients.values()))


def soft_threshold(z: float, gamma: float) -> float:
    """sign(z) * max(|z| - gamma, 0): the exact 1-d lasso solution."""
    if gamma < 0:
        raise UsageError(f"gamma must be >= 0, got {gamma}")
    magnitude = abs(z) - gamma
    if magnitude <= 0:
        return 0.0
    return magnitude if z > 0 else -magnitude


def fit_lasso(design: DesignMatrix, config: LassoConfig) -> LassoFit:
    """Minimize the penalized objective by cyclic coordinate descent.

    Returns converged=False (never raises) when max_iter sweeps pass without
    the largest coefficient update dropping below tol; the caller decides
    whether a non-converged fit is usable.
    """
    X, y = design.X, design.y
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NumericError("design contains non-finite entries")
    n, p = X.shape
    if n == 0:
        raise SizeError("empty design")
    lam = config.lambda_

    # Centering makes the unpenalized intercept implicit: for any beta the
    # optimal alpha is mean(y - X beta), and substituting it yields the
    # centered problem below.
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    yc = y - y_mean
    col_sq = np.einsum("ij,ij->j", Xc, Xc) / n  # (1/n) sum x_ij^2 per column

    beta = np.zeros(p)
    residual = yc.copy()
    history: list[float] = []
    converged = False
    n_iter = 0

    for sweep in range(config.max_iter):
        n_iter = sweep + 1
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue  # constant-in-window column; leave at zero
            old = beta[j]
            rho = float(Xc[:, j] @ residual) / n + col_sq[j] * old
            new = soft_threshold(rho, lam) / col_sq[j]
            if new != old:
                residual += Xc[:, j] * (old - new)
                beta[j] = new
                max_delta = max(max_delta, abs(new - old))
        history.append(
            float(residual @ residual) / (2 * n) + lam * float(np.abs(beta).sum())
        )
        if max_delta < config.tol:
            converged = True
            break

    intercept = y_mean - float(x_mean @ beta)
    return LassoFit(
        intercept=intercept,
        coefficients={name: float(b) for name, b in zip(design.feature_names, beta)},
        lambda_=lam,
        n_iter=n_iter,
        converged=converged,
        objective_history=history,
    )


def predict(fit: LassoFit, design: DesignMatrix) -> np.ndarray:
    """Evaluate alpha + X beta (log space) on a design with matching columns."""
    if tuple(fit.coefficients.keys()) != design.feature_names:
        raise SchemaError(
            f"fit columns {list(fit.coefficients)} != design columns {list(design.feature_names)}"
        )
    return fit.intercept + design.X @ fit.beta


def kkt_max_violation(design: DesignMatrix, fit: LassoFit) -> float:
    """Largest stationarity gap of a fit; ~0 at an exact optimum.

    With g_j = (1/n) x_j' (y - alpha - X beta), optimality requires
    g_j = lambda * sign(beta_j) on active coordinates and |g_j| <= lambda on
    inactive ones. Returns max_j of |g_j - lambda * sign(beta_j)| over active
    j and max(|g_j| - lambda, 0) over inactive j.
    """
    n = design.n
    residual = design.y - predict(fit, design)
    grad = design.X.T @ residual / n
    worst = 0.0
    for g, b in zip(grad, fit.beta):
        if b != 0.0:
            worst = max(worst, abs(g - fit.lambda_ * np.sign(b)))
        else:
            worst = max(worst, max(abs(g) - fit.lambda_, 0.0))
    return float(worst)


def null_threshold(design: DesignMatrix) -> float:
    """Smallest lambda at which every coefficient is exactly zero: max |x_j'y| / n."""
    yc = design.y - design.y.mean()
    return float(np.max(np.abs(design.X.T @ yc))) / design.n


def select_lambda(design: DesignMatrix, grid: list[float], n_folds: int) -> float:
    """Pick the grid value with the lowest forward-chaining out-of-fold error.

    Rows are cut into n_folds + 1 contiguous time blocks; fold k trains on
    blocks 0..k-1 and scores block k, so no fold ever sees its own future.
    Ties go to the larger lambda (prefer the sparser model).
    """
    if not grid:
        raise UsageError("lambda grid is empty")
    if any(g < 0 for g in grid):
        raise UsageError("lambda grid values must be >= 0")
    if n_folds < 2:
        raise UsageError(f"n_folds must be >= 2, got {n_folds}")
    n = design.n
    edges = np.linspace(0, n, n_folds + 2).astype(int)
    if edges[1] < 2 or np.any(np.diff(edges) < 1):
        raise SizeError(f"n={n} too small for {n_folds} forward-chaining folds")

    scores = []
    for lam in grid:
        total_sq = 0.0
        total_count = 0
        for k in range(1, n_folds + 1):
            train = slice(0, edges[k])
            test = slice(edges[k], edges[k + 1])
            sub = _row_subset(design, train)
            fit = fit_lasso(sub, LassoConfig(lambda_=lam))
            holdout = _row_subset(design, test)
            err = holdout.y - predict(fit, holdout)
            total_sq += float(err @ err)
            total_count += len(err)
        scores.append(total_sq / total_count)

    best = 0
    for i in range(1, len(grid)):
        if scores[i] < scores[best] or (scores[i] == scores[best] and grid[i] > grid[best]):
            best = i
    return float(grid[best])


def _row_subset(design: DesignMatrix, rows: slice) -> DesignMatrix:
    return DesignMatrix(
        design.dates[rows],
        design.feature_names,
        design.X[rows],
        design.y[rows],
        design.scales,
    )
