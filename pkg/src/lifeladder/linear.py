"""Closed-form linear baselines: ordinary least squares and ridge.

Both are solved by the normal equations on z-scored predictors with an
unpenalized intercept, then folded back to raw-unit coefficients so the
model predicts directly from unscaled feature rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SingularSystemError
from .folds import kfold_indices
from .pipeline import FeatureTable
from . import variables as V

#: Default ridge-penalty search grid, log-spaced over 1e-3 .. 1e2.
DEFAULT_LAMBDA_GRID = tuple(np.logspace(-3.0, 2.0, 26))

_COND_LIMIT = 1e10


@dataclass(frozen=True)
class LinearModel:
    """Raw-unit weights and intercept of a least-squares fit."""

    weights: np.ndarray
    intercept: float
    ridge_lambda: float = 0.0

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return x @ self.weights + self.intercept


def _fit_xy(x: np.ndarray, y: np.ndarray, ridge_lambda: float) -> LinearModel:
    if ridge_lambda < 0:
        raise ParameterError(f"ridge penalty must be nonnegative, got {ridge_lambda}")
    n, p = x.shape
    if n == 0:
        raise ParameterError("cannot fit on an empty training table")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)  # constant column -> all-zero after centering
    z = (x - mean) / std

    gram = z.T @ z + ridge_lambda * np.eye(p)
    if ridge_lambda == 0.0 and (
        not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > _COND_LIMIT
    ):
        raise SingularSystemError(
            "design matrix is rank deficient; use a positive ridge_lambda"
        )
    y_mean = y.mean()
    w_std = np.linalg.solve(gram, z.T @ (y - y_mean))

    weights = w_std / std
    intercept = float(y_mean - weights @ mean)
    return LinearModel(weights=weights, intercept=intercept, ridge_lambda=float(ridge_lambda))


def fit_linear(train: FeatureTable, ridge_lambda: float = 0.0) -> LinearModel:
    """Fit OLS (``ridge_lambda=0``) or ridge on the 12 predictors.

    Minimizes the squared error plus ``ridge_lambda`` times the squared
    weight norm, intercept unpenalized; a rank-deficient OLS system is
    rejected rather than silently pseudo-inverted.
    """
    return _fit_xy(train.matrix(V.PREDICTORS), train.target(), ridge_lambda)


def select_ridge_lambda(
    train: FeatureTable,
    grid=DEFAULT_LAMBDA_GRID,
    k: int = 5,
    seed: int = 0,
) -> tuple[float, list[float]]:
    """Pick the ridge penalty by the same k-fold CV used for the bandwidth.

    Ties (to floating-point precision) resolve toward the larger, more
    regularized penalty.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise ParameterError("lambda grid is empty")
    for g in grid:
        if g < 0:
            raise ParameterError(f"lambda grid values must be nonnegative, got {g}")
    x = train.matrix(V.PREDICTORS)
    y = train.target()
    folds = kfold_indices(len(train), k, seed=seed)
    mask = np.ones(len(train), dtype=bool)

    fold_mses: list[list[float]] = [[] for _ in grid]
    for val_idx in folds:
        mask[:] = True
        mask[val_idx] = False
        x_tr, y_tr = x[mask], y[mask]
        x_val, y_val = x[val_idx], y[val_idx]
        for gi, lam in enumerate(grid):
            m = _fit_xy(x_tr, y_tr, lam)
            pred = m.predict(x_val)
            fold_mses[gi].append(float(np.mean((pred - y_val) ** 2)))

    cv_scores = [float(np.mean(mses)) for mses in fold_mses]
    best = min(cv_scores)
    tol = 1e-12 * (1.0 + abs(best))
    chosen = max(g for g, e in zip(grid, cv_scores) if e <= best + tol)
    return chosen, cv_scores
