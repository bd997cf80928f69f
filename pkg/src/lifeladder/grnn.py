"""General regression neural network for the Life Ladder target.

A GRNN is a one-pass kernel smoother: the pattern layer holds one node
per training case, each node fires with a Gaussian activation of the
squared Euclidean distance to the query, and the two summation nodes
accumulate the target-weighted and unweighted activations whose ratio
is the prediction. Predictions are therefore convex combinations of the
training targets: they interpolate as the smoothing factor tends to
zero and flatten to the target mean as it grows.

Distances are taken on z-scored features (training statistics), since
the raw panel mixes scales as different as life expectancy in years and
affect scores in [0, 1].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateFeatureError,
    InvalidValueError,
    ParameterError,
)
from .folds import kfold_indices
from .pipeline import FeatureTable
from . import variables as V

#: Default smoothing-factor search grid: 30 log-spaced points spanning
#: the near-interpolation to near-mean regimes on standardized features.
DEFAULT_SIGMA_GRID = tuple(np.logspace(-2.0, 1.0, 30))
DEFAULT_FOLDS = 5


@dataclass(frozen=True)
class Standardizer:
    """Per-feature z-score transform fit on the training data."""

    mean: np.ndarray
    std: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std


@dataclass(frozen=True)
class GrnnModel:
    """Standardized training patterns, their targets and the bandwidth."""

    patterns: np.ndarray  # (n, p) standardized training inputs
    targets: np.ndarray  # (n,)
    sigma: float
    standardizer: Standardizer
    train_fingerprint: str = ""

    @property
    def n_patterns(self) -> int:
        return self.patterns.shape[0]


@dataclass(frozen=True)
class PatternResponse:
    """Layer-by-layer view of one prediction.

    ``p`` holds the pattern activations (shifted so the nearest pattern
    fires at exactly 1), ``s_n`` the target-weighted sum and ``s_d`` the
    unweighted sum; the prediction is ``s_n / s_d``.
    """

    p: np.ndarray
    s_n: float
    s_d: float


def _standardize_fit(x: np.ndarray, lenient: bool = False) -> Standardizer:
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    if x.shape[0] == 1:
        # A single case carries no scale information; fall back to unit
        # scale so the one-pattern model is still usable.
        std = np.ones_like(std)
    elif np.any(std == 0.0):
        if not lenient:
            bad = int(np.flatnonzero(std == 0.0)[0])
            raise DegenerateFeatureError(
                f"predictor column {bad} is constant on the training data"
            )
        std = np.where(std == 0.0, 1.0, std)
    return Standardizer(mean=mean, std=std)


def _fit_arrays(
    x: np.ndarray,
    y: np.ndarray,
    sigma: float,
    fingerprint: str = "",
    lenient: bool = False,
) -> GrnnModel:
    if sigma <= 0 or not math.isfinite(sigma):
        raise ParameterError(f"smoothing factor must be positive, got {sigma}")
    if x.shape[0] == 0:
        raise ParameterError("cannot fit on an empty training table")
    scaler = _standardize_fit(x, lenient=lenient)
    return GrnnModel(
        patterns=scaler.transform(x),
        targets=y.astype(np.float64),
        sigma=float(sigma),
        standardizer=scaler,
        train_fingerprint=fingerprint,
    )


def fit(train: FeatureTable, sigma: float) -> GrnnModel:
    """Fit a GRNN on the training table: one pattern node per row.

    There is no iterative optimization; fitting standardizes the
    predictors and stores the cases. Constant predictor columns are
    rejected (they cannot be z-scored).
    """
    x = train.matrix(V.PREDICTORS)
    y = train.target()
    return _fit_arrays(x, y, sigma, fingerprint=train.fingerprint())


def pattern_response(model: GrnnModel, x: np.ndarray) -> PatternResponse:
    """Evaluate the pattern and summation layers for one query point.

    Activations are computed as exp(-(D^2 - D^2_min) / (2 sigma^2)),
    a shift that leaves the output ratio unchanged while guaranteeing
    the denominator never underflows below 1.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.patterns.shape[1],):
        raise ParameterError(
            f"expected {model.patterns.shape[1]} inputs, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidValueError("query point contains non-finite entries")
    z = model.standardizer.transform(x)
    d2 = ((model.patterns - z) ** 2).sum(axis=1)
    p = np.exp(-(d2 - d2.min()) / (2.0 * model.sigma**2))
    return PatternResponse(p=p, s_n=float(model.targets @ p), s_d=float(p.sum()))


def predict(model: GrnnModel, x: np.ndarray) -> float:
    """Predict one target value as the normalized summation-layer ratio."""
    response = pattern_response(model, x)
    if not math.isfinite(response.s_d) or response.s_d <= 0.0:
        # Unreachable after the distance shift; kept as a documented
        # fallback to the nearest pattern's target.
        z = model.standardizer.transform(np.asarray(x, dtype=np.float64))
        nearest = int(np.argmin(((model.patterns - z) ** 2).sum(axis=1)))
        return float(model.targets[nearest])
    return response.s_n / response.s_d


def predict_batch(model: GrnnModel, x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`predict` over the rows of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.patterns.shape[1]:
        raise ParameterError(
            f"expected (m, {model.patterns.shape[1]}) inputs, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidValueError("query points contain non-finite entries")
    z = model.standardizer.transform(x)
    d2 = ((z[:, None, :] - model.patterns[None, :, :]) ** 2).sum(axis=2)
    p = np.exp(-(d2 - d2.min(axis=1, keepdims=True)) / (2.0 * model.sigma**2))
    return (p @ model.targets) / p.sum(axis=1)


def select_sigma(
    train: FeatureTable,
    grid=DEFAULT_SIGMA_GRID,
    k: int = DEFAULT_FOLDS,
    seed: int = 0,
) -> tuple[float, list[float]]:
    """Choose the smoothing factor by k-fold cross-validated MSE.

    Returns the winning grid value together with the mean CV error for
    every grid point. Grid values whose errors agree to within a
    floating-point hair are treated as tied, and ties resolve toward the
    larger (smoother) sigma. Folds whose training part leaves a column
    constant fall back to unit scale for that column instead of failing.
    """
    grid = [float(s) for s in grid]
    if not grid:
        raise ParameterError("sigma grid is empty")
    for s in grid:
        if s <= 0:
            raise ParameterError(f"sigma grid values must be positive, got {s}")
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
        for gi, sigma in enumerate(grid):
            m = _fit_arrays(x_tr, y_tr, sigma, lenient=True)
            pred = predict_batch(m, x_val)
            fold_mses[gi].append(float(np.mean((pred - y_val) ** 2)))

    cv_scores = [float(np.mean(mses)) for mses in fold_mses]
    best = min(cv_scores)
    tol = 1e-12 * (1.0 + abs(best))
    chosen = max(s for s, e in zip(grid, cv_scores) if e <= best + tol)
    return chosen, cv_scores


# -- serialization ------------------------------------------------------------

def save_model(model: GrnnModel, path):
    """Write a self-describing JSON archive of the fitted model."""
    payload = {
        "kind": "grnn",
        "sigma": model.sigma,
        "mean": model.standardizer.mean.tolist(),
        "std": model.standardizer.std.tolist(),
        "patterns": model.patterns.tolist(),
        "targets": model.targets.tolist(),
        "train_fingerprint": model.train_fingerprint,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_model(path) -> GrnnModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("kind") != "grnn":
        raise ParameterError(f"not a GRNN archive: {path}")
    return GrnnModel(
        patterns=np.array(payload["patterns"], dtype=np.float64),
        targets=np.array(payload["targets"], dtype=np.float64),
        sigma=float(payload["sigma"]),
        standardizer=Standardizer(
            mean=np.array(payload["mean"], dtype=np.float64),
            std=np.array(payload["std"], dtype=np.float64),
        ),
        train_fingerprint=payload.get("train_fingerprint", ""),
    )
