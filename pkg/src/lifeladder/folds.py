"""Seeded k-fold index assignment shared by the bandwidth and ridge searches."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def kfold_indices(n_rows: int, k: int, seed: int = 0) -> list[np.ndarray]:
    """Split ``range(n_rows)`` into k shuffled, near-equal folds.

    The assignment is a pure function of (n_rows, k, seed), so repeated
    runs see identical folds.
    """
    if k < 2:
        raise ParameterError(f"fold count must be at least 2, got {k}")
    if n_rows < k:
        raise ParameterError(f"cannot make {k} folds from {n_rows} rows")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_rows)
    return [np.sort(part) for part in np.array_split(order, k)]
