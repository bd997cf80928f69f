"""Hold-out comparison metrics: R^2, MAE and MSE."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParameterError, ZeroVarianceError


@dataclass(frozen=True)
class MetricReport:
    model_name: str
    r2: float
    mae: float
    mse: float


def score(predictions, actuals, model_name: str = "") -> MetricReport:
    """Score paired predictions against actuals.

    R^2 is one minus the residual sum of squares over the total sum of
    squares around the actuals' mean; it is undefined when the actuals
    have zero variance.
    """
    pred = np.asarray(predictions, dtype=np.float64)
    act = np.asarray(actuals, dtype=np.float64)
    if pred.shape != act.shape or pred.ndim != 1 or pred.size == 0:
        raise ParameterError(
            f"predictions and actuals must be equal-length nonempty vectors, "
            f"got shapes {pred.shape} and {act.shape}"
        )
    ss_tot = float(((act - act.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ZeroVarianceError("actuals have zero variance; R^2 is undefined")
    resid = act - pred
    return MetricReport(
        model_name=model_name,
        r2=1.0 - float((resid**2).sum()) / ss_tot,
        mae=float(np.abs(resid).mean()),
        mse=float((resid**2).mean()),
    )


def write_metrics_csv(reports: Iterable[MetricReport], path, provenance: str | None = None):
    """Append-style results table: model, R^2, MAE, MSE."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "r2", "mae", "mse"])
        for r in reports:
            writer.writerow(
                [r.model_name, f"{r.r2:.6f}", f"{r.mae:.6f}", f"{r.mse:.6f}"]
            )
