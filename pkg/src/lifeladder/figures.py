"""Matplotlib renderings of the report outputs.

Each CLI stage writes its delimited tables first and then renders the
matching figure next to them: hold-out predictions as a scatter against
the diagonal, posterior sweeps as grouped bars per evidence level, and
the consensus graph as a circular arrow diagram with arc thickness
proportional to bootstrap support. Figures are drawn on explicit
Figure objects (no pyplot state), so rendering is safe from library
code.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from matplotlib.figure import Figure

from .bayesnet import Dag
from .discretize import LEVELS, Level
from .inference import Posterior
from .structure import ArcStrengthTable

_LEVEL_COLORS = {Level.LOW: "#c44e52", Level.MEDIUM: "#dd8452", Level.HIGH: "#55a868"}


def _save(fig: Figure, path, config_hash: str | None):
    metadata = {"Description": f"config={config_hash}"} if config_hash else None
    fig.savefig(path, dpi=150, bbox_inches="tight", metadata=metadata)


def plot_predicted_vs_actual(
    actual: Sequence[float],
    predicted: Sequence[float],
    path,
    model_name: str = "GRNN",
    config_hash: str | None = None,
):
    """Scatter the hold-out predictions against the observed values."""
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    fig = Figure(figsize=(5.5, 5.0))
    ax = fig.subplots()
    lo = min(actual.min(), predicted.min()) - 0.2
    hi = max(actual.max(), predicted.max()) + 0.2
    ax.plot([lo, hi], [lo, hi], color="0.6", lw=1.0, zorder=1)
    ax.scatter(actual, predicted, s=18, alpha=0.75, color="#4c72b0", zorder=2)
    ax.set_xlim(lo, hi)
    ax.set_ylim(lo, hi)
    ax.set_xlabel("actual Life Ladder")
    ax.set_ylabel(f"predicted Life Ladder ({model_name})")
    ax.set_title(f"{model_name} hold-out predictions")
    _save(fig, path, config_hash)


def plot_sweep(
    sweep: Sequence[tuple[Level, Posterior]],
    q: str,
    sweep_var: str,
    path,
    config_hash: str | None = None,
):
    """Grouped bars: one group per evidence level, one bar per query level."""
    fig = Figure(figsize=(6.5, 4.2))
    ax = fig.subplots()
    x = np.arange(len(sweep))
    width = 0.26
    for k, out_level in enumerate(LEVELS):
        heights = [post.probability(out_level) for _, post in sweep]
        ax.bar(
            x + (k - 1) * width,
            heights,
            width=width,
            label=f"{q} = {out_level.label}",
            color=_LEVEL_COLORS[out_level],
        )
    ax.set_xticks(x)
    ax.set_xticklabels([lvl.label for lvl, _ in sweep])
    ax.set_xlabel(sweep_var)
    ax.set_ylabel("probability")
    ax.set_ylim(0, 1)
    ax.legend(fontsize=8)
    ax.set_title(f"P({q} | {sweep_var})")
    _save(fig, path, config_hash)


def plot_network(
    dag: Dag,
    path,
    ast: ArcStrengthTable | None = None,
    config_hash: str | None = None,
):
    """Circular node layout with arcs weighted by bootstrap support."""
    fig = Figure(figsize=(8.5, 8.5))
    ax = fig.subplots()
    n = len(dag.nodes)
    angles = [math.pi / 2 - 2 * math.pi * i / n for i in range(n)]
    pos = {
        node: (math.cos(a), math.sin(a)) for node, a in zip(dag.nodes, angles)
    }
    for a, b in sorted(dag.edges):
        support = ast.support(a, b) if ast is not None else 0.5
        ax.annotate(
            "",
            xy=pos[b],
            xytext=pos[a],
            arrowprops=dict(
                arrowstyle="-|>",
                lw=0.5 + 3.0 * support,
                color="#4c72b0",
                alpha=0.8,
                shrinkA=22,
                shrinkB=22,
            ),
        )
    for node, (x, y) in pos.items():
        ax.text(
            x,
            y,
            node.replace(" ", "\n"),
            ha="center",
            va="center",
            fontsize=7,
            bbox=dict(boxstyle="round,pad=0.3", fc="#eaeaf2", ec="0.4"),
        )
    ax.set_xlim(-1.35, 1.35)
    ax.set_ylim(-1.35, 1.35)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title("consensus network (arc width = bootstrap support)")
    _save(fig, path, config_hash)
