"""Discrete Bayesian-network machinery over three-level variables.

A network is a DAG plus one conditional probability table per node; the
joint distribution factorizes as the product of P(node | parents). The
structure score is the BIC in its higher-is-better form: the maximized
multinomial log-likelihood of each family minus (log N / 2) times the
family's free-parameter count, using natural logarithms. The score
decomposes over families, which is what makes greedy edge search cheap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .discretize import LEVELS, N_LEVELS, DiscreteTable, Level
from .errors import (
    CycleError,
    IncompleteAssignmentError,
    ParameterError,
    SchemaError,
)


def topological_order(nodes: Sequence[str], edges: Iterable[tuple[str, str]]) -> list[str]:
    """Kahn's algorithm; raises :class:`CycleError` if no order exists."""
    edges = list(edges)
    indegree = {n: 0 for n in nodes}
    children: dict[str, list[str]] = {n: [] for n in nodes}
    for parent, child in edges:
        indegree[child] += 1
        children[parent].append(child)
    ready = [n for n in nodes if indegree[n] == 0]
    order = []
    while ready:
        n = ready.pop()
        order.append(n)
        for c in children[n]:
            indegree[c] -= 1
            if indegree[c] == 0:
                ready.append(c)
    if len(order) != len(list(nodes)):
        raise CycleError("edge set contains a directed cycle")
    return order


def is_acyclic(nodes: Sequence[str], edges: Iterable[tuple[str, str]]) -> bool:
    try:
        topological_order(nodes, edges)
        return True
    except CycleError:
        return False


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named nodes."""

    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(self.edges))
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ParameterError("duplicate node names")
        for parent, child in self.edges:
            if parent == child:
                raise ParameterError(f"self-loop on {parent!r}")
            if parent not in known or child not in known:
                raise ParameterError(f"edge references unknown node: {parent!r} -> {child!r}")
        topological_order(self.nodes, self.edges)  # raises on cycles

    @classmethod
    def empty(cls, nodes: Sequence[str]) -> "Dag":
        return cls(nodes=tuple(nodes), edges=frozenset())

    def parents(self, node: str) -> tuple[str, ...]:
        """Parents of ``node`` in canonical node order."""
        ps = {p for p, c in self.edges if c == node}
        return tuple(n for n in self.nodes if n in ps)

    def children(self, node: str) -> tuple[str, ...]:
        cs = {c for p, c in self.edges if p == node}
        return tuple(n for n in self.nodes if n in cs)

    def topological(self) -> list[str]:
        return topological_order(self.nodes, self.edges)

    def has_path(self, source: str, target: str) -> bool:
        """True if a directed path (possibly length 0) runs source -> target."""
        if source == target:
            return True
        stack = [source]
        seen = {source}
        while stack:
            node = stack.pop()
            for child in self.children(node):
                if child == target:
                    return True
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return False


@dataclass(frozen=True)
class CategoricalCpt:
    """P(child | parents) over three levels.

    ``table`` has one axis per parent (in ``parents`` order) plus a
    trailing child axis, each of length 3; ``table.reshape(-1, 3)``
    enumerates parent configurations in C order, first parent most
    significant. Every row must be a probability vector.
    """

    child: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        expected = (N_LEVELS,) * len(self.parents) + (N_LEVELS,)
        if self.table.shape != expected:
            raise ParameterError(
                f"CPT for {self.child!r}: expected shape {expected}, got {self.table.shape}"
            )
        rows = self.table.reshape(-1, N_LEVELS)
        if not np.all(np.isfinite(rows)) or np.any(rows < 0):
            raise ParameterError(f"CPT for {self.child!r}: entries must be finite and >= 0")
        if np.any(np.abs(rows.sum(axis=1) - 1.0) > 1e-12):
            raise ParameterError(f"CPT for {self.child!r}: rows must sum to 1")

    @property
    def rows(self) -> np.ndarray:
        return self.table.reshape(-1, N_LEVELS)


@dataclass(frozen=True)
class DiscreteBayesNet:
    """A DAG with one CPT per node."""

    dag: Dag
    cpts: Mapping[str, CategoricalCpt] = field(default_factory=dict)

    def __post_init__(self):
        if set(self.cpts) != set(self.dag.nodes):
            raise ParameterError("need exactly one CPT per node")
        for node in self.dag.nodes:
            cpt = self.cpts[node]
            if cpt.child != node:
                raise ParameterError(f"CPT child {cpt.child!r} filed under {node!r}")
            if cpt.parents != self.dag.parents(node):
                raise ParameterError(
                    f"CPT parents for {node!r} disagree with the DAG: "
                    f"{cpt.parents} vs {self.dag.parents(node)}"
                )


# -- scoring -------------------------------------------------------------------

def _family_counts(
    codes: np.ndarray,
    child_col: int,
    parent_cols: Sequence[int],
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """(q, 3) contingency counts of (parent configuration, child level)."""
    idx = codes[:, child_col].astype(np.int64)
    stride = N_LEVELS
    for col in reversed(parent_cols):
        idx += stride * codes[:, col].astype(np.int64)
        stride *= N_LEVELS
    counts = np.bincount(idx, weights=weights, minlength=stride)
    return counts.astype(np.float64).reshape(-1, N_LEVELS)


def _family_score_from_counts(counts: np.ndarray, n_total: float) -> float:
    """BIC family term from a (q, 3) count table.

    Log-likelihood is sum over cells of N_jk * log(N_jk / N_j), empty
    cells contributing zero; the penalty charges (log N / 2) free
    parameters for all q configurations, observed or not.
    """
    q = counts.shape[0]
    cells = counts[counts > 0]
    ll = float((cells * np.log(cells)).sum())
    group = counts.sum(axis=1)
    group = group[group > 0]
    ll -= float((group * np.log(group)).sum())
    penalty = 0.5 * math.log(n_total) * q * (N_LEVELS - 1)
    return ll - penalty


def family_score(child: str, parents: Iterable[str], data: DiscreteTable) -> float:
    """BIC contribution of one (child, parents) family on the data."""
    parents = tuple(parents)
    if child in parents:
        raise ParameterError(f"{child!r} cannot be its own parent")
    col = {v: i for i, v in enumerate(data.variables)}
    for name in (child, *parents):
        if name not in col:
            raise SchemaError(f"variable not in data: {name!r}")
    if len(data) == 0:
        raise ParameterError("cannot score an empty table")
    counts = _family_counts(data.codes(), col[child], [col[p] for p in parents])
    return _family_score_from_counts(counts, float(len(data)))


def bic_score(dag: Dag, data: DiscreteTable) -> float:
    """Network BIC: the sum of family scores (score decomposability)."""
    if set(dag.nodes) != set(data.variables):
        raise SchemaError(
            f"DAG nodes and data variables disagree: "
            f"{sorted(set(dag.nodes) ^ set(data.variables))}"
        )
    return sum(family_score(node, dag.parents(node), data) for node in dag.nodes)


# -- parameter estimation ------------------------------------------------------

def fit_cpts(dag: Dag, data: DiscreteTable, alpha: float = 0.0) -> DiscreteBayesNet:
    """Estimate one CPT per node with additive (Laplace) smoothing.

    Each entry is (N_jk + alpha) / (N_j + 3 alpha); alpha = 0 is the
    maximum-likelihood fit, with unobserved parent configurations
    falling back to uniform rows so every table stays normalized.
    """
    if alpha < 0:
        raise ParameterError(f"smoothing alpha must be nonnegative, got {alpha}")
    if set(dag.nodes) != set(data.variables):
        raise SchemaError("DAG nodes and data variables disagree")
    codes = data.codes()
    col = {v: i for i, v in enumerate(data.variables)}
    cpts = {}
    for node in dag.nodes:
        parents = dag.parents(node)
        counts = _family_counts(codes, col[node], [col[p] for p in parents])
        group = counts.sum(axis=1, keepdims=True)
        numer = counts + alpha
        denom = group + N_LEVELS * alpha
        probs = np.where(
            denom > 0, numer / np.where(denom > 0, denom, 1.0), 1.0 / N_LEVELS
        )
        table = probs.reshape((N_LEVELS,) * len(parents) + (N_LEVELS,))
        cpts[node] = CategoricalCpt(child=node, parents=parents, table=table)
    return DiscreteBayesNet(dag=dag, cpts=cpts)


def joint_probability(net: DiscreteBayesNet, assignment: Mapping[str, Level]) -> float:
    """Probability of one full assignment under the factorization."""
    missing = [n for n in net.dag.nodes if n not in assignment]
    if missing:
        raise IncompleteAssignmentError(f"assignment missing {missing}")
    unknown = [n for n in assignment if n not in set(net.dag.nodes)]
    if unknown:
        raise ParameterError(f"assignment names unknown variables: {unknown}")
    prob = 1.0
    for node in net.dag.nodes:
        cpt = net.cpts[node]
        idx = tuple(int(assignment[p]) for p in cpt.parents) + (int(assignment[node]),)
        prob *= float(cpt.table[idx])
    return prob


# -- text serialization ----------------------------------------------------------

def _format_edges(dag: Dag) -> list[str]:
    return [f"edge {p} -> {c}" for p, c in sorted(dag.edges)]


def write_dag_text(dag: Dag, path, provenance: str | None = None):
    """One ``node`` line per node and one ``edge parent -> child`` line per arc."""
    lines = []
    if provenance:
        lines.append(f"# {provenance}")
    lines += [f"node {n}" for n in dag.nodes]
    lines += _format_edges(dag)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_net_text(net: DiscreteBayesNet, path, provenance: str | None = None):
    """DAG lines followed by one CPT block per node; lossless round-trip."""
    lines = []
    if provenance:
        lines.append(f"# {provenance}")
    lines += [f"node {n}" for n in net.dag.nodes]
    lines += _format_edges(net.dag)
    for node in net.dag.nodes:
        cpt = net.cpts[node]
        head = f"cpt {node}"
        if cpt.parents:
            head += " | " + " | ".join(cpt.parents)
        lines.append(head)
        for config, row in zip(
            itertools.product(LEVELS, repeat=len(cpt.parents)), cpt.rows
        ):
            label = ",".join(lvl.label for lvl in config) if config else "-"
            lines.append(f"{label} : " + " ".join(repr(float(p)) for p in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_structure(path):
    nodes: list[str] = []
    edges: set[tuple[str, str]] = set()
    blocks: list[tuple[str, tuple[str, ...], list[str]]] = []
    with open(path, encoding="utf-8") as fh:
        for raw_line in fh:
            line = raw_line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if line.startswith("node "):
                nodes.append(line[len("node "):].strip())
            elif line.startswith("edge "):
                body = line[len("edge "):]
                parent, _, child = body.partition(" -> ")
                if not child:
                    raise SchemaError(f"malformed edge line: {line!r}")
                edges.add((parent.strip(), child.strip()))
            elif line.startswith("cpt "):
                parts = [p.strip() for p in line[len("cpt "):].split(" | ")]
                blocks.append((parts[0], tuple(parts[1:]), []))
            else:
                if not blocks:
                    raise SchemaError(f"unexpected line outside a cpt block: {line!r}")
                blocks[-1][2].append(line)
    return nodes, edges, blocks


def read_dag_text(path) -> Dag:
    nodes, edges, blocks = _parse_structure(path)
    if blocks:
        raise SchemaError(f"{path} contains CPT blocks; use read_net_text")
    return Dag(nodes=tuple(nodes), edges=frozenset(edges))


def read_net_text(path) -> DiscreteBayesNet:
    nodes, edges, blocks = _parse_structure(path)
    dag = Dag(nodes=tuple(nodes), edges=frozenset(edges))
    cpts = {}
    for child, parents, rows in blocks:
        expected = N_LEVELS ** len(parents)
        if len(rows) != expected:
            raise SchemaError(
                f"cpt {child!r}: expected {expected} rows, found {len(rows)}"
            )
        table = np.empty((expected, N_LEVELS), dtype=np.float64)
        for i, line in enumerate(rows):
            _, _, numbers = line.partition(" : ")
            values = numbers.split()
            if len(values) != N_LEVELS:
                raise SchemaError(f"cpt {child!r}: malformed row {line!r}")
            table[i] = [float(v) for v in values]
        cpts[child] = CategoricalCpt(
            child=child,
            parents=parents,
            table=table.reshape((N_LEVELS,) * len(parents) + (N_LEVELS,)),
        )
    return DiscreteBayesNet(dag=dag, cpts=cpts)
