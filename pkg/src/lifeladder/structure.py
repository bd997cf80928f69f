"""Greedy structure learning and bootstrap consensus.

Hill climbing starts from a DAG and repeatedly applies the single-edge
operation (add, delete or reverse) with the largest BIC gain, subject
to acyclicity, until no operation improves the score by more than a
tiny epsilon. Bootstrap replicates rerun the climb on row-resampled
data; the fraction of replicates whose learned DAG contains each
directed arc is its strength, and the consensus network keeps the arc
pairs whose combined (direction-agnostic) support clears a threshold,
oriented by directed-frequency majority.

Resampling a replicate only changes row multiplicities, so per-family
contingency counts are weighted bincounts over flat indices that depend
on the family alone; those indices are cached once per dataset and
shared across all replicates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .bayesnet import Dag, _family_score_from_counts
from .discretize import N_LEVELS, DiscreteTable
from .errors import ParameterError, SchemaError

#: Minimum BIC improvement for a hill-climb move to be applied.
EPSILON = 1e-9


@dataclass(frozen=True)
class TraceStep:
    step: int
    operator: str  # "add" | "delete" | "reverse"
    edge: tuple[str, str]
    score_after: float


@dataclass(frozen=True)
class ArcStrengthTable:
    """Directed-arc frequencies across bootstrap replicates."""

    nodes: tuple[str, ...]
    counts: Mapping[tuple[str, str], int]
    replicate_count: int

    def __post_init__(self):
        if self.replicate_count < 1:
            raise ParameterError("replicate count must be at least 1")
        known = set(self.nodes)
        for (a, b), c in self.counts.items():
            if a not in known or b not in known or a == b:
                raise ParameterError(f"bad arc ({a!r}, {b!r})")
            if not 0 <= c <= self.replicate_count:
                raise ParameterError(f"count for ({a!r}, {b!r}) out of range: {c}")
        for (a, b) in list(self.counts):
            paired = self.counts.get((b, a), 0) + self.counts[(a, b)]
            if paired > self.replicate_count:
                raise ParameterError(
                    f"arcs {a!r}<->{b!r} counted in more replicates than exist"
                )

    def frequency(self, parent: str, child: str) -> float:
        return self.counts.get((parent, child), 0) / self.replicate_count

    def support(self, a: str, b: str) -> float:
        """Direction-agnostic support of the pair."""
        return self.frequency(a, b) + self.frequency(b, a)


class _FamilyScorer:
    """Flat-index cache for weighted family counting on one dataset."""

    def __init__(self, codes: np.ndarray):
        self.codes = codes.astype(np.int64)
        self.n_rows = codes.shape[0]
        self._index: dict[tuple[int, tuple[int, ...]], tuple[np.ndarray, int]] = {}

    def flat_index(self, child: int, parents: tuple[int, ...]):
        key = (child, parents)
        cached = self._index.get(key)
        if cached is not None:
            return cached
        idx = self.codes[:, child].copy()
        stride = N_LEVELS
        for col in reversed(parents):
            idx += stride * self.codes[:, col]
            stride *= N_LEVELS
        cached = (idx, stride)
        self._index[key] = cached
        return cached

    def score(self, child: int, parents: tuple[int, ...], weights, total: float) -> float:
        idx, size = self.flat_index(child, parents)
        counts = np.bincount(idx, weights=weights, minlength=size)
        return _family_score_from_counts(
            counts.astype(np.float64).reshape(-1, N_LEVELS), total
        )


def _descendant_masks(n: int, children: list[set[int]]) -> list[int]:
    """Bitmask of nodes reachable (one or more steps) from each node."""
    masks = [0] * n
    for start in range(n):
        seen = 0
        stack = list(children[start])
        while stack:
            v = stack.pop()
            bit = 1 << v
            if seen & bit:
                continue
            seen |= bit
            stack.extend(children[v])
        masks[start] = seen
    return masks


def _reachable_without(children: list[set[int]], src: int, dst: int, skip: tuple[int, int]) -> bool:
    """True if a directed path src -> dst survives removing the ``skip`` edge."""
    stack = [src]
    seen = {src}
    while stack:
        v = stack.pop()
        for c in children[v]:
            if (v, c) == skip:
                continue
            if c == dst:
                return True
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def _hill_climb_core(
    scorer: _FamilyScorer,
    names: Sequence[str],
    start_parents: list[set[int]],
    weights: np.ndarray | None,
):
    n = len(names)
    total_n = float(scorer.n_rows if weights is None else weights.sum())
    if total_n <= 0:
        raise ParameterError("cannot learn from an empty table")

    memo: dict[tuple[int, tuple[int, ...]], float] = {}

    def family(child: int, parents: frozenset[int]) -> float:
        key = (child, tuple(sorted(parents)))
        value = memo.get(key)
        if value is None:
            value = scorer.score(key[0], key[1], weights, total_n)
            memo[key] = value
        return value

    parents = [frozenset(p) for p in start_parents]
    children: list[set[int]] = [set() for _ in range(n)]
    for child, ps in enumerate(parents):
        for p in ps:
            children[p].add(child)

    fam = [family(v, parents[v]) for v in range(n)]
    total = sum(fam)
    trace: list[TraceStep] = []
    step = 0

    while True:
        desc = _descendant_masks(n, children)
        best_gain = 0.0
        best_key = None
        best_op = None

        for b in range(n):
            fb = fam[b]
            pb = parents[b]
            for a in range(n):
                if a == b:
                    continue
                if a in pb:
                    # Deletion of a -> b.
                    gain = family(b, pb - {a}) - fb
                    if gain > EPSILON:
                        key = ("delete", names[a], names[b])
                        if best_key is None or gain > best_gain or (
                            gain == best_gain and key < best_key
                        ):
                            best_gain, best_key, best_op = gain, key, ("delete", a, b)
                    # Reversal to b -> a, legal if no other a ~> b path.
                    if not _reachable_without(children, a, b, skip=(a, b)):
                        gain = (
                            family(a, parents[a] | {b})
                            - fam[a]
                            + family(b, pb - {a})
                            - fb
                        )
                        if gain > EPSILON:
                            key = ("reverse", names[a], names[b])
                            if best_key is None or gain > best_gain or (
                                gain == best_gain and key < best_key
                            ):
                                best_gain, best_key, best_op = gain, key, ("reverse", a, b)
                else:
                    # Addition of a -> b, legal if b cannot already reach a.
                    if (desc[b] >> a) & 1:
                        continue
                    gain = family(b, pb | {a}) - fb
                    if gain > EPSILON:
                        key = ("add", names[a], names[b])
                        if best_key is None or gain > best_gain or (
                            gain == best_gain and key < best_key
                        ):
                            best_gain, best_key, best_op = gain, key, ("add", a, b)

        if best_op is None:
            break
        op, a, b = best_op
        if op == "add":
            parents[b] = parents[b] | {a}
            children[a].add(b)
            fam[b] = family(b, parents[b])
        elif op == "delete":
            parents[b] = parents[b] - {a}
            children[a].discard(b)
            fam[b] = family(b, parents[b])
        else:  # reverse a -> b into b -> a
            parents[b] = parents[b] - {a}
            children[a].discard(b)
            parents[a] = parents[a] | {b}
            children[b].add(a)
            fam[a] = family(a, parents[a])
            fam[b] = family(b, parents[b])
        total += best_gain
        step += 1
        trace.append(
            TraceStep(step=step, operator=op, edge=(names[a], names[b]), score_after=total)
        )

    edges = frozenset(
        (names[p], names[c]) for c in range(n) for p in parents[c]
    )
    return edges, tuple(trace)


def hill_climb(data: DiscreteTable, start: Dag | None = None) -> tuple[Dag, tuple[TraceStep, ...]]:
    """Greedy steepest-ascent BIC search over single-edge operations.

    Every applied operation strictly improves the network BIC and keeps
    the graph acyclic; ties between equally good operations break
    lexicographically on (operator, parent, child) so the search is
    fully deterministic. Returns the local optimum and the trace of
    applied moves with the running score.
    """
    names = data.variables
    if start is None:
        start = Dag.empty(names)
    if set(start.nodes) != set(names):
        raise SchemaError("start DAG nodes and data variables disagree")
    index = {v: i for i, v in enumerate(names)}
    start_parents: list[set[int]] = [set() for _ in names]
    for parent, child in start.edges:
        start_parents[index[child]].add(index[parent])
    scorer = _FamilyScorer(data.codes())
    edges, trace = _hill_climb_core(scorer, names, start_parents, weights=None)
    return Dag(nodes=names, edges=edges), trace


def bootstrap_learn(data: DiscreteTable, replicates: int, seed: int = 0) -> ArcStrengthTable:
    """Learn one DAG per bootstrap resample and tabulate arc frequencies.

    Replicate ``r`` draws its resample from an independent generator
    seeded with (seed, r), so any replicate subset can be reproduced
    without running the others; results are identical however the
    replicates are scheduled.
    """
    if replicates < 1:
        raise ParameterError(f"replicates must be at least 1, got {replicates}")
    if seed < 0:
        raise ParameterError(f"seed must be nonnegative, got {seed}")
    if len(data) == 0:
        raise ParameterError("cannot learn from an empty table")
    names = data.variables
    scorer = _FamilyScorer(data.codes())
    n = len(data)
    empty: list[set[int]] = [set() for _ in names]
    counts: dict[tuple[str, str], int] = {}
    for r in range(replicates):
        rng = np.random.default_rng((seed, r))
        sample = rng.integers(0, n, size=n)
        weights = np.bincount(sample, minlength=n).astype(np.float64)
        edges, _ = _hill_climb_core(scorer, names, [set(p) for p in empty], weights)
        for edge in edges:
            counts[edge] = counts.get(edge, 0) + 1
    return ArcStrengthTable(nodes=names, counts=counts, replicate_count=replicates)


def threshold_arcs(ast: ArcStrengthTable, threshold: float = 0.5) -> frozenset[tuple[str, str]]:
    """Oriented arcs whose pair support clears the threshold (pre cycle-break).

    A pair is kept when f(a->b) + f(b->a) >= threshold and oriented
    toward the larger directed frequency, ties toward the
    lexicographically smaller parent.
    """
    if not 0.0 < threshold <= 1.0:
        raise ParameterError(f"threshold must be in (0, 1], got {threshold}")
    kept = set()
    ordered = sorted(ast.nodes)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            f_ab = ast.frequency(a, b)
            f_ba = ast.frequency(b, a)
            if f_ab + f_ba >= threshold:
                kept.add((b, a) if f_ba > f_ab else (a, b))
    return frozenset(kept)


def _find_cycle(nodes: Sequence[str], edges: set[tuple[str, str]]):
    children: dict[str, list[str]] = {n: [] for n in nodes}
    for p, c in sorted(edges):
        children[p].append(c)
    color: dict[str, int] = {}
    path: list[str] = []

    def visit(v: str):
        color[v] = 1
        path.append(v)
        for c in children[v]:
            if color.get(c, 0) == 1:
                cycle_nodes = path[path.index(c):] + [c]
                return list(zip(cycle_nodes, cycle_nodes[1:]))
            if color.get(c, 0) == 0:
                found = visit(c)
                if found:
                    return found
        color[v] = 2
        path.pop()
        return None

    for node in sorted(nodes):
        if color.get(node, 0) == 0:
            found = visit(node)
            if found:
                return found
        path.clear()
    return None


def consensus(ast: ArcStrengthTable, threshold: float = 0.5) -> Dag:
    """Consensus DAG: thresholded, majority-oriented arcs made acyclic.

    If the kept arcs contain directed cycles, the lowest-support arc of
    each cycle (ties broken lexicographically) is dropped until the
    graph is acyclic.
    """
    edges = set(threshold_arcs(ast, threshold))
    while True:
        cycle = _find_cycle(ast.nodes, edges)
        if cycle is None:
            break
        edges.remove(min(cycle, key=lambda e: (ast.support(*e), e[0], e[1])))
    return Dag(nodes=ast.nodes, edges=frozenset(edges))


# -- exports -------------------------------------------------------------------

def write_arc_strengths_csv(ast: ArcStrengthTable, path, provenance: str | None = None):
    """Delimited arc-strength table: parent, child, directed_frequency, support."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["parent", "child", "directed_frequency", "support"])
        for (a, b) in sorted(ast.counts):
            if ast.counts[(a, b)] == 0:
                continue
            writer.writerow(
                [a, b, f"{ast.frequency(a, b):.6f}", f"{ast.support(a, b):.6f}"]
            )


def write_dot(dag: Dag, path, ast: ArcStrengthTable | None = None, provenance: str | None = None):
    """Graph-description export with arc thickness proportional to support."""
    lines = []
    if provenance:
        lines.append(f"// {provenance}")
    lines.append("digraph consensus {")
    lines.append("  rankdir=LR;")
    lines.append('  node [shape=box, style=rounded];')
    for node in dag.nodes:
        lines.append(f'  "{node}";')
    for a, b in sorted(dag.edges):
        if ast is not None:
            s = ast.support(a, b)
            lines.append(
                f'  "{a}" -> "{b}" [penwidth={5.0 * s:.2f}, label="{s:.2f}"];'
            )
        else:
            lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
