"""Background graph storage and loading.

The background graph is an undirected, simple, vertex-labeled graph held in
CSR form: every undirected edge is materialized as two directed arcs, and a
vertex's arcs occupy the half-open slice ``offsets[v]:offsets[v+1]`` of
``targets``, sorted by target id.  All higher layers work per-direction and
rely on the pruning fixed point to restore symmetry, so the only invariants
enforced here are the structural ones: no self-arcs, no duplicate arcs, and
symmetric presence of the two directions.

Labels are dense non-negative integers.  A topology loaded without a label
file is a single-label graph (everything labeled 0).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabeledGraph:
    """Immutable CSR graph with per-vertex integer labels.

    Attributes
    ----------
    n : int
        Vertex count; ids are dense in ``[0, n)``.
    offsets : numpy.ndarray
        ``int64`` array of length ``n + 1``; cumulative degrees.
    targets : numpy.ndarray
        ``int64`` array of length ``m2``; arc targets, sorted within each
        vertex's slice.
    labels : numpy.ndarray
        ``int64`` array of length ``n``; label of each vertex.
    n_labels : int
        Size of the label alphabet (``max(labels) + 1``, at least 1).
    """

    n: int
    offsets: np.ndarray
    targets: np.ndarray
    labels: np.ndarray
    n_labels: int
    _adj_sets: list | None = field(default=None, repr=False, compare=False)

    @property
    def m2(self) -> int:
        """Directed arc count (twice the undirected edge count)."""
        return int(self.offsets[-1])

    def degree(self, v: int) -> int:
        return int(self.offsets[v + 1] - self.offsets[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Arc targets of ``v`` as a sorted array view."""
        return self.targets[self.offsets[v] : self.offsets[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        k = int(np.searchsorted(row, v))
        return k < len(row) and row[k] == v

    def adjacency_sets(self) -> list:
        """Per-vertex neighbor sets, built lazily and cached."""
        if self._adj_sets is None:
            sets = [set(self.neighbors(v).tolist()) for v in range(self.n)]
            object.__setattr__(self, "_adj_sets", sets)
        return self._adj_sets

    def validate(self) -> None:
        """Full-scan check of the structural invariants; raises on violation."""
        if self.offsets.shape != (self.n + 1,) or self.offsets[0] != 0:
            raise ValueError("offsets must have length n+1 and start at 0")
        if np.any(np.diff(self.offsets) < 0):
            raise ValueError("offsets must be monotone non-decreasing")
        if self.labels.shape != (self.n,):
            raise ValueError("labels must have length n")
        if self.n and (self.labels.min() < 0 or self.labels.max() >= self.n_labels):
            raise ValueError("labels out of range")
        for v in range(self.n):
            row = self.neighbors(v)
            if np.any(row == v):
                raise ValueError(f"self-arc at vertex {v}")
            if np.any(np.diff(row) <= 0):
                raise ValueError(f"adjacency of {v} not sorted-unique")
        # symmetry: every arc has its reverse
        srcs = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.offsets))
        fwd = {(int(s), int(t)) for s, t in zip(srcs, self.targets)}
        for s, t in fwd:
            if (t, s) not in fwd:
                raise ValueError(f"missing reverse arc for ({s}, {t})")


def build_graph(edges: np.ndarray, n: int, labels: np.ndarray | None = None) -> LabeledGraph:
    """Assemble a LabeledGraph from an array of undirected edge endpoints.

    ``edges`` is an ``(m, 2)`` integer array; self-edges and duplicates are
    dropped silently here (the loaders count and report them).
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges):
        edges = edges[edges[:, 0] != edges[:, 1]]
    if len(edges):
        arcs = np.concatenate([edges, edges[:, ::-1]])
        arcs = np.unique(arcs, axis=0)
    else:
        arcs = np.empty((0, 2), dtype=np.int64)
    counts = np.bincount(arcs[:, 0], minlength=n) if len(arcs) else np.zeros(n, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    targets = arcs[:, 1].copy() if len(arcs) else np.empty(0, dtype=np.int64)
    if labels is None:
        labels = np.zeros(n, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    n_labels = int(labels.max()) + 1 if n else 1
    return LabeledGraph(n=n, offsets=offsets, targets=targets, labels=labels, n_labels=n_labels)


def load_edge_list(path: str, compact: bool = False) -> LabeledGraph:
    """Load a graph topology from an edge-list text file.

    Each data line holds two whitespace-separated non-negative vertex ids;
    ``#`` starts a comment.  Both arc directions are materialized.
    Self-edges and duplicate edges are dropped and counted in a warning.

    With ``compact=True`` vertex ids are renumbered densely in order of
    first appearance; otherwise ids are taken literally and
    ``n = max id + 1``.
    """
    pairs: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'src dst', got {raw.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer vertex id") from exc
            if u < 0 or v < 0:
                raise ValueError(f"{path}:{lineno}: negative vertex id")
            pairs.append((u, v))
    if not pairs:
        raise ValueError(f"{path}: no edges found")

    edges = np.array(pairs, dtype=np.int64)
    if compact:
        order: dict[int, int] = {}
        for u, v in pairs:
            for x in (u, v):
                if x not in order:
                    order[x] = len(order)
        remap = np.vectorize(order.__getitem__, otypes=[np.int64])
        edges = remap(edges)
        n = len(order)
    else:
        n = int(edges.max()) + 1

    self_loops = int(np.sum(edges[:, 0] == edges[:, 1]))
    kept = edges[edges[:, 0] != edges[:, 1]]
    undirected = np.sort(kept, axis=1)
    unique_undirected = np.unique(undirected, axis=0) if len(undirected) else undirected
    duplicates = len(undirected) - len(unique_undirected)
    if self_loops or duplicates:
        logger.warning(
            "%s: dropped %d self-edge(s) and %d duplicate edge(s)", path, self_loops, duplicates
        )
    return build_graph(unique_undirected, n)


def load_labels(path: str, g: LabeledGraph) -> LabeledGraph:
    """Attach labels from a "vertex_id label_id" text file to ``g``.

    Vertices absent from the file keep the reserved label 0.  A vertex may
    appear at most once; out-of-range ids are errors.  Returns a new graph
    (topology shared).
    """
    labels = np.zeros(g.n, dtype=np.int64)
    seen: set[int] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'vertex_id label_id'")
            try:
                v, lab = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer field") from exc
            if v < 0 or v >= g.n:
                raise ValueError(f"{path}:{lineno}: vertex id {v} out of range (n={g.n})")
            if lab < 0:
                raise ValueError(f"{path}:{lineno}: negative label")
            if v in seen:
                raise ValueError(f"{path}:{lineno}: duplicate entry for vertex {v}")
            seen.add(v)
            labels[v] = lab
    n_labels = int(labels.max()) + 1 if g.n else 1
    return LabeledGraph(
        n=g.n, offsets=g.offsets, targets=g.targets, labels=labels, n_labels=n_labels
    )


@dataclass(frozen=True)
class GraphStats:
    """Degree statistics and label frequencies of a background graph."""

    d_max: int
    d_avg: float
    d_sdev: float
    label_freq: dict

    def freq(self, label: int) -> int:
        return self.label_freq.get(label, 0)


def compute_stats(g: LabeledGraph) -> GraphStats:
    """Exact degree statistics and per-label vertex counts."""
    degrees = np.diff(g.offsets)
    if g.n == 0:
        return GraphStats(0, 0.0, 0.0, {})
    d_avg = float(degrees.mean())
    d_sdev = float(np.sqrt(np.mean((degrees - d_avg) ** 2)))
    values, counts = np.unique(g.labels, return_counts=True)
    label_freq = {int(l): int(c) for l, c in zip(values, counts)}
    return GraphStats(int(degrees.max()), d_avg, d_sdev, label_freq)


def induce_active_subgraph(g: LabeledGraph, states) -> tuple[LabeledGraph, np.ndarray]:
    """Extract the subgraph of active vertices and symmetric active edges.

    ``states`` is the per-vertex state collection from the pruning modules;
    only ``alpha`` and ``epsilon`` are consulted.  An edge makes it into the
    output only when both directions are still active.  Returns the new
    graph and a ``new_to_old`` id remapping array.
    """
    active = sorted(v for v in range(g.n) if states[v].alpha)
    new_to_old = np.array(active, dtype=np.int64)
    old_to_new = {old: new for new, old in enumerate(active)}
    edges = []
    for old in active:
        st = states[old]
        for w in st.epsilon:
            if w > old and states[w].alpha and old in states[w].epsilon:
                edges.append((old_to_new[old], old_to_new[w]))
    labels = g.labels[new_to_old] if len(new_to_old) else np.zeros(0, dtype=np.int64)
    sub = build_graph(np.array(edges, dtype=np.int64).reshape(-1, 2), len(active), labels)
    # keep the original alphabet so label ids stay comparable
    sub = LabeledGraph(
        n=sub.n, offsets=sub.offsets, targets=sub.targets, labels=sub.labels,
        n_labels=max(g.n_labels, sub.n_labels),
    )
    return sub, new_to_old
