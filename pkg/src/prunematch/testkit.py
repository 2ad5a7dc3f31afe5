"""Brute-force oracle and synthetic instance generation.

Everything here exists to check the real engine from the outside.  The
oracle is deliberately dumb: plain recursive backtracking with nothing
beyond label, adjacency, and injectivity checks, sharing no logic with the
pruning or enumeration code.  Generators produce R-MAT and Erdős–Rényi
backgrounds and random templates, deterministically per seed, so failures
replay exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .graph import LabeledGraph, build_graph
from .template import Template, make_template

ORACLE_VERTEX_GUARD = 10_000


def verify_match(g: LabeledGraph, t: Template, phi) -> bool:
    """Check that phi is an injective label- and edge-preserving mapping."""
    if len(phi) != t.n0:
        return False
    if len(set(phi)) != t.n0:
        return False
    for q in range(t.n0):
        v = phi[q]
        if not (0 <= v < g.n) or g.labels[v] != t.labels[q]:
            return False
    for u, w in t.edges:
        if not g.has_edge(phi[u], phi[w]):
            return False
    return True


@dataclass(frozen=True)
class OracleResult:
    """Exhaustive ground truth: all mappings and their union footprint."""

    matches: tuple
    union_vertices: frozenset
    union_edges: frozenset

    @property
    def mapping_count(self) -> int:
        return len(self.matches)


def oracle_enumerate(g: LabeledGraph, t: Template, allow_large: bool = False) -> OracleResult:
    """Enumerate every match by brute-force backtracking.

    Template vertices are bound in index order.  When an already-bound
    template neighbor exists the candidates come from its image's
    adjacency, otherwise the whole vertex set is scanned; either way each
    candidate is re-checked against every bound neighbor, so the walk
    order is a speedup, not a correctness assumption.
    """
    if g.n > ORACLE_VERTEX_GUARD and not allow_large:
        raise ValueError(
            f"oracle guard: {g.n} vertices > {ORACLE_VERTEX_GUARD}; "
            "pass allow_large=True to override"
        )
    adj = g.adjacency_sets()
    matches: list[tuple] = []
    phi: list[int] = []
    used: set[int] = set()

    def candidates(q: int):
        bound = [w for w in t.adj[q] if w < q]
        if bound:
            return sorted(adj[phi[bound[0]]])
        return range(g.n)

    def extend(q: int):
        if q == t.n0:
            matches.append(tuple(phi))
            return
        lab = t.labels[q]
        for v in candidates(q):
            if v in used or g.labels[v] != lab:
                continue
            if any(phi[w] not in adj[v] for w in t.adj[q] if w < q):
                continue
            phi.append(v)
            used.add(v)
            extend(q + 1)
            used.discard(v)
            phi.pop()

    extend(0)
    uv = frozenset(v for m in matches for v in m)
    ue = frozenset(
        (min(m[u], m[w]), max(m[u], m[w])) for m in matches for u, w in t.edges
    )
    return OracleResult(matches=tuple(matches), union_vertices=uv, union_edges=ue)


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class RmatParams:
    """Recursive-quadrant generator parameters.

    Each edge picks one of four quadrants per scale level with
    probabilities a, b, c, d; skew concentrates edges on low vertex ids.
    """

    scale: int
    edge_factor: int = 16
    a: float = 0.57
    b: float = 0.19
    c: float = 0.19
    d: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if abs(self.a + self.b + self.c + self.d - 1.0) > 1e-9:
            raise ValueError("quadrant probabilities must sum to 1")


GRAPH500 = (0.57, 0.19, 0.19, 0.05)
CHAKRABARTI = (0.45, 0.15, 0.15, 0.25)
UNIFORM = (0.25, 0.25, 0.25, 0.25)


def rmat_generate(p: RmatParams) -> LabeledGraph:
    """Generate an R-MAT topology: 2^scale vertices, all labeled 0.

    edge_factor * 2^scale edges are drawn, then symmetrized with
    self-loops and duplicates dropped, so the final undirected edge count
    lands somewhat below the nominal figure.
    """
    n = 1 << p.scale
    ne = p.edge_factor * n
    rng = np.random.default_rng(p.seed)
    src = np.zeros(ne, dtype=np.int64)
    dst = np.zeros(ne, dtype=np.int64)
    t1 = p.a  # row 0, col 0
    t2 = p.a + p.b  # row 0, col 1
    t3 = p.a + p.b + p.c  # row 1, col 0
    for _ in range(p.scale):
        r = rng.random(ne)
        src_bit = (r >= t2).astype(np.int64)
        dst_bit = (((r >= t1) & (r < t2)) | (r >= t3)).astype(np.int64)
        src = (src << 1) | src_bit
        dst = (dst << 1) | dst_bit
    return build_graph(np.stack([src, dst], axis=1), n)


def degree_labels(g: LabeledGraph) -> LabeledGraph:
    """Label each vertex by degree magnitude: ceil(log2(d + 1))."""
    deg = np.diff(g.offsets)
    labels = np.ceil(np.log2(deg + 1)).astype(np.int64)
    return LabeledGraph(
        n=g.n,
        offsets=g.offsets,
        targets=g.targets,
        labels=labels,
        n_labels=int(labels.max()) + 1 if g.n else 1,
    )


@dataclass(frozen=True)
class InstanceParams:
    """Knobs for one random (background, template) pair."""

    n: int = 30
    background: str = "er"  # er | rmat
    er_p: float = 0.2
    rmat_scale: int = 6
    rmat_edge_factor: int = 8
    alphabet: int = 3
    template_size: int = 4
    template_kind: str = "sampled"  # sampled | independent
    internal_edge_p: float = 0.7


def _er_topology(n: int, p: float, rng) -> LabeledGraph:
    if n > 5000:
        raise ValueError("er background capped at 5000 vertices")
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    return build_graph(np.stack([iu[mask], ju[mask]], axis=1), n)


def _sample_connected_template(g: LabeledGraph, size: int, rng: random.Random, internal_p: float) -> Template | None:
    """Grow a connected vertex set in g and lift it to a template.

    Vertices are renumbered in BFS order from the first pick, so every
    template vertex after the root has a lower-numbered neighbor.
    """
    adj = g.adjacency_sets()
    starts = [v for v in range(g.n) if adj[v]]
    if not starts:
        return None
    for _ in range(30):
        chosen = [rng.choice(starts)]
        pool = set(adj[chosen[0]])
        cset = set(chosen)
        while len(chosen) < size and pool:
            v = rng.choice(sorted(pool))
            chosen.append(v)
            cset.add(v)
            pool |= adj[v] - cset
            pool.discard(v)
        if len(chosen) < size:
            continue
        # BFS renumber over the induced subgraph
        order = [chosen[0]]
        seen = {chosen[0]}
        qi = 0
        while qi < len(order):
            u = order[qi]
            qi += 1
            for w in sorted(adj[u] & cset):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
        if len(order) < size:
            continue
        index = {v: k for k, v in enumerate(order)}
        tree_edges = set()
        for k, v in enumerate(order[1:], start=1):
            parent = min(w for w in adj[v] & cset if index[w] < k)
            tree_edges.add((min(index[v], index[parent]), max(index[v], index[parent])))
        edges = set(tree_edges)
        for v in cset:
            for w in adj[v] & cset:
                e = (min(index[v], index[w]), max(index[v], index[w]))
                if e not in edges and rng.random() < internal_p:
                    edges.add(e)
        labels = [int(g.labels[v]) for v in order]
        return make_template(labels, sorted(edges))
    return None


def _independent_template(size: int, alphabet: int, rng: random.Random, extra_p: float) -> Template:
    edges = {(rng.randrange(k), k) for k in range(1, size)}
    for i in range(size):
        for j in range(i + 1, size):
            if (i, j) not in edges and rng.random() < extra_p / 2:
                edges.add((i, j))
    labels = [rng.randrange(alphabet) for _ in range(size)]
    return make_template(labels, sorted(edges))


def random_instance(params: InstanceParams, seed: int) -> tuple[LabeledGraph, Template]:
    """Build a deterministic (background, template) pair for one seed."""
    nprng = np.random.default_rng(seed)
    pyrng = random.Random(seed)
    if params.background == "rmat":
        g = rmat_generate(
            RmatParams(scale=params.rmat_scale, edge_factor=params.rmat_edge_factor, seed=seed)
        )
    elif params.background == "er":
        g = _er_topology(params.n, params.er_p, nprng)
    else:
        raise ValueError(f"unknown background kind {params.background!r}")
    labels = nprng.integers(0, params.alphabet, size=g.n).astype(np.int64)
    g = LabeledGraph(
        n=g.n, offsets=g.offsets, targets=g.targets, labels=labels,
        n_labels=params.alphabet,
    )
    if params.template_kind == "sampled":
        t = _sample_connected_template(g, params.template_size, pyrng, params.internal_edge_p)
        if t is None:
            # background too sparse to host the template; fall back
            t = _independent_template(
                params.template_size, params.alphabet, pyrng, params.internal_edge_p
            )
    elif params.template_kind == "independent":
        t = _independent_template(
            params.template_size, params.alphabet, pyrng, params.internal_edge_p
        )
    else:
        raise ValueError(f"unknown template kind {params.template_kind!r}")
    return g, t
