"""Match enumeration and counting over a pruned solution subgraph.

Enumeration is a DFS over template vertices, visited in a connected order
that starts from the rarest active label: each step binds one template
vertex to a background vertex drawn from the candidates recorded in ω,
restricted to active edges of the already-bound neighborhood.  On a fully
pruned graph every DFS leaf is a match, which is what makes counting on
the solution subgraph cheap.

A match is a plain tuple: position k holds the background vertex playing
template vertex k.  Distinct matches can share an image; the embedding
count groups them by image subgraph (vertex set plus mapped edge set), and
the group size is always the template's automorphism order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .template import Template

Match = tuple
"""Mapping φ as an ordered tuple: φ[k] is the image of template vertex k."""


def _binding_order(t: Template, label_count: dict) -> list:
    """Connected template-vertex order, rarest active label first."""

    def key(q: int) -> tuple:
        return (label_count.get(t.labels[q], 0), t.labels[q], q)

    order = [min(range(t.n0), key=key)]
    bound = {order[0]}
    while len(order) < t.n0:
        frontier = [
            q
            for q in range(t.n0)
            if q not in bound and any(w in bound for w in t.adj[q])
        ]
        nxt = min(frontier, key=key)
        order.append(nxt)
        bound.add(nxt)
    return order


def enumerate_matches(sol, t: Template, limit: int | None = None):
    """Yield every match of t over sol's active vertices and edges.

    ``sol`` needs ``states`` (per-vertex alpha/omega/epsilon) and ``graph``.
    Works on any recall-safe state, fully pruned or not; pruning only
    shrinks the search space.
    """
    states = sol.states
    g = sol.graph
    if limit is not None and limit <= 0:
        return
    active = [v for v in range(g.n) if states[v].alpha]
    label_count: dict = {}
    for v in active:
        lab = int(g.labels[v])
        label_count[lab] = label_count.get(lab, 0) + 1
    order = _binding_order(t, label_count)
    pos_of = {q: i for i, q in enumerate(order)}
    prior = [
        [w for w in t.adj[q] if pos_of[w] < i] for i, q in enumerate(order)
    ]
    # per-run snapshot of the live state, so the DFS never re-sorts a pool;
    # stale neighbor entries (edge elimination off) miss the omega dict
    nbrs = {v: sorted(states[v].epsilon) for v in active}
    omega = {v: states[v].omega for v in active}
    eps = {v: states[v].epsilon for v in active}
    phi: dict = {}
    used: set = set()
    emitted = 0

    def step(i: int):
        nonlocal emitted
        if i == t.n0:
            yield tuple(phi[q] for q in range(t.n0))
            emitted += 1
            return
        q = order[i]
        qbit = 1 << q
        if prior[i]:
            anchor = min(prior[i], key=lambda b: len(eps[phi[b]]))
            pool = nbrs[phi[anchor]]
            rest = [phi[b] for b in prior[i] if b != anchor]
        else:
            pool = active
            rest = []
        for v in pool:
            if v in used:
                continue
            om = omega.get(v)
            if om is None or not om & qbit:
                continue
            ev = eps[v]
            if any(u not in ev for u in rest):
                continue
            phi[q] = v
            used.add(v)
            yield from step(i + 1)
            used.discard(v)
            del phi[q]
            if limit is not None and emitted >= limit:
                return

    yield from step(0)


@dataclass(frozen=True)
class MatchCount:
    """Mapping and image-subgraph tallies for one template.

    ``mapping_count`` counts distinct φ; ``embedding_count`` counts
    distinct image subgraphs; each image accounts for exactly
    ``automorphism_order`` mappings.
    """

    mapping_count: int
    embedding_count: int
    automorphism_order: int
    participation: dict | None = None


def automorphism_order(t: Template) -> int:
    """Number of label-preserving adjacency-preserving permutations."""
    count = 0
    image: list = [-1] * t.n0
    taken = [False] * t.n0

    def place(q: int):
        nonlocal count
        if q == t.n0:
            count += 1
            return
        for w in range(t.n0):
            if taken[w] or t.labels[w] != t.labels[q]:
                continue
            ok = True
            for u in t.adj[q]:
                if u < q and not t.has_edge(image[u], w):
                    ok = False
                    break
            if ok:
                image[q] = w
                taken[w] = True
                place(q + 1)
                taken[w] = False
                image[q] = -1

    place(0)
    return count


def count(sol, t: Template, participation: bool = False) -> MatchCount:
    """Count matches without keeping them; optionally tally per-vertex use."""
    mappings = 0
    images: set = set()
    per_vertex: dict = {}
    # a connected template's image subgraph is determined by its mapped
    # edge set; a single-vertex template degenerates to the vertex itself
    for phi in enumerate_matches(sol, t):
        mappings += 1
        if t.edges:
            key = tuple(sorted(
                (phi[u], phi[w]) if phi[u] < phi[w] else (phi[w], phi[u])
                for u, w in t.edges
            ))
        else:
            key = phi[0]
        images.add(key)
        if participation:
            for v in set(phi):
                per_vertex[v] = per_vertex.get(v, 0) + 1
    return MatchCount(
        mapping_count=mappings,
        embedding_count=len(images),
        automorphism_order=automorphism_order(t),
        participation=per_vertex if participation else None,
    )


def match_support(sol, t: Template) -> tuple[set, set, dict]:
    """Vertices, edges, and per-vertex candidates realized by actual matches.

    Streams the full enumeration once; the sets are exactly the match-union
    footprint, which is what the final refinement pass keeps.
    """
    verts: set = set()
    edges: set = set()
    omega: dict = {}
    for phi in enumerate_matches(sol, t):
        for q, v in enumerate(phi):
            verts.add(v)
            omega[v] = omega.get(v, 0) | (1 << q)
        for u, w in t.edges:
            edges.add((min(phi[u], phi[w]), max(phi[u], phi[w])))
    return verts, edges, omega
