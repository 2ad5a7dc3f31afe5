"""Search templates and non-local constraint generation.

A template is a small connected, simple, vertex-labeled undirected graph.
Local (per-edge) requirements are checked by :mod:`prunematch.lcc`; anything
that cannot be decided from a vertex's direct neighborhood — cycles, distant
same-label pairs, and joint substructures — becomes a *non-local constraint*:
a walk through the template that tokens must be able to reproduce in the
background graph.

Constraint generation follows three rules plus a mandatory closer:

* one Cycle constraint per simple cycle;
* one Path constraint per same-label vertex pair at three or more hops
  (shortest connecting path, skipped when a single cycle constraint already
  contains every edge of it);
* template-driven search (TDS) constraints: the union of edge-sharing
  cycles, the union of all path constraints, and — whenever the template
  has edge-sharing cycles or repeated labels — a final walk covering every
  template edge.  The final walk is what guarantees that surviving walk
  sources really participate in matches.

Walks are rooted and oriented so that rarer background labels come first,
which keeps the token fan-out small.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .graph import GraphStats

CYCLE = "cycle"
PATH = "path"
TDS = "tds"

_KIND_PREFIX = {CYCLE: "cc", PATH: "pc", TDS: "tds"}


@dataclass(frozen=True)
class Template:
    """Connected simple labeled template graph.

    ``labels[k]`` is the label of template vertex ``k``; ``edges`` holds
    each undirected edge once as a sorted pair; ``adj[k]`` is the sorted
    neighbor tuple of ``k``.
    """

    labels: tuple
    edges: tuple
    adj: tuple

    @property
    def n0(self) -> int:
        return len(self.labels)

    @property
    def m0(self) -> int:
        return len(self.edges)

    def label(self, q: int) -> int:
        return self.labels[q]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._edge_set

    @cached_property
    def _edge_set(self) -> frozenset:
        return frozenset(self.edges)

    @cached_property
    def label_to_vertices(self) -> dict:
        out: dict = {}
        for q, lab in enumerate(self.labels):
            out.setdefault(lab, []).append(q)
        return out

    @cached_property
    def adj_masks(self) -> tuple:
        """Bit mask over template vertices of each vertex's neighborhood."""
        masks = []
        for q in range(self.n0):
            m = 0
            for w in self.adj[q]:
                m |= 1 << w
            masks.append(m)
        return tuple(masks)

    @cached_property
    def label_masks(self) -> dict:
        """Label -> bit mask of template vertices carrying it."""
        out: dict = {}
        for q, lab in enumerate(self.labels):
            out[lab] = out.get(lab, 0) | (1 << q)
        return out


def make_template(labels, edges) -> Template:
    """Build and validate a Template from label list and edge pairs."""
    labels = tuple(int(x) for x in labels)
    n0 = len(labels)
    if n0 < 1:
        raise ValueError("template must have at least one vertex")
    if any(lab < 0 for lab in labels):
        raise ValueError("template labels must be non-negative")
    seen = set()
    norm = []
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"template self-edge at vertex {u}")
        if not (0 <= u < n0 and 0 <= v < n0):
            raise ValueError(f"unknown vertex in edge ({u}, {v})")
        e = (min(u, v), max(u, v))
        if e in seen:
            raise ValueError(f"duplicate template edge {e}")
        seen.add(e)
        norm.append(e)
    norm.sort()
    adj: list[list[int]] = [[] for _ in range(n0)]
    for u, v in norm:
        adj[u].append(v)
        adj[v].append(u)
    t = Template(labels=labels, edges=tuple(norm), adj=tuple(tuple(sorted(a)) for a in adj))
    # connectivity
    if n0 > 1:
        seen_v = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in t.adj[u]:
                if w not in seen_v:
                    seen_v.add(w)
                    stack.append(w)
        if len(seen_v) != n0:
            raise ValueError("template must be connected")
    return t


def parse_template(path: str) -> Template:
    """Parse a template file.

    Statements are ``v <id> <label>`` and ``e <src> <dst>``, separated by
    newlines or ``;``, with ``#`` comments.  Vertex ids must be dense in
    ``[0, n0)``; labels are non-negative integers from the background
    graph's label alphabet.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_template_text(text, origin=path)


def parse_template_text(text: str, origin: str = "<template>") -> Template:
    vlabels: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        for stmt in line.split(";"):
            parts = stmt.split()
            if not parts:
                continue
            if parts[0] == "v" and len(parts) == 3:
                try:
                    vid, lab = int(parts[1]), int(parts[2])
                except ValueError as exc:
                    raise ValueError(f"{origin}:{lineno}: non-integer vertex or label") from exc
                if vid in vlabels:
                    raise ValueError(f"{origin}:{lineno}: duplicate vertex {vid}")
                vlabels[vid] = lab
            elif parts[0] == "e" and len(parts) == 3:
                try:
                    edges.append((int(parts[1]), int(parts[2])))
                except ValueError as exc:
                    raise ValueError(f"{origin}:{lineno}: non-integer edge endpoint") from exc
            else:
                raise ValueError(f"{origin}:{lineno}: unrecognized statement {stmt.strip()!r}")
    if not vlabels:
        raise ValueError(f"{origin}: no vertices")
    n0 = len(vlabels)
    if sorted(vlabels) != list(range(n0)):
        raise ValueError(f"{origin}: vertex ids must be dense 0..{n0 - 1}")
    try:
        return make_template([vlabels[k] for k in range(n0)], edges)
    except ValueError as exc:
        raise ValueError(f"{origin}: {exc}") from exc


def template_to_text(t: Template) -> str:
    lines = [f"v {q} {t.labels[q]}" for q in range(t.n0)]
    lines += [f"e {u} {v}" for u, v in t.edges]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# analysis


@dataclass(frozen=True)
class TemplateAnalysis:
    """Topological facts about a template that drive constraint generation."""

    simple_cycles: tuple
    edge_cycle_degree: dict
    is_edge_monocyclic: bool
    repeated_label_groups: dict
    leaf_unique: frozenset
    diameter: int
    distances: tuple


def _bfs_distances(t: Template, src: int) -> list[int]:
    dist = [-1] * t.n0
    dist[src] = 0
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for w in t.adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def _enumerate_simple_cycles(t: Template) -> list[tuple]:
    """All distinct simple cycles, canonicalized.

    A cycle is reported as a vertex tuple without the closing repeat,
    starting at its smallest vertex id and oriented so the second entry is
    smaller than the last.  DFS from each anchor uses only larger vertex
    ids, so each cycle is found exactly once per orientation.
    """
    cycles = []
    for s in range(t.n0):
        path = [s]
        on_path = {s}

        def extend(u: int):
            for w in t.adj[u]:
                if w == s and len(path) >= 3:
                    if path[1] < path[-1]:
                        cycles.append(tuple(path))
                elif w > s and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    extend(w)
                    on_path.discard(w)
                    path.pop()

        extend(s)
    cycles.sort(key=lambda c: (len(c), c))
    return cycles


def analyze(t: Template) -> TemplateAnalysis:
    """Compute cycle structure, label repetition, and distances."""
    cycles = _enumerate_simple_cycles(t)
    degree: dict = {e: 0 for e in t.edges}
    for cyc in cycles:
        for i in range(len(cyc)):
            u, v = cyc[i], cyc[(i + 1) % len(cyc)]
            degree[(min(u, v), max(u, v))] += 1
    monocyclic = all(d <= 1 for d in degree.values())
    groups = {
        lab: tuple(vs)
        for lab, vs in sorted(t.label_to_vertices.items())
        if len(vs) >= 2
    }
    leaf_unique = frozenset(
        q
        for q in range(t.n0)
        if len(t.adj[q]) == 1 and len(t.label_to_vertices[t.labels[q]]) == 1
    )
    distances = tuple(tuple(_bfs_distances(t, s)) for s in range(t.n0))
    diameter = max((max(row) for row in distances), default=0)
    return TemplateAnalysis(
        simple_cycles=tuple(cycles),
        edge_cycle_degree=degree,
        is_edge_monocyclic=monocyclic,
        repeated_label_groups=groups,
        leaf_unique=leaf_unique,
        diameter=diameter,
        distances=distances,
    )


# ---------------------------------------------------------------------------
# constraints


@dataclass(frozen=True)
class NonLocalConstraint:
    """A walk through the template that matching vertices must reproduce.

    ``walk`` lists template vertices; consecutive entries are template
    edges.  Cyclic walks start and end at the same vertex.  Each position
    carries coincidence requirements against earlier positions: a repeated
    template vertex must land on the same background vertex, and distinct
    same-label template vertices must land on distinct background vertices.
    """

    kind: str
    walk: tuple
    is_cyclic: bool
    labels: tuple
    name: str = ""

    def __post_init__(self):
        if len(self.walk) < 2:
            raise ValueError("constraint walk too short")
        if self.is_cyclic and self.walk[0] != self.walk[-1]:
            raise ValueError("cyclic walk must close on its source")

    @property
    def length(self) -> int:
        """Hop count |C0|: walk steps after the origin."""
        return len(self.walk) - 1

    @property
    def source(self) -> int:
        return self.walk[0]

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(
            (min(a, b), max(a, b)) for a, b in zip(self.walk, self.walk[1:])
        )

    @cached_property
    def must_equal(self) -> tuple:
        """Per position: earlier positions holding the same template vertex."""
        out = []
        for p, q in enumerate(self.walk):
            out.append(tuple(i for i in range(p) if self.walk[i] == q))
        return tuple(out)

    @cached_property
    def must_differ(self) -> tuple:
        """Per position: earlier same-label positions of *other* vertices.

        Positions pinned by must_equal carry no entries: distinctness
        against the pinned vertex was already enforced pairwise when the
        other positions arrived.
        """
        out = []
        for p, q in enumerate(self.walk):
            if self.must_equal[p]:
                out.append(())
                continue
            lab = self.labels[p]
            out.append(
                tuple(
                    i
                    for i in range(p)
                    if self.walk[i] != q and self.labels[i] == lab
                )
            )
        return tuple(out)

    @cached_property
    def pinned(self) -> tuple:
        """Per position: forced predecessor-visited position, or None."""
        return tuple(me[0] if me else None for me in self.must_equal)

    @cached_property
    def identity_refs(self) -> tuple:
        """Per arrival position r: visited positions any check at >= r needs.

        This is the coincidence fingerprint for work aggregation: two tokens
        agreeing on these positions are interchangeable from r onward.
        """
        refs = []
        all_checks = [set(me) | set(md) for me, md in zip(self.must_equal, self.must_differ)]
        for r in range(len(self.walk)):
            future = set()
            for p in range(r, len(self.walk)):
                future |= {i for i in all_checks[p] if i < r}
            refs.append(tuple(sorted(future)))
        return tuple(refs)

    @cached_property
    def structural_key(self) -> tuple:
        """Identity-free behavioral signature; equal keys => equal outcomes."""
        return (
            self.is_cyclic,
            self.labels,
            self.must_equal,
            self.must_differ,
        )


@dataclass(frozen=True)
class ConstraintSet:
    """Ordered non-local constraints: cycles, then paths, then TDS."""

    constraints: tuple

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def __getitem__(self, i):
        return self.constraints[i]

    @cached_property
    def by_name(self) -> dict:
        return {c.name: c for c in self.constraints}


def _vertex_key(t: Template, stats: GraphStats | None, q: int) -> tuple:
    lab = t.labels[q]
    freq = stats.freq(lab) if stats is not None else 0
    return (freq, lab, q)


def _orient_cycle(t: Template, stats, cyc: tuple) -> tuple:
    """Close a simple cycle into a walk, rooted and oriented by label rarity."""
    k = len(cyc)
    best = None
    root_idx = min(range(k), key=lambda i: _vertex_key(t, stats, cyc[i]))
    root = cyc[root_idx]
    for step in (1, -1):
        seq = [cyc[(root_idx + step * i) % k] for i in range(k)]
        key = tuple(_vertex_key(t, stats, q) for q in seq)
        if best is None or key < best[0]:
            best = (key, seq)
    walk = tuple(best[1]) + (root,)
    return walk


def _shortest_path(t: Template, a: TemplateAnalysis, src: int, dst: int) -> tuple:
    """Lexicographically smallest shortest path from src to dst."""
    dist_from_dst = a.distances[dst]
    path = [src]
    cur = src
    while cur != dst:
        nxt = min(w for w in t.adj[cur] if dist_from_dst[w] == dist_from_dst[cur] - 1)
        path.append(nxt)
        cur = nxt
    return tuple(path)


def _closed_cover_walk(t: Template, stats, edge_set: frozenset, root: int) -> tuple:
    """DFS closed walk from root covering every edge of edge_set.

    Tree edges are walked down and back; edges to visited vertices bounce
    immediately.  Neighbor order follows the label-rarity key, so the walk
    is deterministic.
    """
    adj: dict[int, list[int]] = {}
    for u, v in sorted(edge_set):
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for u in adj:
        adj[u].sort(key=lambda w: _vertex_key(t, stats, w))
    used: set = set()
    walk = [root]
    visited = {root}

    def dfs(u: int):
        for w in adj[u]:
            e = (min(u, w), max(u, w))
            if e in used:
                continue
            used.add(e)
            walk.append(w)
            if w in visited:
                walk.append(u)
            else:
                visited.add(w)
                dfs(w)
                walk.append(u)

    dfs(root)
    if len(used) != len(edge_set):
        raise ValueError("constraint edge set is disconnected")
    return tuple(walk)


def _tds_root(t: Template, stats, edge_set: frozenset) -> int:
    verts = sorted({v for e in edge_set for v in e})
    degree = {v: 0 for v in verts}
    for u, v in edge_set:
        degree[u] += 1
        degree[v] += 1
    terminals = [v for v in verts if degree[v] == 1]
    pool = terminals if terminals else verts
    return min(pool, key=lambda q: _vertex_key(t, stats, q))


def _mk(t: Template, kind: str, walk: tuple, is_cyclic: bool) -> NonLocalConstraint:
    return NonLocalConstraint(
        kind=kind,
        walk=walk,
        is_cyclic=is_cyclic,
        labels=tuple(t.labels[q] for q in walk),
    )


def generate_constraints(
    t: Template, a: TemplateAnalysis, stats: GraphStats | None = None
) -> ConstraintSet:
    """Generate the ordered non-local constraint set.

    ``stats`` supplies background label frequencies for the rooting
    heuristic; passing None makes rarity ties resolve by label id alone.
    """
    cycles: list[NonLocalConstraint] = []
    for cyc in a.simple_cycles:
        cycles.append(_mk(t, CYCLE, _orient_cycle(t, stats, cyc), True))

    paths: list[NonLocalConstraint] = []
    for lab, group in a.repeated_label_groups.items():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                qa, qb = group[i], group[j]
                if a.distances[qa][qb] < 3:
                    continue
                seq = _shortest_path(t, a, qa, qb)
                seq_edges = {(min(x, y), max(x, y)) for x, y in zip(seq, seq[1:])}
                if any(seq_edges <= c.edge_set for c in cycles):
                    continue
                paths.append(_mk(t, PATH, seq, False))

    tds: list[NonLocalConstraint] = []

    def add_tds(edge_set: frozenset):
        root = _tds_root(t, stats, edge_set)
        walk = _closed_cover_walk(t, stats, edge_set, root)
        cand = _mk(t, TDS, walk, True)
        if all(cand.walk != c.walk for c in tds):
            tds.append(cand)

    if not a.is_edge_monocyclic:
        # union the cycles that transitively share edges
        groups: list[set] = []
        group_edges: list[set] = []
        for cyc_c in cycles:
            hit = [i for i, ge in enumerate(group_edges) if ge & cyc_c.edge_set]
            if not hit:
                groups.append({cyc_c})
                group_edges.append(set(cyc_c.edge_set))
            else:
                first = hit[0]
                groups[first].add(cyc_c)
                group_edges[first] |= cyc_c.edge_set
                for i in reversed(hit[1:]):
                    groups[first] |= groups.pop(i)
                    group_edges[first] |= group_edges.pop(i)
        for members, ge in zip(groups, group_edges):
            if len(members) >= 2:
                add_tds(frozenset(ge))

    if a.repeated_label_groups and paths:
        union_edges = set()
        for c in paths:
            union_edges |= c.edge_set
        # the union can fall apart into islands; each needs its own walk
        comp_seen: set = set()
        adj: dict[int, list[int]] = {}
        for u, v in union_edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        for start in sorted(adj):
            if start in comp_seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            comp_seen |= comp
            comp_edges = frozenset(e for e in union_edges if e[0] in comp)
            add_tds(comp_edges)

    if (not a.is_edge_monocyclic or a.repeated_label_groups) and t.m0 > 0:
        add_tds(frozenset(t.edges))

    def final_order(group: list) -> list:
        return sorted(
            group,
            key=lambda c: (c.length, _vertex_key(t, stats, c.source), c.walk),
        )

    ordered = final_order(cycles) + final_order(paths) + final_order(tds)
    named = []
    counters = {CYCLE: 0, PATH: 0, TDS: 0}
    for c in ordered:
        name = f"{_KIND_PREFIX[c.kind]}{counters[c.kind]}"
        counters[c.kind] += 1
        named.append(
            NonLocalConstraint(
                kind=c.kind, walk=c.walk, is_cyclic=c.is_cyclic, labels=c.labels, name=name
            )
        )
    return ConstraintSet(constraints=tuple(named))


def walk_to_string(c: NonLocalConstraint | None) -> str:
    """Human-readable walk rendering for plans and logs.

    Labels print by id; a cyclic closure prints bare, forced revisits print
    as ``(=<position>)``, and positions that must avoid an earlier
    same-label vertex print ``(distinct)``.
    """
    if c is None or len(c.walk) < 2:
        return ""
    parts = []
    last = len(c.walk) - 1
    for p, lab in enumerate(c.labels):
        token = str(lab)
        me = c.must_equal[p]
        if me:
            if not (c.is_cyclic and p == last and c.walk[p] == c.walk[0]):
                token += f"(={me[0]})"
        elif c.must_differ[p]:
            token += "(distinct)"
        parts.append(token)
    return "→".join(parts)
