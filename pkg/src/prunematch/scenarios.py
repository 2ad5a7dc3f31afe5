"""Interactive template revision and search by progressive relaxation.

A session holds one background graph and a template the user edits one
edge at a time, always keeping it connected.  Adding an edge only adds
constraints, so the session reprunes from the current solution instead of
the whole graph; removing one weakens the template, so the session
restarts from the candidate set, a cheap superset of every match any
edge-deleted variant of the template can have.  Either way the reprune
ends in match-support refinement, so the reported solution is exactly
what a cold prune of the revised template would produce; only the work
spent differs.

Constraint waves are shared between reprunes through a witness cache.  A
pass is remembered as the walk that proved it and believed again only
after that walk re-verifies against the current state, which makes pass
entries sound no matter how the state has moved.  A failure is remembered
only within the current epoch, while the state can do nothing but shrink;
removing a template edge (or moving to the next variant during
exploratory search) can grow the reachable state, so it advances the
epoch and retires the failures.

Edge additions rebuild neighbor maps from background adjacency between
the surviving vertices.  Refinement keeps only edges some match of the
previous template realized, and the added template edge may map onto a
background edge none of them used, so restarting from the refined edge
map would lose matches.  Restarting a vertex pair's edge is harmless for
remembered failures: an edge dropped by local checking had no candidate
pair supporting it, candidate sets have only shrunk since, and a cached
wave steps across an edge only when both endpoints still hold the walk's
candidates.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, replace

from .graph import LabeledGraph
from .lcc import VertexState, lcc_fixed_point
from .nlcc import NlccReport, check_constraint, mu
from .pipeline import PruneConfig, SolutionSubgraph, plan_constraints, refine
from .template import NonLocalConstraint, Template, make_template


@dataclass(frozen=True)
class CandidateSet:
    """Vertices passing a relaxed local check against a template.

    A member keeps candidate q when its label matches q and, unless q is
    an isolated template vertex, at least one neighbor's label matches
    some template neighbor of q.  The check never looks past one hop, so
    membership survives any edge deletion that keeps the template
    connected: a match of such a variant still gives every image vertex a
    matching label and at least one matching neighbor.
    """

    omega: dict

    @property
    def vertices(self) -> tuple:
        return tuple(sorted(self.omega))

    def __len__(self) -> int:
        return len(self.omega)

    def __contains__(self, v: int) -> bool:
        return v in self.omega


def build_candidate_set(g: LabeledGraph, t: Template) -> CandidateSet:
    """One relaxed local pass over g; superset of every variant's matches."""
    label_masks = t.label_masks
    nbr_labels = [frozenset(t.labels[w] for w in t.adj[q]) for q in range(t.n0)]
    omega: dict = {}
    for v in range(g.n):
        mask = label_masks.get(int(g.labels[v]), 0)
        if not mask:
            continue
        seen = {int(g.labels[w]) for w in g.neighbors(v)}
        kept = 0
        rest = mask
        while rest:
            low = rest & -rest
            rest ^= low
            q = low.bit_length() - 1
            if not nbr_labels[q] or nbr_labels[q] & seen:
                kept |= low
        if kept:
            omega[v] = kept
    return CandidateSet(omega=omega)


def _states_from_omega(g: LabeledGraph, omega: dict) -> list:
    """Fresh pruning state: given candidates, background adjacency edges."""
    states = []
    for v in range(g.n):
        mask = omega.get(v, 0)
        if mask:
            eps = {int(w): 0 for w in g.neighbors(v) if int(w) in omega}
            states.append(VertexState(True, mask, eps, dict.fromkeys(eps, -1)))
        else:
            states.append(VertexState(False, 0, {}, {}))
    return states


# ---------------------------------------------------------------------------
# work reuse


def constraint_fingerprint(c: NonLocalConstraint) -> tuple:
    """Cache identity of a constraint: its walk, labels, and closure kind.

    Template vertex numbering and labels are fixed for a session's
    lifetime, so equal fingerprints across revisions demand identical
    per-position checks.
    """
    return (c.walk, c.labels, c.is_cyclic)


def _witness_holds(c: NonLocalConstraint, walk: tuple, states: list) -> bool:
    """Is the recorded walk still traversable, step for step, right now?

    Liveness of its vertices is not enough: a vertex can stay active yet
    lose the candidate the walk stood on, and then a fresh wave might
    find nothing.  Re-checking every hop and every position keeps a
    cached pass constructive.
    """
    st = states[walk[0]]
    if not st.alpha or not st.omega >> c.source & 1:
        return False
    for r in range(1, len(walk)):
        v = walk[r]
        if not states[v].alpha or v not in states[walk[r - 1]].epsilon:
            return False
        if not mu(v, c, walk[:r], states):
            return False
    return True


class WorkReuseCache:
    """Remembered constraint verdicts keyed by (vertex, fingerprint).

    ``consult`` answers True, False, or None for unknown.  Passes carry
    their witness walk and are re-verified on every consultation; a walk
    that no longer holds is discarded rather than trusted.  Failures are
    valid only within the epoch they were recorded in; ``bump`` starts a
    new epoch whenever pruning state may grow back.
    """

    def __init__(self):
        self.passes: dict = {}
        self.fails: dict = {}
        self.epoch = 0
        self.pass_hits = 0
        self.fail_hits = 0
        self.misses = 0

    def bump(self) -> None:
        self.epoch += 1
        self.fails.clear()

    def consult(self, v: int, fp: tuple, c: NonLocalConstraint, states: list):
        key = (v, fp)
        walk = self.passes.get(key)
        if walk is not None:
            if _witness_holds(c, walk, states):
                self.pass_hits += 1
                return True
            del self.passes[key]
        if self.fails.get(key) == self.epoch:
            self.fail_hits += 1
            return False
        self.misses += 1
        return None

    def record_pass(self, v: int, fp: tuple, walk: tuple) -> None:
        self.passes[(v, fp)] = tuple(int(x) for x in walk)

    def record_fail(self, v: int, fp: tuple) -> None:
        self.fails[(v, fp)] = self.epoch


def _strip_failed_sources(states: list, c: NonLocalConstraint, failed: list) -> tuple:
    """Eliminate remembered failures the way a wave outcome would."""
    bit = 1 << c.source
    ve = 0
    for v in failed:
        st = states[v]
        st.omega &= ~bit
        if not st.omega:
            st.alpha = False
            st.epsilon.clear()
            st.eps_stamp.clear()
            ve += 1
    return len(failed), ve


def _cached_wave(sol: SolutionSubgraph, cfg: PruneConfig, c: NonLocalConstraint,
                 cache: WorkReuseCache) -> bool:
    """Verify one constraint, initiating only where the cache is silent."""
    t0 = time.perf_counter()
    fp = constraint_fingerprint(c)
    bit = 1 << c.source
    unknown, failed = [], []
    passes = 0
    for v in range(sol.graph.n):
        st = sol.states[v]
        if not st.alpha or not st.omega & bit:
            continue
        verdict = cache.consult(v, fp, c, sol.states)
        if verdict is None:
            unknown.append(v)
        elif verdict:
            passes += 1
        else:
            failed.append(v)
    # remembered failures can come out before the wave: any walk their
    # candidate could still carry for another source would need a vertex
    # standing on a candidate that no match realizes
    ce, ve = _strip_failed_sources(sol.states, c, failed)
    if unknown:
        _, report = check_constraint(
            sol.graph, sol.template, c, sol.states,
            config=cfg.engine_config(),
            work_aggregation=cfg.work_aggregation,
            lane=cfg.lane,
            sources=unknown,
            witness_sink=lambda v, walk: cache.record_pass(v, fp, walk),
        )
        for v in unknown:
            if not sol.states[v].omega & bit:
                cache.record_fail(v, fp)
    else:
        report = NlccReport(c.name or c.kind, 0, 0, 0, 0, 0, 0, 0)
    report = replace(
        report,
        sources=report.sources + passes + len(failed),
        sources_failed=report.sources_failed + len(failed),
        candidates_eliminated=report.candidates_eliminated + ce,
        vertices_eliminated=report.vertices_eliminated + ve,
    )
    sol.reports.append(("nlcc", report))
    sol.timings.append((c.name or c.kind, time.perf_counter() - t0))
    return report.changed


def _cached_prune(g: LabeledGraph, t: Template, states: list, cfg: PruneConfig,
                  cache: WorkReuseCache) -> SolutionSubgraph:
    """Prune t over g from the given starting state, reusing verdicts."""
    sol = SolutionSubgraph(
        graph=g, template=t, states=states, constraints=plan_constraints(g, t, cfg)
    )
    _local_pass(sol, cfg)
    for c in sol.constraints:
        if _cached_wave(sol, cfg, c, cache):
            _local_pass(sol, cfg)
    refine(sol)
    return sol


def _local_pass(sol: SolutionSubgraph, cfg: PruneConfig) -> None:
    t0 = time.perf_counter()
    _, report = lcc_fixed_point(
        sol.graph, sol.template, sol.states,
        config=cfg.engine_config(),
        edge_elimination=cfg.edge_elimination,
        partition_map=cfg.partition_map,
    )
    sol.reports.append(("lcc", report))
    sol.timings.append(("lcc", time.perf_counter() - t0))


# ---------------------------------------------------------------------------
# sessions


@dataclass(frozen=True)
class Revision:
    """One applied edit and what it cost."""

    op: str
    edge: tuple
    seconds: float
    vertices: int
    edges: int


class Session:
    """One interactive search: a connected template edited over a fixed graph.

    Every accepted edit leaves ``solution`` equal to a cold prune of the
    revised template on the full graph.  Rejected edits raise ValueError
    and change nothing.
    """

    def __init__(self, g: LabeledGraph, t: Template, cfg: PruneConfig | None = None):
        self.graph = g
        self.base_template = t
        self.template = t
        self.config = cfg or PruneConfig()
        self.candidates = build_candidate_set(g, t)
        self.cache = WorkReuseCache()
        self.revisions: list = []
        t0 = time.perf_counter()
        self.solution = _cached_prune(
            g, t, _states_from_omega(g, self.candidates.omega), self.config, self.cache
        )
        self.revisions.append(
            Revision("create", (), time.perf_counter() - t0,
                     self.solution.n_active, self.solution.m_active)
        )

    def _validated_edge(self, u: int, w: int) -> tuple:
        n0 = self.template.n0
        if not (0 <= u < n0 and 0 <= w < n0):
            raise ValueError(f"unknown template vertex in edge ({u}, {w})")
        if u == w:
            raise ValueError("template edges join distinct vertices")
        return (min(u, w), max(u, w))

    def add_edge(self, u: int, w: int) -> SolutionSubgraph:
        """Constrain the template by one edge and reprune the solution."""
        edge = self._validated_edge(u, w)
        if self.template.has_edge(*edge):
            raise ValueError(f"template already has edge {edge}")
        new_t = make_template(self.template.labels, self.template.edges + (edge,))
        t0 = time.perf_counter()
        omega = {
            v: self.solution.states[v].omega
            for v in range(self.graph.n)
            if self.solution.states[v].alpha
        }
        self.template = new_t
        self.solution = _cached_prune(
            self.graph, new_t, _states_from_omega(self.graph, omega),
            self.config, self.cache,
        )
        self.revisions.append(
            Revision("add", edge, time.perf_counter() - t0,
                     self.solution.n_active, self.solution.m_active)
        )
        return self.solution

    def remove_edge(self, u: int, w: int) -> SolutionSubgraph:
        """Relax the template by one edge and reprune from the candidate set."""
        edge = self._validated_edge(u, w)
        if not self.template.has_edge(*edge):
            raise ValueError(f"template has no edge {edge}")
        remaining = tuple(e for e in self.template.edges if e != edge)
        try:
            new_t = make_template(self.template.labels, remaining)
        except ValueError:
            # covers isolation too: a template with more than one vertex
            # cannot stay connected around an isolated one
            raise ValueError(
                f"removing edge {edge} would disconnect the template"
            ) from None
        t0 = time.perf_counter()
        self.cache.bump()
        self.template = new_t
        self.candidates = build_candidate_set(self.graph, new_t)
        self.solution = _cached_prune(
            self.graph, new_t, _states_from_omega(self.graph, self.candidates.omega),
            self.config, self.cache,
        )
        self.revisions.append(
            Revision("remove", edge, time.perf_counter() - t0,
                     self.solution.n_active, self.solution.m_active)
        )
        return self.solution


def session_add_edge(s: Session, edge: tuple) -> Session:
    s.add_edge(*edge)
    return s


def session_remove_edge(s: Session, edge: tuple) -> Session:
    s.remove_edge(*edge)
    return s


# ---------------------------------------------------------------------------
# exploratory search


@dataclass(frozen=True)
class VariantStats:
    """Outcome of pruning one edge-deleted variant."""

    removed: tuple
    vertices: int
    edges: int

    @property
    def matched(self) -> bool:
        return self.vertices > 0


@dataclass(frozen=True)
class LevelStats:
    """All connected variants at one deletion depth."""

    k: int
    variants: tuple

    @property
    def matched_variants(self) -> int:
        return sum(1 for v in self.variants if v.matched)


@dataclass(frozen=True)
class ExploreResult:
    """First deletion depth with matches, or None within the search bound."""

    found_k: int | None
    levels: tuple
    union_vertices: tuple
    union_edges: tuple

    @property
    def found(self) -> bool:
        return self.found_k is not None


def _connected_variants(t: Template, k: int):
    if k == 0:
        yield (), t
        return
    for removed in itertools.combinations(t.edges, k):
        gone = set(removed)
        try:
            yield removed, make_template(
                t.labels, tuple(e for e in t.edges if e not in gone)
            )
        except ValueError:
            continue


def exploratory_search(
    g: LabeledGraph,
    t_over: Template,
    max_k: int,
    cfg: PruneConfig | None = None,
) -> ExploreResult:
    """Relax an over-constrained template edge by edge until matches appear.

    Level k prunes every connected variant of t_over with k edges removed,
    all starting inside t_over's candidate set, all sharing one witness
    cache.  The search stops at the first level where any variant matches
    and returns the union of every match at that level; past max_k, or
    once no connected variant exists, it reports not found.
    """
    cfg = cfg or PruneConfig()
    cands = build_candidate_set(g, t_over)
    cache = WorkReuseCache()
    levels: list = []
    for k in range(max_k + 1):
        stats = []
        union_v: set = set()
        union_e: set = set()
        for removed, t in _connected_variants(t_over, k):
            # failures never transfer between variants; witnesses do
            cache.bump()
            sol = _cached_prune(
                g, t, _states_from_omega(g, cands.omega), cfg, cache
            )
            stats.append(VariantStats(removed, sol.n_active, sol.m_active))
            union_v.update(sol.vertices)
            union_e.update(sol.edges)
        if not stats:
            # a disconnected remainder cannot reconnect by deleting more
            break
        levels.append(LevelStats(k, tuple(stats)))
        if union_v:
            return ExploreResult(
                k, tuple(levels), tuple(sorted(union_v)), tuple(sorted(union_e))
            )
    return ExploreResult(None, tuple(levels), (), ())
