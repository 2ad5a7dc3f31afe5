"""Non-local constraint checking by token passing.

Each constraint is verified in one asynchronous wave: every active vertex
whose ω contains the constraint's source initiates a token, which walks
the background graph trying to reproduce the constraint's template walk.
A token records the vertices it visited; each arrival re-checks labels
via ω plus the walk's coincidence requirements (repeated template vertex
means the same background vertex, distinct same-label template vertices
mean distinct background vertices).  A cyclic walk succeeds when the token
closes back on its origin at full length; an acyclic walk acknowledges the
origin from the far end.  Sources never acknowledged lose the source
candidate, and an emptied candidate set deactivates the vertex.

Work aggregation deduplicates tokens at each vertex: a token's identity is
its origin, its position, and the visited vertices that any remaining
check can reference.  Two tokens agreeing on those are interchangeable, so
the second is dropped before evaluation.  Identity never includes settled
positions, which is what collapses the combinatorial fan of interchangeable
partial walks.

When the next walk position is a forced revisit, the token is forwarded
only to the recorded vertex rather than to every neighbor; arrival checks
are unchanged, so this trims messages without touching outcomes.

Two execution lanes produce identical outcomes and identical message
accounting.  The visitor lane delivers each token as a message through the
engine; it is the reference semantics and the only lane for multi-worker
runs.  The bulk lane replays the same wave depth-first over fixed-size
array slices, which is what makes hundred-million-token waves affordable
in bounded memory.  Its τ deduplication is batched per chunk, sound
because a token's dedup class fixes every check the wave can still apply
to it, so dropping any class member but one cannot change an outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import ACK, FORWARD, INIT, Engine, EngineConfig, Visitor
from .graph import LabeledGraph
from .lcc import lcc_fixed_point
from .template import ConstraintSet, NonLocalConstraint, Template

BULK_OMEGA_BITS = 62
"""Widest template the bulk lane can hold in one signed 64-bit ω cell."""

_EXPAND_ROWS = 1 << 21
"""Upper bound on raw token rows materialized by one expansion slice."""


def mu(v: int, c: NonLocalConstraint, token: tuple, states) -> bool:
    """Can active vertex v stand at the token's next walk position?"""
    r = len(token)
    if not states[v].omega >> c.walk[r] & 1:
        return False
    for p in c.must_equal[r]:
        if token[p] != v:
            return False
    for p in c.must_differ[r]:
        if token[p] == v:
            return False
    return True


@dataclass(frozen=True)
class NlccReport:
    """Outcome and message accounting for one constraint wave."""

    constraint: str
    sources: int
    sources_failed: int
    forwards: int
    acks: int
    duplicates_dropped: int
    candidates_eliminated: int
    vertices_eliminated: int

    @property
    def changed(self) -> bool:
        return bool(self.candidates_eliminated or self.vertices_eliminated)


def _bulk_arrays(g: LabeledGraph, states) -> tuple:
    """Arrays mirroring the live state: alive flags, ω, active-arc CSR."""
    n = g.n
    alive = np.zeros(n, dtype=bool)
    om = np.zeros(n, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    dst_parts = []
    for v in range(n):
        st = states[v]
        if not st.alpha:
            continue
        alive[v] = True
        om[v] = st.omega
        if st.epsilon:
            ks = np.fromiter(st.epsilon, dtype=np.int64, count=len(st.epsilon))
            ks.sort()
            deg[v] = len(ks)
            dst_parts.append(ks)
    off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=off[1:])
    dst = np.concatenate(dst_parts) if dst_parts else np.empty(0, dtype=np.int64)
    arc_keys = np.repeat(np.arange(n, dtype=np.int64), deg) * n + dst
    return alive, om, off, dst, arc_keys


class _ClassStore:
    """Dedup classes seen at one walk position, maintained across chunks."""

    def __init__(self):
        self.rows = None

    def fresh(self, keys):
        """Mask of rows opening a class never seen before; remembers them.

        Within a chunk the first row of each class wins; lexsort stability
        makes rows already in the store win over any new arrival.
        """
        seen = 0 if self.rows is None else len(self.rows)
        comb = keys if seen == 0 else np.vstack([self.rows, keys])
        cols = [comb[:, j] for j in range(comb.shape[1])]
        order = np.lexsort(cols[::-1])
        lead_sorted = np.ones(len(comb), dtype=bool)
        if len(comb) > 1:
            eq = np.ones(len(comb) - 1, dtype=bool)
            for col in cols:
                srt = col[order]
                eq &= srt[1:] == srt[:-1]
            lead_sorted[1:] = ~eq
        self.rows = comb[order[lead_sorted]]
        lead = np.zeros(len(comb), dtype=bool)
        lead[order] = lead_sorted
        return lead[seen:]


class _BulkWave:
    """One constraint wave over array frontiers; counts match the visitor lane.

    The wave walks depth-first in bounded slices.  A position whose token
    identity covers its whole history cannot see two tokens agree, so its
    slices flow straight through the μ filter.  Where the identity is
    narrower the visitor lane would collapse arrivals into τ classes;
    here a per-position store of seen classes drops repeats chunk by
    chunk, counting them exactly, and only class openers walk on.
    """

    def __init__(self, g, c, states, work_aggregation, collect_witness, only=None):
        self.n = g.n
        self.c = c
        self.alive, self.om, self.off, self.dst, self.arc_keys = _bulk_arrays(g, states)
        self.forwards = 0
        self.acks = 0
        self.dups = 0
        self.settled = np.zeros(g.n, dtype=bool)
        self.witness = {} if collect_witness else None
        src_mask = self.alive & ((self.om >> c.source) & 1).astype(bool)
        if only is not None:
            keep = np.zeros(g.n, dtype=bool)
            for v in only:
                keep[v] = True
            src_mask &= keep
        self.sources = np.nonzero(src_mask)[0].astype(np.int64)
        self.stores = {}
        if work_aggregation:
            for r in range(1, c.length + 1):
                if c.identity_refs[r] != tuple(range(r)):
                    self.stores[r] = _ClassStore()

    def run(self) -> None:
        if len(self.sources):
            self._walk(self.sources[:, None], 1)

    def _walk(self, frontier, r: int) -> None:
        if len(frontier) == 0:
            return
        store = self.stores.get(r)
        for cand in self._raw_blocks(frontier, r):
            if store is not None:
                # τ lives on live vertices only, so filter before counting
                cand = cand[self.alive[cand[:, -1]]]
                if len(cand) == 0:
                    continue
                fresh = store.fresh(self._class_keys(cand, r))
                self.dups += int(len(cand) - fresh.sum())
                cand = cand[fresh]
            # dead receivers fail μ on their empty ω
            cand = cand[self._mu(cand, r)]
            if r == self.c.length:
                self._finish(cand)
            else:
                self._walk(cand, r + 1)

    def _class_keys(self, cand, r: int):
        cols = [cand[:, -1], cand[:, 0]] + [
            cand[:, p] for p in self.c.identity_refs[r]
        ]
        return np.column_stack(cols)

    def _raw_blocks(self, frontier, r: int):
        """Candidate rows with the position-r vertex appended, counted as sent."""
        pin = self.c.pinned[r]
        if pin is not None:
            cur = frontier[:, -1]
            tgt = frontier[:, pin]
            key = cur * self.n + tgt
            pos = np.searchsorted(self.arc_keys, key)
            ok = pos < len(self.arc_keys)
            ok[ok] = self.arc_keys[pos[ok]] == key[ok]
            self.forwards += int(ok.sum())
            yield np.column_stack([frontier[ok], tgt[ok]])
            return
        deg = self.off[frontier[:, -1] + 1] - self.off[frontier[:, -1]]
        cum = np.cumsum(deg)
        total = int(cum[-1]) if len(cum) else 0
        self.forwards += total
        cuts = np.searchsorted(cum, np.arange(_EXPAND_ROWS, total, _EXPAND_ROWS), "left") + 1
        lo = 0
        for hi in list(cuts) + [len(frontier)]:
            if hi > lo:
                # built by a helper so this frame pins nothing while suspended
                yield self._expand_slice(frontier, deg, lo, hi)
                lo = hi

    def _expand_slice(self, frontier, deg, lo: int, hi: int):
        F = frontier[lo:hi]
        d = deg[lo:hi]
        rows = np.repeat(np.arange(len(F)), d)
        base = np.cumsum(d) - d
        within = np.arange(int(d.sum())) - np.repeat(base, d)
        nbr = self.dst[np.repeat(self.off[F[:, -1]], d) + within]
        return np.column_stack([F[rows], nbr])

    def _mu(self, cand, r: int):
        w = cand[:, -1]
        m = ((self.om[w] >> self.c.walk[r]) & 1).astype(bool)
        for p in self.c.must_equal[r]:
            m &= cand[:, p] == w
        for p in self.c.must_differ[r]:
            m &= cand[:, p] != w
        return m

    def _finish(self, cand) -> None:
        """Full-length survivors settle their origins; far ends acknowledge."""
        if len(cand) == 0:
            return
        if not self.c.is_cyclic:
            self.acks += len(cand)
        srcs = cand[:, 0]
        if self.witness is not None:
            new = ~self.settled[srcs]
            if new.any():
                rows = cand[new]
                firsts = np.unique(srcs[new], return_index=True)[1]
                for i in firsts:
                    self.witness[int(rows[i, 0])] = tuple(int(x) for x in rows[i])
        self.settled[srcs] = True


def _use_bulk(lane: str, t: Template, config, engine) -> bool:
    if engine is not None or lane == "visitor":
        return False
    if lane == "bulk":
        if t.n0 > BULK_OMEGA_BITS:
            raise ValueError("bulk lane holds candidate sets in 62 bits")
        return True
    if lane != "auto":
        raise ValueError(f"unknown lane {lane!r}")
    workers = config.workers if config is not None else 1
    return workers == 1 and t.n0 <= BULK_OMEGA_BITS


def check_constraint(
    g: LabeledGraph,
    t: Template,
    c: NonLocalConstraint,
    states: list,
    config: EngineConfig | None = None,
    work_aggregation: bool = True,
    partition_map=None,
    witness_sink=None,
    engine: Engine | None = None,
    lane: str = "auto",
    sources=None,
) -> tuple[list, NlccReport]:
    """Run one constraint's token wave and eliminate failed sources.

    ``witness_sink(source, walk_vertices)`` is invoked on each first
    success per source with the full background walk that satisfied the
    constraint, for callers that cache evidence.  ``lane`` picks the
    execution strategy: "auto" uses arrays on single-worker runs and the
    message engine otherwise; "visitor" and "bulk" force one.  Results and
    reported counts are lane-independent; only the witness walks may vary,
    since any satisfying walk is a valid certificate.  ``sources``
    restricts initiation to the given vertices; others keep their source
    candidate untouched and still relay tokens as usual.
    """
    if _use_bulk(lane, t, config, engine):
        wave = _BulkWave(
            g, c, states, work_aggregation, witness_sink is not None, only=sources
        )
        wave.run()
        if witness_sink is not None:
            for src in sorted(wave.witness):
                witness_sink(src, wave.witness[src])
        gamma = {int(v): bool(wave.settled[v]) for v in wave.sources}
        return _apply_outcomes(
            states, c, gamma, wave.forwards, wave.acks, wave.dups
        )
    if engine is None:
        engine = Engine(g.n, config or EngineConfig(), partition_map=partition_map)
    gamma: dict[int, bool] = {}
    last = c.length
    source_bit = 1 << c.source
    dup_dropped = 0
    initiate = None if sources is None else set(sources)

    def settle(source: int, walk: tuple) -> None:
        if not gamma.get(source, True):
            gamma[source] = True
            if witness_sink is not None:
                witness_sink(source, walk)

    def forward(eng: Engine, v_state, token: tuple) -> None:
        pin = c.pinned[len(token)]
        if pin is None:
            for w in v_state.epsilon:
                eng.push(Visitor(w, FORWARD, token))
        else:
            w = token[pin]
            if w in v_state.epsilon:
                eng.push(Visitor(w, FORWARD, token))

    def visit(eng: Engine, visitor: Visitor) -> None:
        nonlocal dup_dropped
        v = visitor.target
        st = states[v]
        if not st.alpha:
            return
        if visitor.vtype == INIT:
            if st.omega & source_bit and (initiate is None or v in initiate):
                gamma[v] = False
                forward(eng, st, (v,))
        elif visitor.vtype == FORWARD:
            token = visitor.payload
            if work_aggregation:
                r = len(token)
                ident = (token[0], r, tuple(token[p] for p in c.identity_refs[r]))
                if ident in st.tau:
                    dup_dropped += 1
                    return
                st.tau.add(ident)
            if not mu(v, c, token, states):
                return
            if len(token) == last:
                if c.is_cyclic:
                    settle(v, token + (v,))
                else:
                    eng.push(Visitor(token[0], ACK, token + (v,)))
            else:
                forward(eng, st, token + (v,))
        else:  # ACK
            settle(v, visitor.payload)

    active = [v for v in range(g.n) if states[v].alpha]
    base = dict(engine.stats)
    engine.do_traversal(visit, active)
    engine.run_until_quiescence()
    stats = engine.stats
    for v in active:
        states[v].tau.clear()

    return _apply_outcomes(
        states,
        c,
        gamma,
        stats.get(FORWARD, 0) - base.get(FORWARD, 0),
        stats.get(ACK, 0) - base.get(ACK, 0),
        dup_dropped,
    )


def _apply_outcomes(
    states: list, c: NonLocalConstraint, gamma: dict, forwards: int, acks: int, dups: int
) -> tuple[list, NlccReport]:
    """Strip the source candidate from every unsettled origin."""
    source_bit = 1 << c.source
    ce = ve = failed = 0
    for src, ok in gamma.items():
        if ok:
            continue
        failed += 1
        st = states[src]
        st.omega &= ~source_bit
        ce += 1
        if not st.omega:
            st.alpha = False
            st.epsilon.clear()
            st.eps_stamp.clear()
            ve += 1
    report = NlccReport(
        constraint=c.name or c.kind,
        sources=len(gamma),
        sources_failed=failed,
        forwards=forwards,
        acks=acks,
        duplicates_dropped=dups,
        candidates_eliminated=ce,
        vertices_eliminated=ve,
    )
    return states, report


def run_all(
    g: LabeledGraph,
    t: Template,
    constraints: ConstraintSet,
    states: list,
    config: EngineConfig | None = None,
    work_aggregation: bool = True,
    edge_elimination: bool = True,
    partition_map=None,
    report_sink=None,
    witness_sink=None,
    lane: str = "auto",
) -> list:
    """Verify constraints in order, re-running LCC after any elimination."""
    for c in constraints:
        states, report = check_constraint(
            g, t, c, states,
            config=config,
            work_aggregation=work_aggregation,
            partition_map=partition_map,
            witness_sink=witness_sink,
            lane=lane,
        )
        if report_sink is not None:
            report_sink.append(("nlcc", report))
        if report.changed:
            states, lcc_report = lcc_fixed_point(
                g, t, states,
                config=config,
                edge_elimination=edge_elimination,
                partition_map=partition_map,
            )
            if report_sink is not None:
                report_sink.append(("lcc", lcc_report))
    return states
