"""Local constraint checking: iterative vertex and edge elimination.

Every vertex keeps a candidate set ω of template vertices it could still
match.  Per iteration, each active vertex broadcasts ω to its active
neighbors; a receiver caches the sender's ω and, at the iteration barrier,
re-derives which of its candidates remain supportable:

* an edge is eliminated when the neighbor's candidates contain no template
  neighbor of ours (η empty), or when the neighbor went silent;
* a candidate q is eliminated when some template neighbor of q is matched
  by no surviving edge, or when q needs several same-label neighbors and
  fewer distinct neighbors can supply them;
* a vertex is eliminated when ω or its active-edge map empties.

The loop runs to a fixed point: a full iteration that changes nothing.
Elimination is monotone, so the fixed point is unique regardless of
message ordering; recall safety (no match participant is ever eliminated)
comes from η and the counting check both being necessary conditions.

Edge elimination can be disabled for ablation: candidates and vertices are
still eliminated, but the edge map keeps stale entries, so later phases
send correspondingly more messages.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import ALIVE, INIT, Engine, EngineConfig, Visitor
from .graph import LabeledGraph
from .template import Template


@dataclass(slots=True)
class VertexState:
    """Mutable pruning state of one background vertex.

    ``omega`` is a bit set over template vertices.  ``epsilon`` maps each
    active neighbor to its last cached ω; ``eps_stamp`` records the
    iteration of that cache entry, standing in for a per-iteration reset.
    ``tau`` is the forwarded-token set used by non-local checking.
    """

    alpha: bool
    omega: int
    epsilon: dict
    eps_stamp: dict
    tau: set = field(default_factory=set)


def init_states(g: LabeledGraph, t: Template) -> list:
    """Initial state: ω = label-matching template vertices, ε = adjacency."""
    label_masks = t.label_masks
    states = []
    for v in range(g.n):
        omega = label_masks.get(int(g.labels[v]), 0)
        if omega:
            eps = {int(w): 0 for w in g.neighbors(v)}
            states.append(
                VertexState(True, omega, eps, dict.fromkeys(eps, -1))
            )
        else:
            states.append(VertexState(False, 0, {}, {}))
    return states


def eta(sender_omega: int, receiver_omega: int, t: Template) -> int:
    """Sender candidates that are template-adjacent to a receiver candidate."""
    out = 0
    masks = t.adj_masks
    rest = sender_omega
    while rest:
        low = rest & -rest
        if masks[low.bit_length() - 1] & receiver_omega:
            out |= low
        rest ^= low
    return out


@dataclass(frozen=True)
class LccReport:
    """Per-iteration elimination and message accounting."""

    iterations: int
    vertices_eliminated: tuple
    edges_eliminated: tuple
    candidates_eliminated: tuple
    alive_messages: tuple

    @property
    def changed(self) -> bool:
        return any(self.vertices_eliminated) or any(self.edges_eliminated) \
            or any(self.candidates_eliminated)


def _label_requirements(t: Template) -> list:
    """Per template vertex: list of (label mask over adj(q), multiplicity)."""
    reqs = []
    for q in range(t.n0):
        per_label: dict = {}
        for w in t.adj[q]:
            per_label[t.labels[w]] = per_label.get(t.labels[w], 0) + 1
        reqs.append(
            [
                (t.label_masks[lab] & t.adj_masks[q], mult)
                for lab, mult in per_label.items()
            ]
        )
    return reqs


def lcc_fixed_point(
    g: LabeledGraph,
    t: Template,
    states: list,
    config: EngineConfig | None = None,
    edge_elimination: bool = True,
    partition_map=None,
) -> tuple[list, LccReport]:
    """Run broadcast iterations until an iteration eliminates nothing."""
    config = config or EngineConfig()
    engine = Engine(g.n, config, partition_map=partition_map)
    active = [v for v in range(g.n) if states[v].alpha]
    reqs = _label_requirements(t)
    single_vertex = t.m0 == 0
    # stamps must outrun every earlier run's, or a neighbor that died
    # between runs would look freshly heard-from
    it = max(
        (max(states[v].eps_stamp.values(), default=0) for v in active),
        default=0,
    )
    it = max(it, 0)
    first_it = it + 1
    v_elim, e_elim, c_elim, msgs = [], [], [], []

    def visit(eng: Engine, visitor: Visitor) -> None:
        st = states[visitor.target]
        if not st.alpha:
            return
        if visitor.vtype == INIT:
            payload = (visitor.target, st.omega)
            for w in st.epsilon:
                eng.push(Visitor(w, ALIVE, payload))
        else:
            sender, omega = visitor.payload
            if sender in st.epsilon:
                st.epsilon[sender] = omega
                st.eps_stamp[sender] = it

    while True:
        it += 1
        prev_alive = engine.stats.get(ALIVE, 0)
        engine.do_traversal(visit, active)
        engine.run_until_quiescence()
        msgs.append(engine.stats.get(ALIVE, 0) - prev_alive)

        ve = ee = ce = 0
        survivors = []
        for v in active:
            st = states[v]
            fresh = []
            if edge_elimination:
                for s in list(st.epsilon):
                    if st.eps_stamp[s] != it:
                        del st.epsilon[s]
                        del st.eps_stamp[s]
                        ee += 1
                        continue
                    m = eta(st.epsilon[s], st.omega, t)
                    if m:
                        fresh.append(m)
                    else:
                        del st.epsilon[s]
                        del st.eps_stamp[s]
                        ee += 1
            else:
                for s, stamp in st.eps_stamp.items():
                    if stamp == it:
                        m = eta(st.epsilon[s], st.omega, t)
                        if m:
                            fresh.append(m)
            union = 0
            for m in fresh:
                union |= m
            omega = st.omega
            rest = omega
            while rest:
                low = rest & -rest
                rest ^= low
                q = low.bit_length() - 1
                if t.adj_masks[q] & ~union:
                    omega &= ~low
                    continue
                for mask, mult in reqs[q]:
                    if mult > 1 and sum(1 for m in fresh if m & mask) < mult:
                        omega &= ~low
                        break
            if omega != st.omega:
                ce += bin(st.omega ^ omega).count("1")
                st.omega = omega
            if not st.omega or (not st.epsilon and not single_vertex):
                st.alpha = False
                st.omega = 0
                st.epsilon.clear()
                st.eps_stamp.clear()
                ve += 1
            else:
                survivors.append(v)
        active = survivors
        v_elim.append(ve)
        e_elim.append(ee)
        c_elim.append(ce)
        if not (ve or ee or ce):
            break

    return states, LccReport(
        iterations=it - first_it + 1,
        vertices_eliminated=tuple(v_elim),
        edges_eliminated=tuple(e_elim),
        candidates_eliminated=tuple(c_elim),
        alive_messages=tuple(msgs),
    )
