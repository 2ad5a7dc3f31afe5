"""End-to-end pruning: LCC, ordered non-local checks, refinement, checkpoints.

The driver starts from a local fixed point and verifies each non-local
constraint once, in order, restoring the local fixed point whenever a wave
eliminated anything; the pass ends when the constraint list is exhausted
and the last local pass holds.  Constraint checking eliminates only walk
sources, so a final refinement pass keeps exactly the vertices, edges, and
candidates realized by actual matches; after it, the solution subgraph is
the union of matches, no more and no less.

Checkpoints are written at phase boundaries — after the initial local fixed
point and after each constraint's wave settles — where the active edge map
is symmetric, so the file stores each surviving edge once.  A restore may
change the worker count: active vertices are repacked into partitions by
greedy bin packing on vertex-plus-degree weight.
"""

from __future__ import annotations

import json
import os
import struct
import time
from dataclasses import dataclass, field, replace

from .engine import EngineConfig
from .enumeration import match_support
from .graph import LabeledGraph, compute_stats, induce_active_subgraph
from .lcc import VertexState, init_states, lcc_fixed_point
from .nlcc import check_constraint
from .template import (
    ConstraintSet,
    Template,
    analyze,
    generate_constraints,
    parse_template_text,
    template_to_text,
)

CHECKPOINT_MAGIC = b"PMCK"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class PruneConfig:
    """Execution knobs; semantics-neutral except the two ablation flags."""

    workers: int = 1
    deterministic: bool = False
    seed: int = 0
    queue_limit: int | None = None
    edge_elimination: bool = True
    work_aggregation: bool = True
    lane: str = "auto"
    constraint_order: tuple | None = None
    checkpoint_dir: str | None = None
    partition_map: tuple | None = None

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            workers=self.workers,
            deterministic=self.deterministic,
            seed=self.seed,
            queue_limit=self.queue_limit,
        )


@dataclass(frozen=True)
class RefineReport:
    vertices_eliminated: int
    edges_eliminated: int
    candidates_eliminated: int


@dataclass
class SolutionSubgraph:
    """Final pruned state plus the report trail that produced it."""

    graph: LabeledGraph
    template: Template
    states: list
    constraints: ConstraintSet
    reports: list = field(default_factory=list)
    timings: list = field(default_factory=list)

    @property
    def vertices(self) -> list:
        return [v for v in range(self.graph.n) if self.states[v].alpha]

    @property
    def edges(self) -> list:
        out = []
        for v in self.vertices:
            for w in self.states[v].epsilon:
                if v < w and self.states[w].alpha and v in self.states[w].epsilon:
                    out.append((v, w))
        return out

    @property
    def n_active(self) -> int:
        return sum(1 for s in self.states if s.alpha)

    @property
    def m_active(self) -> int:
        return len(self.edges)

    def candidates(self, v: int) -> tuple:
        out = []
        omega = self.states[v].omega
        while omega:
            low = omega & -omega
            out.append(low.bit_length() - 1)
            omega ^= low
        return tuple(out)

    def induced(self):
        return induce_active_subgraph(self.graph, self.states)


def _order_constraints(cs: ConstraintSet, order) -> ConstraintSet:
    if order is None:
        return cs
    by_name = cs.by_name
    missing = [n for n in order if n not in by_name]
    if missing:
        raise ValueError(f"unknown constraint names in order: {missing}")
    if sorted(order) != sorted(by_name):
        raise ValueError("constraint order must list every generated constraint once")
    return ConstraintSet(constraints=tuple(by_name[n] for n in order))


def plan_constraints(g: LabeledGraph, t: Template, cfg: PruneConfig) -> ConstraintSet:
    """The ordered constraint set a prune of t over g will verify."""
    generated = generate_constraints(t, analyze(t), compute_stats(g))
    return _order_constraints(generated, cfg.constraint_order)


def prune(g: LabeledGraph, t: Template, cfg: PruneConfig | None = None) -> SolutionSubgraph:
    """Prune g down to the exact union of matches of t."""
    cfg = cfg or PruneConfig()
    sol = SolutionSubgraph(
        graph=g,
        template=t,
        states=init_states(g, t),
        constraints=plan_constraints(g, t, cfg),
    )
    _run_phase(sol, cfg, "lcc")
    _checkpoint_if(sol, cfg, {"next": 0})
    return _constraint_loop(sol, cfg, next_idx=0)


def _run_phase(sol: SolutionSubgraph, cfg: PruneConfig, tag: str, constraint=None) -> bool:
    """Run one phase; returns whether it eliminated anything."""
    t0 = time.perf_counter()
    if tag == "lcc":
        _, report = lcc_fixed_point(
            sol.graph, sol.template, sol.states,
            config=cfg.engine_config(),
            edge_elimination=cfg.edge_elimination,
            partition_map=cfg.partition_map,
        )
    else:
        _, report = check_constraint(
            sol.graph, sol.template, constraint, sol.states,
            config=cfg.engine_config(),
            work_aggregation=cfg.work_aggregation,
            partition_map=cfg.partition_map,
            lane=cfg.lane,
        )
    sol.reports.append((tag, report))
    sol.timings.append((tag if constraint is None else constraint.name,
                        time.perf_counter() - t0))
    return report.changed


def _constraint_loop(sol: SolutionSubgraph, cfg: PruneConfig, next_idx: int) -> SolutionSubgraph:
    constraints = sol.constraints
    for i in range(next_idx, len(constraints)):
        if _run_phase(sol, cfg, "nlcc", constraints[i]):
            _run_phase(sol, cfg, "lcc")
        _checkpoint_if(sol, cfg, {"next": i + 1})
    refine(sol)
    return sol


def refine(sol: SolutionSubgraph) -> None:
    """Keep only match-realized vertices, edges, and candidates.

    Sound on any recall-safe state; afterwards the solution is exactly
    the union of matches.
    """
    t0 = time.perf_counter()
    verts, edges, omega_map = match_support(sol, sol.template)
    ve = ee = ce = 0
    for v in range(sol.graph.n):
        st = sol.states[v]
        if not st.alpha:
            continue
        if v not in verts:
            ve += 1
            ee += len(st.epsilon)
            st.alpha = False
            st.omega = 0
            st.epsilon.clear()
            st.eps_stamp.clear()
            continue
        new_omega = omega_map[v]
        ce += bin(st.omega & ~new_omega).count("1")
        st.omega = new_omega
        for w in list(st.epsilon):
            if (min(v, w), max(v, w)) not in edges:
                del st.epsilon[w]
                del st.eps_stamp[w]
                ee += 1
    sol.reports.append(("refine", RefineReport(ve, ee, ce)))
    sol.timings.append(("refine", time.perf_counter() - t0))


# ---------------------------------------------------------------------------
# checkpointing


def _topo_checksum(g: LabeledGraph) -> list:
    mask = (1 << 63) - 1
    return [
        g.n,
        g.m2,
        int(g.offsets.sum()) & mask,
        int(g.targets.sum()) & mask,
        int(g.labels.sum()) & mask,
    ]


def checkpoint(
    path: str,
    g: LabeledGraph,
    t: Template,
    states: list,
    position: dict,
    flags: dict | None = None,
) -> None:
    """Write a phase-boundary snapshot: active topology, ω, and position."""
    if t.n0 > 128:
        raise ValueError("checkpoint stores candidate sets in 128 bits")
    active = [v for v in range(g.n) if states[v].alpha]
    edges = []
    for v in active:
        st = states[v]
        for w in st.epsilon:
            if not states[w].alpha:
                # stale arc to an eliminated vertex (edge elimination off);
                # it carries no messages, so the snapshot drops it
                continue
            if v not in states[w].epsilon:
                raise ValueError("checkpoint requires a symmetric phase boundary")
            if v < w:
                edges.append((v, w))
    header = json.dumps(
        {
            "template": template_to_text(t),
            "position": position,
            "flags": flags or {},
            "checksum": _topo_checksum(g),
            "active": len(active),
            "edges": len(edges),
        }
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(header)))
        fh.write(header)
        for v in active:
            omega = states[v].omega
            fh.write(struct.pack("<IQQ", v, omega & (2**64 - 1), omega >> 64))
        for v, w in edges:
            fh.write(struct.pack("<II", v, w))


@dataclass(frozen=True)
class RestoredRun:
    template: Template
    states: list
    position: dict
    flags: dict
    partition_map: tuple | None


def _balanced_partition_map(g: LabeledGraph, states: list, workers: int) -> tuple:
    """Greedy bin packing of active vertices by vertex-plus-edge weight."""
    loads = [0] * workers
    pmap = [0] * g.n
    order = sorted(
        (v for v in range(g.n) if states[v].alpha),
        key=lambda v: -len(states[v].epsilon),
    )
    for v in order:
        p = loads.index(min(loads))
        pmap[v] = p
        loads[p] += 1 + len(states[v].epsilon)
    spread = 0
    for v in range(g.n):
        if not states[v].alpha:
            pmap[v] = spread % workers
            spread += 1
    return tuple(pmap)


def restore(path: str, g: LabeledGraph, workers: int = 1) -> RestoredRun:
    """Load a checkpoint against the same background graph."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != CHECKPOINT_MAGIC:
        raise ValueError("not a checkpoint file")
    version, hlen = struct.unpack_from("<II", blob, 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    try:
        header = json.loads(blob[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError("corrupt checkpoint header") from exc
    if header["checksum"] != _topo_checksum(g):
        raise ValueError("checkpoint does not match this graph")
    t = parse_template_text(header["template"])
    states = [VertexState(False, 0, {}, {}) for _ in range(g.n)]
    off = 12 + hlen
    expected = off + header["active"] * 20 + header["edges"] * 8
    if len(blob) != expected:
        raise ValueError("corrupt checkpoint body")
    for _ in range(header["active"]):
        v, lo, hi = struct.unpack_from("<IQQ", blob, off)
        off += 20
        states[v] = VertexState(True, (hi << 64) | lo, {}, {})
    for _ in range(header["edges"]):
        v, w = struct.unpack_from("<II", blob, off)
        off += 8
        states[v].epsilon[w] = 0
        states[v].eps_stamp[w] = 0
        states[w].epsilon[v] = 0
        states[w].eps_stamp[v] = 0
    pmap = _balanced_partition_map(g, states, workers) if workers > 1 else None
    return RestoredRun(
        template=t,
        states=states,
        position=header["position"],
        flags=header["flags"],
        partition_map=pmap,
    )


def resume(g: LabeledGraph, path: str, cfg: PruneConfig | None = None) -> SolutionSubgraph:
    """Continue a checkpointed prune, possibly on a different worker count.

    Ablation flags and any constraint-order override come from the
    checkpoint; the engine knobs (workers, seed, queue limit) come from cfg.
    """
    cfg = cfg or PruneConfig()
    run = restore(path, g, workers=cfg.workers)
    flags = run.flags
    cfg = replace(
        cfg,
        edge_elimination=flags.get("edge_elimination", True),
        work_aggregation=flags.get("work_aggregation", True),
        constraint_order=tuple(flags["constraint_order"]) if flags.get("constraint_order") else None,
        partition_map=run.partition_map,
    )
    sol = SolutionSubgraph(
        graph=g,
        template=run.template,
        states=run.states,
        constraints=plan_constraints(g, run.template, cfg),
    )
    return _constraint_loop(sol, cfg, next_idx=run.position["next"])


def _checkpoint_if(sol: SolutionSubgraph, cfg: PruneConfig, position: dict) -> None:
    if cfg.checkpoint_dir is None:
        return
    path = os.path.join(cfg.checkpoint_dir, f"ckpt_{position['next']:04d}.pmck")
    flags = {
        "edge_elimination": cfg.edge_elimination,
        "work_aggregation": cfg.work_aggregation,
        "constraint_order": list(cfg.constraint_order) if cfg.constraint_order else None,
    }
    checkpoint(path, sol.graph, sol.template, sol.states, position, flags)
