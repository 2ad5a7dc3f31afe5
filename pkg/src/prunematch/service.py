"""JSON query service over interactive sessions.

One process serves one immutable background graph.  Each session owns a
template being edited and answers with the same numbers a fresh prune of
that template would print; distinct sessions never share state beyond the
graph.  Requests are synchronous, and edits to one session are serialized
behind a per-session lock, so two racing edits apply in some order rather
than interleaving.  Phase-by-phase progress of every reprune accumulates
on a side channel the client can poll, separate from the result path.

All payloads carry a schema version.  Templates travel as
``{"vertices": [{"id", "label"}...], "edges": [[u, w]...]}``, mirroring
the text format statement for statement; the echo endpoint returns the
canonical form, which re-posts to an identical template.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import asdict

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .enumeration import count, enumerate_matches
from .graph import LabeledGraph
from .pipeline import PruneConfig
from .scenarios import Session, exploratory_search
from .template import Template, make_template

SCHEMA_VERSION = 1
SAMPLE_LIMIT = 5


def template_to_json(t: Template) -> dict:
    return {
        "vertices": [{"id": q, "label": t.labels[q]} for q in range(t.n0)],
        "edges": [[u, w] for u, w in t.edges],
    }


def template_from_json(doc: dict) -> Template:
    """Build a template from its JSON form; ids must be dense like the text format."""
    vlabels: dict = {}
    for row in doc["vertices"]:
        vid = int(row["id"])
        if vid in vlabels:
            raise ValueError(f"duplicate vertex {vid}")
        vlabels[vid] = int(row["label"])
    n0 = len(vlabels)
    if sorted(vlabels) != list(range(n0)):
        raise ValueError(f"vertex ids must be dense 0..{n0 - 1}")
    return make_template(
        [vlabels[q] for q in range(n0)], [tuple(e) for e in doc["edges"]]
    )


class VertexDoc(BaseModel):
    id: int
    label: int


class TemplateDoc(BaseModel):
    vertices: list[VertexDoc]
    edges: list[tuple[int, int]]


class CreateSessionRequest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    template: TemplateDoc


class EdgeRequest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    edge: tuple[int, int]


class ExploreRequest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    template: TemplateDoc
    max_k: int = Field(ge=0)


class _Entry:
    """One live session plus its lock and drained progress events."""

    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.events: list = []
        self.drain()

    def drain(self) -> None:
        sess = self.session
        revision = len(sess.revisions) - 1
        op = sess.revisions[-1].op
        for (tag, report), (name, seconds) in zip(
            sess.solution.reports, sess.solution.timings
        ):
            self.events.append(
                {
                    "revision": revision,
                    "op": op,
                    "phase": tag,
                    "name": name,
                    "seconds": seconds,
                    "report": asdict(report),
                }
            )


def _template_or_422(doc: TemplateDoc) -> Template:
    try:
        return template_from_json(doc.model_dump())
    except (KeyError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app(g: LabeledGraph, cfg: PruneConfig | None = None) -> FastAPI:
    """The service as an application object, one background graph per app."""
    cfg = cfg or PruneConfig()
    app = FastAPI(title="prunematch")
    entries: dict = {}
    registry_lock = threading.Lock()

    def entry_or_404(session_id: str) -> _Entry:
        with registry_lock:
            entry = entries.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return entry

    def stats_payload(entry: _Entry) -> dict:
        sess = entry.session
        rev = sess.revisions[-1]
        return {
            "schema_version": SCHEMA_VERSION,
            "stats": {
                "vertices": sess.solution.n_active,
                "edges": sess.solution.m_active,
                "candidates": len(sess.candidates),
                "revision": {"op": rev.op, "edge": list(rev.edge), "seconds": rev.seconds},
                "cache": {
                    "pass_hits": sess.cache.pass_hits,
                    "fail_hits": sess.cache.fail_hits,
                    "misses": sess.cache.misses,
                },
            },
        }

    @app.post("/session")
    def create_session(req: CreateSessionRequest):
        t = _template_or_422(req.template)
        session_id = uuid.uuid4().hex
        entry = _Entry(Session(g, t, cfg))
        with registry_lock:
            entries[session_id] = entry
        return {"session_id": session_id, **stats_payload(entry)}

    @app.post("/session/{session_id}/edge")
    def add_edge(session_id: str, req: EdgeRequest):
        entry = entry_or_404(session_id)
        with entry.lock:
            try:
                entry.session.add_edge(*req.edge)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            entry.drain()
            return stats_payload(entry)

    @app.delete("/session/{session_id}/edge")
    def remove_edge(session_id: str, req: EdgeRequest):
        entry = entry_or_404(session_id)
        with entry.lock:
            try:
                entry.session.remove_edge(*req.edge)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            entry.drain()
            return stats_payload(entry)

    @app.get("/session/{session_id}/result")
    def result(session_id: str, samples: int = SAMPLE_LIMIT):
        entry = entry_or_404(session_id)
        with entry.lock:
            sess = entry.session
            sol = sess.solution
            mc = count(sol, sess.template)
            return {
                "schema_version": SCHEMA_VERSION,
                "vertices": sol.n_active,
                "edges": sol.m_active,
                "mapping_count": mc.mapping_count,
                "embedding_count": mc.embedding_count,
                "automorphism_order": mc.automorphism_order,
                "timings": [[name, seconds] for name, seconds in sol.timings],
                "sample_matches": [
                    list(phi)
                    for phi in enumerate_matches(sol, sess.template, limit=samples)
                ],
            }

    @app.get("/session/{session_id}/template")
    def template_echo(session_id: str):
        entry = entry_or_404(session_id)
        with entry.lock:
            return {
                "schema_version": SCHEMA_VERSION,
                "template": template_to_json(entry.session.template),
            }

    @app.get("/session/{session_id}/events")
    def events(session_id: str, after: int = 0):
        entry = entry_or_404(session_id)
        with entry.lock:
            return {
                "schema_version": SCHEMA_VERSION,
                "next": len(entry.events),
                "events": entry.events[after:],
            }

    @app.post("/explore")
    def explore(req: ExploreRequest):
        t_over = _template_or_422(req.template)
        res = exploratory_search(g, t_over, req.max_k, cfg)
        return {
            "schema_version": SCHEMA_VERSION,
            "found_k": res.found_k,
            "levels": [
                {
                    "k": lvl.k,
                    "matched_variants": lvl.matched_variants,
                    "variants": [
                        {
                            "removed": [list(e) for e in vs.removed],
                            "vertices": vs.vertices,
                            "edges": vs.edges,
                            "matched": vs.matched,
                        }
                        for vs in lvl.variants
                    ],
                }
                for lvl in res.levels
            ],
            "union_vertices": list(res.union_vertices),
            "union_edges": [list(e) for e in res.union_edges],
        }

    return app


def serve(
    g: LabeledGraph,
    cfg: PruneConfig | None = None,
    host: str = "127.0.0.1",
    port: int = 8750,
) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(g, cfg), host=host, port=port, log_level="warning")
