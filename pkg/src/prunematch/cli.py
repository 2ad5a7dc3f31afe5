"""Command-line front end.

Each subcommand wraps one library entry point: ``prune`` writes the
solution subgraph, ``enumerate`` the match list, ``count`` the counts,
``explore`` the over-constrained variant sweep, ``serve`` the revision
service, ``gen-rmat`` a synthetic background, ``oracle-check`` a
brute-force comparison, and ``dump-plan`` the constraint plan.

Machine output is JSON (phase reports as JSON lines on stdout, counts as
a single object); the human summary goes to stderr.  Run commands that
take ``--out`` also write ``manifest.json`` there with the resolved
flags, input paths, phase reports, and SHA-256 digests of every output
file, enough to replay the run and compare digests.

Engine knobs fall back to ``PRUNEMATCH_``-prefixed environment
variables (``PRUNEMATCH_WORKERS``, ``PRUNEMATCH_SEED``,
``PRUNEMATCH_QUEUE_LIMIT``, ``PRUNEMATCH_DETERMINISTIC``) when the flag
is not given.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict

from .enumeration import count, enumerate_matches
from .graph import LabeledGraph, load_edge_list, load_labels
from .pipeline import PruneConfig, SolutionSubgraph, plan_constraints, prune, resume
from .scenarios import exploratory_search
from .template import Template, parse_template
from .testkit import RmatParams, degree_labels, oracle_enumerate, rmat_generate

MANIFEST_SCHEMA = 1


def _env(name: str, cast, fallback):
    raw = os.environ.get(f"PRUNEMATCH_{name}")
    if raw is None:
        return fallback
    if cast is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return cast(raw)


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=int, default=_env("WORKERS", int, 1),
                   help="worker count for the constraint engine")
    p.add_argument("--seed", type=int, default=_env("SEED", int, 0),
                   help="engine scheduling seed")
    p.add_argument("--queue-limit", type=int, default=_env("QUEUE_LIMIT", int, None),
                   help="bound per-worker queue length (throttles token floods)")
    p.add_argument("--deterministic", action="store_true",
                   default=_env("DETERMINISTIC", bool, False),
                   help="deterministic scheduling, reproducible reports")
    p.add_argument("--no-edge-elimination", action="store_true",
                   help="ablation: keep edges whose endpoint supports survive")
    p.add_argument("--no-work-aggregation", action="store_true",
                   help="ablation: forward every token copy separately")
    p.add_argument("--constraint-order", metavar="FILE",
                   help="file of constraint names, one per line, overriding the plan order")


def _add_input_flags(p: argparse.ArgumentParser, template: str = "required") -> None:
    p.add_argument("--graph", required=True, help="edge-list file, 'src dst' per line")
    p.add_argument("--labels", help="label file, 'vertex_id label_id' per line")
    p.add_argument("--compact", action="store_true",
                   help="renumber vertex ids densely by first appearance")
    if template == "required":
        p.add_argument("--template", required=True, help="template file")
    elif template == "optional":
        # a checkpoint carries its own template
        p.add_argument("--template", help="template file (not needed with --restore)")


def _load_graph(args) -> LabeledGraph:
    g = load_edge_list(args.graph, compact=args.compact)
    if args.labels:
        g = load_labels(args.labels, g)
    return g


def _read_order(path: str) -> tuple:
    with open(path, "r", encoding="utf-8") as fh:
        names = [line.strip() for line in fh if line.strip()]
    if not names:
        raise ValueError(f"{path}: empty constraint order file")
    return tuple(names)


def _config(args) -> PruneConfig:
    order = _read_order(args.constraint_order) if args.constraint_order else None
    return PruneConfig(
        workers=args.workers,
        deterministic=args.deterministic,
        seed=args.seed,
        queue_limit=args.queue_limit,
        edge_elimination=not args.no_edge_elimination,
        work_aggregation=not args.no_work_aggregation,
        constraint_order=order,
        checkpoint_dir=getattr(args, "checkpoint_dir", None),
    )


def _report_lines(sol: SolutionSubgraph) -> list[dict]:
    lines = []
    for (phase, report), (name, seconds) in zip(sol.reports, sol.timings):
        lines.append({
            "phase": phase,
            "name": name,
            "seconds": seconds,
            "report": asdict(report),
        })
    return lines


def _emit_reports(sol: SolutionSubgraph) -> list[dict]:
    """Stream phase reports as JSON lines; lcc expands to one line per iteration."""
    lines = _report_lines(sol)
    for line in lines:
        if line["phase"] == "lcc":
            rep = line["report"]
            for i in range(rep["iterations"]):
                print(json.dumps({
                    "phase": "lcc",
                    "name": line["name"],
                    "iteration": i,
                    "vertices_eliminated": rep["vertices_eliminated"][i],
                    "edges_eliminated": rep["edges_eliminated"][i],
                    "candidates_eliminated": rep["candidates_eliminated"][i],
                    "alive_messages": rep["alive_messages"][i],
                }))
            continue
        print(json.dumps(line))
    return lines


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def _write_manifest(out_dir: str, command: str, args, reports: list[dict],
                    outputs: list[str]) -> None:
    flag_keys = ("workers", "seed", "queue_limit", "deterministic",
                 "no_edge_elimination", "no_work_aggregation", "constraint_order",
                 "compact", "checkpoint_dir", "restore", "count_mode", "limit",
                 "max_k")
    manifest = {
        "schema_version": MANIFEST_SCHEMA,
        "command": command,
        "inputs": {
            "graph": getattr(args, "graph", None),
            "labels": getattr(args, "labels", None),
            "template": getattr(args, "template", None),
        },
        "flags": {k: getattr(args, k) for k in flag_keys if hasattr(args, k)},
        "seed": args.seed,
        "reports": reports,
        "outputs": {name: _digest(os.path.join(out_dir, name)) for name in outputs},
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _run_prune(args) -> SolutionSubgraph:
    g = _load_graph(args)
    cfg = _config(args)
    if getattr(args, "checkpoint_dir", None):
        os.makedirs(args.checkpoint_dir, exist_ok=True)
    if getattr(args, "restore", None):
        return resume(g, args.restore, cfg)
    if not args.template:
        raise ValueError("--template is required unless --restore is given")
    t = parse_template(args.template)
    return prune(g, t, cfg)


def _write_solution(sol: SolutionSubgraph, out_dir: str) -> list[str]:
    """Write vertices.txt (final candidate sets) and edges.txt."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "vertices.txt"), "w", encoding="utf-8") as fh:
        for v in sol.vertices:
            cands = ",".join(f"q{q}" for q in sol.candidates(v))
            fh.write(f"{v} {cands}\n")
    with open(os.path.join(out_dir, "edges.txt"), "w", encoding="utf-8") as fh:
        for u, w in sol.edges:
            fh.write(f"{u} {w}\n")
    return ["vertices.txt", "edges.txt"]


def _summary(sol: SolutionSubgraph) -> str:
    total = sum(s for _, s in sol.timings)
    return (f"{sol.n_active} vertices, {sol.m_active} edges after "
            f"{len(sol.timings)} phases in {total:.2f}s")


def cmd_prune(args) -> int:
    sol = _run_prune(args)
    if args.dump_plan:
        print(plan_text(sol.constraints, sol.template), file=sys.stderr)
    outputs = _write_solution(sol, args.out)
    reports = _emit_reports(sol)
    _write_manifest(args.out, "prune", args, reports, outputs)
    print(f"prune: {_summary(sol)}", file=sys.stderr)
    return 0


def cmd_enumerate(args) -> int:
    sol = _run_prune(args)
    matches = list(enumerate_matches(sol, sol.template, limit=args.limit))
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "matches.txt"), "w", encoding="utf-8") as fh:
        for m in matches:
            fh.write(" ".join(str(v) for v in m) + "\n")
    outputs = _write_solution(sol, args.out) + ["matches.txt"]
    reports = _emit_reports(sol)
    _write_manifest(args.out, "enumerate", args, reports, outputs)
    print(f"enumerate: {len(matches)} matches; {_summary(sol)}", file=sys.stderr)
    return 0


def cmd_count(args) -> int:
    sol = _run_prune(args)
    mc = count(sol, sol.template)
    chosen = mc.embedding_count if args.count_mode == "embeddings" else mc.mapping_count
    payload = {
        "count_mode": args.count_mode,
        "count": chosen,
        "mapping_count": mc.mapping_count,
        "embedding_count": mc.embedding_count,
        "automorphism_order": mc.automorphism_order,
    }
    print(json.dumps(payload))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "counts.json"), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        outputs = _write_solution(sol, args.out) + ["counts.json"]
        _write_manifest(args.out, "count", args, _report_lines(sol), outputs)
    print(f"count: {chosen} {args.count_mode}; {_summary(sol)}", file=sys.stderr)
    return 0


def cmd_explore(args) -> int:
    g = _load_graph(args)
    t = parse_template(args.template)
    res = exploratory_search(g, t, args.max_k, _config(args))
    payload = {
        "found_k": res.found_k,
        "levels": [
            {
                "k": lv.k,
                "matched_variants": lv.matched_variants,
                "variants": [asdict(vs) for vs in lv.variants],
            }
            for lv in res.levels
        ],
        "union_vertices": list(res.union_vertices),
        "union_edges": [list(e) for e in res.union_edges],
    }
    print(json.dumps(payload))
    if res.found:
        msg = f"matches at k={res.found_k}, union of {len(res.union_vertices)} vertices"
    else:
        msg = f"no matches up to k={args.max_k}"
    print(f"explore: {msg}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    g = _load_graph(args)
    print(f"serve: listening on {args.host}:{args.port}", file=sys.stderr)
    serve(g, _config(args), host=args.host, port=args.port)
    return 0


def cmd_gen_rmat(args) -> int:
    params = RmatParams(scale=args.scale, edge_factor=args.edge_factor, seed=args.seed)
    g = rmat_generate(params)
    if args.labeling == "degree":
        g = degree_labels(g)
    os.makedirs(args.out, exist_ok=True)
    edge_path = os.path.join(args.out, "graph.el")
    label_path = os.path.join(args.out, "graph.lab")
    with open(edge_path, "w", encoding="utf-8") as fh:
        fh.write(f"# rmat scale={args.scale} edge_factor={args.edge_factor} seed={args.seed}\n")
        for v in range(g.n):
            for w in g.neighbors(v):
                if v < w:
                    fh.write(f"{v} {w}\n")
    with open(label_path, "w", encoding="utf-8") as fh:
        for v in range(g.n):
            fh.write(f"{v} {int(g.labels[v])}\n")
    print(f"gen-rmat: {g.n} vertices, {g.m2 // 2} edges -> {edge_path}", file=sys.stderr)
    return 0


def cmd_oracle_check(args) -> int:
    g = _load_graph(args)
    t = parse_template(args.template)
    sol = prune(g, t, _config(args))
    oracle = oracle_enumerate(g, t, allow_large=args.allow_large)
    got_v, got_e = set(sol.vertices), set(sol.edges)
    want_v, want_e = set(oracle.union_vertices), set(oracle.union_edges)
    ok = got_v == want_v and got_e == want_e
    print(json.dumps({
        "match": ok,
        "pruned": {"vertices": len(got_v), "edges": len(got_e)},
        "oracle": {"vertices": len(want_v), "edges": len(want_e)},
        "matches": len(oracle.matches),
    }))
    if ok:
        print("oracle-check: prune output equals the oracle union", file=sys.stderr)
        return 0
    for tag, got, want in (("vertices", got_v, want_v), ("edges", got_e, want_e)):
        extra, missing = got - want, want - got
        if extra or missing:
            print(f"oracle-check: {tag} differ, {len(extra)} extra, "
                  f"{len(missing)} missing", file=sys.stderr)
    return 1


def plan_text(cs, t: Template) -> str:
    """Human-readable constraint plan, in verification order."""
    lines = [f"constraint plan: {len(cs)} constraints for "
             f"{t.n0}-vertex, {t.m0}-edge template"]
    for i, c in enumerate(cs):
        walk = "->".join(f"q{q}" for q in c.walk)
        shape = "cyclic" if c.is_cyclic else "acyclic"
        lines.append(f"  {i + 1}. {c.name} [{c.kind}, {shape}, length {c.length}] {walk}")
    return "\n".join(lines)


def cmd_dump_plan(args) -> int:
    t = parse_template(args.template)
    order = _read_order(args.constraint_order) if args.constraint_order else None
    if args.graph:
        g = _load_graph(args)
        cs = plan_constraints(g, t, PruneConfig(constraint_order=order))
    else:
        from .template import analyze, generate_constraints

        cs = generate_constraints(t, analyze(t))
        if order:
            cs = type(cs)(tuple(cs.by_name[name] for name in order))
    print(plan_text(cs, t))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prunematch",
        description="exact graph pattern matching by constraint-checking pruning",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("prune", help="prune a background graph to the union of matches")
    _add_input_flags(p, template="optional")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--checkpoint-dir", help="write phase-boundary checkpoints here")
    p.add_argument("--restore", metavar="FILE", help="resume from a checkpoint file")
    p.add_argument("--dump-plan", action="store_true",
                   help="print the constraint plan to stderr before running")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("enumerate", help="list every match after pruning")
    _add_input_flags(p, template="optional")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--restore", metavar="FILE", help="resume from a checkpoint file")
    p.add_argument("--limit", type=int, help="stop after this many matches")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("count", help="count matches after pruning")
    _add_input_flags(p, template="optional")
    p.add_argument("--count-mode", choices=("embeddings", "mappings"),
                   default="embeddings", help="embeddings quotient out automorphisms")
    p.add_argument("--out", help="also write counts.json and the solution here")
    p.add_argument("--restore", metavar="FILE", help="resume from a checkpoint file")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("explore", help="sweep edge-deletion variants of an "
                                       "over-constrained template")
    _add_input_flags(p)
    p.add_argument("--max-k", type=int, required=True,
                   help="largest number of deleted edges to try")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("serve", help="run the interactive revision service")
    _add_input_flags(p, template="none")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8750)
    _add_engine_flags(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("gen-rmat", help="generate a synthetic power-law background")
    p.add_argument("--scale", type=int, required=True, help="2^scale vertices")
    p.add_argument("--edge-factor", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labeling", choices=("zero", "degree"), default="zero",
                   help="zero labels every vertex 0; degree bins by log degree")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen_rmat)

    p = sub.add_parser("oracle-check", help="compare prune output against "
                                            "brute-force enumeration")
    _add_input_flags(p)
    p.add_argument("--allow-large", action="store_true",
                   help="skip the background-size guard on the oracle")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("dump-plan", help="print the constraint plan for a template")
    p.add_argument("--template", required=True, help="template file")
    p.add_argument("--graph", help="edge-list file; orders constraints by label rarity")
    p.add_argument("--labels", help="label file for --graph")
    p.add_argument("--compact", action="store_true")
    p.add_argument("--constraint-order", metavar="FILE",
                   help="file of constraint names overriding the plan order")
    p.set_defaults(func=cmd_dump_plan)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
