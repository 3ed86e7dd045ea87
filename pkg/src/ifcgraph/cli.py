"""Command-line interface: parse/export models, run queries, ask questions,
run benchmarks, and serve the HTTP API.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bench, build, rag
from .cypher import execute, parse_query, render_context
from .errors import IfcGraphError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifcgraph",
        description="Graph-RAG question answering over IFC building models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a model and print stats + build report")
    p.add_argument("file")
    p.add_argument("--schema", help="override the schema id (IFC4, IFC2X3)")
    p.add_argument("--strict", action="store_true", help="fail on dangling references")

    p = sub.add_parser("export", help="export node/edge CSV lists")
    p.add_argument("file")
    p.add_argument("--nodes", required=True, help="node list output path")
    p.add_argument("--edges", required=True, help="edge list output path")
    p.add_argument("--neo4j-headers", action="store_true")
    p.add_argument("--schema")
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("query", help="run a Cypher query against a model")
    p.add_argument("file")
    p.add_argument("--cypher", required=True)
    p.add_argument("--schema")

    p = sub.add_parser("ask", help="ask a natural-language question")
    p.add_argument("file")
    p.add_argument("--question", required=True)
    p.add_argument("--backend", choices=["mock", "http"], default="mock")
    p.add_argument("--mock-script", help="JSON script for the mock backend")
    p.add_argument("--fewshots", help="few-shot examples file")
    p.add_argument("--schema")

    p = sub.add_parser("bench", help="run a QA benchmark")
    p.add_argument("file")
    p.add_argument("--qa", required=True, help="QA records (JSON Lines)")
    p.add_argument("--backend", choices=["mock", "http"], default="mock")
    p.add_argument("--mock-script")
    p.add_argument("--fewshots")
    p.add_argument("--schema")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")

    p = sub.add_parser("serve", help="serve the HTTP API and web UI")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--model", action="append", default=[], help="IFC file to preload")
    p.add_argument("--backend", choices=["mock", "http"], default="mock")
    p.add_argument("--mock-script")
    p.add_argument("--fewshots")
    return parser


def _opts(args) -> build.BuildOptions:
    return build.BuildOptions(
        mode="strict" if getattr(args, "strict", False) else "lenient",
        schema_override=getattr(args, "schema", None),
    )


def _backend(args):
    if args.backend == "http":
        return rag.HttpChatBackend()
    return rag.load_mock_script(getattr(args, "mock_script", None))


def _bundle(graph, args) -> rag.PromptBundle:
    fewshots = rag.load_fewshots(args.fewshots) if getattr(args, "fewshots", None) else None
    return rag.make_bundle(graph, fewshots)


def cmd_parse(args) -> int:
    graph, report, schema = build.build_from_path(args.file, _opts(args))
    stats = graph.stats()
    print(f"schema: {schema.schema_id}")
    print(f"nodes: {stats['node_count']}")
    print(f"edges: {stats['edge_count']}")
    print("labels:")
    for label, count in stats["label_histogram"].items():
        print(f"  {label}: {count}")
    if report.unresolved_refs:
        print(f"unresolved references: {len(report.unresolved_refs)}")
        for from_id, attr, missing in report.unresolved_refs[:20]:
            print(f"  #{from_id}.{attr} -> #{missing}")
    if report.unknown_types:
        print(f"unknown types (positional fallback): {', '.join(sorted(report.unknown_types))}")
    return 0


def cmd_export(args) -> int:
    graph, _, _ = build.build_from_path(args.file, _opts(args))
    with open(args.nodes, "w", encoding="utf-8", newline="") as nf, open(
        args.edges, "w", encoding="utf-8", newline=""
    ) as ef:
        n, e = graph.export_csv(nf, ef, neo4j_headers=args.neo4j_headers)
    print(f"wrote {n} node rows to {args.nodes}")
    print(f"wrote {e} edge rows to {args.edges}")
    return 0


def cmd_query(args) -> int:
    graph, _, _ = build.build_from_path(args.file, _opts(args))
    table = execute(parse_query(args.cypher), graph)
    print("columns: " + ", ".join(table.columns))
    for row in table.rows:
        print("  " + render_context(type(table)(table.columns, [row])))
    print(f"rows: {len(table.rows)}")
    print("context: " + render_context(table))
    return 0


def cmd_ask(args) -> int:
    graph, _, _ = build.build_from_path(args.file, _opts(args))
    trace = rag.ask(_backend(args), _bundle(graph, args), graph, args.question)
    print(f"question: {trace.question}")
    print(f"cypher:   {trace.cypher}")
    print(f"context:  {trace.context}")
    print(f"outcome:  {trace.outcome}")
    print(f"answer:   {trace.final_answer}")
    if trace.outcome == "failed":
        print(f"error:    {trace.error}")
        return 1
    return 0


def cmd_bench(args) -> int:
    graph, _, _ = build.build_from_path(args.file, _opts(args))
    records = bench.load_qa(args.qa)
    report = bench.run_benchmark(records, _backend(args), _bundle(graph, args), graph)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.to_table())
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    fewshots = rag.load_fewshots(args.fewshots) if args.fewshots else None
    app = create_app(
        backend=_backend(args), model_paths=args.model, fewshots=fewshots
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "parse": cmd_parse,
    "export": cmd_export,
    "query": cmd_query,
    "ask": cmd_ask,
    "bench": cmd_bench,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except IfcGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
