"""HTTP service exposing the pipeline: model upload/inspection, raw Cypher
queries, and question answering. JSON shapes are documented in docs/api.md.

Loaded graphs are immutable snapshots, so concurrent queries and asks against
one model are plain reads; model registration is atomic (a model becomes
visible only after its graph is fully built).
"""

from __future__ import annotations

import concurrent.futures
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import build, rag, step
from .cypher import execute, parse_query, render_context
from .errors import CypherError, IfcGraphError, UnsupportedFeature
from .graph import PropertyGraph, render_value

MAX_UPLOAD_BYTES = 64 * 1024 * 1024
PARSE_TIMEOUT_S = 60.0


@dataclass
class ModelHandle:
    """One loaded model: a frozen graph plus cached derived views."""

    model_id: str
    source_name: str
    stats: dict
    build_report: dict
    graph: PropertyGraph
    schema_summary: str
    bundle: rag.PromptBundle


class QueryRequest(BaseModel):
    cypher: str


class AskRequest(BaseModel):
    question: str


class _Registry:
    def __init__(self):
        self._models: dict[str, ModelHandle] = {}
        self._lock = threading.Lock()
        self._counter = 0

    def add(self, handle_factory) -> ModelHandle:
        """Build outside the lock, register atomically under it."""
        with self._lock:
            self._counter += 1
            model_id = f"m{self._counter}"
        handle = handle_factory(model_id)
        with self._lock:
            self._models[model_id] = handle
        return handle

    def get(self, model_id: str) -> ModelHandle | None:
        with self._lock:
            return self._models.get(model_id)

    def list(self) -> list[ModelHandle]:
        with self._lock:
            return list(self._models.values())


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(
    backend=None,
    model_paths: list[str] | None = None,
    fewshots: list[rag.FewShotExample] | None = None,
    max_upload_bytes: int = MAX_UPLOAD_BYTES,
    parse_timeout_s: float = PARSE_TIMEOUT_S,
    static_dir: str | None = None,
) -> FastAPI:
    """Build the application, optionally preloading models from disk.

    ``backend`` defaults to the bundled mock script so the whole loop runs
    with no external dependencies.
    """
    if backend is None:
        backend = rag.load_mock_script()
    app = FastAPI(title="ifcgraph", docs_url=None, redoc_url=None)
    registry = _Registry()
    pool = concurrent.futures.ThreadPoolExecutor(max_workers=2)

    def _make_handle(model_id: str, source_name: str, text: str) -> ModelHandle:
        graph, report, _ = build.build_from_source(step.parse_file(text, source_name))
        return ModelHandle(
            model_id=model_id,
            source_name=source_name,
            stats=graph.stats(),
            build_report=report.to_dict(),
            graph=graph,
            schema_summary=rag.schema_summary(graph),
            bundle=rag.make_bundle(graph, fewshots),
        )

    def _model_summary(h: ModelHandle) -> dict:
        return {
            "model_id": h.model_id,
            "source_name": h.source_name,
            "node_count": h.stats["node_count"],
            "edge_count": h.stats["edge_count"],
        }

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/models")
    def list_models():
        return {"models": [_model_summary(h) for h in registry.list()]}

    @app.post("/models")
    async def upload_model(request: Request):
        body = await request.body()
        if len(body) > max_upload_bytes:
            return _error(413, f"model exceeds the {max_upload_bytes} byte upload cap")
        if not body.strip():
            return _error(400, "empty request body; expected STEP-encoded IFC text")
        text = body.decode("iso-8859-1")
        source_name = request.headers.get("x-source-name", "upload.ifc")
        future = pool.submit(
            registry.add, lambda mid: _make_handle(mid, source_name, text)
        )
        try:
            handle = future.result(timeout=parse_timeout_s)
        except concurrent.futures.TimeoutError:
            future.cancel()
            return _error(400, f"parse exceeded the {parse_timeout_s:g} s timeout")
        except IfcGraphError as exc:
            return _error(400, str(exc))
        return {
            "model_id": handle.model_id,
            "stats": handle.stats,
            "build_report": handle.build_report,
        }

    @app.get("/models/{model_id}/stats")
    def model_stats(model_id: str):
        handle = registry.get(model_id)
        if handle is None:
            return _error(404, f"unknown model {model_id!r}")
        return handle.stats

    @app.get("/models/{model_id}/schema-summary")
    def model_schema(model_id: str):
        handle = registry.get(model_id)
        if handle is None:
            return _error(404, f"unknown model {model_id!r}")
        return {"schema_summary": handle.schema_summary}

    @app.post("/models/{model_id}/query")
    def model_query(model_id: str, req: QueryRequest):
        handle = registry.get(model_id)
        if handle is None:
            return _error(404, f"unknown model {model_id!r}")
        try:
            table = execute(parse_query(req.cypher), handle.graph)
        except UnsupportedFeature as exc:
            return _error(422, str(exc))
        except CypherError as exc:
            return _error(400, str(exc))
        rows = [
            {col: render_value(row[col]) for col in table.columns}
            for row in table.rows
        ]
        return {
            "columns": list(table.columns),
            "rows": rows,
            "context": render_context(table),
        }

    @app.post("/models/{model_id}/ask")
    def model_ask(model_id: str, req: AskRequest):
        handle = registry.get(model_id)
        if handle is None:
            return _error(404, f"unknown model {model_id!r}")
        trace = rag.ask(backend, handle.bundle, handle.graph, req.question)
        if trace.error_kind == "BackendTimeout":
            return _error(504, trace.error)
        return trace.to_dict()

    if static_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if candidate.is_dir():
            static_dir = str(candidate)
    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    for path in model_paths or []:
        text = Path(path).read_text(encoding="iso-8859-1")
        registry.add(lambda mid, t=text, p=path: _make_handle(mid, Path(p).name, t))

    return app
