"""HTTP API over the engine: profile CRUD, search, linking, review flow.

Routes
    GET  /health
    GET  /profiles/{pid}              profile in the JSONL schema
    POST /profiles                    store + index + incremental re-link
    GET  /profiles/{pid}/similar      similarity edges touching the profile
    GET  /search?q=&k=                keyword search, ranked ids
    POST /search/structured           nested query body
    GET  /matches/pending?min_score=&limit=
    POST /matches/{id1}/{id2}/confirm {"verdict": "match"|"nonmatch"}
    POST /link/run                    background run; 409 while one is live
    GET  /link/status
    /ui/...                           static review console, when built

Every error body is {"status", "code", "message"}. Mutating routes funnel
into the engine's single-writer path; GETs are side-effect free.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .engine import Engine
from .errors import GraphLinkError, NotFound, SchemaError
from .indexer import NestedQuery
from .ingest import profile_from_obj, profile_to_obj
from .linker import VERDICTS
from .model import Profile, SimilarityEdge, values_of

_STATUS_BY_CODE = {
    "not_found": 404,
    "invalid_id": 400,
    "empty_key": 400,
    "empty_value": 400,
    "schema_error": 400,
    "mapping_error": 400,
    "malformed_query": 400,
    "same_id": 400,
    "below_threshold": 400,
    "invalid_n": 400,
    "storage_failure": 500,
}


def edge_to_obj(e: SimilarityEdge) -> dict:
    return {
        "id1": e.id1,
        "id2": e.id2,
        "simsc": e.simsc,
        "rejsc": e.rejsc,
        "cfm": e.cfm,
        "decision": e.decision,
    }


def profile_snippet(p: Profile) -> str:
    """Short human-readable label: entity type plus the leading values."""
    names = [v for v, _ in values_of(p, "name")]
    if not names:
        names = [a.value for a in p.attributes if a.key != "type"][:3]
    label = ", ".join(names) if names else p.id
    return f"{p.type_label()} · {label}"


def create_app(engine: Engine, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="graphlink", version="0.1.0")

    @app.exception_handler(GraphLinkError)
    async def graphlink_error(request: Request, exc: GraphLinkError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(
            status_code=status,
            content={"status": status, "code": exc.code, "message": str(exc)},
        )

    def error(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(
            status_code=status,
            content={"status": status, "code": code, "message": message},
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/profiles/{pid}")
    def get_profile(pid: str):
        return profile_to_obj(engine.get_profile(pid))

    @app.post("/profiles", status_code=201)
    def post_profile(body: dict = Body(...)):
        profile = profile_from_obj(body)
        edges = engine.put_and_relink(profile)
        return {"id": profile.id, "edges_upserted": len(edges)}

    @app.get("/profiles/{pid}/similar")
    def similar(pid: str):
        edges = engine.similar(pid)
        return {"id": pid, "edges": [edge_to_obj(e) for e in edges]}

    @app.get("/search")
    def search(q: str = Query(...), k: int = Query(10, ge=1, le=1000)):
        ranked = engine.search(q, k)
        return {"results": [{"id": pid, "score": score} for pid, score in ranked]}

    @app.post("/search/structured")
    def search_structured(body: dict = Body(...)):
        query = NestedQuery.from_obj(body)
        return {"ids": engine.nested_search(query)}

    @app.get("/matches/pending")
    def pending(min_score: float = 0.0, limit: int = Query(100, ge=1, le=10_000)):
        rows = []
        for e in engine.pending_matches(min_score=min_score, limit=limit):
            row = edge_to_obj(e)
            for field, pid in (("snippet1", e.id1), ("snippet2", e.id2)):
                try:
                    row[field] = profile_snippet(engine.get_profile(pid))
                except NotFound:
                    row[field] = pid
            rows.append(row)
        return {"matches": rows}

    @app.post("/matches/{id1}/{id2}/confirm")
    def confirm(id1: str, id2: str, body: dict = Body(...)):
        verdict = body.get("verdict")
        if verdict not in VERDICTS:
            raise SchemaError(f"verdict must be one of {VERDICTS}, got {verdict!r}")
        try:
            edge = engine.confirm(id1, id2, verdict)
        except NotFound as exc:
            return error(409, "no_such_edge", str(exc))
        return edge_to_obj(edge)

    @app.post("/link/run", status_code=202)
    def link_run():
        if not engine.start_link_run():
            return error(409, "link_run_active", "a link run is already in progress")
        return {"status": "started"}

    @app.get("/link/status")
    def link_status():
        return engine.link_status()

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/ui")
        def ui_missing():
            raise NotFound(
                "review console not built; run `npm install && npm run build` in frontend/"
            )

    return app
