"""HTTP API over the store and pipeline, plus static hosting for the review UI.

All handlers are synchronous and stateless; correctness under concurrent
requests is delegated to the store's compare-and-set transactions.  Domain
errors map onto a fixed status table: validation/format 400, not_found
404, conflict 409, state 422, stage_failure 502.  Failed bearer-token
checks answer 401 with code "unauthorized".
"""

from __future__ import annotations

import os

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

import corpusforge
from corpusforge import pipeline
from corpusforge.config import ProjectConfig
from corpusforge.domain import PairStatus, QualityLevel
from corpusforge.errors import CorpusForgeError, NotFoundError, ValidationError
from corpusforge.store import DEFAULT_EXPORT_STATUSES, Store
from corpusforge.triage import transition_task

STATUS_FOR_CODE = {
    "validation": 400,
    "format": 400,
    "not_found": 404,
    "conflict": 409,
    "state": 422,
    "stage_failure": 502,
}

DEFAULT_PAGE_SIZE = 50
MAX_PAGE_SIZE = 500


def _task_view(store: Store, task) -> dict:
    """Task record enriched with its pair, the unit the review UI works on."""
    view = task.to_record()
    pair = store.get_pair(task.project_id, task.pair_id)
    view["pair"] = {
        "source": pair.source,
        "target": pair.target,
        "raw_target": pair.raw_target,
        "score": pair.score.final if pair.score else None,
        "metrics": pair.score.metric_scores if pair.score else {},
        "level": pair.level.value if pair.level else None,
        "status": pair.status.value,
    }
    return view


def create_app(
    store: Store, ui_dir: str | None = None, token: str | None = None
) -> FastAPI:
    """Build the API app; token=None falls back to CORPUSFORGE_TOKEN."""
    if token is None:
        token = os.environ.get("CORPUSFORGE_TOKEN") or None
    app = FastAPI(title="corpusforge", version=corpusforge.__version__, openapi_url=None)

    @app.exception_handler(CorpusForgeError)
    async def domain_error(request: Request, exc: CorpusForgeError):
        return JSONResponse(
            status_code=STATUS_FOR_CODE[exc.code], content=exc.to_dict()
        )

    @app.exception_handler(RequestValidationError)
    async def body_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "validation", "message": "malformed request body"},
        )

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException):
        if exc.status_code in (404, 405):
            return JSONResponse(
                status_code=404,
                content={"code": "not_found", "message": "unknown route"},
            )
        return JSONResponse(
            status_code=exc.status_code,
            content={"code": "validation", "message": str(exc.detail)},
        )

    def require_token(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise _Unauthorized()

    @app.exception_handler(_Unauthorized)
    async def auth_error(request: Request, exc: "_Unauthorized"):
        return JSONResponse(
            status_code=401,
            content={"code": "unauthorized", "message": "missing or bad bearer token"},
        )

    # -- health ---------------------------------------------------------------

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": corpusforge.__version__}

    # -- projects -------------------------------------------------------------

    @app.post("/api/projects", status_code=201)
    def create_project(request: Request, payload: dict = Body(...)):
        require_token(request)
        if not isinstance(payload, dict):
            raise ValidationError("request body must be a JSON object")
        name = payload.get("name")
        if not isinstance(name, str):
            raise ValidationError('"name" is required and must be a string')
        config = (
            ProjectConfig.from_dict(payload["config"])
            if payload.get("config") is not None
            else None
        )
        record = store.create_project(
            name=name, config=config, project_id=payload.get("project_id")
        )
        return record.to_dict()

    @app.get("/api/projects")
    def list_projects():
        return {"projects": [record.to_dict() for record in store.list_projects()]}

    @app.get("/api/projects/{project_id}")
    def get_project(project_id: str):
        return store.get_project(project_id).to_dict()

    # -- corpus ---------------------------------------------------------------

    @app.post("/api/projects/{project_id}/corpus")
    async def upload_corpus(project_id: str, request: Request):
        require_token(request)
        body = await request.body()
        content_type = request.headers.get("content-type", "").split(";")[0].strip()
        format = "jsonl" if content_type == "application/x-ndjson" else "txt"
        count = store.ingest_corpus(project_id, body, format=format)
        return {"project_id": project_id, "ingested": count, "format": format}

    # -- pipeline -------------------------------------------------------------

    @app.post("/api/projects/{project_id}/run")
    def run(request: Request, project_id: str):
        require_token(request)
        return pipeline.run_pipeline(store, project_id)

    @app.get("/api/projects/{project_id}/report")
    def report(project_id: str):
        project = store.get_project(project_id)
        if project.run_active:
            return {"running": True, "progress": store.get_progress(project_id) or {}}
        stored = store.get_report(project_id)
        if stored is None:
            raise NotFoundError(f"project {project_id!r} has no report yet")
        return stored

    @app.get("/api/projects/{project_id}/preview")
    def preview(project_id: str, stage: str = "", n: int = 5):
        return {
            "stage": stage,
            "rows": pipeline.preview_stage(store, project_id, stage, n),
        }

    # -- tasks ----------------------------------------------------------------

    @app.get("/api/projects/{project_id}/tasks")
    def list_tasks(
        project_id: str,
        level: str | None = None,
        state: str | None = None,
        page: int = 1,
        page_size: int = DEFAULT_PAGE_SIZE,
    ):
        if page < 1:
            raise ValidationError("page must be >= 1")
        if not (1 <= page_size <= MAX_PAGE_SIZE):
            raise ValidationError(f"page_size must lie in [1, {MAX_PAGE_SIZE}]")
        level_filter = QualityLevel.parse(level) if level else None
        tasks = store.get_tasks(project_id, level=level_filter, state=state or None)
        start = (page - 1) * page_size
        window = tasks[start : start + page_size]
        return {
            "items": [_task_view(store, task) for task in window],
            "page": page,
            "page_size": page_size,
            "total": len(tasks),
        }

    def _expected_version(payload: dict) -> int:
        version = payload.get("expected_version")
        if isinstance(version, bool) or not isinstance(version, int):
            raise ValidationError('"expected_version" is required and must be an integer')
        return version

    @app.post("/api/tasks/{task_id}/claim")
    def claim_task(request: Request, task_id: str, payload: dict = Body(...)):
        require_token(request)
        task = transition_task(
            store,
            task_id,
            "claim",
            _expected_version(payload),
            assignee=payload.get("assignee"),
        )
        return _task_view(store, task)

    @app.post("/api/tasks/{task_id}/release")
    def release_task(request: Request, task_id: str, payload: dict = Body(...)):
        require_token(request)
        task = transition_task(store, task_id, "release", _expected_version(payload))
        return _task_view(store, task)

    @app.post("/api/tasks/{task_id}/resolve")
    def resolve_task(request: Request, task_id: str, payload: dict = Body(...)):
        require_token(request)
        action = payload.get("action")
        if action not in ("accept", "edit", "reject"):
            raise ValidationError('"action" must be one of accept, edit, reject')
        task = transition_task(
            store,
            task_id,
            action,
            _expected_version(payload),
            edited_target=payload.get("edited_target"),
        )
        return _task_view(store, task)

    # -- export ---------------------------------------------------------------

    @app.get("/api/projects/{project_id}/export")
    def export(project_id: str, format: str = "jsonl", include: str = ""):
        statuses = (
            frozenset(PairStatus.parse(s) for s in include.split(",") if s)
            if include
            else DEFAULT_EXPORT_STATUSES
        )
        payload = store.export_dataset(project_id, format=format, include=statuses)
        media = "application/x-ndjson" if format == "jsonl" else "text/tab-separated-values"
        return Response(content=payload, media_type=media)

    if ui_dir and os.path.isdir(ui_dir):
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


class _Unauthorized(Exception):
    """Bearer-token check failed; outside the domain error hierarchy."""
