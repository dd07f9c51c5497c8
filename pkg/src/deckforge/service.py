"""Local HTTP service exposing the pipeline to the browser wizard.

All request bodies are JSON; structure uploads travel as text inside the
JSON document.  Bundle downloads are zip archives built with fixed
timestamps and no compression so equal inputs produce byte-identical
archives.  Analysis runs on a bounded worker pool off the request path;
the in-memory job store does not survive a restart.
"""

from __future__ import annotations

import argparse
import io
import os
import tempfile
import threading
import uuid
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import workflows
from .deck import pack_bundle
from .defaults import FIELDS, BOX_TYPES, FORCEFIELDS, WATER_MODELS, Ledger, builtin_ledger, load_ledger
from .errors import DeckforgeError, SpecParseError, StructureError
from .simspec import parse_spec_text, resolve, validate, with_structure

DEFAULT_MAX_UPLOAD = 64 * 1024 * 1024  # bytes of structure text per request

_MEDIA_TYPES = {
    ".csv": "text/csv",
    ".svg": "image/svg+xml",
    ".json": "application/json",
}

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>deckforge service</title></head>
<body><h1>deckforge service</h1>
<p>The API lives under <code>/api</code>. No UI assets are installed;
start the service with a static directory to host the wizard.</p>
</body></html>
"""


class ValidateRequest(BaseModel):
    spec: str


class GenerateRequest(BaseModel):
    spec: str
    structure_name: str
    structure_text: str


class AnalyzeRequest(BaseModel):
    folder: str
    methods: list[str] | str = "rmsd,rmsf,rog,pca"
    selection: str = "all"
    title: str = ""
    reference_frame: int = 0
    superpose: bool = True


@dataclass
class AnalysisJob:
    id: str
    request: dict
    state: str = "queued"  # queued -> running -> done | failed
    progress: float = 0.0
    out_dir: str = ""
    files: list = field(default_factory=list)
    error: str = ""

    def as_dict(self) -> dict:
        d = {
            "id": self.id,
            "state": self.state,
            "progress": round(self.progress, 4),
            "request": self.request,
        }
        if self.state == "done":
            d["files"] = list(self.files)
        if self.state == "failed":
            d["error"] = self.error
        return d


class JobStore:
    """Thread-safe registry of analysis jobs."""

    def __init__(self) -> None:
        self._jobs: dict[str, AnalysisJob] = {}
        self._lock = threading.Lock()

    def create(self, request: dict) -> AnalysisJob:
        job = AnalysisJob(id=uuid.uuid4().hex, request=request)
        with self._lock:
            self._jobs[job.id] = job
        return job

    def get(self, job_id: str) -> AnalysisJob | None:
        with self._lock:
            return self._jobs.get(job_id)

    def update(self, job_id: str, **fields) -> None:
        with self._lock:
            job = self._jobs[job_id]
            for key, value in fields.items():
                setattr(job, key, value)


def _ledger_as_dict(ledger: Ledger) -> dict:
    return {
        "version": ledger.version,
        "equilibration_ps": ledger.equilibration_ps,
        "em_tolerance": ledger.em_tolerance,
        "stages": {
            stage.value: [[k, v, c] for (k, v, c) in entries]
            for stage, entries in ledger.stages.items()
        },
    }


def deterministic_zip(files: list[tuple[str, bytes, int]]) -> bytes:
    """Zip entries with frozen metadata so archive bytes depend on content only."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, data, mode in files:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            info.external_attr = (mode & 0xFFFF) << 16
            info.compress_type = zipfile.ZIP_STORED
            zf.writestr(info, data)
    return buf.getvalue()


def create_app(
    ledger: Ledger | None = None,
    static_dir: str | Path | None = None,
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD,
    max_workers: int | None = None,
) -> FastAPI:
    ledger = ledger or builtin_ledger()
    if max_workers is None:
        max_workers = max(1, (os.cpu_count() or 2) - 1)
    executor = ThreadPoolExecutor(max_workers=max_workers)
    jobs = JobStore()

    app = FastAPI(title="deckforge", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "malformed_body", "detail": str(exc.errors()[:3])},
        )

    @app.get("/api/defaults")
    def get_defaults():
        return {
            "api_version": 1,
            "ledger": _ledger_as_dict(ledger),
            "fields": [f.as_dict() for f in FIELDS],
            "choices": {
                "forcefields": sorted(FORCEFIELDS),
                "water_models": sorted(WATER_MODELS),
                "box_types": list(BOX_TYPES),
                "methods": list(workflows.ANALYSIS_METHODS),
            },
        }

    @app.post("/api/validate")
    def post_validate(body: ValidateRequest):
        try:
            spec = parse_spec_text(body.spec)
        except SpecParseError as exc:
            # parse failures are findings too: the wizard renders them inline
            return {
                "ok": False,
                "findings": [
                    {
                        "field": "spec",
                        "severity": "error",
                        "message": str(exc),
                        "suggestion": "",
                    }
                ],
            }
        return validate(spec, ledger).as_dict()

    @app.post("/api/generate")
    def post_generate(body: GenerateRequest):
        structure_bytes = body.structure_text.encode("utf-8")
        if len(structure_bytes) > max_upload_bytes:
            return JSONResponse(
                status_code=413,
                content={
                    "error": "upload_too_large",
                    "limit_bytes": max_upload_bytes,
                },
            )
        structure_name = Path(body.structure_name).name
        if not structure_name:
            return JSONResponse(
                status_code=400,
                content={"error": "bad_structure_name", "message": "empty filename"},
            )
        try:
            spec = parse_spec_text(body.spec)
        except SpecParseError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": "spec_parse", "message": str(exc)},
            )
        spec = with_structure(spec, structure_name)
        report = validate(spec, ledger)
        if not report.ok:
            return JSONResponse(
                status_code=400,
                content={"error": "invalid_spec", **report.as_dict()},
            )
        try:
            workflows.load_structure_bytes(structure_name, structure_bytes)
        except StructureError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": "bad_structure", "message": str(exc)},
            )

        resolved = resolve(spec, ledger)
        with tempfile.TemporaryDirectory(prefix="deckforge-gen-") as tmp:
            bundle = pack_bundle(resolved, structure_bytes, tmp)
            entries = [
                (bundle.setup_path.name, bundle.setup_path.read_bytes(), 0o755),
                (bundle.structure_path.name, bundle.structure_path.read_bytes(), 0o644),
            ]
            archive = deterministic_zip(entries)
            content_hash = bundle.content_hash
        job_name = resolved.source.job_name
        return Response(
            content=archive,
            media_type="application/zip",
            headers={
                "Content-Disposition": f'attachment; filename="{job_name}_bundle.zip"',
                "X-Content-Hash": content_hash,
            },
        )

    def _run_job(job_id: str, request: AnalyzeRequest, out_dir: str) -> None:
        jobs.update(job_id, state="running")

        def on_progress(fraction: float) -> None:
            jobs.update(job_id, progress=float(fraction))

        try:
            result = workflows.analyze_folder(
                request.folder,
                methods=request.methods,
                selection=request.selection,
                title=request.title,
                out_dir=out_dir,
                reference_frame=request.reference_frame,
                superpose=request.superpose,
                progress=on_progress,
            )
        except Exception as exc:  # job failures are data, not server crashes
            jobs.update(job_id, state="failed", error=str(exc), progress=1.0)
            return
        names = [Path(p).name for p in result["files"]]
        jobs.update(job_id, state="done", files=names, progress=1.0)

    @app.post("/api/analyze")
    def post_analyze(body: AnalyzeRequest):
        try:
            workflows.check_methods(body.methods)
        except ValueError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": "bad_request", "message": str(exc)},
            )
        if not Path(body.folder).is_dir():
            return JSONResponse(
                status_code=400,
                content={
                    "error": "bad_request",
                    "message": f"{body.folder} is not a directory",
                },
            )
        out_dir = tempfile.mkdtemp(prefix="deckforge-job-")
        job = jobs.create(
            {
                "folder": body.folder,
                "methods": body.methods,
                "selection": body.selection,
                "title": body.title,
            }
        )
        jobs.update(job.id, out_dir=out_dir)
        executor.submit(_run_job, job.id, body, out_dir)
        return {"id": job.id, "state": "queued"}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"error": "unknown_job"})
        return job.as_dict()

    @app.get("/api/jobs/{job_id}/files/{name}")
    def get_job_file(job_id: str, name: str):
        job = jobs.get(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"error": "unknown_job"})
        safe = Path(name).name
        if job.state != "done" or safe not in job.files:
            return JSONResponse(status_code=404, content={"error": "unknown_file"})
        path = Path(job.out_dir) / safe
        media = _MEDIA_TYPES.get(path.suffix.lower(), "application/octet-stream")
        return FileResponse(path, media_type=media)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return _PLACEHOLDER_PAGE

    return app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="deckforge-service",
        description="Serve the deck-generation and analysis API locally.",
    )
    parser.add_argument("--port", type=int, default=8642)
    parser.add_argument(
        "--bind",
        default="127.0.0.1",
        help="listen address (loopback unless you know what you are doing)",
    )
    parser.add_argument("--defaults", help="alternate defaults-ledger JSON file")
    parser.add_argument("--static", help="directory of UI assets to host at /")
    args = parser.parse_args(argv)

    import uvicorn

    ledger = load_ledger(args.defaults) if args.defaults else builtin_ledger()
    if args.bind not in ("127.0.0.1", "localhost", "::1"):
        print(
            f"warning: binding {args.bind} exposes the service beyond this machine; "
            "it has no authentication",
            flush=True,
        )
    app = create_app(ledger=ledger, static_dir=args.static)
    uvicorn.run(app, host=args.bind, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
