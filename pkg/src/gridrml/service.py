"""HTTP facade for the mapping playground.

Stateless: every request carries its own mapping text plus either an
uploaded workbook or the id of a bundled example. The engine runs fully
sandboxed — ss:url values resolve against uploaded file names only, never
against the server filesystem.
"""

from __future__ import annotations

import base64
import binascii
import json
import os
from pathlib import Path
from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ValidationError

from . import gallery
from .engine import ExecutionOptions, memory_resolver, run_mapping_text
from .rdf import serialize_graph

MAX_BODY_BYTES = 10 * 1024 * 1024

XLSX_MEDIA_TYPE = ("application/vnd.openxmlformats-officedocument"
                   ".spreadsheetml.sheet")


class MapOptions(BaseModel):
    format: Literal["ntriples", "turtle"] = "ntriples"
    strict: bool = False
    includeBlank: bool = False
    baseIri: str = "http://example.org/"


class MapRequestJson(BaseModel):
    mappingText: str
    workbookBase64: Optional[str] = None
    workbookName: str = "workbook.xlsx"
    exampleId: Optional[str] = None
    options: MapOptions = MapOptions()


class DiagnosticModel(BaseModel):
    severity: str
    code: str
    message: str
    triplesMap: Optional[str] = None
    cell: Optional[str] = None


class MapStats(BaseModel):
    cellsVisited: int
    cellsMatched: int
    triplesEmitted: int
    elapsedMillis: int


class MapResponse(BaseModel):
    rdf: str
    diagnostics: list[DiagnosticModel]
    stats: MapStats


class ExampleModel(BaseModel):
    id: str
    title: str
    description: str
    mappingText: str
    workbookUrl: str


def _bad_request(message: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": message})


def _parse_bool(raw: object) -> bool:
    return isinstance(raw, str) and raw.lower() in ("1", "true", "on", "yes")


def _form_str(form, key: str) -> Optional[str]:
    value = form.get(key)
    return value if isinstance(value, str) and value else None


def _run(mapping_text: str, files: dict[str, bytes], options: MapOptions) -> MapResponse:
    result = run_mapping_text(
        mapping_text,
        ExecutionOptions(
            base_iri=options.baseIri,
            strict=options.strict,
            include_blank_cells=options.includeBlank,
        ),
        resolver=memory_resolver(files),
    )
    return MapResponse(
        rdf=serialize_graph(result.graph, options.format),
        diagnostics=[DiagnosticModel(
            severity=d.severity, code=d.code, message=d.message,
            triplesMap=d.triples_map, cell=d.cell,
        ) for d in result.diagnostics],
        stats=MapStats(
            cellsVisited=result.stats.cells_visited,
            cellsMatched=result.stats.cells_matched,
            triplesEmitted=result.stats.triples_emitted,
            elapsedMillis=result.stats.elapsed_millis,
        ),
    )


def create_app(static_dir: Optional[Path] = None,
               max_body_bytes: int = MAX_BODY_BYTES) -> FastAPI:
    app = FastAPI(title="gridrml", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[os.environ.get("GRIDRML_CORS_ORIGIN", "*")],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def limit_body_size(request: Request, call_next):
        length = request.headers.get("content-length")
        if length is not None and length.isdigit() and int(length) > max_body_bytes:
            return JSONResponse(status_code=413,
                                content={"detail": "request body too large"})
        return await call_next(request)

    @app.get("/healthz")
    async def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.get("/api/examples", response_model=list[ExampleModel])
    async def list_examples() -> list[ExampleModel]:
        return [ExampleModel(
            id=example.id,
            title=example.title,
            description=example.description,
            mappingText=example.mapping_text,
            workbookUrl=f"/api/examples/{example.id}/workbook",
        ) for example in gallery.EXAMPLES]

    @app.get("/api/examples/{example_id}/workbook")
    async def example_workbook(example_id: str) -> Response:
        if not gallery.has_example(example_id):
            return _bad_request(f"unknown example {example_id!r}")
        return Response(content=gallery.example_workbook_bytes(example_id),
                        media_type=XLSX_MEDIA_TYPE)

    @app.post("/api/map", response_model=MapResponse)
    async def map_endpoint(request: Request):
        content_type = request.headers.get("content-type", "")
        if (content_type.startswith("multipart/form-data")
                or content_type.startswith("application/x-www-form-urlencoded")):
            return await _map_form(request)
        return await _map_json(request)

    async def _map_json(request: Request):
        try:
            payload = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _bad_request("request body is not valid JSON")
        try:
            req = MapRequestJson.model_validate(payload)
        except ValidationError as exc:
            return _bad_request(f"invalid request: {exc.errors()[0]['msg']}")
        if (req.workbookBase64 is None) == (req.exampleId is None):
            return _bad_request("provide exactly one of workbookBase64 / exampleId")
        if req.exampleId is not None:
            if not gallery.has_example(req.exampleId):
                return _bad_request(f"unknown example {req.exampleId!r}")
            example = gallery.get_example(req.exampleId)
            files = {example.workbook_name: gallery.example_workbook_bytes(example.id)}
        else:
            try:
                data = base64.b64decode(req.workbookBase64, validate=True)
            except (binascii.Error, ValueError):
                return _bad_request("workbookBase64 is not valid base64")
            if len(data) > max_body_bytes:
                return JSONResponse(status_code=413,
                                    content={"detail": "workbook too large"})
            files = {req.workbookName: data}
        return _run(req.mappingText, files, req.options)

    async def _map_form(request: Request):
        form = await request.form()
        mapping_text = _form_str(form, "mapping")
        if mapping_text is None:
            return _bad_request("missing 'mapping' field")
        upload = form.get("workbook")
        example_id = _form_str(form, "exampleId")
        if (upload is None) == (example_id is None):
            return _bad_request("provide exactly one of workbook / exampleId")
        if example_id is not None:
            if not gallery.has_example(example_id):
                return _bad_request(f"unknown example {example_id!r}")
            example = gallery.get_example(example_id)
            files = {example.workbook_name: gallery.example_workbook_bytes(example.id)}
        else:
            if isinstance(upload, str):
                return _bad_request("'workbook' must be a file upload")
            data = await upload.read()
            if len(data) > max_body_bytes:
                return JSONResponse(status_code=413,
                                    content={"detail": "workbook too large"})
            files = {upload.filename or "workbook.xlsx": data}
        options = MapOptions(
            format="turtle" if _form_str(form, "format") == "turtle" else "ntriples",
            strict=_parse_bool(form.get("strict")),
            includeBlank=_parse_bool(form.get("includeBlank")),
            baseIri=_form_str(form, "baseIri") or "http://example.org/",
        )
        return _run(mapping_text, files, options)

    if static_dir is not None and static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="playground")
    return app


def _default_static_dir() -> Optional[Path]:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


app = create_app(static_dir=_default_static_dir())
