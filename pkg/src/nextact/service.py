"""HTTP JSON API over loaded event logs and taxonomies.

All state is loaded once at startup from a JSON config file and never
mutated while serving, so identical requests return identical bodies.
Endpoints live under /v1; an optional static directory (the browser UI)
can be mounted at the root.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .errors import NextactError
from .eventlog import END_ACTIVITY, EventLog, TraceQuery, load_log_json, stats
from .predictor import MODES, predict
from .similarity import VARIANTS, config_for_variant
from .taxonomy import Taxonomy, load_icd10cm_order, load_icd10pcs_order, load_taxonomy_tsv

log = logging.getLogger(__name__)

DEFAULTS = {"n": 5, "variant": "T", "mode": "score_sum", "explain_top": 3}


class ConfigError(NextactError):
    """The service config file is missing something it needs."""


@dataclass
class SessionState:
    """Everything the service reads: immutable after startup."""

    taxonomies: dict[str, Taxonomy]
    logs: dict[str, EventLog]
    defaults: dict = field(default_factory=lambda: dict(DEFAULTS))
    frontend_dist: str | None = None

    def __post_init__(self):
        merged = dict(DEFAULTS)
        merged.update(self.defaults)
        self.defaults = merged
        for eventlog in self.logs.values():
            for tax_id in (eventlog.diagnosis_taxonomy, eventlog.procedure_taxonomy):
                if tax_id not in self.taxonomies:
                    raise ConfigError(
                        f"log {eventlog.id!r} needs taxonomy {tax_id!r}, which is not loaded"
                    )


_TAXONOMY_LOADERS = {
    "icd10cm": load_icd10cm_order,
    "icd10pcs": load_icd10pcs_order,
    "tsv": load_taxonomy_tsv,
}


def load_state(config_path: str | Path) -> SessionState:
    """Read the startup config: taxonomy files, log files and defaults.

    Format (JSON): {"taxonomies": {id: {"format": "icd10cm"|"icd10pcs"|"tsv",
    "path": ..., ...loader options}}, "logs": [path, ...],
    "defaults": {...}, "frontend_dist": path?}.
    """
    config_path = Path(config_path)
    try:
        config = json.loads(config_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc

    taxonomies: dict[str, Taxonomy] = {}
    for tax_id, entry in config.get("taxonomies", {}).items():
        fmt = entry.get("format")
        loader = _TAXONOMY_LOADERS.get(fmt)
        if loader is None:
            raise ConfigError(f"taxonomy {tax_id!r}: unknown format {fmt!r}")
        options = {k: v for k, v in entry.items() if k not in ("format", "path")}
        path = config_path.parent / entry["path"]
        taxonomies[tax_id] = loader(path, tax_id=tax_id, **options)

    logs: dict[str, EventLog] = {}
    for entry in config.get("logs", []):
        eventlog = load_log_json(config_path.parent / entry)
        logs[eventlog.id] = eventlog

    frontend = config.get("frontend_dist")
    if frontend is not None:
        frontend = str(config_path.parent / frontend)
    return SessionState(taxonomies, logs, config.get("defaults", {}), frontend)


class DiagnosisIn(BaseModel):
    code: str = Field(min_length=1)
    seq: int = Field(ge=1)


class PredictIn(BaseModel):
    log_id: str
    diagnoses: list[DiagnosisIn] = Field(min_length=1)
    events: list[str] = Field(min_length=1)
    n: int | None = Field(default=None, ge=1)
    mode: str | None = None
    variant: str | None = None
    explain_top: int | None = Field(default=None, ge=0)


def _error(status: int, payload: dict) -> JSONResponse:
    return JSONResponse(status_code=status, content=payload)


def create_app(state: SessionState) -> FastAPI:
    app = FastAPI(title="nextact", version="1")

    @app.exception_handler(RequestValidationError)
    async def malformed_body(_req: Request, exc: RequestValidationError):
        return _error(400, {"error": "malformed_body", "detail": str(exc.errors()[:3])})

    @app.get("/v1/logs")
    def list_logs():
        # taxonomy ids included so clients can drive code lookups
        return [
            {
                "id": log_id,
                "n_cases": len(state.logs[log_id].cases),
                "diagnosis_taxonomy": state.logs[log_id].diagnosis_taxonomy,
                "procedure_taxonomy": state.logs[log_id].procedure_taxonomy,
            }
            for log_id in sorted(state.logs)
        ]

    @app.get("/v1/logs/{log_id}/stats")
    def log_stats(log_id: str):
        eventlog = state.logs.get(log_id)
        if eventlog is None:
            return _error(404, {"error": "unknown_log", "log_id": log_id})
        return {"id": log_id, **stats(eventlog).to_dict()}

    @app.get("/v1/taxonomy/{tax_id}/code/{code}")
    def taxonomy_code(tax_id: str, code: str):
        tax = state.taxonomies.get(tax_id)
        if tax is None:
            return _error(404, {"error": "unknown_taxonomy", "taxonomy": tax_id})
        if code not in tax:
            return _error(404, {"error": "unknown_code", "code": code})
        return {
            "code": code,
            "description": tax.description(code),
            "ancestors": list(tax.ancestors(code, include_self=False)),
            "children": list(tax.children(code)),
            "ic": tax.ic(code),
        }

    @app.post("/v1/predict")
    def predict_next(body: PredictIn):
        eventlog = state.logs.get(body.log_id)
        if eventlog is None:
            return _error(404, {"error": "unknown_log", "log_id": body.log_id})
        variant = body.variant or state.defaults["variant"]
        mode = body.mode or state.defaults["mode"]
        if variant not in VARIANTS:
            return _error(400, {"error": "malformed_body", "detail": f"variant must be one of {VARIANTS}"})
        if mode not in MODES:
            return _error(400, {"error": "malformed_body", "detail": f"mode must be one of {MODES}"})

        diag_tax = state.taxonomies[eventlog.diagnosis_taxonomy]
        proc_tax = state.taxonomies[eventlog.procedure_taxonomy]
        for d in body.diagnoses:
            if d.code not in diag_tax:
                return _error(422, {"error": "unknown_code", "code": d.code})
        for code in body.events:
            if code == END_ACTIVITY or code not in proc_tax:
                return _error(422, {"error": "unknown_code", "code": code})

        query = TraceQuery(
            tuple((d.code, d.seq) for d in body.diagnoses), tuple(body.events)
        )
        result = predict(
            query,
            eventlog,
            diag_tax,
            proc_tax,
            n=body.n or state.defaults["n"],
            config=config_for_variant(variant),
            mode=mode,
        )
        explain_top = (
            body.explain_top if body.explain_top is not None else state.defaults["explain_top"]
        )
        payload = result.to_dict(explain_top=explain_top)
        payload["variant"] = variant
        for candidate in payload["candidates"]:
            activity = candidate["activity"]
            candidate["description"] = (
                "end of treatment" if activity == END_ACTIVITY else proc_tax.description(activity)
            )
        return payload

    if state.frontend_dist and Path(state.frontend_dist).is_dir():
        app.mount("/", StaticFiles(directory=state.frontend_dist, html=True), name="ui")

    return app


def create_app_from_config(config_path: str | Path) -> FastAPI:
    return create_app(load_state(config_path))
