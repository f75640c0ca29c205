"""HTTP surface: /api/v1 JSON endpoints over the shared AppState."""

from __future__ import annotations

from datetime import datetime
from typing import Optional

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from .. import errors
from ..annotate import HumanAnnotation
from ..cohort import ClinicalEvent, EligibilityRule, evaluate_cohort, load_events_csv
from ..documents import format_instant, parse_instant
from ..nerl.bundle import mentions_to_json
from .state import AppState, ServiceConfig, dump_json_bytes

_NOT_FOUND = (errors.UnknownFlow, errors.UnknownProject, errors.UnknownBundle,
              errors.UnknownDocument)
_CONFLICT = (errors.TrainingBusy, errors.FlowBusy)


def _error_response(exc: errors.ClintextError) -> JSONResponse:
    if isinstance(exc, _NOT_FOUND):
        status = 404
    elif isinstance(exc, _CONFLICT):
        status = 409
    else:
        status = 400
    body = {"code": exc.code, "message": str(exc)}
    if isinstance(exc, errors.QuerySyntaxError):
        body["position"] = exc.position
    return JSONResponse(status_code=status, content=body)


def _json(payload: dict, status: int = 200) -> Response:
    return Response(content=dump_json_bytes(payload), status_code=status,
                    media_type="application/json")


def create_app(config: ServiceConfig, state: Optional[AppState] = None) -> FastAPI:
    app = FastAPI(title="clintext", docs_url=None, redoc_url=None)
    app.state.ctx = state if state is not None else AppState(config)
    ctx = app.state.ctx

    @app.exception_handler(errors.ClintextError)
    async def clintext_error_handler(request: Request, exc: errors.ClintextError):
        return _error_response(exc)

    @app.exception_handler(404)
    async def not_found_handler(request: Request, exc):
        return JSONResponse(status_code=404,
                            content={"code": "not_found", "message": "no such endpoint"})

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        length = request.headers.get("content-length")
        if length and int(length) > ctx.config.request_size_limit:
            return JSONResponse(status_code=413,
                                content={"code": "too_large", "message": "request body too large"})
        return await call_next(request)

    # --- analysis ----------------------------------------------------------

    @app.post("/api/v1/analyze")
    async def analyze(request: Request):
        body = await request.json()
        return _json(ctx.analyze_payload(body["text"], body.get("bundle_id")))

    @app.post("/api/v1/deid")
    async def deid(request: Request):
        body = await request.json()
        return _json(ctx.deid_payload(body["text"]))

    @app.get("/api/v1/search")
    async def search(q: str, size: int = 10,
                     from_: int = Query(0, alias="from"),
                     agg_field: Optional[str] = None, agg_date: Optional[str] = None):
        return _json(ctx.search_payload(q, size=size, offset=from_,
                                        agg_field=agg_field, agg_date=agg_date))

    # --- flows -------------------------------------------------------------

    @app.post("/api/v1/flows")
    async def register_flow(request: Request):
        body = await request.json()
        flow_id = ctx.flows.register_flow_dict(body)
        return _json({"flow_id": flow_id}, status=201)

    @app.post("/api/v1/flows/{flow_id}/run")
    async def run_flow(flow_id: str):
        report = ctx.flows.run_flow(flow_id)
        ctx.reindex()
        return _json(report.to_dict())

    @app.get("/api/v1/flows/{flow_id}/report")
    async def flow_report(flow_id: str):
        report = ctx.flows.last_report(flow_id)
        if report is None:
            return _json({"flow_id": flow_id, "report": None})
        return _json(report.to_dict())

    @app.get("/api/v1/flows")
    async def list_flows():
        out = []
        for flow_id in sorted(ctx.flows._flows):
            report = ctx.flows._reports.get(flow_id)
            out.append({"flow_id": flow_id,
                        "report": report.to_dict() if report else None})
        return _json({"flows": out})

    # --- annotation projects ----------------------------------------------

    @app.post("/api/v1/projects")
    async def create_project(request: Request):
        body = await request.json()
        gold = {
            doc_id: [(m["start"], m["end"], m["cui"]) for m in mentions]
            for doc_id, mentions in body.get("validation_gold", {}).items()
        }
        project_id = ctx.annotation.create_project(
            name=body["name"], doc_ids=body["doc_ids"], bundle_id=body["bundle_id"],
            tasks=body.get("tasks"), batch_size=body.get("batch_size", 10),
            seed=body.get("seed", 0),
            validation_fraction=body.get("validation_fraction", 0.2),
            validation_gold=gold,
        )
        return _json({"project_id": project_id}, status=201)

    @app.get("/api/v1/projects/{project_id}/next")
    async def next_document(project_id: str, annotator: str = ""):
        doc, mentions = ctx.annotation.next_document(project_id, annotator)
        bundle = ctx.annotation.projects[project_id].current_bundle
        return _json({
            "doc": doc.to_dict(),
            "pre_annotations": mentions_to_json(mentions, bundle.cdb)["entities"],
        })

    @app.post("/api/v1/projects/{project_id}/annotations")
    async def submit_annotations(project_id: str, request: Request):
        body = await request.json()
        annotations = [
            HumanAnnotation(
                project_id=project_id, doc_id=body["doc_id"],
                start=a["start"], end=a["end"], cui=a["cui"], correct=a["correct"],
                meta_labels=a.get("meta_labels", {}),
                annotator=a.get("annotator", ""),
            )
            for a in body["annotations"]
        ]
        accepted = ctx.annotation.submit_annotations(project_id, body["doc_id"], annotations)
        return _json({"accepted": accepted})

    @app.get("/api/v1/projects/{project_id}/metrics")
    async def project_metrics(project_id: str):
        snapshots = ctx.annotation.metrics_timeline(project_id)
        return _json({"snapshots": [s.to_dict() for s in snapshots]})

    # --- cohort ------------------------------------------------------------

    @app.post("/api/v1/cohort/evaluate")
    async def cohort_evaluate(request: Request):
        body = await request.json()
        if "events_ref" in body:
            events = load_events_csv(body["events_ref"])
        else:
            events = [
                ClinicalEvent(e["patient_id"], e["cui"], parse_instant(e["timestamp"]),
                              e.get("doc_id", ""))
                for e in body["events"]
            ]
        rule = EligibilityRule.from_dict(body["rule"])
        results = evaluate_cohort(events, rule)
        return _json({"results": [
            {"patient_id": pid, "eligible": res.eligible,
             "index_date": format_instant(res.index_date) if res.index_date else None}
            for pid, res in results.items()
        ]})

    return app
