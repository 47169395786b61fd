"""RESTful read interface over stored series plus the track-request
endpoint.

Read handlers never trigger ingestion or computation: they serve stored
documents through the shared wire serializer, so identical store
contents yield byte-identical responses.
"""

from __future__ import annotations

import threading
import time
from typing import Optional

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import wire
from .errors import UnknownSeriesError, ValidationError
from .metrics import Granularity
from .store import ProjectRecord, Store

FREQUENCIES = ("week", "month")
DASH_METRICS = ("kloc", "density", "spoilage", "issues")

POST_RATE_LIMIT = 30          # requests
POST_RATE_WINDOW = 60.0       # per seconds, per client address


def _error(status: int, error: str, detail: str = "") -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": error, "detail": detail}
    )


def _json(text: str, status: int = 200) -> Response:
    return Response(content=text, status_code=status,
                    media_type="application/json")


class _PostRateLimiter:
    def __init__(self, limit: int = POST_RATE_LIMIT,
                 window: float = POST_RATE_WINDOW):
        self.limit = limit
        self.window = window
        self._hits: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    def allow(self, client: str) -> bool:
        now = time.monotonic()
        with self._lock:
            hits = [t for t in self._hits.get(client, []) if now - t < self.window]
            if len(hits) >= self.limit:
                self._hits[client] = hits
                return False
            hits.append(now)
            self._hits[client] = hits
            return True


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="repopulse", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )
    limiter = _PostRateLimiter()

    def tracked_record(owner: str, name: str, branch: str) -> Optional[ProjectRecord]:
        record = store.find_project(owner, name, branch)
        if record is None or record.state != "tracked":
            return None
        return record

    @app.get("/metrics/api/{metric}/{owner}/{name}/{branch}")
    def metric_series(
        metric: str, owner: str, name: str, branch: str,
        groupBy: str = Query(default="week"),
    ):
        if metric not in wire.METRICS:
            return _error(400, "bad_metric",
                          f"metric must be one of {list(wire.METRICS)}")
        if groupBy not in FREQUENCIES:
            return _error(400, "bad_frequency",
                          f"groupBy must be one of {list(FREQUENCIES)}")
        record = tracked_record(owner, name, branch)
        if record is None:
            return _error(404, "unknown_project",
                          f"{owner}/{name}#{branch} is not tracked")
        try:
            series = store.get_series(record.project_id, Granularity(groupBy))
        except UnknownSeriesError:
            return _error(404, "no_series", "series not yet published")
        return _json(wire.metric_response(series, metric))

    def dash_payload(frequency: str, project: str, metric: Optional[str]):
        if frequency not in FREQUENCIES:
            return _error(400, "bad_frequency",
                          f"frequency must be one of {list(FREQUENCIES)}")
        if metric is not None and metric not in DASH_METRICS:
            return _error(400, "bad_metric",
                          f"metric must be one of {list(DASH_METRICS)}")
        matches = [r for r in store.find_by_name(project) if r.state == "tracked"]
        if not matches:
            return _error(404, "unknown_project", f"{project} is not tracked")
        if len(matches) > 1:
            return JSONResponse(status_code=409, content={
                "error": "ambiguous_project",
                "detail": "name resolves to multiple tracked projects",
                "candidates": [
                    f"{r.owner}/{r.name}#{r.branch}" for r in matches
                ],
            })
        record = matches[0]
        try:
            series = store.get_series(record.project_id, Granularity(frequency))
        except UnknownSeriesError:
            return _error(404, "no_series", "series not yet published")
        samples = [wire.sample_to_wire(s) for s in series.samples]
        if metric in ("kloc", "density", "spoilage"):
            samples = [wire.project_metric(s, metric) for s in samples]
        elif metric == "issues":
            samples = [wire.project_metric(s, "kloc") for s in samples]
        envelope = {
            "project": record.name,
            "frequency": frequency,
            "series": samples,
            "available_metrics": list(DASH_METRICS),
        }
        return _json(wire.dumps(envelope))

    @app.get("/dash/public/{frequency}/{project}")
    def dash_overview(frequency: str, project: str):
        return dash_payload(frequency, project, None)

    @app.get("/dash/public/{frequency}/{metric}/{project}")
    def dash_metric(frequency: str, metric: str, project: str):
        return dash_payload(frequency, project, metric)

    def project_listing(records: list[ProjectRecord],
                        page: int, per_page: int) -> Response:
        page = max(page, 1)
        per_page = max(min(per_page, 100), 1)
        lo = (page - 1) * per_page
        payload = {
            "page": page,
            "per_page": per_page,
            "total": len(records),
            "projects": [r.to_doc() for r in records[lo:lo + per_page]],
        }
        return _json(wire.dumps(payload))

    @app.get("/api/projects")
    def list_projects(page: int = 1, per_page: int = 20):
        return project_listing(store.list_projects(), page, per_page)

    @app.get("/projects/pending")
    def list_pending(page: int = 1, per_page: int = 20):
        return project_listing(store.list_projects(state="pending"),
                               page, per_page)

    @app.post("/other/requests/track")
    async def track(request: Request):
        client = request.client.host if request.client else "unknown"
        if not limiter.allow(client):
            return _error(429, "rate_limited", "slow down")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_body", "request body must be JSON")
        if not isinstance(body, dict) or not all(
            k in body for k in ("owner", "name", "branch")
        ):
            return _error(400, "bad_body",
                          "body must carry owner, name and branch")
        existing = store.find_project(body["owner"], body["name"],
                                      body["branch"])
        try:
            record = store.submit_request(
                body["owner"], body["name"], body["branch"]
            )
        except ValidationError as exc:
            return _error(422, "invalid_identifiers", str(exc))
        status = 200 if existing is not None else 202
        return _json(wire.dumps(record.to_doc()), status=status)

    return app
