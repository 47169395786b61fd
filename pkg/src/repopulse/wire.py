"""Wire-format JSON for metric series.

One serializer shared by the API service, the CLI, and the store, so a
series always renders byte-identically no matter which surface emits
it. Floats use Python's shortest round-trip repr, so full precision
(e.g. 639.6212584045984) survives serialization unchanged.
"""

from __future__ import annotations

import datetime as dt
import io
import json
from typing import Any, Optional

from .metrics import (
    UTC,
    Granularity,
    MetricSeries,
    TimeWindow,
    WindowSample,
)

METRICS = ("kloc", "density", "spoilage")

_WIRE_TIME = "%Y-%m-%dT%H:%M:%SZ"


def format_instant(instant: dt.datetime) -> str:
    return instant.astimezone(UTC).strftime(_WIRE_TIME)


def parse_instant(text: str) -> dt.datetime:
    # hand-rolled: strptime is too slow for 10k-sample series documents
    if len(text) != 20 or text[19] != "Z":
        raise ValueError(f"not an RFC 3339 UTC instant: {text!r}")
    return dt.datetime(
        int(text[0:4]), int(text[5:7]), int(text[8:10]),
        int(text[11:13]), int(text[14:16]), int(text[17:19]),
        tzinfo=UTC,
    )


def sample_to_wire(sample: WindowSample) -> dict[str, Any]:
    """Full wire form of one sample, fields in canonical order.

    end_date is a display label: the next window's start minus one
    second. Computation stays half-open; only the label overlaps.
    """
    return {
        "start_date": format_instant(sample.window.start),
        "end_date": format_instant(sample.window.end - dt.timedelta(seconds=1)),
        "kloc": sample.kloc,
        "issues": {
            "open": sample.issues_open,
            "closed": sample.issues_closed,
            "openCumulative": sample.open_cumulative,
            "closedCumulative": sample.closed_cumulative,
        },
        "density": sample.density,
        "spoilage": sample.spoilage,
    }


def wire_to_sample(doc: dict[str, Any]) -> WindowSample:
    window = TimeWindow(
        start=parse_instant(doc["start_date"]),
        end=parse_instant(doc["end_date"]) + dt.timedelta(seconds=1),
    )
    issues = doc["issues"]
    return WindowSample(
        window=window,
        kloc=doc["kloc"],
        issues_open=issues["open"],
        issues_closed=issues["closed"],
        open_cumulative=issues["openCumulative"],
        closed_cumulative=issues["closedCumulative"],
        density=doc.get("density"),
        spoilage=doc.get("spoilage", 0.0),
    )


def project_metric(wire_sample: dict[str, Any], metric: str) -> dict[str, Any]:
    """Reduce a full wire sample to one metric's route payload.

    Every metric route carries kloc and the issues object; density and
    spoilage add their own field alongside.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    out = {
        "start_date": wire_sample["start_date"],
        "end_date": wire_sample["end_date"],
        "kloc": wire_sample["kloc"],
        "issues": dict(wire_sample["issues"]),
    }
    if metric != "kloc":
        out[metric] = wire_sample[metric]
    return out


def series_to_doc(series: MetricSeries) -> dict[str, Any]:
    return {
        "granularity": series.granularity.value,
        "samples": [sample_to_wire(s) for s in series.samples],
    }


def doc_to_series(doc: dict[str, Any]) -> MetricSeries:
    return MetricSeries(
        granularity=Granularity(doc["granularity"]),
        samples=tuple(wire_to_sample(s) for s in doc["samples"]),
    )


def dumps(payload: Any) -> str:
    """Canonical JSON text: stable key order, shortest-repr floats."""
    return json.dumps(payload, ensure_ascii=False, allow_nan=False)


def metric_response(
    series: MetricSeries, metric: str
) -> str:
    """The JSON array a metric route serves for a stored series."""
    return dumps(
        [project_metric(sample_to_wire(s), metric) for s in series.samples]
    )


def series_to_csv(series: MetricSeries, metric: Optional[str] = None) -> str:
    """CSV rendering, columns fixed to wire order."""
    import csv

    rows = [
        project_metric(sample_to_wire(s), metric) if metric
        else sample_to_wire(s)
        for s in series.samples
    ]
    fields = ["start_date", "end_date", "kloc",
              "open", "closed", "openCumulative", "closedCumulative"]
    extra = [k for k in ("density", "spoilage") if rows and k in rows[0]]
    fields += extra

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        flat = {**row, **row["issues"]}
        writer.writerow([flat.get(f, "") for f in fields])
    return buf.getvalue()
