"""File-backed persistence for projects, metric series, and job state.

One JSON document per project record and per (project, granularity)
series, written atomically (temp file + rename) so an interrupted put
leaves either the old or the new document, never a torn one. Documents
use the API wire-format field names, so stored series are served
without transformation.
"""

from __future__ import annotations

import datetime as dt
import json
import os
import re
import tempfile
import threading
import uuid
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Optional

from .errors import (
    IllegalTransitionError,
    UnknownProjectError,
    UnknownSeriesError,
    ValidationError,
)
from .metrics import Granularity, MetricSeries, UTC
from .wire import doc_to_series, format_instant, parse_instant, series_to_doc

_IDENT = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._\-]*$")
_BRANCH = re.compile(r"^[^\s~^:?*\[\\]+$")

STATES = ("pending", "tracked", "failed")

# legal lifecycle edges; tracked->tracked covers refresh
_EDGES = {
    ("pending", "tracked"),
    ("pending", "failed"),
    ("tracked", "tracked"),
    ("failed", "pending"),
}


@dataclass(frozen=True)
class ProjectRecord:
    project_id: str
    owner: str
    name: str
    branch: str
    state: str
    requested_at: dt.datetime
    last_analyzed_at: Optional[dt.datetime] = None
    failure_reason: Optional[str] = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "project_id": self.project_id,
            "owner": self.owner,
            "name": self.name,
            "branch": self.branch,
            "state": self.state,
            "requested_at": format_instant(self.requested_at),
            "last_analyzed_at": (
                format_instant(self.last_analyzed_at)
                if self.last_analyzed_at else None
            ),
            "failure_reason": self.failure_reason,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "ProjectRecord":
        return cls(
            project_id=doc["project_id"],
            owner=doc["owner"],
            name=doc["name"],
            branch=doc["branch"],
            state=doc["state"],
            requested_at=parse_instant(doc["requested_at"]),
            last_analyzed_at=(
                parse_instant(doc["last_analyzed_at"])
                if doc.get("last_analyzed_at") else None
            ),
            failure_reason=doc.get("failure_reason"),
        )


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


class Store:
    """Embedded document store rooted at a directory.

    Safe for concurrent readers with serialized writers (a process-wide
    lock); transitions are atomic compare-and-set on state.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._projects_dir = self.root / "projects"
        self._series_dir = self.root / "series"
        self._jobs_dir = self.root / "jobs"
        for d in (self._projects_dir, self._series_dir, self._jobs_dir):
            d.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()

    # -- projects ----------------------------------------------------------

    def submit_request(
        self,
        owner: str,
        name: str,
        branch: str,
        now: Optional[dt.datetime] = None,
    ) -> ProjectRecord:
        """Create a pending record, or return the existing non-failed one."""
        for label, value, pattern in (
            ("owner", owner, _IDENT),
            ("name", name, _IDENT),
            ("branch", branch, _BRANCH),
        ):
            if not value or not pattern.match(value):
                raise ValidationError(f"malformed {label}: {value!r}")
        with self._lock:
            existing = self.find_project(owner, name, branch)
            if existing is not None:
                return existing
            record = ProjectRecord(
                project_id=uuid.uuid4().hex,
                owner=owner,
                name=name,
                branch=branch,
                state="pending",
                requested_at=(now or dt.datetime.now(UTC)).replace(microsecond=0),
            )
            self._write_project(record)
            return record

    def get_project(self, project_id: str) -> ProjectRecord:
        path = self._projects_dir / f"{project_id}.json"
        if not path.exists():
            raise UnknownProjectError(project_id)
        return ProjectRecord.from_doc(json.loads(path.read_text()))

    def find_project(
        self, owner: str, name: str, branch: str
    ) -> Optional[ProjectRecord]:
        for rec in self.list_projects():
            if (
                rec.state != "failed"
                and (rec.owner, rec.name, rec.branch) == (owner, name, branch)
            ):
                return rec
        return None

    def find_by_name(self, name: str) -> list[ProjectRecord]:
        return [r for r in self.list_projects() if r.name == name]

    def list_projects(
        self, state: Optional[str] = None
    ) -> list[ProjectRecord]:
        records = []
        for path in self._projects_dir.glob("*.json"):
            records.append(ProjectRecord.from_doc(json.loads(path.read_text())))
        if state is not None:
            records = [r for r in records if r.state == state]
        records.sort(key=lambda r: (r.requested_at, r.project_id))
        return records

    def transition(
        self,
        project_id: str,
        new_state: str,
        *,
        last_analyzed_at: Optional[dt.datetime] = None,
        failure_reason: Optional[str] = None,
    ) -> ProjectRecord:
        """Move a project along a legal lifecycle edge, atomically."""
        if new_state not in STATES:
            raise IllegalTransitionError(f"unknown state {new_state!r}")
        with self._lock:
            record = self.get_project(project_id)
            if (record.state, new_state) not in _EDGES:
                raise IllegalTransitionError(
                    f"{record.state} -> {new_state} is not a legal edge"
                )
            if new_state == "tracked" and last_analyzed_at is None:
                raise IllegalTransitionError(
                    "tracked requires last_analyzed_at"
                )
            if new_state == "failed" and not failure_reason:
                raise IllegalTransitionError("failed requires failure_reason")
            updated = replace(
                record,
                state=new_state,
                last_analyzed_at=(
                    last_analyzed_at if new_state == "tracked"
                    else record.last_analyzed_at
                ),
                failure_reason=(
                    failure_reason if new_state == "failed" else None
                ),
            )
            self._write_project(updated)
            return updated

    def _write_project(self, record: ProjectRecord) -> None:
        path = self._projects_dir / f"{record.project_id}.json"
        _atomic_write(path, json.dumps(record.to_doc(), indent=2))

    # -- series ------------------------------------------------------------

    def _series_path(self, project_id: str, granularity: Granularity) -> Path:
        return self._series_dir / f"{project_id}__{Granularity(granularity).value}.json"

    def put_series(
        self, project_id: str, granularity: Granularity, series: MetricSeries
    ) -> None:
        """Replace the stored series wholesale (series are recomputed,
        never patched)."""
        with self._lock:
            path = self._series_path(project_id, granularity)
            _atomic_write(path, json.dumps(series_to_doc(series)))

    def get_series(
        self, project_id: str, granularity: Granularity
    ) -> MetricSeries:
        path = self._series_path(project_id, granularity)
        if not path.exists():
            raise UnknownSeriesError(f"{project_id}/{Granularity(granularity).value}")
        return doc_to_series(json.loads(path.read_text()))

    def has_series(self, project_id: str, granularity: Granularity) -> bool:
        return self._series_path(project_id, granularity).exists()

    # -- worker job state ----------------------------------------------------

    def put_job(self, project_id: str, doc: dict[str, Any]) -> None:
        with self._lock:
            _atomic_write(
                self._jobs_dir / f"{project_id}.json", json.dumps(doc)
            )

    def get_job(self, project_id: str) -> Optional[dict[str, Any]]:
        path = self._jobs_dir / f"{project_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def list_jobs(self) -> list[dict[str, Any]]:
        return [
            json.loads(p.read_text())
            for p in sorted(self._jobs_dir.glob("*.json"))
        ]

    def delete_job(self, project_id: str) -> None:
        path = self._jobs_dir / f"{project_id}.json"
        with self._lock:
            if path.exists():
                path.unlink()
