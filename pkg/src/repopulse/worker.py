"""Batch worker: drains pending projects and refreshes tracked ones.

Long-running analyses stay off the request path. Each job ingests a
snapshot, computes week and month series over the project's full event
history, puts both series to the store, and only then transitions the
project to tracked, so the API tier never observes a half-published
project. Failures retry with exponential backoff before landing in the
failed state with a reason.
"""

from __future__ import annotations

import datetime as dt
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import RepoPulseError
from .ingest import IngestSnapshot, RepoSource, snapshot
from .metrics import Granularity, TimeWindow, UTC, build_series
from .store import ProjectRecord, Store

logger = logging.getLogger(__name__)

DEFAULT_BACKOFF_BASE = 30.0
DEFAULT_BACKOFF_FACTOR = 4.0
DEFAULT_MAX_ATTEMPTS = 3
DEFAULT_REFRESH_INTERVAL = 24 * 3600.0

SnapshotFetcher = Callable[[ProjectRecord], IngestSnapshot]


@dataclass(frozen=True)
class Job:
    project_id: str
    kind: str  # initial_analysis | refresh
    attempt: int
    enqueued_at: dt.datetime


def github_snapshot_fetcher(
    workdir: str,
    auth: Optional[str] = None,
    transport=None,
) -> SnapshotFetcher:
    """Default fetcher: clone from GitHub and pull issues from its API."""

    def fetch(record: ProjectRecord) -> IngestSnapshot:
        source = RepoSource(
            clone_url=f"https://github.com/{record.owner}/{record.name}.git",
            default_branch=record.branch,
            host_kind="github",
        )
        return snapshot(
            source,
            workdir=f"{workdir}/{record.project_id}",
            auth=auth,
            transport=transport,
        )

    return fetch


def analysis_range(snap: IngestSnapshot) -> TimeWindow:
    """Full-history range: earliest of (first commit, first issue) up to
    and including the snapshot instant."""
    firsts = [
        d.timestamp for h in snap.histories for d in h.deltas[:1]
    ] + [i.opened_at for i in snap.issues]
    start = min(firsts) if firsts else snap.fetched_at - dt.timedelta(days=1)
    end = snap.fetched_at + dt.timedelta(milliseconds=1)
    if start >= end:
        start = end - dt.timedelta(days=1)
    return TimeWindow(start, end)


class Worker:
    """Executes analysis jobs against a store.

    `fetch_snapshot` is injectable so tests (and offline deployments)
    can supply fixture-backed ingestion. `sleep` and `clock` are
    injectable for simulated-time tests.
    """

    def __init__(
        self,
        store: Store,
        fetch_snapshot: SnapshotFetcher,
        *,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
        backoff_base: float = DEFAULT_BACKOFF_BASE,
        backoff_factor: float = DEFAULT_BACKOFF_FACTOR,
        refresh_interval: float = DEFAULT_REFRESH_INTERVAL,
        worker_count: Optional[int] = None,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.store = store
        self.fetch_snapshot = fetch_snapshot
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self.refresh_interval = refresh_interval
        self.worker_count = worker_count or (os_cpu_count())
        self.sleep = sleep
        self.clock = clock
        self._last_refresh: dict[str, float] = {}

    # -- queueing ------------------------------------------------------------

    def enqueue_pending(self) -> list[Job]:
        """One initial_analysis job per pending project without a live job."""
        jobs = []
        for record in self.store.list_projects(state="pending"):
            if self.store.get_job(record.project_id) is not None:
                continue
            job = Job(
                project_id=record.project_id,
                kind="initial_analysis",
                attempt=1,
                enqueued_at=dt.datetime.now(UTC),
            )
            self.store.put_job(record.project_id, _job_doc(job))
            jobs.append(job)
        return jobs

    def due_refreshes(self) -> list[Job]:
        """At most one refresh job per tracked project per interval."""
        now = self.clock()
        jobs = []
        for record in self.store.list_projects(state="tracked"):
            last = self._last_refresh.get(record.project_id)
            if last is not None and now - last < self.refresh_interval:
                continue
            if self.store.get_job(record.project_id) is not None:
                continue
            job = Job(
                project_id=record.project_id,
                kind="refresh",
                attempt=1,
                enqueued_at=dt.datetime.now(UTC),
            )
            self.store.put_job(record.project_id, _job_doc(job))
            self._last_refresh[record.project_id] = now
            jobs.append(job)
        return jobs

    # -- execution -------------------------------------------------------------

    def run_job(self, job: Job) -> str:
        """Run one job to completion: returns 'published' or 'failed'."""
        record = self.store.get_project(job.project_id)
        attempt = job.attempt
        last_error: Optional[Exception] = None
        while attempt <= self.max_attempts:
            try:
                self._analyze_and_publish(record)
                self.store.delete_job(job.project_id)
                return "published"
            except RepoPulseError as exc:
                last_error = exc
                retryable = getattr(exc, "retryable", False)
                logger.warning(
                    "job %s attempt %d failed: %s", job.project_id, attempt, exc
                )
                if not retryable or attempt >= self.max_attempts:
                    break
                delay = self.backoff_base * self.backoff_factor ** (attempt - 1)
                self.sleep(delay)
                attempt += 1
                self.store.put_job(
                    job.project_id,
                    _job_doc(Job(job.project_id, job.kind, attempt,
                                 job.enqueued_at)),
                )
        if record.state == "pending":
            self.store.transition(
                record.project_id, "failed", failure_reason=str(last_error)
            )
        self.store.delete_job(job.project_id)
        return "failed"

    def _analyze_and_publish(self, record: ProjectRecord) -> None:
        snap = self.fetch_snapshot(record)
        time_range = analysis_range(snap)
        for granularity in (Granularity.WEEK, Granularity.MONTH):
            series = build_series(
                snap.histories, snap.issues, time_range, granularity
            )
            self.store.put_series(record.project_id, granularity, series)
        # both series are in place before the state flips to tracked
        self.store.transition(
            record.project_id, "tracked", last_analyzed_at=snap.fetched_at
        )

    def run_once(self) -> dict[str, str]:
        """Enqueue pending + due refreshes, run them on the pool."""
        jobs = self.enqueue_pending() + self.due_refreshes()
        outcomes: dict[str, str] = {}
        if not jobs:
            return outcomes
        with ThreadPoolExecutor(max_workers=self.worker_count) as pool:
            for job, outcome in zip(jobs, pool.map(self.run_job, jobs)):
                outcomes[job.project_id] = outcome
        return outcomes

    def recover(self) -> None:
        """Clear job liveness left behind by a crash.

        Nothing is mid-run at startup, so any persisted job doc is
        stale; dropping them lets enqueue_pending pick the projects up
        again and drive each one to tracked or failed.
        """
        for doc in self.store.list_jobs():
            self.store.delete_job(doc["project_id"])

    def run_forever(self, poll_interval: float = 5.0) -> None:
        self.recover()
        while True:
            self.run_once()
            self.sleep(poll_interval)


def _job_doc(job: Job) -> dict:
    return {
        "project_id": job.project_id,
        "kind": job.kind,
        "attempt": job.attempt,
        "enqueued_at": job.enqueued_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def os_cpu_count() -> int:
    import os

    return os.cpu_count() or 1
