"""Pure computation kernel for longitudinal repository metrics.

Everything in this module is a deterministic function over immutable
values: no I/O, no clock access, no persistence. Durations are computed
in integer milliseconds and only converted to days/KLOC at the edges, so
identical inputs always produce bit-identical outputs.
"""

from __future__ import annotations

import datetime as dt
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .errors import (
    CorruptHistoryError,
    IncompleteSeriesError,
    InvalidWindowError,
    NoMeasurableCodeError,
    NoRecordedEffortError,
)

UTC = dt.timezone.utc

_EPOCH = dt.datetime(1970, 1, 1, tzinfo=UTC)
_MS = dt.timedelta(milliseconds=1)

MS_PER_DAY = 86_400_000


def to_ms(instant: dt.datetime) -> int:
    """Milliseconds since the Unix epoch, exact integer arithmetic."""
    return (instant - _EPOCH) // _MS


def from_ms(ms: int) -> dt.datetime:
    return _EPOCH + ms * _MS


class Granularity(str, Enum):
    WEEK = "week"
    MONTH = "month"


@dataclass(frozen=True)
class TimeWindow:
    """Half-open interval [start, end) of UTC instants."""

    start: dt.datetime
    end: dt.datetime

    def __post_init__(self) -> None:
        if self.start.tzinfo is None or self.end.tzinfo is None:
            raise InvalidWindowError("window instants must be timezone-aware")
        if not self.start < self.end:
            raise InvalidWindowError(
                f"empty or inverted window: {self.start} .. {self.end}"
            )

    @property
    def start_ms(self) -> int:
        return to_ms(self.start)

    @property
    def end_ms(self) -> int:
        return to_ms(self.end)


@dataclass(frozen=True)
class CommitDelta:
    """One commit's signed LOC change to one file."""

    file_path: str
    timestamp: dt.datetime
    delta_loc: int


@dataclass(frozen=True)
class FileHistory:
    """Time-ordered commit deltas for a single file.

    Deltas must be sorted non-decreasing by timestamp (ties keep
    ingestion order) and every prefix sum of delta_loc must be >= 0:
    a file can never have negative size.
    """

    file_path: str
    deltas: tuple[CommitDelta, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "deltas", tuple(self.deltas))
        prev = None
        size = 0
        for d in self.deltas:
            t = to_ms(d.timestamp)
            if prev is not None and t < prev:
                raise CorruptHistoryError(
                    f"{self.file_path}: deltas not sorted by timestamp"
                )
            prev = t
            size += d.delta_loc
            if size < 0:
                raise CorruptHistoryError(
                    f"{self.file_path}: cumulative size drops below zero "
                    f"at {d.timestamp}"
                )


@dataclass(frozen=True)
class IssueRecord:
    """An issue's open timestamp and optional close timestamp."""

    issue_id: str
    opened_at: dt.datetime
    closed_at: Optional[dt.datetime] = None

    def __post_init__(self) -> None:
        if self.closed_at is not None and self.closed_at < self.opened_at:
            raise ValueError(
                f"issue {self.issue_id}: closed before opened"
            )


@dataclass(frozen=True)
class EffortRecord:
    """Person-hours assigned to the project during a window."""

    window: TimeWindow
    person_hours: float
    estimated: bool = False

    def __post_init__(self) -> None:
        if self.person_hours < 0:
            raise ValueError("person_hours must be non-negative")


@dataclass(frozen=True)
class WindowSample:
    """One granularity window's computed metric bundle.

    density is None when the window holds no measurable code (kloc == 0).
    """

    window: TimeWindow
    kloc: float
    issues_open: int
    issues_closed: int
    open_cumulative: int
    closed_cumulative: int
    density: Optional[float]
    spoilage: float


@dataclass(frozen=True)
class MetricSeries:
    """Contiguous, time-ordered WindowSamples at one granularity."""

    granularity: Granularity
    samples: tuple[WindowSample, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        for a, b in zip(self.samples, self.samples[1:]):
            if a.window.end != b.window.start:
                raise InvalidWindowError(
                    f"series windows not contiguous at {a.window.end}"
                )


# ---------------------------------------------------------------------------
# window partitioning

def _align(instant: dt.datetime, granularity: Granularity) -> dt.datetime:
    instant = instant.astimezone(UTC)
    day = dt.datetime(instant.year, instant.month, instant.day, tzinfo=UTC)
    if granularity is Granularity.WEEK:
        return day - dt.timedelta(days=day.isoweekday() - 1)
    return day.replace(day=1)


def _advance(start: dt.datetime, granularity: Granularity) -> dt.datetime:
    if granularity is Granularity.WEEK:
        return start + dt.timedelta(days=7)
    if start.month == 12:
        return start.replace(year=start.year + 1, month=1)
    return start.replace(month=start.month + 1)


def partition_range(
    time_range: TimeWindow, granularity: Granularity
) -> list[TimeWindow]:
    """Split a range into aligned, contiguous, half-open windows.

    Weeks align to ISO Monday 00:00 UTC, months to the first of the
    month 00:00 UTC. The first window contains time_range.start and the
    last contains the instant just before time_range.end.
    """
    granularity = Granularity(granularity)
    windows = []
    cursor = _align(time_range.start, granularity)
    while cursor < time_range.end:
        nxt = _advance(cursor, granularity)
        windows.append(TimeWindow(cursor, nxt))
        cursor = nxt
    return windows


def _check_contiguous(windows: Sequence[TimeWindow]) -> None:
    if not windows:
        raise InvalidWindowError("no windows given")
    for a, b in zip(windows, windows[1:]):
        if a.end != b.start:
            raise InvalidWindowError(f"windows not contiguous at {a.end}")


# ---------------------------------------------------------------------------
# size

def file_size_series(
    history: FileHistory, windows: Sequence[TimeWindow]
) -> list[tuple[TimeWindow, float]]:
    """Time-weighted mean size (LOC) of one file per window.

    The file size is a step function over the commit history; each
    window's value is the integral of that step function across the
    window divided by the window length. A window with no commits
    returns the size carried in from earlier commits; a file with no
    commits before or in a window contributes 0 there.
    """
    _check_contiguous(windows)
    times = [to_ms(d.timestamp) for d in history.deltas]
    if any(a > b for a, b in zip(times, times[1:])):
        raise CorruptHistoryError(
            f"{history.file_path}: deltas not sorted by timestamp"
        )
    sizes: list[int] = []
    acc = 0
    for d in history.deltas:
        acc += d.delta_loc
        if acc < 0:
            raise CorruptHistoryError(
                f"{history.file_path}: cumulative size drops below zero"
            )
        sizes.append(acc)

    out: list[tuple[TimeWindow, float]] = []
    idx = 0
    carry = 0
    n = len(times)
    for w in windows:
        t0, t1 = w.start_ms, w.end_ms
        while idx < n and times[idx] < t0:
            carry = sizes[idx]
            idx += 1
        # integrate the step function across [t0, t1) in exact int math
        integral = 0
        cur = carry
        prev = t0
        while idx < n and times[idx] < t1:
            integral += cur * (times[idx] - prev)
            prev = times[idx]
            cur = sizes[idx]
            idx += 1
        integral += cur * (t1 - prev)
        carry = cur
        out.append((w, integral / (t1 - t0)))
    return out


def project_size_series(
    histories: Sequence[FileHistory], windows: Sequence[TimeWindow]
) -> list[tuple[TimeWindow, float]]:
    """Project size in KLOC per window: sum of file sizes / 1000."""
    _check_contiguous(windows)
    seen: set[str] = set()
    for h in histories:
        if h.file_path in seen:
            raise CorruptHistoryError(f"duplicate file history: {h.file_path}")
        seen.add(h.file_path)

    totals = [0.0] * len(windows)
    for h in histories:
        try:
            per_file = file_size_series(h, windows)
        except CorruptHistoryError as exc:
            raise CorruptHistoryError(f"{h.file_path}: {exc}") from exc
        for i, (_, loc) in enumerate(per_file):
            totals[i] += loc
    return [(w, total / 1000.0) for w, total in zip(windows, totals)]


# ---------------------------------------------------------------------------
# issues

@dataclass(frozen=True)
class IssueWindowCounts:
    opened: int
    closed: int
    open_cumulative: int
    closed_cumulative: int


def issue_counts(
    issues: Sequence[IssueRecord], windows: Sequence[TimeWindow]
) -> list[IssueWindowCounts]:
    """Per-window opened/closed counts plus cumulative open/closed state.

    open_cumulative counts issues opened before the window end and not
    yet closed at the window end; closed_cumulative counts issues closed
    strictly before the window end. The recurrence
    open_cum[i] = open_cum[i-1] + opened[i] - closed[i] holds by
    construction for contiguous windows.
    """
    opened_ms = sorted(to_ms(i.opened_at) for i in issues)
    closed_ms = sorted(
        to_ms(i.closed_at) for i in issues if i.closed_at is not None
    )
    out = []
    for w in windows:
        s, e = w.start_ms, w.end_ms
        opened = bisect_left(opened_ms, e) - bisect_left(opened_ms, s)
        closed = bisect_left(closed_ms, e) - bisect_left(closed_ms, s)
        opened_before = bisect_left(opened_ms, e)
        closed_before = bisect_left(closed_ms, e)
        out.append(
            IssueWindowCounts(
                opened=opened,
                closed=closed,
                open_cumulative=opened_before - closed_before,
                closed_cumulative=closed_before,
            )
        )
    return out


def density(open_cumulative: int, kloc: float) -> float:
    """Open issues per KLOC. Undefined when there is no measurable code."""
    if kloc <= 0:
        raise NoMeasurableCodeError("no measurable code in window")
    return open_cumulative / kloc


def open_issue_age_total_ms(
    issues: Sequence[IssueRecord], at: dt.datetime
) -> tuple[int, int]:
    """(total age in ms, count) over issues open at `at`, exact integers."""
    at_ms = to_ms(at)
    total = 0
    count = 0
    for issue in issues:
        if to_ms(issue.opened_at) > at_ms:
            continue
        if issue.closed_at is not None and to_ms(issue.closed_at) <= at_ms:
            continue
        total += at_ms - to_ms(issue.opened_at)
        count += 1
    return total, count


def spoilage(issues: Sequence[IssueRecord], at: dt.datetime) -> float:
    """Mean age in days of issues open at `at`; 0.0 when none are open."""
    total, count = open_issue_age_total_ms(issues, at)
    if count == 0:
        return 0.0
    return total / count / MS_PER_DAY


def spoilage_series(
    issues: Sequence[IssueRecord], windows: Sequence[TimeWindow]
) -> list[float]:
    """Spoilage evaluated at each window's end instant."""
    _check_contiguous(windows)
    return [spoilage(issues, w.end) for w in windows]


# ---------------------------------------------------------------------------
# productivity / effort

def productivity(size_kloc: float, effort: EffortRecord) -> float:
    """LOC produced per person-hour over the effort's window."""
    if effort.person_hours <= 0:
        raise NoRecordedEffortError("no recorded effort")
    return size_kloc * 1000.0 / effort.person_hours


def estimate_effort(
    commit_events: Sequence[tuple[dt.datetime, str]],
    window: TimeWindow,
    hours_per_day: float = 8.0,
) -> EffortRecord:
    """Estimate effort as distinct committer-days in window * hours/day.

    A crude stand-in for real effort accounting; the result is flagged
    estimated so callers can label it.
    """
    days = {
        (author, ts.astimezone(UTC).date())
        for ts, author in commit_events
        if window.start <= ts < window.end
    }
    return EffortRecord(
        window=window, person_hours=len(days) * hours_per_day, estimated=True
    )


# ---------------------------------------------------------------------------
# downsampling

def downsample(
    daily: Sequence[tuple[dt.date, float]], d0: dt.date, d1: dt.date
) -> float:
    """Average of daily values over calendar dates d0..d1 inclusive."""
    if d1 < d0:
        raise InvalidWindowError(f"inverted date range {d0}..{d1}")
    by_date = dict(daily)
    total = 0.0
    span = (d1 - d0).days + 1
    for i in range(span):
        date = d0 + dt.timedelta(days=i)
        if date not in by_date:
            raise IncompleteSeriesError(f"missing daily value for {date}")
        total += by_date[date]
    return total / span


# ---------------------------------------------------------------------------
# assembly

def build_series(
    histories: Sequence[FileHistory],
    issues: Sequence[IssueRecord],
    time_range: TimeWindow,
    granularity: Granularity,
) -> MetricSeries:
    """Partition the range and compute every metric for every window."""
    granularity = Granularity(granularity)
    windows = partition_range(time_range, granularity)
    klocs = [v for _, v in project_size_series(histories, windows)]
    counts = issue_counts(issues, windows)
    spoilages = spoilage_series(issues, windows)

    samples = []
    for w, kloc, c, spl in zip(windows, klocs, counts, spoilages):
        samples.append(
            WindowSample(
                window=w,
                kloc=kloc,
                issues_open=c.opened,
                issues_closed=c.closed,
                open_cumulative=c.open_cumulative,
                closed_cumulative=c.closed_cumulative,
                density=c.open_cumulative / kloc if kloc > 0 else None,
                spoilage=spl,
            )
        )
    return MetricSeries(granularity=granularity, samples=tuple(samples))
