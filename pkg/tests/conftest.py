import datetime as dt
import json
import os
import subprocess
from pathlib import Path

import pytest

from repopulse.metrics import IssueRecord, UTC

GIT_ENV = {
    "GIT_AUTHOR_NAME": "fixture",
    "GIT_AUTHOR_EMAIL": "fixture@example.invalid",
    "GIT_COMMITTER_NAME": "fixture",
    "GIT_COMMITTER_EMAIL": "fixture@example.invalid",
}


def git(repo: Path, *args: str, date: dt.datetime | None = None) -> str:
    env = {**os.environ, **GIT_ENV}
    if date is not None:
        stamp = date.strftime("%Y-%m-%dT%H:%M:%S+00:00")
        env["GIT_AUTHOR_DATE"] = stamp
        env["GIT_COMMITTER_DATE"] = stamp
    return subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True, text=True, check=True, env=env,
    ).stdout


def init_repo(path: Path, branch: str = "master") -> Path:
    path.mkdir(parents=True, exist_ok=True)
    subprocess.run(
        ["git", "init", "-q", "-b", branch, str(path)],
        check=True, capture_output=True,
    )
    return path


def commit_files(repo: Path, files: dict[str, str | None],
                 date: dt.datetime, message: str = "change") -> None:
    """Write (or delete, on None) files and commit at the given date."""
    for rel, content in files.items():
        target = repo / rel
        if content is None:
            git(repo, "rm", "-q", rel)
        else:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content)
            git(repo, "add", rel)
    git(repo, "commit", "-q", "-m", message, "--allow-empty", date=date)


def lines(n: int, tag: str = "x") -> str:
    return "".join(f"{tag} line {i}\n" for i in range(n))


@pytest.fixture
def fixture_repo(tmp_path):
    """A 30-commit repo with adds, edits and deletions across 4 files."""
    repo = init_repo(tmp_path / "fixture-repo")
    base = dt.datetime(2021, 3, 1, 12, 0, tzinfo=UTC)
    sizes = {"a.py": 0, "b.py": 0, "lib/c.py": 0, "d.py": 0}
    plan = [
        ("a.py", 50), ("b.py", 30), ("a.py", 65), ("lib/c.py", 120),
        ("b.py", 12), ("a.py", 40), ("d.py", 200), ("lib/c.py", 140),
        ("a.py", 90), ("b.py", 45), ("d.py", 180), ("lib/c.py", 100),
        ("a.py", 88), ("b.py", 60), ("d.py", None), ("lib/c.py", 155),
        ("a.py", 120), ("b.py", 33), ("d.py", 75), ("lib/c.py", 130),
        ("a.py", 110), ("b.py", 41), ("d.py", 90), ("lib/c.py", 160),
        ("a.py", 140), ("b.py", 52), ("d.py", 60), ("lib/c.py", 175),
        ("a.py", 133), ("b.py", 70),
    ]
    for i, (path, size) in enumerate(plan):
        when = base + dt.timedelta(days=i, hours=i % 5)
        if size is None:
            commit_files(repo, {path: None}, when, f"delete {path}")
            sizes[path] = 0
        else:
            commit_files(repo, {path: lines(size, path)}, when,
                         f"set {path} to {size}")
            sizes[path] = size
    return repo


def go_shaped_issues() -> list[IssueRecord]:
    """Synthetic stream matching the mass-closure case-study aggregates:
    cumulative open 9161 -> 9195 -> 1347 over the three weeks starting
    2014-11-24, with 7968 issues closed in the third week."""
    records = []
    opened_prior = 9131
    start = dt.datetime(2009, 10, 1, tzinfo=UTC)
    closure = dt.datetime(2014, 12, 9, 10, 0, tzinfo=UTC)
    for i in range(opened_prior):
        opened = start + dt.timedelta(minutes=i * 280)
        closed = closure if i < 7968 else None
        records.append(IssueRecord(str(i), opened, closed))
    assert records[-1].opened_at < dt.datetime(2014, 11, 24, tzinfo=UTC)
    counter = opened_prior
    for day_offset, count in ((0, 30), (7, 34), (14, 120)):
        week_start = dt.datetime(2014, 11, 24, tzinfo=UTC) \
            + dt.timedelta(days=day_offset)
        for i in range(count):
            records.append(
                IssueRecord(
                    str(counter),
                    week_start + dt.timedelta(hours=(i * 167) % 166, minutes=i),
                )
            )
            counter += 1
    return records


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    reports = [
        r
        for key in ("passed", "failed")
        for r in terminalreporter.stats.get(key, [])
        if "test_acceptance" in r.nodeid and r.when == "call"
    ]
    if not reports:
        return
    terminalreporter.write_line("acceptance criteria:")
    for r in sorted(reports, key=lambda r: r.nodeid):
        verdict = "PASS" if r.passed else "FAIL"
        terminalreporter.write_line(
            f"  {r.nodeid.split('::')[-1]}: {verdict}"
        )


def write_issues_json(path: Path, issues: list[IssueRecord]) -> Path:
    docs = []
    for i in issues:
        doc = {"id": i.issue_id,
               "opened_at": i.opened_at.strftime("%Y-%m-%dT%H:%M:%SZ")}
        if i.closed_at is not None:
            doc["closed_at"] = i.closed_at.strftime("%Y-%m-%dT%H:%M:%SZ")
        docs.append(doc)
    path.write_text(json.dumps(docs))
    return path
