"""Extraction of commit deltas from git clones and issues from the
hosting platform's API (or offline fixtures).

Commit history is linearized along the branch's first-parent chain so
merge diffs are attributed exactly once. Renames are deliberately not
followed: git reports them as a full delete at the old path plus a full
add at the new one, which keeps every per-path size prefix non-negative
while preserving project totals.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import os
import shutil
import subprocess
import time
import urllib.parse
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import requests

from .errors import (
    AuthenticationError,
    BranchNotFoundError,
    CloneError,
    GitCommandError,
    MalformedPayloadError,
    RateLimitError,
    RepoNotFoundError,
)
from .metrics import UTC, CommitDelta, FileHistory, IssueRecord, from_ms

logger = logging.getLogger(__name__)

TOKEN_ENV = "REPOPULSE_TOKEN"

# extension allow-list for "source files"; configurable per call.
DEFAULT_SOURCE_EXTENSIONS = {
    ".c", ".cc", ".cpp", ".cs", ".css", ".cxx", ".go", ".h", ".hpp",
    ".html", ".java", ".js", ".jsx", ".kt", ".m", ".php", ".pl", ".py",
    ".r", ".rb", ".rs", ".scala", ".sh", ".sql", ".swift", ".ts", ".tsx",
}

DEFAULT_VENDOR_PREFIXES = ("vendor/", "node_modules/", "third_party/")


@dataclass(frozen=True)
class RepoSource:
    clone_url: str
    default_branch: str = "master"
    host_kind: str = "github"  # github | generic-git

    def __post_init__(self) -> None:
        if not self.default_branch:
            raise ValueError("branch name must be non-empty")
        if not self.clone_url:
            raise ValueError("clone_url must be non-empty")


@dataclass(frozen=True)
class IngestSnapshot:
    histories: tuple[FileHistory, ...]
    issues: tuple[IssueRecord, ...]
    fetched_at: dt.datetime
    head_commit: str


def _run_git(repo: str | Path, *args: str) -> str:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise GitCommandError(
            f"git {' '.join(args)} failed: {proc.stderr.strip()}"
        )
    return proc.stdout


def is_source_path(
    path: str,
    extensions: Optional[set[str]] = None,
    vendor_prefixes: Sequence[str] = DEFAULT_VENDOR_PREFIXES,
) -> bool:
    if any(path.startswith(p) or f"/{p}" in path for p in vendor_prefixes):
        return False
    if extensions is None:
        extensions = DEFAULT_SOURCE_EXTENSIONS
    return Path(path).suffix.lower() in extensions


def physical_line_count(data: bytes) -> int:
    """Physical LOC: newline-terminated lines, plus a trailing partial line.

    This is the default counter; alternative counting schemes can be
    swapped in wherever a `Callable[[bytes], int]` is accepted.
    """
    if not data:
        return 0
    return data.count(b"\n") + (0 if data.endswith(b"\n") else 1)


def extract_commit_deltas(
    repo_path: str | Path,
    branch: str,
    extensions: Optional[set[str]] = None,
) -> list[FileHistory]:
    """One FileHistory per source file ever present on the branch's
    first-parent chain, deltas in commit order.

    delta_loc per commit is lines added minus lines removed for that
    file. Binary files (numstat '-') are skipped.
    """
    repo_path = Path(repo_path)
    if not repo_path.exists():
        raise RepoNotFoundError(str(repo_path))
    if (
        subprocess.run(
            ["git", "-C", str(repo_path), "rev-parse", "--git-dir"],
            capture_output=True,
        ).returncode
        != 0
    ):
        raise RepoNotFoundError(f"not a git repository: {repo_path}")

    any_commit = subprocess.run(
        ["git", "-C", str(repo_path), "rev-list", "-n1", "--all"],
        capture_output=True,
        text=True,
    )
    if any_commit.returncode == 0 and not any_commit.stdout.strip():
        return []  # empty repository: nothing to extract

    verify = subprocess.run(
        ["git", "-C", str(repo_path), "rev-parse", "--verify", "--quiet",
         f"refs/heads/{branch}"],
        capture_output=True,
        text=True,
    )
    if verify.returncode != 0:
        # tolerate detached fixture states where the branch is a remote ref
        verify = subprocess.run(
            ["git", "-C", str(repo_path), "rev-parse", "--verify", "--quiet",
             branch],
            capture_output=True,
            text=True,
        )
        if verify.returncode != 0:
            raise BranchNotFoundError(f"{branch} not found in {repo_path}")

    out = _run_git(
        repo_path,
        "log",
        branch,
        "--first-parent",
        "--reverse",
        "--no-renames",
        "--numstat",
        "--format=@commit %H %ct",
    )

    deltas_by_path: dict[str, list[CommitDelta]] = {}
    timestamp: Optional[dt.datetime] = None
    for line in out.splitlines():
        if line.startswith("@commit "):
            _, _sha, epoch = line.split(" ")
            timestamp = from_ms(int(epoch) * 1000)
            continue
        if not line.strip() or timestamp is None:
            continue
        added_s, removed_s, path = line.split("\t", 2)
        if added_s == "-" or removed_s == "-":
            continue  # binary file
        if not is_source_path(path, extensions):
            continue
        delta = int(added_s) - int(removed_s)
        deltas_by_path.setdefault(path, []).append(
            CommitDelta(file_path=path, timestamp=timestamp, delta_loc=delta)
        )

    return [
        FileHistory(file_path=path, deltas=tuple(deltas))
        for path, deltas in sorted(deltas_by_path.items())
    ]


def head_commit(repo_path: str | Path, branch: str) -> str:
    out = subprocess.run(
        ["git", "-C", str(repo_path), "rev-parse", "--verify", "--quiet",
         branch],
        capture_output=True,
        text=True,
    )
    return out.stdout.strip() if out.returncode == 0 else ""


# ---------------------------------------------------------------------------
# issues

# transport: (url, headers) -> (status_code, headers, parsed_json_body)
Transport = Callable[[str, dict], tuple[int, dict, object]]


def _requests_transport(url: str, headers: dict) -> tuple[int, dict, object]:
    resp = requests.get(url, headers=headers, timeout=30)
    try:
        body = resp.json() if resp.content else None
    except ValueError:
        body = None
    return resp.status_code, dict(resp.headers), body


def _parse_issue(item: object) -> Optional[IssueRecord]:
    if not isinstance(item, dict) or "created_at" not in item:
        raise MalformedPayloadError(f"unexpected issue payload: {item!r:.120}")
    if "pull_request" in item:
        return None  # the platform co-mingles PRs with issues
    try:
        opened = _parse_api_time(item["created_at"])
        closed = (
            _parse_api_time(item["closed_at"]) if item.get("closed_at") else None
        )
        issue_id = str(item["id"] if "id" in item else item["number"])
    except (KeyError, ValueError) as exc:
        raise MalformedPayloadError(str(exc)) from exc
    return IssueRecord(issue_id=issue_id, opened_at=opened, closed_at=closed)


def _parse_api_time(text: str) -> dt.datetime:
    return dt.datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=UTC)


def fetch_issues(
    source: RepoSource,
    auth: Optional[str] = None,
    transport: Optional[Transport] = None,
    sleep: Callable[[float], None] = time.sleep,
    api_base: str = "https://api.github.com",
) -> list[IssueRecord]:
    """All issues (pull requests excluded) for a GitHub-hosted source,
    paginated exhaustively, honoring advertised rate-limit resets."""
    if source.host_kind != "github":
        return []
    transport = transport or _requests_transport
    owner, name = _github_owner_name(source.clone_url)

    headers = {"Accept": "application/vnd.github+json"}
    token = auth or os.environ.get(TOKEN_ENV)
    if token:
        headers["Authorization"] = f"Bearer {token}"

    records: list[IssueRecord] = []
    seen: set[str] = set()
    page = 1
    while True:
        url = (
            f"{api_base}/repos/{owner}/{name}/issues"
            f"?state=all&per_page=100&page={page}"
        )
        status, resp_headers, body = transport(url, headers)
        if status in (401,):
            raise AuthenticationError("issue API rejected credentials")
        if status == 404:
            raise RepoNotFoundError(f"{owner}/{name} not found on host")
        if status in (403, 429) and _rate_limited(resp_headers):
            reset = resp_headers.get("X-RateLimit-Reset")
            if not reset:
                raise RateLimitError("rate limit hit with no reset info")
            wait = max(0.0, float(reset) - time.time())
            logger.warning("rate limited; sleeping %.0fs until reset", wait)
            sleep(wait)
            continue
        if status != 200:
            raise MalformedPayloadError(f"unexpected status {status} for {url}")
        if not isinstance(body, list):
            raise MalformedPayloadError(f"expected JSON array, got {type(body)}")
        for item in body:
            record = _parse_issue(item)
            if record is not None and record.issue_id not in seen:
                seen.add(record.issue_id)
                records.append(record)
        if len(body) < 100:
            return records
        page += 1


def _rate_limited(headers: dict) -> bool:
    return headers.get("X-RateLimit-Remaining") == "0"


def _github_owner_name(clone_url: str) -> tuple[str, str]:
    path = urllib.parse.urlparse(clone_url).path.strip("/")
    if path.endswith(".git"):
        path = path[:-4]
    parts = path.split("/")
    if len(parts) < 2:
        raise RepoNotFoundError(f"cannot parse owner/name from {clone_url}")
    return parts[-2], parts[-1]


def load_issues_file(path: str | Path) -> list[IssueRecord]:
    """Offline fixture: issues.json array of {id, opened_at, closed_at?}."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise MalformedPayloadError(f"cannot read issues file {path}: {exc}")
    if not isinstance(raw, list):
        raise MalformedPayloadError("issues file must hold a JSON array")
    records = []
    for item in raw:
        records.append(
            IssueRecord(
                issue_id=str(item["id"]),
                opened_at=_parse_api_time(item["opened_at"]),
                closed_at=(
                    _parse_api_time(item["closed_at"])
                    if item.get("closed_at") else None
                ),
            )
        )
    return records


class FixtureTransport:
    """Replays recorded request/response pairs; no live network.

    The fixture directory holds one JSON file per exchange:
    {"url": ..., "status": ..., "headers": {...}, "body": ...}.
    """

    def __init__(self, directory: str | Path):
        self._by_url: dict[str, tuple[int, dict, object]] = {}
        for path in sorted(Path(directory).glob("*.json")):
            doc = json.loads(path.read_text())
            self._by_url[doc["url"]] = (
                doc.get("status", 200),
                doc.get("headers", {}),
                doc.get("body"),
            )

    def __call__(self, url: str, headers: dict) -> tuple[int, dict, object]:
        if url not in self._by_url:
            raise MalformedPayloadError(f"no recorded response for {url}")
        return self._by_url[url]


# ---------------------------------------------------------------------------
# snapshot

def clone_or_fetch(source: RepoSource, workdir: str | Path) -> Path:
    """Clone into workdir (atomically: temp dir, then rename) or fetch an
    existing clone up to date."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    dest = workdir / "repo"
    if dest.exists():
        try:
            _run_git(dest, "fetch", "origin")
            _run_git(dest, "checkout", "--force", source.default_branch)
            _run_git(
                dest, "reset", "--hard", f"origin/{source.default_branch}"
            )
        except GitCommandError as exc:
            raise CloneError(f"refresh failed: {exc}") from exc
        return dest

    tmp = workdir / ".repo-incoming"
    if tmp.exists():
        shutil.rmtree(tmp)
    proc = subprocess.run(
        ["git", "clone", "--branch", source.default_branch,
         source.clone_url, str(tmp)],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        shutil.rmtree(tmp, ignore_errors=True)
        raise CloneError(f"clone failed: {proc.stderr.strip()}")
    tmp.rename(dest)
    return dest


def snapshot(
    source: RepoSource,
    workdir: str | Path,
    auth: Optional[str] = None,
    issues_path: Optional[str | Path] = None,
    transport: Optional[Transport] = None,
    extensions: Optional[set[str]] = None,
    now: Optional[dt.datetime] = None,
) -> IngestSnapshot:
    """Clone/refresh, then extract commit histories and issues.

    issues_path switches issue ingestion to an offline issues.json dump;
    otherwise the hosting platform's API is queried.
    """
    repo = clone_or_fetch(source, workdir)
    histories = extract_commit_deltas(repo, source.default_branch, extensions)
    if issues_path is not None:
        issues = load_issues_file(issues_path)
    else:
        issues = fetch_issues(source, auth=auth, transport=transport)
    return IngestSnapshot(
        histories=tuple(histories),
        issues=tuple(issues),
        fetched_at=(now or dt.datetime.now(UTC)).replace(microsecond=0),
        head_commit=head_commit(repo, source.default_branch),
    )
