"""Operator command line: offline analysis, store inspection, worker and
API service entry points."""

from __future__ import annotations

import datetime as dt

import click

from . import wire
from .config import CliConfig, load_config
from .errors import (
    AuthenticationError,
    CloneError,
    RateLimitError,
    RepoPulseError,
    StoreError,
)
from .ingest import IngestSnapshot, extract_commit_deltas, head_commit, load_issues_file
from .metrics import Granularity, UTC, build_series
from .store import Store
from .worker import Worker, analysis_range, github_snapshot_fetcher

EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_STORE = 3
EXIT_NETWORK = 4


def _fail(exc: Exception) -> "click.exceptions.Exit":
    code = EXIT_ERROR
    if isinstance(exc, (CloneError, RateLimitError, AuthenticationError)):
        code = EXIT_NETWORK
    elif isinstance(exc, StoreError):
        code = EXIT_STORE
    elif isinstance(exc, (ValueError, OSError)) and not isinstance(
        exc, RepoPulseError
    ):
        code = EXIT_CONFIG
    click.echo(f"error: {exc}", err=True)
    return click.exceptions.Exit(code)


def _config(path: str | None) -> CliConfig:
    try:
        return load_config(path)
    except (ValueError, OSError) as exc:
        raise _fail(exc)


@click.group()
def main():
    """repopulse: longitudinal repository metrics."""


@main.command()
@click.option("--repo", required=True, type=click.Path(exists=True),
              help="Path to a local git clone.")
@click.option("--issues", "issues_path", required=True,
              type=click.Path(exists=True),
              help="issues.json dump: array of {id, opened_at, closed_at?}.")
@click.option("--group-by", "group_by", default="week",
              type=click.Choice(["week", "month"]))
@click.option("--metric", default="all",
              type=click.Choice(["kloc", "density", "spoilage", "all"]))
@click.option("--format", "fmt", default="json",
              type=click.Choice(["json", "csv"]))
@click.option("--branch", default="master")
def analyze(repo, issues_path, group_by, metric, fmt, branch):
    """Analyze a local clone plus an offline issues dump; print the series.

    Emits exactly the records the API would serve for the same inputs.
    """
    try:
        histories = extract_commit_deltas(repo, branch)
        issues = load_issues_file(issues_path)
        snap = IngestSnapshot(
            histories=tuple(histories),
            issues=tuple(issues),
            fetched_at=dt.datetime.now(UTC).replace(microsecond=0),
            head_commit=head_commit(repo, branch),
        )
        series = build_series(
            snap.histories, snap.issues, analysis_range(snap),
            Granularity(group_by),
        )
    except RepoPulseError as exc:
        raise _fail(exc)

    if fmt == "csv":
        click.echo(
            wire.series_to_csv(series, None if metric == "all" else metric),
            nl=False,
        )
    elif metric == "all":
        click.echo(wire.dumps([wire.sample_to_wire(s) for s in series.samples]))
    else:
        click.echo(wire.metric_response(series, metric))


@main.command()
@click.argument("target")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True))
def track(target, config_path):
    """Submit OWNER/NAME#BRANCH for tracking; prints the pending record."""
    cfg = _config(config_path)
    if "/" not in target:
        raise _fail(ValueError(f"expected OWNER/NAME[#BRANCH], got {target!r}"))
    repo_part, _, branch = target.partition("#")
    owner, _, name = repo_part.partition("/")
    try:
        record = Store(cfg.store_path).submit_request(
            owner, name, branch or "master"
        )
    except RepoPulseError as exc:
        raise _fail(exc)
    click.echo(wire.dumps(record.to_doc()))


@main.command()
@click.option("--state", default=None,
              type=click.Choice(["pending", "tracked", "failed"]))
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True))
def projects(state, config_path):
    """List project records, optionally filtered by state."""
    cfg = _config(config_path)
    try:
        records = Store(cfg.store_path).list_projects(state=state)
    except RepoPulseError as exc:
        raise _fail(exc)
    for record in records:
        click.echo(wire.dumps(record.to_doc()))


@main.command()
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True))
def serve(config_path):
    """Serve the REST API over the configured store."""
    import uvicorn

    from .api import create_app

    cfg = _config(config_path)
    app = create_app(Store(cfg.store_path))
    uvicorn.run(app, host=cfg.host, port=cfg.port)


@main.command()
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True))
@click.option("--once", is_flag=True,
              help="Drain the queue once instead of looping.")
def work(config_path, once):
    """Run the batch worker against the configured store."""
    cfg = _config(config_path)
    store = Store(cfg.store_path)
    w = Worker(
        store,
        github_snapshot_fetcher(cfg.workdir, auth=cfg.token()),
        max_attempts=cfg.max_attempts,
        backoff_base=cfg.backoff_base,
        refresh_interval=cfg.refresh_interval,
        worker_count=cfg.worker_count or None,
    )
    try:
        if once:
            outcomes = w.run_once()
            for project_id, outcome in outcomes.items():
                click.echo(f"{project_id}: {outcome}")
        else:
            w.run_forever()
    except RepoPulseError as exc:
        raise _fail(exc)


if __name__ == "__main__":
    main()
