"""Configuration: JSON config file with REPOPULSE_* environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

ENV_PREFIX = "REPOPULSE_"

# config key -> environment variable suffix
_ENV_KEYS = {
    "store_path": "STORE",
    "workdir": "WORKDIR",
    "listen_addr": "ADDR",
    "refresh_interval": "REFRESH_INTERVAL",
    "worker_count": "WORKER_COUNT",
    "max_attempts": "MAX_ATTEMPTS",
    "backoff_base": "BACKOFF_BASE",
}


@dataclass
class CliConfig:
    store_path: str = "./repopulse-store"
    workdir: str = "./repopulse-work"
    listen_addr: str = "127.0.0.1:8000"
    refresh_interval: float = 24 * 3600.0
    worker_count: int = 0  # 0 = number of processors
    max_attempts: int = 3
    backoff_base: float = 30.0
    token_env_name: str = "REPOPULSE_TOKEN"

    def __post_init__(self) -> None:
        if self.refresh_interval <= 0:
            raise ValueError("refresh_interval must be positive")

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen_addr.rsplit(":", 1)[1])

    def token(self) -> Optional[str]:
        return os.environ.get(self.token_env_name)


def load_config(path: Optional[str] = None,
                env: Optional[dict[str, str]] = None) -> CliConfig:
    """Config file values first, then environment overrides on top."""
    env = os.environ if env is None else env
    values: dict = {}
    if path:
        values.update(json.loads(Path(path).read_text()))

    types = {f.name: f.type for f in fields(CliConfig)}
    for key, suffix in _ENV_KEYS.items():
        raw = env.get(ENV_PREFIX + suffix)
        if raw is None:
            continue
        if types[key] in ("float", float):
            values[key] = float(raw)
        elif types[key] in ("int", int):
            values[key] = int(raw)
        else:
            values[key] = raw

    known = {f.name for f in fields(CliConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return CliConfig(**values)
