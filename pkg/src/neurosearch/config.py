"""Runtime configuration and bundled asset paths."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .errors import ConfigurationError


@dataclass
class RuntimeConfig:
    sampling_rate: float = 250.0
    refresh_rate: float = 60.0
    n_harmonics: int = 5
    window_s: float = 1.0
    retry_window_s: float = 1.5
    min_confidence: float = 0.02
    satisfaction_threshold: float = 0.5
    suggestion_strategy: str = "first_letter"
    viewport_size: int = 5

    @classmethod
    def load(cls, path) -> "RuntimeConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)


def asset_path(name: str) -> Path:
    """Filesystem path of a bundled asset (dictionary, query log, corpus)."""
    path = resources.files("neurosearch").joinpath("assets", name)
    return Path(str(path))


DEFAULT_PINYIN_DICT = "pinyin_dict.tsv"
DEFAULT_QUERY_LOG = "query_log.tsv"
DEFAULT_SERP_CORPUS = "serp_corpus.txt"
