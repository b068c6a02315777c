"""
Solver configuration.

Values come from constructor arguments, then environment variables, then
defaults.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .limits import DEFAULT_MAX_PAIRS, SATURATION_OFF, budget_from_env

logger = logging.getLogger("parametric_lmi.config")

JOBS_ENV = "PARAMETRIC_LMI_JOBS"

OPTION_ASSERTION = "assertion"
OPTION_MINORS = "minors"
OPTION_CELLS = "cells"
OPTIONS = (OPTION_ASSERTION, OPTION_MINORS, OPTION_CELLS)


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring non-integer {JOBS_ENV}={raw!r}")
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by classify and decide."""

    seed: int = 0
    option: str = OPTION_ASSERTION
    max_retries: int = 5
    jobs: int = field(default_factory=_default_jobs)
    max_pair_reductions: int = DEFAULT_MAX_PAIRS
    saturation: str = SATURATION_OFF

    def __post_init__(self):
        if self.option not in OPTIONS:
            raise ValueError(f"Unknown output option: {self.option}")
        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    @classmethod
    def from_env(cls, **overrides: Any) -> "SolverConfig":
        """Build a config honoring PARAMETRIC_LMI_MAX_PAIRS and PARAMETRIC_LMI_JOBS."""
        values: Dict[str, Any] = {"max_pair_reductions": budget_from_env(), "jobs": _default_jobs()}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "option": self.option,
            "max_retries": self.max_retries,
            "jobs": self.jobs,
            "max_pair_reductions": self.max_pair_reductions,
            "saturation": self.saturation,
        }


STORE_ENV = "PARAMETRIC_LMI_STORE"
STORE_PATH_ENV = "PARAMETRIC_LMI_STORE_PATH"
REDIS_URL_ENV = "PARAMETRIC_LMI_REDIS_URL"

STORE_MEMORY = "memory"
STORE_FILE = "file"
STORE_REDIS = "redis"
STORE_KINDS = (STORE_MEMORY, STORE_FILE, STORE_REDIS)


@dataclass(frozen=True)
class StoreSettings:
    """Where classification results are cached; ``kind=None`` disables caching."""

    kind: Optional[str] = None
    path: Optional[str] = None
    redis_url: Optional[str] = None
    prefix: str = "parametric_lmi:"

    def __post_init__(self):
        if self.kind is not None and self.kind not in STORE_KINDS:
            raise ValueError(f"Unknown store kind: {self.kind}")
        if self.kind == STORE_FILE and not self.path:
            raise ValueError("the file store needs a path")
        if self.kind == STORE_REDIS and not self.redis_url:
            raise ValueError("the redis store needs a URL")

    @classmethod
    def from_env(cls, **overrides: Any) -> "StoreSettings":
        """
        Read PARAMETRIC_LMI_STORE, PARAMETRIC_LMI_STORE_PATH and PARAMETRIC_LMI_REDIS_URL.

        Non-None overrides win. Without a kind, a path selects the file store
        and otherwise a URL selects Redis.
        """
        values: Dict[str, Any] = {
            "kind": os.environ.get(STORE_ENV) or None,
            "path": os.environ.get(STORE_PATH_ENV) or None,
            "redis_url": os.environ.get(REDIS_URL_ENV) or None,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        if values["kind"] is None:
            if values["path"]:
                values["kind"] = STORE_FILE
            elif values["redis_url"]:
                values["kind"] = STORE_REDIS
        return cls(**values)
