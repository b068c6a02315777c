"""
Resource limits and retry behaviour.

This module provides:
- A pair-reduction budget for Groebner basis computations
- The seed retry policy used when a branch is not zero-dimensional
"""

import logging
import os
import threading
from typing import Iterator, Optional, Tuple

from .exceptions import ResourceLimit

logger = logging.getLogger("parametric_lmi.limits")

DEFAULT_MAX_PAIRS = 100_000
MAX_PAIRS_ENV = "PARAMETRIC_LMI_MAX_PAIRS"

SATURATION_OFF = "off"
SATURATION_RABINOWITSCH = "rabinowitsch"


def budget_from_env(default: int = DEFAULT_MAX_PAIRS) -> int:
    """Read the pair budget override, falling back to ``default``."""
    raw = os.environ.get(MAX_PAIRS_ENV)
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {MAX_PAIRS_ENV}={raw!r}")
        return default
    if value <= 0:
        logger.warning(f"Ignoring non-positive {MAX_PAIRS_ENV}={value}")
        return default
    return value


class ReductionBudget:
    """Bucket of pair reductions, drained by one Groebner basis computation."""

    def __init__(self, capacity: Optional[int] = None):
        """
        Initialize the budget.

        Args:
            capacity: Number of S-pair reductions allowed (env/default when None)
        """
        self._capacity = capacity if capacity is not None else budget_from_env()
        self._used = 0
        self._lock = threading.Lock()

    @property
    def capacity(self) -> int:
        return self._capacity

    @property
    def used(self) -> int:
        return self._used

    def acquire(self, tokens: int = 1) -> Tuple[bool, int]:
        """
        Try to take ``tokens`` reductions from the bucket.

        Returns:
            Tuple[bool, int]: (allowed, remaining)
        """
        with self._lock:
            if self._used + tokens > self._capacity:
                return False, self._capacity - self._used
            self._used += tokens
            return True, self._capacity - self._used

    def consume(self, tokens: int = 1) -> None:
        """Take reductions or raise ResourceLimit."""
        allowed, _ = self.acquire(tokens)
        if not allowed:
            logger.error(f"Pair budget exhausted: used={self._used}, capacity={self._capacity}")
            raise ResourceLimit(self._used, self._capacity)

    def get_remaining(self) -> int:
        with self._lock:
            return self._capacity - self._used


class RetryPolicy:
    """Seed retries with saturation escalation; no sleeping between attempts."""

    def __init__(self, max_retries: int = 5, base_seed: int = 0, escalate_from: int = 1):
        """
        Initialize retry policy.

        Args:
            max_retries: Total number of attempts (seeds) allowed
            base_seed: Seed of the first attempt; attempt k uses base_seed + k
            escalate_from: First attempt index that saturates failed branches
        """
        if max_retries < 1:
            raise ValueError("max_retries must be at least 1")
        self._max_retries = max_retries
        self._base_seed = base_seed
        self._escalate_from = escalate_from
        logger.debug(f"Retry policy: max_retries={max_retries}, base_seed={base_seed}")

    @property
    def max_retries(self) -> int:
        return self._max_retries

    def seed_for(self, attempt: int) -> int:
        return self._base_seed + attempt

    def saturation_for(self, attempt: int, failed_before: bool) -> str:
        """Saturation mode for a branch on ``attempt`` (0-indexed)."""
        if failed_before and attempt >= self._escalate_from:
            return SATURATION_RABINOWITSCH
        return SATURATION_OFF

    def attempts(self) -> Iterator[int]:
        return iter(range(self._max_retries))
