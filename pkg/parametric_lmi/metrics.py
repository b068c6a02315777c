"""
Metrics and structured logging for branch pipelines.

This module provides:
- Per-branch outcome records (δ, zero-dimensionality, saturation, timing)
- A thread-safe collector aggregating them over a run
- A timing context manager
- A key=value structured logger for reproducibility records
"""

import logging
import threading
import time
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Tuple

logger = logging.getLogger("parametric_lmi.metrics")


@dataclass
class BranchMetric:
    """Outcome of one (r, ι, i) branch pipeline."""

    r: int
    iota: Tuple[int, ...]
    i: int
    delta: Optional[int] = None
    zero_dimensional: bool = False
    saturation: str = "off"
    entries: int = 0
    elapsed_ms: float = 0.0
    error: Optional[str] = None
    attempt: int = 0
    fiber_counted: bool = False

    @property
    def key(self) -> Tuple[int, Tuple[int, ...], int]:
        return (self.r, self.iota, self.i)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r": self.r,
            "iota": list(self.iota),
            "i": self.i,
            "delta": self.delta,
            "zero_dimensional": self.zero_dimensional,
            "saturation": self.saturation,
            "entries": self.entries,
            "error": self.error,
            "attempt": self.attempt,
            "fiber_counted": self.fiber_counted,
        }


@dataclass
class AggregatedMetrics:
    total_branches: int = 0
    zero_dimensional: int = 0
    failed: int = 0
    saturated: int = 0
    total_elapsed_ms: float = 0.0
    max_delta: int = 0
    errors: Dict[str, int] = field(default_factory=lambda: defaultdict(int))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total_branches": self.total_branches,
            "zero_dimensional": self.zero_dimensional,
            "failed": self.failed,
            "saturated": self.saturated,
            "total_elapsed_ms": round(self.total_elapsed_ms, 2),
            "max_delta": self.max_delta,
            "errors": dict(self.errors),
        }


class RunMetrics:
    """Collects branch metrics of one run; safe to feed from worker threads."""

    def __init__(self, enable_detailed_logging: bool = True):
        self._enable_detailed_logging = enable_detailed_logging
        self._branches: List[BranchMetric] = []
        self._global = AggregatedMetrics()
        self._phases: Dict[str, float] = defaultdict(float)
        self._lock = threading.Lock()
        self._callbacks: List[Callable[[BranchMetric], None]] = []

    def record(self, metric: BranchMetric) -> None:
        with self._lock:
            self._branches.append(metric)
            self._update(self._global, metric)

        if self._enable_detailed_logging:
            level = logging.WARNING if metric.error else logging.INFO
            logger.log(
                level,
                f"Branch r={metric.r} iota={list(metric.iota)} i={metric.i}: "
                f"delta={metric.delta} error={metric.error} ({metric.elapsed_ms:.0f}ms)"
            )

        for callback in self._callbacks:
            try:
                callback(metric)
            except Exception as e:
                logger.error(f"Metric callback error: {e}")

    def _update(self, agg: AggregatedMetrics, metric: BranchMetric) -> None:
        agg.total_branches += 1
        agg.total_elapsed_ms += metric.elapsed_ms
        if metric.delta is not None:
            agg.max_delta = max(agg.max_delta, metric.delta)
        if metric.zero_dimensional:
            agg.zero_dimensional += 1
        if metric.saturation != "off":
            agg.saturated += 1
        if metric.error:
            agg.failed += 1
            agg.errors[metric.error] += 1

    def add_phase(self, name: str, elapsed_ms: float) -> None:
        with self._lock:
            self._phases[name] += elapsed_ms

    def branches(self) -> List[BranchMetric]:
        """Recorded branches in (r, ι, i, attempt) order."""
        with self._lock:
            return sorted(self._branches, key=lambda m: (m.attempt, m.key))

    def get_global_metrics(self) -> Dict[str, Any]:
        with self._lock:
            return self._global.to_dict()

    def timings(self) -> Dict[str, float]:
        with self._lock:
            timings = {name: round(ms, 2) for name, ms in sorted(self._phases.items())}
            timings["branches_ms"] = round(self._global.total_elapsed_ms, 2)
            return timings

    def add_callback(self, callback: Callable[[BranchMetric], None]) -> None:
        self._callbacks.append(callback)


class PerformanceTimer:
    """Context manager for timing operations."""

    def __init__(self):
        self.start_time: Optional[float] = None
        self.end_time: Optional[float] = None

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.end_time = time.perf_counter()

    @property
    def elapsed_ms(self) -> float:
        if self.start_time is None:
            return 0.0
        end = self.end_time if self.end_time else time.perf_counter()
        return (end - self.start_time) * 1000


class StructuredLogger:
    """key=value | key=value records with a persistent context."""

    def __init__(
        self,
        name: str = "parametric_lmi.run",
        include_timestamp: bool = True,
        include_context: bool = True
    ):
        self._logger = logging.getLogger(name)
        self._include_timestamp = include_timestamp
        self._include_context = include_context
        self._context: Dict[str, Any] = {}

    def set_context(self, **kwargs) -> None:
        self._context.update(kwargs)

    def format_message(self, message: str, **kwargs) -> str:
        data: Dict[str, Any] = {}
        if self._include_timestamp:
            data["timestamp"] = datetime.now(timezone.utc).isoformat()
        if self._include_context:
            data.update(self._context)
        data.update(kwargs)
        data["message"] = message
        return " | ".join(f"{k}={v}" for k, v in data.items())

    def info(self, message: str, **kwargs) -> None:
        self._logger.info(self.format_message(message, **kwargs))

    def branch(self, metric: BranchMetric, **kwargs) -> None:
        level = logging.WARNING if metric.error else logging.INFO
        self._logger.log(level, self.format_message("branch", **metric.to_dict(), **kwargs))
