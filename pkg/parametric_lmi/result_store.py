"""
Caches of classification results.

A classification run is a pure function of the instance and of the solver
settings that shape its output, so a stored ResultFile can replace a
recomputation. Results live in memory, in one JSON file, or in Redis
(shared between machines; needs the ``redis`` extra).
"""

import hashlib
import json
import logging
import os
from abc import ABC, abstractmethod
from typing import Callable, Dict, Optional, Tuple

from .config import STORE_FILE, STORE_MEMORY, STORE_REDIS, SolverConfig, StoreSettings
from .exceptions import ParseError
from .schemas import ResultFile, load_result

logger = logging.getLogger("parametric_lmi.result_store")

# SolverConfig fields with no influence on the output document
_OUTPUT_NEUTRAL = frozenset({"jobs"})


def result_key(digest: str, config: SolverConfig) -> str:
    """Instance digest plus a fingerprint of every output-shaping setting."""
    settings = {k: v for k, v in config.to_dict().items() if k not in _OUTPUT_NEUTRAL}
    fingerprint = hashlib.sha256(json.dumps(settings, sort_keys=True).encode()).hexdigest()[:16]
    return f"{digest}:{fingerprint}"


class ResultStore(ABC):
    """Keyed ResultFile documents; backends only move JSON text."""

    @abstractmethod
    def _read(self, key: str) -> Optional[str]:
        pass

    @abstractmethod
    def _write(self, key: str, text: str) -> None:
        pass

    def get(self, key: str) -> Optional[ResultFile]:
        text = self._read(key)
        if text is None:
            return None
        try:
            return load_result(text)
        except ParseError as e:
            logger.warning(f"Ignoring unreadable cached result {key}: {e.message}")
            return None

    def put(self, key: str, document: ResultFile) -> None:
        self._write(key, document.dumps())

    def fetch_or_compute(self, key: str, compute: Callable[[], ResultFile]) -> Tuple[ResultFile, bool]:
        """
        Return the cached document for ``key``, or compute and store it.

        Returns:
            Tuple[ResultFile, bool]: (document, whether it came from the cache)
        """
        cached = self.get(key)
        if cached is not None:
            logger.info(f"Reusing cached result {key}")
            return cached, True
        document = compute()
        self.put(key, document)
        return document, False


class MemoryResultStore(ResultStore):
    def __init__(self):
        self._texts: Dict[str, str] = {}

    def _read(self, key: str) -> Optional[str]:
        return self._texts.get(key)

    def _write(self, key: str, text: str) -> None:
        self._texts[key] = text


class FileResultStore(ResultStore):
    """One JSON object mapping keys to documents; the directory is created on demand."""

    def __init__(self, file_path: str):
        self.file_path = file_path
        self._documents: Dict[str, object] = {}
        os.makedirs(os.path.dirname(os.path.abspath(file_path)), exist_ok=True)
        if os.path.exists(file_path):
            try:
                with open(file_path, "r") as f:
                    self._documents = json.load(f)
            except json.JSONDecodeError:
                logger.warning(f"Could not load results from {file_path}, starting with an empty store")
        logger.info(f"Result cache at {file_path} holds {len(self._documents)} documents")

    def _read(self, key: str) -> Optional[str]:
        document = self._documents.get(key)
        return None if document is None else json.dumps(document)

    def _write(self, key: str, text: str) -> None:
        self._documents[key] = json.loads(text)
        partial = f"{self.file_path}.tmp"
        with open(partial, "w") as f:
            json.dump(self._documents, f, indent=2, sort_keys=True)
        os.replace(partial, self.file_path)


class RedisResultStore(ResultStore):
    """Redis-backed store; connection problems degrade to cache misses."""

    def __init__(self, url: str, prefix: str = "parametric_lmi:"):
        try:
            import redis
        except ImportError:
            raise ImportError(
                "Redis package is required for the Redis result store. "
                "Install it with: pip install parametric-lmi[redis]"
            )
        self.prefix = prefix
        self.client = redis.from_url(url, decode_responses=True)
        logger.info(f"Result cache in Redis at {url}")

    def _read(self, key: str) -> Optional[str]:
        try:
            return self.client.get(f"{self.prefix}{key}")
        except Exception as e:
            logger.error(f"Redis read error: {e}")
            return None

    def _write(self, key: str, text: str) -> None:
        try:
            self.client.set(f"{self.prefix}{key}", text)
        except Exception as e:
            logger.error(f"Redis write error: {e}")


def create_store(settings: StoreSettings) -> Optional[ResultStore]:
    """Backend for ``settings``; None when caching is off."""
    if settings.kind is None:
        return None
    if settings.kind == STORE_MEMORY:
        return MemoryResultStore()
    if settings.kind == STORE_FILE:
        return FileResultStore(settings.path)
    if settings.kind == STORE_REDIS:
        return RedisResultStore(settings.redis_url, settings.prefix)
    raise ValueError(f"Unknown store kind: {settings.kind}")
