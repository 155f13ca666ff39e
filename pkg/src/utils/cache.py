"""
Result cache for the HTTP surface.

WAM renderings and verification reports are pure functions of the canonical
request document, so they are stored under a digest of that document. Redis is
used when ``REDIS_URL`` points at a reachable server; otherwise results live in
a bounded in-process LRU.
"""

import hashlib
import json
import logging
import os
import threading
import time
from collections import OrderedDict
from functools import wraps
from typing import Any, Callable, Optional

import redis

logger = logging.getLogger(__name__)

KEY_NAMESPACE = "nrdual"
DEFAULT_MEMORY_ENTRIES = 256


def request_digest(canonical_request: str) -> str:
    return hashlib.sha256(canonical_request.encode("utf-8")).hexdigest()[:24]


class ResultCache:
    """
    Digest-keyed store of JSON results, Redis first with an LRU fallback.

    The Redis connection is attempted on first use, not at import, so the
    CLI never touches the network. The memory store and the counters are
    shared by request threads and guarded by one lock.
    """

    def __init__(
        self, redis_url: Optional[str] = None, max_entries: Optional[int] = None
    ):
        self.redis_url = redis_url
        self.max_entries = max_entries or int(
            os.getenv("NR_CACHE_MAX_ENTRIES", DEFAULT_MEMORY_ENTRIES)
        )
        self.redis_client = None
        self.memory: "OrderedDict[str, Any]" = OrderedDict()
        self.hits = 0
        self.misses = 0
        self._connected = False
        self._lock = threading.RLock()

    @property
    def backend(self) -> str:
        return "redis" if self.redis_client is not None else "memory"

    def _connect(self):
        if self._connected:
            return
        self._connected = True
        url = self.redis_url or os.getenv("REDIS_URL")
        if not url:
            logger.info("REDIS_URL not set, caching results in memory")
            return
        try:
            client = redis.from_url(
                url,
                decode_responses=True,
                socket_connect_timeout=5,
                socket_timeout=5,
                retry_on_timeout=True,
            )
            client.ping()
            self.redis_client = client
            logger.info("Result cache connected to Redis")
        except Exception as e:
            logger.warning(f"Redis not available, caching results in memory: {e}")
            self.redis_client = None

    @staticmethod
    def key(kind: str, canonical_request: str) -> str:
        return f"{KEY_NAMESPACE}:{kind}:{request_digest(canonical_request)}"

    def peek(self, key: str) -> Optional[Any]:
        """Read without touching the hit and miss counters."""
        self._connect()
        try:
            if self.redis_client is not None:
                raw = self.redis_client.get(key)
                return json.loads(raw) if raw else None
            with self._lock:
                value = self.memory.get(key)
                if value is not None:
                    self.memory.move_to_end(key)
                return value
        except Exception as e:
            logger.error(f"Result cache read failed for {key}: {e}")
        return None

    def load(self, key: str) -> Optional[Any]:
        value = self.peek(key)
        with self._lock:
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
        return value

    def store(self, key: str, value: Any, expire: int = 3600) -> bool:
        """Keep ``value``; memory entries are evicted least-recently-used."""
        self._connect()
        try:
            if self.redis_client is not None:
                return bool(self.redis_client.setex(key, expire, json.dumps(value)))
            with self._lock:
                self.memory[key] = value
                self.memory.move_to_end(key)
                while len(self.memory) > self.max_entries:
                    evicted, _ = self.memory.popitem(last=False)
                    logger.debug(f"Evicted {evicted} from the memory cache")
            return True
        except Exception as e:
            logger.error(f"Result cache write failed for {key}: {e}")
        return False

    def discard(self, key: str) -> bool:
        self._connect()
        try:
            if self.redis_client is not None:
                return bool(self.redis_client.delete(key))
            with self._lock:
                return self.memory.pop(key, None) is not None
        except Exception as e:
            logger.error(f"Result cache delete failed for {key}: {e}")
        return False

    def clear(self) -> bool:
        """Drop every nrdual entry; other keys in the Redis database are left alone."""
        self._connect()
        try:
            if self.redis_client is not None:
                keys = list(self.redis_client.scan_iter(match=f"{KEY_NAMESPACE}:*"))
                if keys:
                    self.redis_client.delete(*keys)
            else:
                with self._lock:
                    self.memory.clear()
            return True
        except Exception as e:
            logger.error(f"Result cache clear failed: {e}")
        return False

    def info(self) -> dict:
        self._connect()
        with self._lock:
            summary = {
                "backend": self.backend,
                "hits": self.hits,
                "misses": self.misses,
            }
        try:
            if self.redis_client is not None:
                summary["used_memory"] = self.redis_client.info().get(
                    "used_memory_human", "unknown"
                )
            else:
                with self._lock:
                    summary["entries"] = len(self.memory)
                summary["max_entries"] = self.max_entries
        except Exception as e:
            logger.error(f"Result cache info failed: {e}")
            summary["error"] = str(e)
        return summary


result_cache = ResultCache()


def cached_by_request(kind: str, expire: int = 3600) -> Callable:
    """
    Cache a function of one canonical request string.

    Exceptions propagate and are never stored, so a request that failed on a
    budget is recomputed next time.
    """

    def decorator(func):
        @wraps(func)
        def wrapper(canonical_request: str):
            key = result_cache.key(kind, canonical_request)
            hit = result_cache.load(key)
            if hit is not None:
                logger.debug(f"Cache hit for {func.__name__} ({key})")
                return hit
            result = func(canonical_request)
            result_cache.store(key, result, expire)
            return result

        return wrapper

    return decorator


def cache_wam_result(expire: int = 3600):
    return cached_by_request("wam", expire)


def cache_verification(expire: int = 3600):
    return cached_by_request("verify", expire)


def cache_health_check() -> dict:
    """Round-trip a probe value through the cache."""
    probe = f"{KEY_NAMESPACE}:health"
    status = {"backend": result_cache.backend, "status": "unknown", "latency_ms": None}
    try:
        start = time.perf_counter()
        result_cache.store(probe, {"probe": True}, expire=60)
        value = result_cache.peek(probe)
        result_cache.discard(probe)
        status["backend"] = result_cache.backend
        status["latency_ms"] = round((time.perf_counter() - start) * 1000, 2)
        if value == {"probe": True}:
            status["status"] = "healthy"
        else:
            status.update({"status": "degraded", "error": "probe read back nothing"})
    except Exception as e:
        status.update({"status": "unhealthy", "error": str(e)})
    return status
