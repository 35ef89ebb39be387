# app/models/solve_cache.py
import json
import logging
import threading
from typing import Any, Dict, Optional

import redis

from ..core.config import settings

logger = logging.getLogger(__name__)


class SolveCache:
    """Caché de soluciones de problemas modelo: Redis con TTL o diccionario en proceso"""

    def __init__(self, url: Optional[str] = None, ttl: Optional[int] = None):
        self.ttl = ttl or settings.CACHE_TTL
        self.redis_client = None
        self._memory: Dict[str, str] = {}
        self._lock = threading.Lock()

        url = url if url is not None else settings.REDIS_URL
        if not url:
            logger.info("ℹ️ REDIS_URL no configurado, usando caché en memoria")
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
            logger.info(f"✅ Conectado a Redis: {url}")
        except redis.RedisError as e:
            logger.warning(f"⚠️ Redis no disponible ({e}), usando caché en memoria")

    @property
    def backend(self) -> str:
        return "redis" if self.redis_client is not None else "memory"

    def _get_key(self, key: str) -> str:
        return f"rhp_solve:{key}"

    def get(self, key: str) -> Optional[Dict[str, Any]]:
        full_key = self._get_key(key)
        try:
            if self.redis_client is not None:
                data = self.redis_client.get(full_key)
            else:
                with self._lock:
                    data = self._memory.get(full_key)
            return json.loads(data) if data else None
        except json.JSONDecodeError as e:
            logger.error(f"❌ Entrada de caché corrupta {key}: {e}")
            self.delete(key)
            return None
        except redis.RedisError as e:
            logger.error(f"❌ Error Redis leyendo {key}: {e}")
            return None

    def set(self, key: str, payload: Dict[str, Any]):
        full_key = self._get_key(key)
        data = json.dumps(payload)
        try:
            if self.redis_client is not None:
                self.redis_client.setex(full_key, self.ttl, data)
            else:
                with self._lock:
                    self._memory[full_key] = data
        except redis.RedisError as e:
            logger.error(f"❌ Error Redis guardando {key}: {e}")

    def delete(self, key: str) -> bool:
        full_key = self._get_key(key)
        try:
            if self.redis_client is not None:
                return self.redis_client.delete(full_key) > 0
            with self._lock:
                return self._memory.pop(full_key, None) is not None
        except redis.RedisError as e:
            logger.error(f"❌ Error Redis borrando {key}: {e}")
            return False

    def clear(self) -> int:
        if self.redis_client is None:
            with self._lock:
                count = len(self._memory)
                self._memory.clear()
            return count
        try:
            keys = self.redis_client.keys(self._get_key("*"))
            return self.redis_client.delete(*keys) if keys else 0
        except redis.RedisError as e:
            logger.error(f"❌ Error Redis limpiando caché: {e}")
            return 0

    def health_check(self) -> Dict[str, Any]:
        """Verifica el estado del backend de caché"""
        if self.redis_client is None:
            with self._lock:
                entries = len(self._memory)
            return {"status": "healthy", "backend": "memory", "entries": entries}
        try:
            ping_result = self.redis_client.ping()
            info = self.redis_client.info()
            return {
                "status": "healthy" if ping_result else "unhealthy",
                "backend": "redis",
                "ping": ping_result,
                "used_memory_human": info.get("used_memory_human", "unknown"),
                "redis_version": info.get("redis_version", "unknown"),
            }
        except Exception as e:
            return {"status": "error", "backend": "redis", "error": str(e), "ping": False}


_default_cache: Optional[SolveCache] = None


def get_cache() -> SolveCache:
    global _default_cache
    if _default_cache is None:
        _default_cache = SolveCache()
    return _default_cache
