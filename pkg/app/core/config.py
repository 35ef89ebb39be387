# app/core/config.py
from pydantic_settings import BaseSettings
from typing import List, Optional


class Settings(BaseSettings):
    # Logging
    LOG_LEVEL: str = "INFO"

    # Ejecución
    WORKERS: int = 1
    OUTPUT_DIR: str = "out"

    # Solver RHP
    DEFAULT_MODES: int = 128
    MAX_MODES: int = 4096
    RESOLUTION_TOL: float = 1e-10
    NEAR_CONTOUR: float = 1e-6
    NEUMANN_MAX_TERMS: int = 200
    NEUMANN_TOL: float = 1e-14
    STRUCTURE_TOL: float = 1e-8

    # Datos espectrales
    SEPARATION_FLOOR: float = 1e-8
    MAX_RESAMPLE: int = 8
    POLE_TOL: float = 1e-12

    # Precisión
    PRECISION_LADDER: List[int] = [53, 128, 256, 512]
    EXTREMALITY_TOL: float = 1e-8
    CONDITION_LIMIT: float = 1e-12

    # Verificación Painlevé: exclusión de polos y ceros de u
    SINGULAR_BOUND: float = 4.0
    SINGULAR_RADIUS: float = 0.5

    # Experimentos
    GOODSET_DELTA: float = 0.3

    # API Configuration
    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000
    API_TITLE: str = "Soliton Rogue Lab API"
    API_VERSION: str = "1.0.0"
    API_DEBUG: bool = False

    # Redis Configuration (cache de soluciones modelo)
    REDIS_URL: Optional[str] = None
    CACHE_TTL: int = 86400  # 1 día

    class Config:
        env_file = ".env"
        case_sensitive = True

    @property
    def max_precision(self) -> int:
        """Último escalón de la escalera de precisión"""
        return max(self.PRECISION_LADDER)

    @property
    def cache_backend(self) -> str:
        """Describe el backend de cache configurado"""
        if self.REDIS_URL and "redis://" in self.REDIS_URL:
            return self.REDIS_URL
        return "memory"


settings = Settings()
