# app/core/config_validator.py
"""
Validador de configuración del laboratorio
"""
import sys
from .config import settings, Settings


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def validate_config(config: Settings = settings) -> bool:
    """Valida la configuración y muestra errores"""
    errors = []
    warnings = []

    # Validaciones del solver
    if not _is_power_of_two(config.DEFAULT_MODES) or config.DEFAULT_MODES < 16:
        errors.append("DEFAULT_MODES debe ser potencia de dos >= 16")

    if not _is_power_of_two(config.MAX_MODES) or config.MAX_MODES < config.DEFAULT_MODES:
        errors.append("MAX_MODES debe ser potencia de dos >= DEFAULT_MODES")

    if not (0.0 < config.RESOLUTION_TOL < 1e-2):
        errors.append("RESOLUTION_TOL debe estar en (0, 1e-2)")

    # Escalera de precisión
    ladder = list(config.PRECISION_LADDER)
    if not ladder or ladder[0] < 53:
        errors.append("PRECISION_LADDER debe empezar en >= 53 bits")
    if ladder != sorted(set(ladder)):
        errors.append("PRECISION_LADDER debe ser estrictamente creciente")

    # Conjuntos buenos
    if not (0.0 < config.CONDITION_LIMIT < 1e-6):
        errors.append("CONDITION_LIMIT debe estar en (0, 1e-6)")

    if config.SINGULAR_BOUND <= 1.0 or config.SINGULAR_RADIUS <= 0.0:
        errors.append("SINGULAR_BOUND debe ser > 1 y SINGULAR_RADIUS > 0")

    if not (0.25 < config.GOODSET_DELTA < 0.5):
        errors.append("GOODSET_DELTA debe cumplir 1/4 < δ < 1/2")

    if config.WORKERS < 1:
        errors.append("WORKERS debe ser >= 1")

    # Validaciones de puertos
    if not (1 <= config.API_PORT <= 65535):
        errors.append("API_PORT debe estar entre 1 y 65535")

    if config.SEPARATION_FLOOR > 1e-4:
        warnings.append("SEPARATION_FLOOR muy grande, se rechazarán muestras válidas")

    if not config.REDIS_URL:
        warnings.append("REDIS_URL no configurado, cache en memoria")

    # Mostrar resultados
    if errors:
        print("❌ Errores de configuración:")
        for error in errors:
            print(f"  - {error}")
        return False

    if warnings:
        print("⚠️  Advertencias de configuración:")
        for warning in warnings:
            print(f"  - {warning}")

    print("✅ Configuración válida")
    return True


def print_config_summary(config: Settings = settings):
    """Muestra resumen de configuración"""
    print("\n📋 Resumen de configuración:")
    print(f"  🧮 Modos: {config.DEFAULT_MODES} (máx {config.MAX_MODES})")
    print(f"  🎯 Precisión: {config.PRECISION_LADDER} bits")
    print(f"  👷 Workers: {config.WORKERS}")
    print(f"  📂 Salida: {config.OUTPUT_DIR}")
    print(f"  📡 API: {config.API_HOST}:{config.API_PORT}")
    print(f"  💾 Cache: {config.cache_backend}")


if __name__ == "__main__":
    if validate_config():
        print_config_summary()
    else:
        sys.exit(1)
