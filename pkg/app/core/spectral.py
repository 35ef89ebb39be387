# app/core/spectral.py
"""
Generación, validación y conversión de datos espectrales aleatorios
"""
import logging
from typing import Optional, Sequence

import numpy as np

from .config import settings
from .errors import IllConditionedError, InvalidDataError
from ..models.spectral import RandomEnsembleConfig, SpectralData

logger = logging.getLogger(__name__)


def realization_rng(seed: int, realization: int, attempt: int = 0) -> np.random.Generator:
    """Generador contador (Philox) independiente del orden de ejecución"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, realization, attempt])))


def closest_pair(eigenvalues: np.ndarray):
    """Devuelve (distancia, i, j) del par de autovalores más cercano"""
    lam = np.asarray(eigenvalues, dtype=complex)
    if lam.size < 2:
        return np.inf, -1, -1
    dist = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(dist, np.inf)
    i, j = np.unravel_index(np.argmin(dist), dist.shape)
    return float(dist[i, j]), int(min(i, j)), int(max(i, j))


def check_separation(eigenvalues: np.ndarray, floor: Optional[float] = None):
    floor = settings.SEPARATION_FLOOR if floor is None else floor
    d, i, j = closest_pair(eigenvalues)
    if d < floor:
        raise IllConditionedError(
            f"eigenvalues {i} and {j} are {d:.3e} apart (floor {floor:.1e})",
            condition=None, pair=(i, j),
        )


def _log_dictionary_factors(lam: np.ndarray) -> np.ndarray:
    # log Π_ℓ (λ_n − conj λ_ℓ) − log Π_{ℓ≠n} (λ_n − λ_ℓ), rama principal por factor
    num = np.log(lam[:, None] - np.conj(lam)[None, :]).sum(axis=1)
    diff = lam[:, None] - lam[None, :]
    np.fill_diagonal(diff, 1.0)
    den = np.log(diff).sum(axis=1)
    return num - den


def norming_constants_from_darboux(eigenvalues: Sequence[complex], darboux_params: Sequence[complex]) -> np.ndarray:
    """c_n = (1/p_n) Π_ℓ (λ_n − conj λ_ℓ) Π_{ℓ≠n} 1/(λ_n − λ_ℓ), en espacio logarítmico"""
    lam = np.asarray(eigenvalues, dtype=complex)
    p = np.asarray(darboux_params, dtype=complex)
    if lam.size == 0:
        return np.zeros(0, dtype=complex)
    if np.any(lam.imag <= 0):
        raise InvalidDataError("eigenvalues must lie in the upper half plane")
    if np.any(p == 0):
        raise InvalidDataError("Darboux parameters must be nonzero")
    check_separation(lam)
    return np.exp(_log_dictionary_factors(lam) - np.log(p))


def darboux_from_norming(eigenvalues: Sequence[complex], norming_constants: Sequence[complex]) -> np.ndarray:
    """Inversa del diccionario: p_n a partir de c_n"""
    lam = np.asarray(eigenvalues, dtype=complex)
    c = np.asarray(norming_constants, dtype=complex)
    if lam.size == 0:
        return np.zeros(0, dtype=complex)
    if np.any(c == 0):
        bad = np.flatnonzero(c == 0).tolist()
        raise InvalidDataError(f"norming constants vanish at indices {bad}")
    if np.any(lam.imag <= 0):
        raise InvalidDataError("eigenvalues must lie in the upper half plane")
    check_separation(lam)
    return np.exp(_log_dictionary_factors(lam) - np.log(c))


def evolve_spectral_data(data: SpectralData, t: float) -> SpectralData:
    """Evolución temporal: c_n e^{2itλ²}, p_n e^{−2itλ²}"""
    if t == 0:
        return data
    phase = 2j * t * data.eigenvalues ** 2
    c = None if data.norming_constants is None else data.norming_constants * np.exp(phase)
    return data.replace(
        darboux_params=data.darboux_params * np.exp(-phase),
        norming_constants=c,
        meta={**data.meta, "t": data.meta.get("t", 0.0) + t},
    )


def build_spectral_data(eigenvalues: Sequence[complex], darboux_params: Optional[Sequence[complex]] = None,
                        drift: Optional[float] = None, meta: Optional[dict] = None) -> SpectralData:
    """Construye SpectralData completo con constantes de normalización consistentes"""
    lam = np.asarray(eigenvalues, dtype=complex)
    p = np.ones(lam.size, dtype=complex) if darboux_params is None else np.asarray(darboux_params, dtype=complex)
    return SpectralData(
        eigenvalues=lam,
        darboux_params=p,
        norming_constants=norming_constants_from_darboux(lam, p),
        drift=drift,
        meta=meta or {},
    )


def _draw(config: RandomEnsembleConfig, rng: np.random.Generator):
    mu = config.amplitude_dist.sample(rng, config.n)
    v = config.velocity_dist.sample(rng, config.n)
    lam = v + 1j * mu
    if config.case == "PV":
        lam = lam - config.zeta * np.arange(1, config.n + 1)
    return lam


def sample_ensemble(config: RandomEnsembleConfig, realization_index: int) -> SpectralData:
    """Muestra la realización indicada del ensamble (determinista dado seed e índice)"""
    if not (0 <= realization_index < config.realizations):
        raise InvalidDataError(
            f"realization_index {realization_index} outside [0, {config.realizations})"
        )

    for attempt in range(settings.MAX_RESAMPLE + 1):
        rng = realization_rng(config.seed, realization_index, attempt)
        lam = _draw(config, rng)
        d, i, j = closest_pair(lam)
        if d >= settings.SEPARATION_FLOOR:
            break
        logger.warning(f"⚠️ Colisión de autovalores ({i}, {j}) d={d:.2e}, re-muestreando (intento {attempt + 1})")
    else:
        raise IllConditionedError(
            f"eigenvalue collision persisted after {settings.MAX_RESAMPLE} resamples",
            pair=(i, j),
        )

    p = np.full(config.n, np.exp(1j * config.eta), dtype=complex)
    meta = {
        "seed": config.seed,
        "realization": realization_index,
        "attempt": attempt,
        "case": config.case,
        "amplitude": config.amplitude_dist.describe(),
        "velocity": config.velocity_dist.describe(),
    }
    return build_spectral_data(lam, p, drift=config.zeta if config.case == "PV" else None, meta=meta)
