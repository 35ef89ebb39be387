# app/core/experiments.py
"""
Experimentos de universalidad (solitones reescalados → perfiles de Painlevé)
y sondeos Monte-Carlo de los conjuntos "buenos"
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .config import settings
from .errors import ConfigError, NumericalError, ShapeError
from .model_problems import (
    in_omega,
    in_partial_sum,
    in_uniform,
    jump_discrepancy,
    model_profile,
    rescaled_field,
    scaling_map,
)
from .soliton import check_extremality
from .spectral import realization_rng, sample_ensemble
from ..models.field import PrecisionPolicy, WaveField
from ..models.problems import ModelParams
from ..models.report import ErrorRecord, ExperimentReport, FailureRecord, GoodSetStats
from ..models.solve_cache import SolveCache
from ..models.spectral import Distribution, RandomEnsembleConfig

logger = logging.getLogger(__name__)


def l2_error(f: WaveField, g: WaveField) -> float:
    """Norma L2 discreta (pesos trapezoidales) de f − g"""
    if f.values.shape != g.values.shape or not (np.array_equal(f.x, g.x) and np.array_equal(f.t, g.t)):
        raise ShapeError(f"grids differ: {f.values.shape} vs {g.values.shape}")
    sq = np.abs(f.values - g.values) ** 2
    if f.x.size > 1:
        sq = trapezoid(sq, f.x, axis=1)
    else:
        sq = sq[:, 0]
    total = trapezoid(sq, f.t) if f.t.size > 1 else sq[0]
    return float(np.sqrt(total))


def _model_params(config: RandomEnsembleConfig, T: float) -> ModelParams:
    if config.case == "PIII":
        return ModelParams(case="PIII", T=T)
    return ModelParams(case="PV", T=T, zeta=config.zeta, mu_mean=config.mu_mean)


def _run_realization(config: RandomEnsembleConfig, index: int, X_grid: np.ndarray, T: float,
                     model: WaveField, precision: PrecisionPolicy):
    data = sample_ensemble(config, index)
    value, _, bits = check_extremality(data)
    scaling = scaling_map(config.case, config.n, config.mu_mean)
    field = rescaled_field(data, scaling, X_grid, [T], precision=precision)
    record = ErrorRecord(
        N=config.n, realization=index, seed=config.seed, l2_error=l2_error(field, model),
        peak=scaling.amplitude * value, attempt=data.meta.get("attempt", 0),
    )
    return record, np.abs(field.values[0]), bits


def _guarded(config, index, *args):
    try:
        return _run_realization(config, index, *args)
    except NumericalError as e:
        logger.warning(f"⚠️ Realización {index} (N={config.n}) excluida: {e}")
        return FailureRecord(N=config.n, realization=index, error=str(e), kind=type(e).__name__)


def run_universality(config: RandomEnsembleConfig, n_values: Sequence[int], X_grid, T: float = 0.0,
                     M: Optional[int] = None, precision: Optional[PrecisionPolicy] = None,
                     cache: Optional[SolveCache] = None, workers: Optional[int] = None) -> ExperimentReport:
    """Error L2 entre Ψ_N reescalado y el perfil modelo, por N y realización"""
    X_grid = np.asarray(X_grid, dtype=float).reshape(-1)
    precision = precision or PrecisionPolicy.auto(settings.max_precision)
    workers = workers or settings.WORKERS
    n_values = sorted(int(n) for n in n_values)
    report = ExperimentReport(
        case=config.case, n_values=n_values,
        grid={"X_min": float(X_grid[0]), "X_max": float(X_grid[-1]), "points": int(X_grid.size), "T": T},
        config=config.model_dump(mode="json"),
    )

    start = time.perf_counter()
    model = model_profile(_model_params(config, T), X_grid, M, cache)
    report.timings["model"] = time.perf_counter() - start
    report.profile["X"] = X_grid.tolist()
    report.profile["abs_psi_model"] = np.abs(model.values[0]).tolist()
    logger.info(f"🚀 Universalidad {config.case}: N={n_values}, {config.realizations} realizaciones")

    bits_used: List[int] = []
    for n in n_values:
        cfg = config.with_n(n)
        start = time.perf_counter()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda i: _guarded(cfg, i, X_grid, T, model, precision), range(cfg.realizations)
            ))
        profiles = []
        for item in results:
            if isinstance(item, FailureRecord):
                report.failures.append(item)
                continue
            record, profile, bits = item
            report.records.append(record)
            profiles.append(profile)
            bits_used.append(bits)
        report.timings[f"N={n}"] = time.perf_counter() - start
        if profiles and n == n_values[-1]:
            report.profile["abs_psi_N_mean"] = np.mean(profiles, axis=0).tolist()
        logger.info(f"✅ N={n}: error medio {report.mean_error(n):.4e}")

    report.diagnostics = {
        "model_max_residual": float(model.frame_params.get("max_residual", 0.0)),
        "modes": model.frame_params.get("modes_used"),
        "max_extremality_bits": max(bits_used) if bits_used else None,
        "failures": len(report.failures),
    }
    return report


def convergence_table(report: ExperimentReport) -> List[Dict[str, Any]]:
    """
    Filas (N, error medio, tasa). La tasa va en la fila del N mayor de cada par
    consecutivo: log(e_prev/e_N)/log(N/N_prev), que con N duplicado es log₂(e_prev/e_N).
    La primera fila no tiene tasa.
    """
    rows = [{"N": n, "mean_error": report.mean_error(n), "rate": None} for n in report.n_values]
    for a, b in zip(rows, rows[1:]):
        if a["mean_error"] > 0 and b["mean_error"] > 0:
            b["rate"] = float(np.log(a["mean_error"] / b["mean_error"]) / np.log(b["N"] / a["N"]))
    return rows


def good_set_probe(n: int, delta: float, zeta: Optional[float], amplitude: Distribution, trials: int,
                   seed: int, velocity: Optional[Distribution] = None) -> GoodSetStats:
    """Frecuencia Monte-Carlo de fallo de pertenencia a Ω_δ, V_{2δ} y (PV) 𝒰_{2δ}"""
    if not 0.25 < delta < 0.5:
        raise ConfigError(f"delta must satisfy 1/4 < delta < 1/2, got {delta}")
    if zeta is not None and not 0.0 < zeta < 1.0:
        raise ConfigError(f"zeta must lie in (0, 1), got {zeta}")
    mean = amplitude.mean
    fails = np.zeros(3, dtype=int)
    for trial in range(trials):
        rng = realization_rng(seed, trial)
        mu = amplitude.sample(rng, n)
        v = velocity.sample(rng, n) if velocity is not None else np.zeros(n)
        fails[0] += not in_omega(mu, v, delta)
        fails[1] += not in_partial_sum(mu, mean, delta)
        if zeta is not None:
            fails[2] += not in_uniform(mu, mean, zeta, delta)
    stats = GoodSetStats(
        N=n, delta=delta, trials=trials, zeta=zeta,
        omega_fail=fails[0] / trials,
        partial_sum_fail=fails[1] / trials,
        uniform_fail=fails[2] / trials if zeta is not None else None,
    )
    logger.info(f"🎲 N={n} δ={delta}: Ω {stats.omega_fail:.4f}, V {stats.partial_sum_fail:.4f}, "
                f"𝒰 {stats.uniform_fail}")
    return stats


def run_jump_convergence(config: RandomEnsembleConfig, n_values: Sequence[int], X: float = 0.0,
                         T: float = 0.0, samples: int = 256) -> List[Dict[str, Any]]:
    """Discrepancia media entre el salto de N solitones reescalado y el salto modelo"""
    rows = []
    for n in sorted(n_values):
        cfg = config.with_n(n)
        values = []
        for i in range(cfg.realizations):
            try:
                data = sample_ensemble(cfg, i)
                values.append(jump_discrepancy(data, cfg.case, X, T, cfg.mu_mean, cfg.zeta, samples))
            except NumericalError as e:
                logger.warning(f"⚠️ Salto N={n} realización {i} excluido: {e}")
        values = np.array(values)
        rows.append({
            "N": n,
            "mean_discrepancy": float(values.mean()) if values.size else float("nan"),
            "std_discrepancy": float(values.std(ddof=1)) if values.size > 1 else 0.0,
            "count": int(values.size),
        })
    return rows
