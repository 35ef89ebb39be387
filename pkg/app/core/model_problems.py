# app/core/model_problems.py
"""
Saltos de los problemas modelo PIII / PV, salto de N solitones conjugado por
Blaschke, cambios de escala y predicados de los conjuntos "buenos"
"""
import logging
from typing import Iterable, Optional

import numpy as np

from .config import settings
from .errors import ConfigError, GeometryError, InvalidDataError, PoleError, ShapeError
from .rhp import circle_points, extract_potential, solve_adaptive, solve_collocation
from .soliton import evaluate_field
from ..models.field import PrecisionPolicy, ScalingMap, WaveField
from ..models.problems import ModelParams, ModelPoint
from ..models.rhp import JumpMatrix
from ..models.solve_cache import SolveCache, get_cache
from ..models.spectral import SpectralData

logger = logging.getLogger(__name__)

SQRT_HALF = np.sqrt(0.5)
PIII_MARGIN = (7.0 / 8.0, 9.0 / 8.0)


def log_blaschke(eigenvalues, z) -> np.ndarray:
    """Σ_n Log((z − λ_n)/(z − conj λ_n)); la exponencial es a(z) y no depende de la rama"""
    lam = np.asarray(eigenvalues, dtype=complex).reshape(-1)
    z = np.asarray(z, dtype=complex)
    if lam.size == 0:
        return np.zeros(z.shape, dtype=complex)
    flat = z.reshape(-1, 1)
    gap = np.abs(flat - np.conj(lam)[None, :])
    if np.any(gap < settings.POLE_TOL):
        i, n = np.unravel_index(np.argmin(gap), gap.shape)
        raise PoleError(f"z = {flat[i, 0]} within {settings.POLE_TOL:g} of the pole conj(λ_{n})")
    terms = np.log((flat - lam[None, :]) / (flat - np.conj(lam)[None, :]))
    return terms.sum(axis=1).reshape(z.shape)


def blaschke(eigenvalues, z):
    """a(z) = Π (z − λ_n)/(z − conj λ_n)"""
    value = np.exp(log_blaschke(eigenvalues, z))
    return complex(value) if np.ndim(value) == 0 else value


def _sandwich(log_entry: np.ndarray) -> np.ndarray:
    """(1/√2)[[1, e^{L}], [−e^{−L}, 1]]: forma e^{−iφσ₃} S e^{iφσ₃} con L = −2iφ"""
    J = np.empty(log_entry.shape + (2, 2), dtype=complex)
    J[..., 0, 0] = SQRT_HALF
    J[..., 1, 1] = SQRT_HALF
    J[..., 0, 1] = SQRT_HALF * np.exp(log_entry)
    J[..., 1, 0] = -SQRT_HALF * np.exp(-log_entry)
    return J


def common_phase(data: SpectralData) -> complex:
    if data.n == 0:
        return 1.0 + 0j
    p = data.darboux_params
    if not np.allclose(np.abs(p), 1.0, rtol=0, atol=1e-12):
        raise InvalidDataError("finite-N jump requires unit-modulus Darboux parameters")
    if not np.allclose(p, p[0], rtol=0, atol=1e-12):
        raise InvalidDataError("finite-N jump requires a common Darboux phase")
    return complex(p[0])


def nsoliton_jump(data: SpectralData, x: float, t: float, radius: float) -> JumpMatrix:
    """Salto de B en |z| = radius expresado en la variable Z = z/radius"""
    lam = data.eigenvalues
    reach = float(np.max(np.abs(lam))) / radius if data.n else 0.0
    if reach >= 1.0:
        raise GeometryError(f"eigenvalue modulus {reach * radius:.4g} not inside the circle of radius {radius:.4g}")
    log_p = np.log(common_phase(data))

    def evaluator(Z: np.ndarray) -> np.ndarray:
        z = radius * Z
        theta = z * x + z * z * t
        return _sandwich(log_blaschke(lam, z) - 2j * theta + log_p)

    return JumpMatrix(
        evaluator=evaluator,
        analyticity_margin=(reach, 2.0),
        label=f"nsoliton[N={data.n}]",
        params={"x": x, "t": t, "radius": radius, "n": data.n},
    )


def model_phase(params: ModelParams, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    base = params.X * Z + params.T * Z * Z
    if params.case == "PIII":
        return base + 2.0 / Z
    kappa = params.mu_mean / params.zeta
    return base + kappa * np.log1p(params.zeta / Z)


def piii_jump(params: ModelParams) -> JumpMatrix:
    """φ = XZ + TZ² + 2/Z"""
    if params.case != "PIII":
        raise ConfigError(f"piii_jump called with case {params.case}")
    return JumpMatrix(
        evaluator=lambda Z: _sandwich(-2j * model_phase(params, Z)),
        analyticity_margin=PIII_MARGIN,
        label="PIII",
        params=params.model_dump(),
    )


def pv_jump(params: ModelParams) -> JumpMatrix:
    """φ = XZ + TZ² + (μ/ζ)·Log(1 + ζ/Z), rama principal"""
    if params.case != "PV":
        raise ConfigError(f"pv_jump called with case {params.case}")
    if params.zeta is None or not 0.0 < params.zeta < 1.0:
        raise ConfigError(f"PV requires 0 < zeta < 1, got {params.zeta}")
    zeta = params.zeta
    return JumpMatrix(
        evaluator=lambda Z: _sandwich(-2j * model_phase(params, Z)),
        analyticity_margin=((1.0 + zeta) / 2.0, (3.0 - zeta) / 2.0),
        label="PV",
        params=params.model_dump(),
    )


def model_jump(params: ModelParams) -> JumpMatrix:
    return piii_jump(params) if params.case == "PIII" else pv_jump(params)


def scaling_map(case: str, n: int, mu_mean: float) -> ScalingMap:
    return ScalingMap(case=case.upper(), n=n, mu_mean=mu_mean)


def rescaled_field(data: SpectralData, scaling: ScalingMap, X_grid, T_grid,
                   precision: Optional[PrecisionPolicy] = None, with_mass: bool = False) -> WaveField:
    """amplitude·ψ_N(map(X, T)) sobre la malla (X, T)"""
    X_grid = np.asarray(X_grid, dtype=float).reshape(-1)
    T_grid = np.asarray(T_grid, dtype=float).reshape(-1)
    x, _ = scaling.forward(X_grid, np.zeros_like(X_grid))
    _, t = scaling.forward(np.zeros_like(T_grid), T_grid)
    raw = evaluate_field(data, x, t, precision=precision, with_mass=with_mass)
    # m transforma con el mismo factor que ψ (∂_X m = −|Ψ|²)
    mass = None if raw.mass is None else scaling.amplitude * raw.mass
    return WaveField(
        x=X_grid, t=T_grid, values=scaling.amplitude * raw.values, mass=mass,
        frame=scaling.case, frame_params={"n": scaling.n, "mu_mean": scaling.mu_mean},
    )


# --- Conjuntos "buenos" ----------------------------------------------------

def in_omega(mu, v, delta: float) -> bool:
    """max μ_j < N^δ y max |v_j| < N^δ"""
    mu = np.asarray(mu, dtype=float)
    v = np.asarray(v, dtype=float)
    bound = mu.size ** delta
    return bool(np.max(mu) < bound and np.max(np.abs(v)) < bound)


def in_partial_sum(mu, mu_mean: float, delta: float) -> bool:
    """|Σ μ_j − N μ̄| ≤ N^{2δ}"""
    mu = np.asarray(mu, dtype=float)
    return bool(abs(mu.sum() - mu.size * mu_mean) <= mu.size ** (2 * delta))


def uniform_deviation(mu, mu_mean: float, zeta: float, points: Optional[int] = None,
                      chunk: int = 512) -> float:
    """max sobre |Z| = 1 de |Σ_j (μ_j − μ̄)/(Z + ζ j/N)| en una red de 4N ángulos"""
    mu = np.asarray(mu, dtype=float)
    n = mu.size
    points = points or 4 * n
    shifts = zeta * np.arange(1, n + 1) / n
    dev = mu - mu_mean
    worst = 0.0
    Z = circle_points(points)
    for start in range(0, points, chunk):
        block = Z[start:start + chunk]
        K = 1.0 / (block[:, None] + shifts[None, :])
        worst = max(worst, float(np.max(np.abs(K @ dev))))
    return worst


def in_uniform(mu, mu_mean: float, zeta: float, delta: float, points: Optional[int] = None) -> bool:
    mu = np.asarray(mu, dtype=float)
    return uniform_deviation(mu, mu_mean, zeta, points) <= mu.size ** (2 * delta)


# --- Comparación de saltos y soluciones modelo ----------------------------

def jump_discrepancy(data: SpectralData, case: str, X: float, T: float, mu_mean: float,
                     zeta: Optional[float] = None, samples: int = 256) -> float:
    """max_{|Z|=1} ‖J_N(Z) − J_modelo(Z)‖₂ en el marco reescalado"""
    scaling = scaling_map(case, data.n, mu_mean)
    x, t = scaling.forward(X, T)
    finite = nsoliton_jump(data, float(x), float(t), scaling.radius)
    params = ModelParams(case=scaling.case, X=X, T=T, zeta=zeta,
                         mu_mean=2.0 if scaling.case == "PIII" else mu_mean)
    Z = circle_points(samples)
    diff = finite(Z) - model_jump(params)(Z)
    return float(np.max(np.linalg.norm(diff, ord=2, axis=(1, 2))))


def _solve(jump: JumpMatrix, M: Optional[int]):
    return solve_adaptive(jump) if M is None else solve_collocation(jump, M)


def model_solution(params: ModelParams, M: Optional[int] = None,
                   cache: Optional[SolveCache] = None) -> ModelPoint:
    """Ψ(X,T), m(X,T) y diagnósticos del problema modelo; M explícito es estricto"""
    cache = cache or get_cache()
    key = params.cache_key(M)
    cached = cache.get(key)
    if cached is not None:
        return ModelPoint(**cached)

    sol = _solve(model_jump(params), M)
    psi, mass = extract_potential(sol)
    point = ModelPoint(
        X=params.X, T=params.T, psi=(psi.real, psi.imag), mass=mass,
        R1=tuple((float(v.real), float(v.imag)) for v in sol.R1.reshape(-1)),
        diagnostics=sol.diagnostics,
    )
    cache.set(key, point.to_json_dict())
    return point


def model_profile(params: ModelParams, X_grid: Iterable[float], M: Optional[int] = None,
                  cache: Optional[SolveCache] = None) -> WaveField:
    """Perfil Ψ(·, T) del problema modelo sobre una malla en X"""
    X_grid = np.asarray(list(X_grid), dtype=float).reshape(-1)
    if X_grid.size > 1 and not np.all(np.diff(X_grid) > 0):
        raise ShapeError("X grid must be strictly increasing")
    points = [model_solution(params.at(X), M, cache) for X in X_grid]
    logger.info(f"📈 Perfil {params.case} resuelto en {X_grid.size} puntos (T={params.T})")
    return WaveField(
        x=X_grid, t=[params.T],
        values=np.array([[p.value for p in points]], dtype=complex),
        mass=np.array([[p.mass for p in points]], dtype=float),
        frame=params.case,
        frame_params={
            "zeta": params.zeta, "mu_mean": params.mu_mean, "M": M,
            "modes_used": max(p.diagnostics.M for p in points),
            "max_residual": max(p.diagnostics.residual for p in points),
        },
    )

