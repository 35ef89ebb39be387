# app/core/rhp.py
"""
Solver de problemas de Riemann–Hilbert 2×2 con salto en el círculo unidad.

Convenciones: círculo orientado en sentido antihorario, "+" es el interior.
E = I + C[g] con g = E₋(J − I); el valor de frontera exterior μ = E₋ tiene
solo modos k ≤ 0 y cumple μ = I − P₋(μ(J − I)).
"""
import logging
from typing import Literal, Optional

import numpy as np
from scipy import linalg

from .config import settings
from .errors import (
    ConfigError,
    DivergenceError,
    GeometryError,
    IllConditionedError,
    NoConvergenceError,
    ResolutionError,
    StructureError,
)
from ..models.rhp import JumpMatrix, LaurentSeries, RhpSolution, SolverDiagnostics

logger = logging.getLogger(__name__)

IDENTITY = np.eye(2, dtype=complex)


def cauchy_project(series: LaurentSeries, side: Literal["plus", "minus"]) -> LaurentSeries:
    """C₊ conserva k ≥ 0; C₋ devuelve −(modos k < 0); C₊ − C₋ = 𝟙"""
    modes = np.array(series.modes)
    k = series.indices
    if side == "plus":
        modes[k < 0] = 0
    elif side == "minus":
        modes = -modes
        modes[k >= 0] = 0
    else:
        raise ConfigError(f"unknown side '{side}'")
    return LaurentSeries(modes=modes, M=series.M)


def _check_modes(M: int):
    if M < 16 or (M & (M - 1)) != 0:
        raise ConfigError(f"truncation M must be a power of two >= 16, got {M}")


def circle_points(K: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(K) / K)


class _Discretization:
    """Muestras del salto en K = 4M puntos y coeficientes de Fourier de W = J − I"""

    def __init__(self, jump: JumpMatrix, M: int):
        _check_modes(M)
        self.M = M
        self.K = 4 * M
        self.Z = circle_points(self.K)
        self.J = jump(self.Z)
        self.W = self.J - IDENTITY
        self.F = np.fft.fft(self.W, axis=0) / self.K

        norms = np.abs(self.F).reshape(self.K, -1).max(axis=1)
        k = np.fft.fftfreq(self.K, 1.0 / self.K).astype(int)
        band = norms[(np.abs(k) >= M - M // 8) & (np.abs(k) <= M)]
        self.tail = float(band.max() / max(1.0, norms.max()))
        # el redondeo del sistema de colocación escala con ‖J‖²: la cola no baja de ahí
        self.jump_scale = float(max(1.0, np.max(np.linalg.norm(self.J, ord=2, axis=(1, 2)))))
        self.tail_tol = max(settings.RESOLUTION_TOL, np.finfo(float).eps * self.jump_scale ** 2)

    def coef(self, m) -> np.ndarray:
        return self.F[np.asarray(m) % self.K]

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.W, ord=2, axis=(1, 2))))

    def operator(self) -> np.ndarray:
        """Bloques Toeplitz de b ↦ P₋(bW) sobre las incógnitas (d, k), k = 1..M"""
        M = self.M
        ks = np.arange(1, M + 1)
        offsets = ks[None, :] - ks[:, None]  # l − k
        T = self.coef(offsets)  # (M, M, 2, 2)
        A = np.zeros((2 * M, 2 * M), dtype=complex)
        for d in range(2):
            for c in range(2):
                A[d * M:(d + 1) * M, c * M:(c + 1) * M] = T[:, :, c, d]
        return A

    def rhs(self) -> np.ndarray:
        M = self.M
        ks = np.arange(1, M + 1)
        w = self.coef(-ks)  # (M, 2, 2)
        rhs = np.zeros((2 * M, 2), dtype=complex)
        for r in range(2):
            for d in range(2):
                rhs[d * M:(d + 1) * M, r] = -w[:, r, d]
        return rhs


def _unpack(x: np.ndarray, M: int) -> np.ndarray:
    """Vector de incógnitas (2M, 2) → b_k, k = 1..M, como arreglo (M, 2, 2)"""
    b = np.zeros((M, 2, 2), dtype=complex)
    for r in range(2):
        for d in range(2):
            b[:, r, d] = x[d * M:(d + 1) * M, r]
    return b


def _check_tail(tail: float, tol: float, M: int, what: str):
    if tail > tol:
        raise ResolutionError(
            f"under-resolved {what}: tail {tail:.3e} > {tol:.1e} at M={M}; try M={2 * M}",
            modes=M, tail=tail,
        )


def _finalize(disc: _Discretization, b: np.ndarray, method: str, label: str,
              iterations: int = 0, condition: Optional[float] = None,
              jump_norm: Optional[float] = None) -> RhpSolution:
    M, K = disc.M, disc.K
    mu_modes = np.zeros((2 * M + 1, 2, 2), dtype=complex)
    mu_modes[M] = IDENTITY
    mu_modes[:M] = b[::-1]  # k = −M..−1
    mu = LaurentSeries(modes=mu_modes, M=M)
    tail_mu = mu.tail()
    _check_tail(tail_mu, disc.tail_tol, M, "boundary value μ")

    spread = np.zeros((K, 2, 2), dtype=complex)
    spread[(-np.arange(1, M + 1)) % K] = b
    mu_grid = IDENTITY + K * np.fft.ifft(spread, axis=0)
    g_grid = mu_grid @ disc.W
    g_hat = np.fft.fft(g_grid, axis=0) / K
    g_plus = g_hat[:M]

    plus = np.zeros((K, 2, 2), dtype=complex)
    plus[:M] = g_plus
    E_plus = IDENTITY + K * np.fft.ifft(plus, axis=0)
    residual = float(np.max(np.linalg.norm(E_plus - mu_grid @ disc.J, ord=2, axis=(1, 2))))

    diagnostics = SolverDiagnostics(
        M=M, method=method, residual=residual, tail_jump=disc.tail, tail_mu=tail_mu,
        tail_tol=disc.tail_tol, jump_scale=disc.jump_scale,
        iterations=iterations, condition=condition, jump_norm=jump_norm,
    )
    return RhpSolution(mu=mu, g_plus=g_plus, R1=b[0], diagnostics=diagnostics, label=label)


def solve_collocation(jump: JumpMatrix, M: Optional[int] = None) -> RhpSolution:
    """Colocación de modos de Laurent: (𝟙 − C₋(·W))μ = I, resuelto con LU denso"""
    M = M or settings.DEFAULT_MODES
    disc = _Discretization(jump, M)
    _check_tail(disc.tail, disc.tail_tol, M, "jump")

    A = np.eye(2 * M, dtype=complex) + disc.operator()
    lu, piv = linalg.lu_factor(A, check_finite=True)
    diag = np.abs(np.diag(lu))
    condition = float(diag.max() / diag.min()) if diag.min() > 0 else np.inf
    if not np.isfinite(condition) or condition > 1.0 / np.finfo(float).eps:
        raise IllConditionedError(
            f"collocation operator numerically singular at M={M} (pivot ratio {condition:.3e})",
            condition=condition,
        )
    x = linalg.lu_solve((lu, piv), disc.rhs())
    return _finalize(disc, _unpack(x, M), "collocation", jump.label, condition=condition)


def solve_neumann(jump: JumpMatrix, M: Optional[int] = None, max_terms: Optional[int] = None,
                  tol: Optional[float] = None) -> RhpSolution:
    """Serie de Neumann μ ← I − P₋(μW) sobre la misma discretización"""
    M = M or settings.DEFAULT_MODES
    max_terms = max_terms or settings.NEUMANN_MAX_TERMS
    tol = settings.NEUMANN_TOL if tol is None else tol
    disc = _Discretization(jump, M)
    norm = disc.sup_norm()
    if norm >= 1.0:
        raise DivergenceError(f"Neumann series not contractive: ‖J − I‖∞ = {norm:.4g} >= 1", norm=norm)
    _check_tail(disc.tail, disc.tail_tol, M, "jump")

    T = disc.operator()
    rhs = disc.rhs()
    x = np.zeros_like(rhs)
    for term in range(1, max_terms + 1):
        x_new = rhs - T @ x
        step = float(np.max(np.abs(x_new - x)))
        x = x_new
        if step < tol:
            logger.debug(f"Neumann convergió en {term} términos (paso {step:.2e})")
            return _finalize(disc, _unpack(x, M), "neumann", jump.label, iterations=term, jump_norm=norm)
    raise NoConvergenceError(f"Neumann series did not converge in {max_terms} terms (last step {step:.3e})")


def solve_adaptive(jump: JumpMatrix, M: Optional[int] = None) -> RhpSolution:
    """Colocación duplicando M ante sub-resolución, hasta MAX_MODES"""
    M = M or settings.DEFAULT_MODES
    while True:
        try:
            return solve_collocation(jump, M)
        except ResolutionError as e:
            if 2 * M > settings.MAX_MODES:
                raise
            logger.warning(f"⚠️ {jump.label}: cola {e.tail:.2e} con M={M}, duplicando")
            M *= 2


def evaluate_off_contour(sol: RhpSolution, Z) -> np.ndarray:
    """E(Z) fuera del círculo: I + Σ_{m≥0} g_m Z^m dentro, I + Σ_{k≥1} μ_{−k} Z^{−k} fuera"""
    Z = np.asarray(Z, dtype=complex)
    r = np.abs(Z)
    if np.any(np.abs(r - 1.0) < settings.NEAR_CONTOUR):
        raise GeometryError(f"evaluation point within {settings.NEAR_CONTOUR:g} of |Z| = 1; use boundary values")

    flat = Z.reshape(-1)
    out = np.empty(flat.shape + (2, 2), dtype=complex)
    inside = np.abs(flat) < 1.0
    M = sol.M

    if np.any(inside):
        zi = flat[inside]
        acc = np.zeros(zi.shape + (2, 2), dtype=complex)
        for m in range(sol.g_plus.shape[0] - 1, -1, -1):
            acc = acc * zi[:, None, None] + sol.g_plus[m]
        out[inside] = IDENTITY + acc
    if np.any(~inside):
        w = 1.0 / flat[~inside]
        acc = np.zeros(w.shape + (2, 2), dtype=complex)
        for k in range(M, 0, -1):
            acc = (acc + sol.mu.mode(-k)) * w[:, None, None]
        out[~inside] = IDENTITY + acc
    return out.reshape(Z.shape + (2, 2))


def extract_potential(sol: RhpSolution, tol: Optional[float] = None):
    """Ψ = 2i(R1)₁₂ y m = 2i(R1)₂₂, verificando la estructura de Schwartz de R1"""
    tol = settings.STRUCTURE_TOL if tol is None else tol
    # mismo piso de redondeo que la cola: eps·‖J‖²
    tol = max(tol, np.finfo(float).eps * (sol.diagnostics.jump_scale or 1.0) ** 2)
    R1 = sol.R1
    scale = max(1.0, float(np.max(np.abs(R1))))
    psi = complex(2j * R1[0, 1])
    m = complex(2j * R1[1, 1])
    defects = {
        "Im m": abs(m.imag),
        "R21 + conj R12": abs(R1[1, 0] + np.conj(R1[0, 1])),
        "trace": abs(R1[0, 0] + R1[1, 1]),
    }
    worst = max(defects, key=defects.get)
    if defects[worst] > tol * scale:
        raise StructureError(f"R1 violates Schwartz structure ({worst} = {defects[worst]:.3e})")
    return psi, m.real


def jump_residual(sol: RhpSolution) -> float:
    return sol.diagnostics.residual


def schwartz_defect(jump: JumpMatrix, samples: int = 64) -> float:
    """max ‖J(Z)·J(conj Z)† − I‖ sobre el círculo"""
    Z = circle_points(samples)
    J = jump(Z)
    Jc = jump(np.conj(Z))
    prod = J @ np.conj(np.swapaxes(Jc, -1, -2))
    return float(np.max(np.abs(prod - IDENTITY)))


def det_defect(jump: JumpMatrix, samples: int = 64) -> float:
    J = jump(circle_points(samples))
    return float(np.max(np.abs(np.linalg.det(J) - 1.0)))
