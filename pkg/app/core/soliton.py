# app/core/soliton.py
"""
Motor de solitones: recursión de Darboux (vestido) y evaluador independiente
por sistema de residuos para soluciones sin reflexión de NLS enfocante
"""
import logging
import threading
from typing import Optional, Sequence, Tuple

import mpmath
import numpy as np

from .config import settings
from .errors import IllConditionedError, InvalidDataError, PrecisionExhaustedError, ShapeError
from .spectral import norming_constants_from_darboux
from ..models.field import PrecisionPolicy, WaveField
from ..models.spectral import SpectralData

logger = logging.getLogger(__name__)

BINARY64 = 53
# por encima de esto la estimación de cond en binary64 ya no es fiable
RELIABLE_CONDITION = 1e13

_contexts = threading.local()


def mp_context(bits: int) -> mpmath.MPContext:
    """Contexto mpmath propio del hilo a `bits` bits; nunca toca mpmath.mp global"""
    by_bits = getattr(_contexts, "by_bits", None)
    if by_bits is None:
        by_bits = _contexts.by_bits = {}
    ctx = by_bits.get(bits)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.prec = bits
        by_bits[bits] = ctx
    return ctx


def extremal_peak(data: SpectralData) -> float:
    """Cota 2 Σ Im λ_n, alcanzada en (0,0) por los datos extremales"""
    return float(2.0 * np.sum(data.eigenvalues.imag))


# --- Darboux ---------------------------------------------------------------

def dress_vector(lam: np.ndarray, kernels, z, w0, w1):
    """Aplica los factores ya construidos a la semilla (w0, w1) y normaliza"""
    for j, (q0, q1) in enumerate(kernels):
        k = (lam[j] - np.conj(lam[j])) / (z - lam[j])
        inner = np.conj(q0) * w0 + np.conj(q1) * w1
        w0 = w0 + k * q0 * inner
        w1 = w1 + k * q1 * inner
        norm = np.sqrt(np.abs(w0) ** 2 + np.abs(w1) ** 2)
        w0, w1 = w0 / norm, w1 / norm
    norm = np.sqrt(np.abs(w0) ** 2 + np.abs(w1) ** 2)
    return w0 / norm, w1 / norm


def _darboux_numpy(lam: np.ndarray, p: np.ndarray, x: np.ndarray, t: np.ndarray,
                   with_mass: bool = False):
    """Recursión vectorizada sobre puntos (x, t) en binary64"""
    psi = np.zeros(x.shape, dtype=complex)
    mass = np.zeros(x.shape, dtype=float) if with_mass else None
    kernels = []
    for n in range(lam.size):
        z = np.conj(lam[n])
        theta = z * x + z * z * t
        e1 = -1j * theta
        e2 = 1j * theta + np.log(np.conj(p[n]))
        shift = np.maximum(e1.real, e2.real)
        w0, w1 = dress_vector(lam, kernels, z, np.exp(e1 - shift), np.exp(e2 - shift))
        kernels.append((w0, w1))
        psi = psi + 2j * (lam[n] - np.conj(lam[n])) * w0 * np.conj(w1)
        if with_mass:
            mass = mass + 4.0 * lam[n].imag * np.abs(w0) ** 2
    return psi, mass


def _darboux_mp(lam: Sequence[complex], p: Sequence[complex], x: float, t: float,
                bits: int, with_mass: bool = False):
    """Misma recursión en un punto con aritmética de precisión arbitraria"""
    ctx = mp_context(bits)
    lam_mp = [ctx.mpc(complex(v)) for v in lam]
    p_mp = [ctx.mpc(complex(v)) for v in p]
    x_mp, t_mp = ctx.mpf(float(x)), ctx.mpf(float(t))
    psi = ctx.mpc(0)
    mass = ctx.mpf(0)
    kernels = []
    for n, lam_n in enumerate(lam_mp):
        z = ctx.conj(lam_n)
        theta = z * x_mp + z * z * t_mp
        e1 = -1j * theta
        e2 = 1j * theta + ctx.log(ctx.conj(p_mp[n]))
        shift = max(ctx.re(e1), ctx.re(e2))
        w0, w1 = ctx.exp(e1 - shift), ctx.exp(e2 - shift)
        for j, (q0, q1) in enumerate(kernels):
            k = (lam_mp[j] - ctx.conj(lam_mp[j])) / (z - lam_mp[j])
            inner = ctx.conj(q0) * w0 + ctx.conj(q1) * w1
            w0, w1 = w0 + k * q0 * inner, w1 + k * q1 * inner
            norm = ctx.sqrt(abs(w0) ** 2 + abs(w1) ** 2)
            w0, w1 = w0 / norm, w1 / norm
        norm = ctx.sqrt(abs(w0) ** 2 + abs(w1) ** 2)
        w0, w1 = w0 / norm, w1 / norm
        kernels.append((w0, w1))
        psi += 2j * (lam_n - ctx.conj(lam_n)) * w0 * ctx.conj(w1)
        if with_mass:
            mass += 4 * ctx.im(lam_n) * abs(w0) ** 2
    return complex(psi), (float(mass) if with_mass else None)


def _darboux_at_bits(data: SpectralData, x: float, t: float, bits: int, with_mass: bool):
    if bits <= BINARY64:
        with np.errstate(all="ignore"):
            psi, mass = _darboux_numpy(data.eigenvalues, data.darboux_params,
                                       np.array([float(x)]), np.array([float(t)]), with_mass)
        return complex(psi[0]), (float(mass[0]) if with_mass else None)
    return _darboux_mp(data.eigenvalues, data.darboux_params, x, t, bits, with_mass)


def _finite(value, mass) -> bool:
    return bool(np.isfinite(value) and (mass is None or np.isfinite(mass)))


def darboux_evaluate(data: SpectralData, x: float, t: float,
                     precision: Optional[PrecisionPolicy] = None) -> complex:
    """ψ_N(x,t) por la recursión de vestido, escalando la precisión si hace falta"""
    value, _ = darboux_point(data, x, t, precision)
    return value


def darboux_point(data: SpectralData, x: float, t: float,
                  precision: Optional[PrecisionPolicy] = None, with_mass: bool = False,
                  first: Optional[Tuple[complex, Optional[float]]] = None):
    """
    Evalúa (ψ, masa) en un punto. En modo automático sube por la escalera hasta
    que dos escalones finitos consecutivos coinciden dentro de escalation_tol
    (relativo al pico extremal) y devuelve el valor del escalón más fino.
    `first` es el resultado ya calculado del primer escalón, si lo hay.
    """
    precision = precision or PrecisionPolicy.fixed()
    if data.n == 0:
        return 0j, (0.0 if with_mass else None)
    ladder = precision.ladder(settings.PRECISION_LADDER)
    if len(ladder) == 1:
        value, mass = first if first is not None else _darboux_at_bits(data, x, t, ladder[0], with_mass)
        if _finite(value, mass):
            return value, mass
        raise PrecisionExhaustedError(
            f"non-finite dressing value at (x, t) = ({x}, {t}) with {ladder[0]} bits", bits=ladder[0]
        )

    scale = max(1.0, extremal_peak(data))
    tol = precision.escalation_tol
    previous = None
    gap = np.inf
    for i, bits in enumerate(ladder):
        if i == 0 and first is not None:
            value, mass = first
        else:
            value, mass = _darboux_at_bits(data, x, t, bits, with_mass)
        if not _finite(value, mass):
            logger.info(f"ℹ️ Valor no finito en ({x}, {t}) con {bits} bits, escalando precisión")
            previous = None
            continue
        if previous is not None:
            gap = abs(value - previous[0]) / scale
            if mass is not None:
                gap = max(gap, abs(mass - previous[1]) / max(1.0, abs(mass)))
            if gap <= tol:
                return value, mass
            logger.info(f"ℹ️ Escalones discrepan {gap:.2e} en ({x}, {t}) con {bits} bits, escalando")
        previous = (value, mass)
    raise PrecisionExhaustedError(
        f"dressing value at (x, t) = ({x}, {t}) not stable up to {ladder[-1]} bits (gap {gap:.3e})",
        bits=ladder[-1],
    )


def check_extremality(data: SpectralData, precision: Optional[PrecisionPolicy] = None,
                      tol: Optional[float] = None) -> Tuple[float, float, int]:
    """Comprueba |ψ_N(0,0)| = 2 Σ Im λ escalando la precisión; devuelve (valor, pico, bits)"""
    precision = precision or PrecisionPolicy.auto(settings.max_precision)
    tol = settings.EXTREMALITY_TOL if tol is None else tol
    peak = extremal_peak(data)
    if data.n == 0:
        return 0.0, 0.0, BINARY64
    ladder = precision.ladder(settings.PRECISION_LADDER)
    rel = np.inf
    for bits in ladder:
        value, _ = _darboux_at_bits(data, 0.0, 0.0, bits, False)
        rel = abs(abs(value) - peak) / peak
        if rel <= tol:
            return abs(value), peak, bits
        logger.info(f"ℹ️ Extremalidad rel={rel:.2e} con {bits} bits, escalando")
    raise PrecisionExhaustedError(
        f"extremality identity off by {rel:.3e} (relative) after {ladder[-1]} bits", bits=ladder[-1]
    )


def evaluate_field(data: SpectralData, x_grid, t_grid,
                   precision: Optional[PrecisionPolicy] = None, with_mass: bool = True) -> WaveField:
    """Campo ψ_N sobre la malla producto t × x"""
    precision = precision or PrecisionPolicy.fixed()
    x_grid = np.asarray(x_grid, dtype=float).reshape(-1)
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    for name, grid in (("x", x_grid), ("t", t_grid)):
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ShapeError(f"{name} grid must be strictly increasing")

    T, X = np.meshgrid(t_grid, x_grid, indexing="ij")
    if data.n == 0:
        values = np.zeros(T.shape, dtype=complex)
        mass = np.zeros(T.shape) if with_mass else None
    elif precision.mode == "fixed" and precision.mantissa_bits > BINARY64:
        values = np.empty(T.shape, dtype=complex)
        mass = np.empty(T.shape) if with_mass else None
        for idx in np.ndindex(T.shape):
            v, m = darboux_point(data, X[idx], T[idx], precision, with_mass)
            values[idx] = v
            if with_mass:
                mass[idx] = m
    else:
        with np.errstate(all="ignore"):
            values, mass = _darboux_numpy(data.eigenvalues, data.darboux_params, X, T, with_mass)
        if precision.mode == "auto":
            # el resultado vectorizado es el primer escalón de cada punto
            for idx in np.ndindex(T.shape):
                first = (complex(values[idx]), float(mass[idx]) if with_mass else None)
                v, m = darboux_point(data, X[idx], T[idx], precision, with_mass, first=first)
                values[idx] = v
                if with_mass:
                    mass[idx] = m

    if not np.all(np.isfinite(values)):
        raise PrecisionExhaustedError("non-finite values in binary64 field; use an auto precision policy",
                                      bits=BINARY64)
    return WaveField(x=x_grid, t=t_grid, values=values, mass=mass, frame="raw",
                     frame_params={"n": data.n})


# --- Oráculo por sistema de residuos -------------------------------------

def _oracle_blocks(lam: np.ndarray, log_c: np.ndarray, x: float, t: float):
    """Sistema escalado por filas para (a_n, b_m) del primer renglón de M(z)"""
    n = lam.size
    log_C = log_c + 2j * (lam * x + lam * lam * t)
    scale = np.maximum(0.0, log_C.real)
    Cs = np.exp(log_C - scale)
    Ds = -np.conj(Cs)
    inv_s = np.exp(-scale)
    Q = 1.0 / (lam[:, None] - np.conj(lam)[None, :])
    P = 1.0 / (np.conj(lam)[:, None] - lam[None, :])

    A = np.zeros((2 * n, 2 * n), dtype=complex)
    A[:n, :n] = np.diag(inv_s)
    A[:n, n:] = -Cs[:, None] * Q
    A[n:, :n] = -Ds[:, None] * P
    A[n:, n:] = np.diag(inv_s)
    rhs = np.concatenate([np.zeros(n, dtype=complex), Ds])
    return A, rhs


def _log_norming_mp(ctx, lam_mp, c, p):
    """log c_n a la precisión del contexto; desde (λ, p) si se conocen, si no desde c"""
    if p is None:
        return [ctx.log(ctx.mpc(complex(v))) for v in c]
    out = []
    for n, lam_n in enumerate(lam_mp):
        acc = -ctx.log(ctx.mpc(complex(p[n])))
        for k, lam_k in enumerate(lam_mp):
            acc += ctx.log(lam_n - ctx.conj(lam_k))
            if k != n:
                acc -= ctx.log(lam_n - lam_k)
        out.append(acc)
    return out


def _solve_mp(lam: np.ndarray, c: np.ndarray, x: float, t: float, bits: int,
              p: Optional[np.ndarray] = None) -> np.ndarray:
    """Ensambla y resuelve el mismo sistema a `bits` bits"""
    n = lam.size
    ctx = mp_context(bits)
    lam_mp = [ctx.mpc(complex(v)) for v in lam]
    log_c = _log_norming_mp(ctx, lam_mp, c, p)
    x_mp, t_mp = ctx.mpf(float(x)), ctx.mpf(float(t))
    A = ctx.matrix(2 * n, 2 * n)
    rhs = ctx.matrix(2 * n, 1)
    for i, lam_i in enumerate(lam_mp):
        log_C = log_c[i] + 2j * (lam_i * x_mp + lam_i * lam_i * t_mp)
        scale = max(ctx.mpf(0), ctx.re(log_C))
        Cs = ctx.exp(log_C - scale)
        Ds = -ctx.conj(Cs)
        inv_s = ctx.exp(-scale)
        A[i, i] = inv_s
        A[n + i, n + i] = inv_s
        rhs[n + i, 0] = Ds
        for k, lam_k in enumerate(lam_mp):
            A[i, n + k] = -Cs / (lam_i - ctx.conj(lam_k))
            A[n + i, k] = -Ds / (ctx.conj(lam_i) - lam_k)
    sol = ctx.lu_solve(A, rhs)
    return complex(2j * ctx.fsum(sol[n + i, 0] for i in range(n)))


def _exact_params(data: SpectralData) -> Optional[np.ndarray]:
    """p si las constantes guardadas salen del diccionario con esos p; None si son independientes"""
    try:
        expected = norming_constants_from_darboux(data.eigenvalues, data.darboux_params)
    except (InvalidDataError, IllConditionedError):
        return None
    if np.allclose(data.norming_constants, expected, rtol=1e-10, atol=0.0):
        return data.darboux_params
    return None


def oracle_evaluate(data: SpectralData, x: float, t: float,
                    precision: Optional[PrecisionPolicy] = None) -> complex:
    """
    ψ_N(x,t) = 2i Σ_m b_m resolviendo las condiciones de residuo (evaluador independiente).

    Con una estimación de condición fiable se usa el primer escalón con
    cond·2^−bits ≤ CONDITION_LIMIT. Si no es fiable se exige que dos escalones
    multiprecisión consecutivos coincidan dentro de CONDITION_LIMIT.
    """
    precision = precision or PrecisionPolicy.fixed()
    if data.n == 0:
        return 0j
    if data.norming_constants is None:
        raise InvalidDataError("oracle evaluation requires norming constants")
    c = data.norming_constants
    if np.any(c == 0) or not np.all(np.isfinite(c)):
        raise InvalidDataError("norming constants must be finite and nonzero")

    with np.errstate(all="ignore"):
        A, rhs = _oracle_blocks(data.eigenvalues, np.log(c), float(x), float(t))
        cond = float(np.linalg.cond(A)) if np.all(np.isfinite(A)) else np.inf
    reliable = np.isfinite(cond) and cond < RELIABLE_CONDITION
    n = data.n
    p = _exact_params(data)
    limit = settings.CONDITION_LIMIT
    ladder = precision.ladder(settings.PRECISION_LADDER)

    previous = None
    for bits in ladder:
        if reliable and cond * 2.0 ** (-bits) > limit:
            logger.info(f"ℹ️ Sistema de residuos cond={cond:.2e} excede {bits} bits")
            continue
        if bits <= BINARY64:
            if not reliable:
                continue
            return complex(2j * np.sum(np.linalg.solve(A, rhs)[n:]))
        value = _solve_mp(data.eigenvalues, c, float(x), float(t), bits, p)
        if reliable or len(ladder) == 1:
            return value
        if previous is not None and abs(value - previous) <= limit * max(1.0, abs(value)):
            return value
        previous = value
    raise IllConditionedError(
        f"residue system condition estimate {cond:.3e} too large for {ladder[-1]} bits", condition=cond
    )


def oracle_field(data: SpectralData, x_grid, t_grid,
                 precision: Optional[PrecisionPolicy] = None) -> WaveField:
    x_grid = np.asarray(x_grid, dtype=float).reshape(-1)
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    values = np.array([[oracle_evaluate(data, x, t, precision) for x in x_grid] for t in t_grid],
                      dtype=complex).reshape(t_grid.size, x_grid.size)
    return WaveField(x=x_grid, t=t_grid, values=values, frame="raw", frame_params={"n": data.n})


def max_deviation(a: WaveField, b: WaveField) -> float:
    if a.values.shape != b.values.shape:
        raise ShapeError(f"field shapes differ: {a.values.shape} vs {b.values.shape}")
    return float(np.max(np.abs(a.values - b.values))) if a.values.size else 0.0


def one_soliton(x, t, eta: float = 1.0, xi: float = 0.0, phase: float = 0.0):
    """Forma cerrada del 1-solitón para λ = ξ + iη con p = e^{i·phase} (referencia de pruebas)"""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    envelope = 2.0 * eta / np.cosh(2.0 * eta * (x + 2.0 * xi * t))
    carrier = np.exp(-2j * xi * x - 2j * (xi ** 2 - eta ** 2) * t)
    return -envelope * carrier * np.exp(1j * phase)
