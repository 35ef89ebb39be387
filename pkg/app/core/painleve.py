# app/core/painleve.py
"""
Verificación de identidades: extracción de los trascendentes de Painlevé,
residuos de PIII / PV, residuo de NLS, consistencia de la matriz Λ de Lax
y diagnósticos de masa y del límite ζ → 0
"""
import logging
from typing import Callable, Dict, List, Literal, Optional, Sequence

import numpy as np

from .config import settings
from .errors import GeometryError, NumericalError, ShapeError, SingularPointError, StencilError
from .experiments import l2_error
from .model_problems import model_jump, model_phase, model_profile, model_solution
from .rhp import evaluate_off_contour, extract_potential, solve_collocation
from ..models.field import WaveField
from ..models.painleve import PainleveParams, ResidualReport, SampledFunction
from ..models.problems import ModelParams
from ..models.solve_cache import SolveCache

logger = logging.getLogger(__name__)

SIGMA3 = np.diag([1.0, -1.0]).astype(complex)
SINGULAR_TOL = 1e-8


# --- Diferencias finitas ---------------------------------------------------

def _check_uniform(grid: np.ndarray, name: str = "grid"):
    steps = np.diff(grid)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise StencilError(f"{name} must be uniform for centered stencils")


def derivatives(values: np.ndarray, h: float, order: int = 2, axis: int = -1):
    """(interior, f', f'') con estencil centrado de orden 2 o 4 a lo largo de `axis`"""
    f = np.moveaxis(np.asarray(values), axis, -1)
    k = order // 2
    n = f.shape[-1]
    if n < 2 * k + 1:
        raise StencilError(f"order-{order} stencil needs {2 * k + 1} points, got {n}")

    def s(d):
        return f[..., k + d:n - k + d]

    if order == 2:
        d1 = (s(1) - s(-1)) / (2 * h)
        d2 = (s(1) - 2 * s(0) + s(-1)) / h ** 2
    elif order == 4:
        d1 = (-s(2) + 8 * s(1) - 8 * s(-1) + s(-2)) / (12 * h)
        d2 = (-s(2) + 16 * s(1) - 30 * s(0) + 16 * s(-1) - s(-2)) / (12 * h ** 2)
    else:
        raise StencilError(f"unsupported stencil order {order}")
    return slice(k, n - k), np.moveaxis(d1, -1, axis), np.moveaxis(d2, -1, axis)


def _log_derivative(fn: SampledFunction, weight: np.ndarray):
    """(abscisas interiores, (w·f)'/(w·f)) sin pasar por ramas del logaritmo"""
    _check_uniform(fn.abscissae, "abscissae")
    g = weight * fn.values
    tiny = np.abs(g) < SINGULAR_TOL * max(1.0, float(np.max(np.abs(g))))
    if np.any(tiny):
        raise SingularPointError("samples vanish on the grid", abscissae=fn.abscissae[tiny].tolist())
    inner, d1, _ = derivatives(g, fn.h, fn.stencil)
    return fn.abscissae[inner], d1 / g[inner]


def _flag(mask: np.ndarray, x: np.ndarray, message: str):
    if np.any(mask):
        raise SingularPointError(message, abscissae=x[mask].tolist())


# --- PIII ------------------------------------------------------------------

def extract_u_piii(psi: SampledFunction) -> SampledFunction:
    """u(x) = 2 / (d/dx ln(x²Ψ(−x²/8, 0))) a partir de muestras sobre x > 0"""
    x = psi.abscissae
    if np.any(x <= 0):
        raise SingularPointError("PIII extraction needs x > 0", abscissae=x[x <= 0].tolist())
    xs, L = _log_derivative(psi, x ** 2)
    _flag(np.abs(L) < SINGULAR_TOL, xs, "near-zero logarithmic derivative in PIII extraction")
    return psi.with_values(xs, 2.0 / L, scale=1.0)


def singular_samples(u: SampledFunction, pv: bool = False) -> np.ndarray:
    """
    Máscara de muestras cerca de un polo o un cero de u: no finitas, |u| fuera de
    [s/bound, bound·s] con s la mediana de |u|, saltos |Δu| > s entre vecinas y,
    para PV, |u − 1| < 1/bound
    """
    bound = settings.SINGULAR_BOUND
    v = u.values
    with np.errstate(all="ignore"):
        size = np.abs(v)
        finite = np.isfinite(v)
        scale = float(np.median(size[finite])) if np.any(finite) else 1.0
        mask = ~finite | (size > bound * scale) | (size < scale / bound)
        if pv:
            mask |= np.abs(v - 1.0) < 1.0 / bound
        jump = ~(np.abs(np.diff(v)) <= scale)
    mask[:-1] |= jump
    mask[1:] |= jump
    return mask


def _usable(u: SampledFunction, inner: slice, pv: bool):
    """(máscara de puntos interiores a evaluar, abscisas excluidas)"""
    x = u.abscissae
    flagged = x[singular_samples(u, pv)]
    xi = x[inner]
    if flagged.size == 0:
        return np.ones(xi.shape, dtype=bool), []
    radius = max(settings.SINGULAR_RADIUS, (u.stencil // 2) * u.h)
    keep = np.min(np.abs(xi[:, None] - flagged[None, :]), axis=1) > radius
    if not np.any(keep):
        raise SingularPointError("every interior point is near a pole or zero of u", abscissae=flagged.tolist())
    return keep, xi[~keep].tolist()


def piii_residual_report(u: SampledFunction) -> ResidualReport:
    """|u'' − u'²/u + u'/x − 4/x − 4u³ + 4/u| lejos de polos y ceros de u"""
    _check_uniform(u.abscissae, "abscissae")
    inner, d1, d2 = derivatives(u.values, u.h, u.stencil)
    keep, excluded = _usable(u, inner, pv=False)
    x = u.abscissae[inner][keep]
    v = u.values[inner][keep]
    d1, d2 = d1[keep], d2[keep]
    _flag(np.abs(x) < SINGULAR_TOL, x, "x = 0 in PIII residual")
    res = d2 - d1 ** 2 / v + d1 / x - 4.0 / x - 4.0 * v ** 3 + 4.0 / v
    if excluded:
        logger.info(f"ℹ️ PIII: {len(excluded)} punto(s) excluidos cerca de polos o ceros de u")
    return ResidualReport(residual=float(np.max(np.abs(res))), h=u.h, points=int(x.size), excluded=excluded)


def piii_residual(u: SampledFunction) -> float:
    return piii_residual_report(u).residual


# --- PV --------------------------------------------------------------------

def extract_u_pv(psi: SampledFunction, zeta: float,
                 form: Literal["corrected", "unscaled"] = "corrected") -> SampledFunction:
    """u(2iζX) = L/(L − 2iζ) con L = ∂_X ln(XΨ_V(X,0)); `unscaled` usa L/(L − 2i)"""
    X = psi.abscissae
    _flag(np.abs(X) < SINGULAR_TOL, X, "X = 0 in PV extraction")
    Xs, L = _log_derivative(psi, X)
    pole = 2j * zeta if form == "corrected" else 2j
    _flag(np.abs(L) < SINGULAR_TOL, Xs, "near-zero logarithmic derivative in PV extraction")
    _flag(np.abs(L - pole) < SINGULAR_TOL, Xs, "PV extraction hits its pole")
    return psi.with_values(Xs, L / (L - pole), scale=2j * zeta)


def pv_terms(u: np.ndarray, du: np.ndarray, s: np.ndarray, params: PainleveParams) -> np.ndarray:
    """Lado derecho de PV en el argumento s"""
    return ((0.5 / u + params.sign / (u - 1.0)) * du ** 2 - du / s
            + (u - 1.0) ** 2 * (params.alpha * u + params.beta / u) / s ** 2
            + params.gamma * u / s + params.delta * u * (u + 1.0) / (u - 1.0))


def pv_residual_report(u: SampledFunction, params: PainleveParams) -> ResidualReport:
    """|u'' − RHS| con derivadas respecto de s = scale·X, lejos de u ∈ {0, 1, ∞}"""
    _check_uniform(u.abscissae, "abscissae")
    inner, d1, d2 = derivatives(u.values, u.h, u.stencil)
    keep, excluded = _usable(u, inner, pv=True)
    v = u.values[inner][keep]
    X = u.abscissae[inner][keep]
    _flag(np.abs(X) < SINGULAR_TOL, X, "s = 0 in PV residual")
    scale = u.scale
    du, ddu = d1[keep] / scale, d2[keep] / scale ** 2
    res = ddu - pv_terms(v, du, scale * X, params)
    if excluded:
        logger.info(f"ℹ️ PV: {len(excluded)} punto(s) excluidos cerca de u ∈ {{0, 1, ∞}}")
    return ResidualReport(residual=float(np.max(np.abs(res))), h=u.h, points=int(X.size), excluded=excluded)


def pv_residual(u: SampledFunction, params: PainleveParams) -> float:
    return pv_residual_report(u, params).residual


# --- NLS -------------------------------------------------------------------

def nls_residual(field: WaveField, order: int = 2) -> float:
    """max |iψ_t + ½ψ_xx + |ψ|²ψ| en los puntos interiores de una malla uniforme"""
    if field.x.size < 5 or field.t.size < 5:
        raise StencilError(f"need at least 5 points per axis, got {field.t.size} x {field.x.size}")
    _check_uniform(field.x, "x grid")
    _check_uniform(field.t, "t grid")
    hx = float(field.x[1] - field.x[0])
    ht = float(field.t[1] - field.t[0])
    psi = field.values
    ix, _, psi_xx = derivatives(psi, hx, order, axis=1)
    it, psi_t, _ = derivatives(psi, ht, order, axis=0)
    core = psi[it, ix]
    res = 1j * psi_t[:, ix] + 0.5 * psi_xx[it, :] + np.abs(core) ** 2 * core
    return float(np.max(np.abs(res)))


def nls_cross_residual(solver: Callable[[float, float], complex], X: float, T: float, h: float) -> float:
    """Residuo de NLS en (X, T) con la cruz de 5 puntos de paso h"""
    c = solver(X, T)
    xx = (solver(X + h, T) - 2 * c + solver(X - h, T)) / h ** 2
    tt = (solver(X, T + h) - solver(X, T - h)) / (2 * h)
    return abs(1j * tt + 0.5 * xx + abs(c) ** 2 * c)


def nls_refinement(centers: Sequence[Sequence[float]], steps: Sequence[float],
                   solver: Callable[[float, float], complex]) -> Dict[str, List[float]]:
    """Residuo máximo sobre los centros para cada paso y razones entre pasos consecutivos"""
    steps = sorted(steps, reverse=True)
    residuals = [max(nls_cross_residual(solver, X, T, h) for X, T in centers) for h in steps]
    ratios = [residuals[i] / residuals[i + 1] for i in range(len(residuals) - 1)]
    for h, r in zip(steps, residuals):
        logger.info(f"🔬 NLS h={h:g} residuo={r:.3e}")
    return {"steps": list(steps), "residuals": residuals, "ratios": ratios}


def model_field_solver(params: ModelParams, M: Optional[int] = None,
                       cache: Optional[SolveCache] = None) -> Callable[[float, float], complex]:
    return lambda X, T: model_solution(params.at(X, T), M, cache).value


# --- Λ (par de Lax de PV) ---------------------------------------------------

def lax_matrix(Z: complex, X: float, R1: np.ndarray, dXR1: np.ndarray, mu_mean: float, zeta: float,
               form: Literal["corrected", "unscaled"] = "corrected") -> np.ndarray:
    """Λ = −iXσ₃ + A/Z + B/(Z+ζ) con B = (∂_X(XR₁) − iμσ₃)/ζ y A = iX[σ₃,R₁] − B"""
    commutator = SIGMA3 @ R1 - R1 @ SIGMA3
    if form == "corrected":
        B = (dXR1 - 1j * mu_mean * SIGMA3) / zeta
    else:
        B = dXR1 - 1j * (mu_mean / zeta) * SIGMA3
    A = 1j * X * commutator - B
    return -1j * X * SIGMA3 + A / Z + B / (Z + zeta)


def _wave_matrix(sol, params: ModelParams, Z: complex) -> np.ndarray:
    E = evaluate_off_contour(sol, np.array(Z))
    phi = complex(model_phase(params, Z))
    return E @ np.diag([np.exp(-1j * phi), np.exp(1j * phi)])


def lax_residual_pv(X: float, zeta: float, mu_mean: float, Z_samples: Sequence[complex],
                    hx: float = 1e-3, hz: float = 1e-4, M: Optional[int] = None,
                    form: Literal["corrected", "unscaled"] = "corrected") -> Dict[str, float]:
    """max ‖W_Z − ΛW‖ con W = E·e^{−iσ₃φ} a T = 0; también reporta max |tr Λ|"""
    Z_samples = [complex(Z) for Z in Z_samples]
    for Z in Z_samples:
        gap = min(abs(abs(Z) - 1.0), abs(Z), abs(Z + zeta))
        if gap < 10 * hz:
            raise GeometryError(f"Z = {Z} too close to the contour or the points 0, −ζ")

    base = ModelParams(case="PV", X=X, T=0.0, zeta=zeta, mu_mean=mu_mean)
    M = M or settings.DEFAULT_MODES
    sols = {d: solve_collocation(model_jump(base.at(X + d * hx)), M) for d in (-1, 0, 1)}
    for sol in sols.values():
        extract_potential(sol)
    R1 = np.array(sols[0].R1)
    dXR1 = ((X + hx) * np.array(sols[1].R1) - (X - hx) * np.array(sols[-1].R1)) / (2 * hx)

    worst, trace = 0.0, 0.0
    for Z in Z_samples:
        W = _wave_matrix(sols[0], base, Z)
        W_Z = (_wave_matrix(sols[0], base, Z + hz) - _wave_matrix(sols[0], base, Z - hz)) / (2 * hz)
        Lam = lax_matrix(Z, X, R1, dXR1, mu_mean, zeta, form)
        worst = max(worst, float(np.linalg.norm(W_Z - Lam @ W, ord=2)))
        trace = max(trace, abs(np.trace(Lam)))
    return {"residual": worst, "trace": float(trace)}


# --- Masa y límite ζ → 0 ---------------------------------------------------

def mass_check(profile: WaveField, order: int = 2) -> float:
    """max |∂_X m + |Ψ|²| sobre el perfil (T fijo)"""
    if profile.mass is None:
        raise ShapeError("profile carries no mass samples")
    if profile.t.size != 1:
        raise ShapeError("mass check expects a single-time profile")
    _check_uniform(profile.x, "X grid")
    h = float(profile.x[1] - profile.x[0])
    inner, dm, _ = derivatives(profile.mass[0], h, order)
    return float(np.max(np.abs(dm + np.abs(profile.values[0, inner]) ** 2)))


def zeta_limit_report(mu_mean: float, zetas: Sequence[float], X_grid, M: Optional[int] = None,
                      cache: Optional[SolveCache] = None) -> List[Dict[str, float]]:
    """Distancia L2 entre Ψ_V(·,0;ζ) y Ψ_III(·,0) para ζ decrecientes"""
    reference = model_profile(ModelParams(case="PIII"), X_grid, M, cache)
    rows = []
    for zeta in sorted(zetas, reverse=True):
        pv = model_profile(ModelParams(case="PV", zeta=zeta, mu_mean=mu_mean), X_grid, M, cache)
        rows.append({"zeta": float(zeta), "l2": l2_error(pv, reference)})
        logger.info(f"🔭 ζ={zeta:g}: ‖Ψ_V − Ψ_III‖₂ = {rows[-1]['l2']:.3e}")
    return rows


# --- Cadenas completas -----------------------------------------------------

def piii_chain(x_grid, M: Optional[int] = None, order: int = 4,
               cache: Optional[SolveCache] = None) -> ResidualReport:
    """Resuelve Ψ_III(−x²/8, 0), extrae u y devuelve el residuo de PIII"""
    x_grid = np.asarray(x_grid, dtype=float)
    base = ModelParams(case="PIII")
    values = [model_solution(base.at(-x * x / 8.0), M, cache).value for x in x_grid]
    u = extract_u_piii(SampledFunction(abscissae=x_grid, values=values, stencil=order))
    return piii_residual_report(u)


def pv_chain(X_grid, mu_mean: float, zeta: float, M: Optional[int] = None, order: int = 4,
             form: Literal["corrected", "unscaled"] = "corrected", sign: int = 1,
             cache: Optional[SolveCache] = None) -> ResidualReport:
    """Resuelve Ψ_V(X, 0), extrae u sobre s = 2iζX y devuelve el residuo de PV"""
    X_grid = np.asarray(X_grid, dtype=float)
    base = ModelParams(case="PV", zeta=zeta, mu_mean=mu_mean)
    values = [model_solution(base.at(X), M, cache).value for X in X_grid]
    u = extract_u_pv(SampledFunction(abscissae=X_grid, values=values, stencil=order), zeta, form)
    return pv_residual_report(u, PainleveParams(mu_mean=mu_mean, zeta=zeta, sign=sign))


# --- Suite de verificación -------------------------------------------------

VERIFY_HEADER = ("check", "grid_h", "modes_M", "residual")
CHAIN_STEPS = (0.025, 0.0125)
MASS_STEP = 0.0125


def uniform_grid(lo: float, hi: float, h: float) -> np.ndarray:
    return np.linspace(lo, hi, int(round((hi - lo) / h)) + 1)


def run_verification(M: Optional[int] = None, cache: Optional[SolveCache] = None):
    """Ejecuta todas las comprobaciones; devuelve (filas check,grid_h,modes_M,residual, diagnósticos)"""
    modes = M or settings.DEFAULT_MODES
    rows: List[Dict[str, object]] = []
    diagnostics: Dict[str, object] = {"errors": {}, "excluded": {}}

    def record(check: str, h: float, residual: Optional[float]):
        rows.append({"check": check, "grid_h": h, "modes_M": modes, "residual": residual})

    def guarded(check: str, h: float, fn: Callable[[], object]):
        try:
            value = fn()
            if isinstance(value, ResidualReport):
                if value.excluded:
                    diagnostics["excluded"][f"{check}:{h:g}"] = value.excluded
                value = value.residual
        except NumericalError as e:
            logger.warning(f"⚠️ {check} (h={h:g}) falló: {e}")
            diagnostics["errors"][f"{check}:{h:g}"] = str(e)
            value = None
        record(check, h, value)
        return value

    logger.info("🔬 Solución manufacturada PIII")
    x = np.linspace(0.5, 1.5, 21)
    u = extract_u_piii(SampledFunction(abscissae=x, values=np.exp(x) / x ** 2, stencil=4))
    record("manufactured_piii", float(x[1] - x[0]), float(np.max(np.abs(u.values - 2.0))))

    logger.info("🔬 Residuo NLS de Ψ_III")
    centers = [(X, T) for X in (-0.5, 0.0, 0.5) for T in (-0.5, 0.0, 0.5)]
    refinement = nls_refinement(centers, (0.04, 0.02, 0.01), model_field_solver(ModelParams(case="PIII"), M, cache))
    for h, r in zip(refinement["steps"], refinement["residuals"]):
        record("nls_piii", h, r)
    diagnostics["nls_ratios"] = refinement["ratios"]

    logger.info("🔬 Cadenas PIII / PV")
    for h in CHAIN_STEPS:
        grid = uniform_grid(0.5, 3.0, h)
        guarded("piii_chain", h, lambda: piii_chain(grid, M, cache=cache))
        guarded("pv_chain", h, lambda: pv_chain(grid, 2.0, 0.3, M, cache=cache))

    logger.info("🔬 Matriz Λ de PV")
    for hx in (1e-2, 5e-3):
        try:
            lax = lax_residual_pv(0.5, 0.3, 1.0, (3.0, 0.5j), hx=hx, M=M)
            record("lax_pv", hx, lax["residual"])
            diagnostics[f"lax_trace:{hx:g}"] = lax["trace"]
        except NumericalError as e:
            diagnostics["errors"][f"lax_pv:{hx:g}"] = str(e)
            record("lax_pv", hx, None)

    logger.info("🔬 Masa y límite ζ → 0")
    X_grid = uniform_grid(-1.0, 1.0, MASS_STEP)
    guarded("mass_piii", MASS_STEP, lambda: mass_check(model_profile(ModelParams(case="PIII"), X_grid, M, cache), order=4))
    # identidad de masa para PV: solo diagnóstico
    guarded("mass_pv", MASS_STEP, lambda: mass_check(
        model_profile(ModelParams(case="PV", zeta=0.3, mu_mean=2.0), X_grid, M, cache), order=4))
    X_grid = uniform_grid(-1.0, 1.0, 0.05)
    h = 0.05
    try:
        limit = zeta_limit_report(2.0, (1e-2, 1e-3), X_grid, M, cache)
        for row in limit:
            record(f"zeta_limit:{row['zeta']:g}", h, row["l2"])
        diagnostics["zeta_limit"] = limit
    except NumericalError as e:
        diagnostics["errors"]["zeta_limit"] = str(e)
    return rows, diagnostics
