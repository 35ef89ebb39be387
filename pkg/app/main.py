# app/main.py
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
import logging
import numpy as np

from .core.config import settings
from .core.errors import ConfigError, NumericalError
from .core.model_problems import model_solution
from .core.soliton import evaluate_field, extremal_peak
from .core.spectral import build_spectral_data, sample_ensemble
from .models.field import PrecisionPolicy
from .models.problems import ModelParams
from .models.requests import (
    HealthResponse,
    ModelRequest,
    ModelResponse,
    SampleRequest,
    SolitonRequest,
    SolitonResponse,
)
from .models.solve_cache import SolveCache
from .models.spectral import Distribution, RandomEnsembleConfig

# Configurar logging
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)

logger = logging.getLogger(__name__)

# Crear aplicación FastAPI
app = FastAPI(
    title=settings.API_TITLE,
    version=settings.API_VERSION,
    debug=settings.API_DEBUG,
    description="Laboratorio numérico de solitones extremales y problemas de Riemann–Hilbert de Painlevé"
)

# Configurar CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Instancia global
cache: SolveCache = None


@app.on_event("startup")
async def startup_event():
    """Inicialización al arrancar: caché de soluciones"""
    global cache
    logger.info("🚀 Iniciando Soliton Rogue Lab...")
    print(f"📡 API: {settings.API_HOST}:{settings.API_PORT}")
    print(f"💾 Caché: {settings.cache_backend}")
    cache = SolveCache()
    logger.info(f"✅ Caché inicializada ({cache.backend})")


@app.on_event("shutdown")
async def shutdown_event():
    logger.info("👋 Cerrando Soliton Rogue Lab...")


@app.exception_handler(ConfigError)
async def config_error_handler(request: Request, exc: ConfigError):
    return JSONResponse(status_code=422, content={"detail": str(exc), "kind": type(exc).__name__})


@app.exception_handler(NumericalError)
async def numerical_error_handler(request: Request, exc: NumericalError):
    return JSONResponse(status_code=409, content={"detail": str(exc), "kind": type(exc).__name__})


def get_cache() -> SolveCache:
    """Caché activa; se crea bajo demanda si el evento de arranque no corrió"""
    global cache
    if cache is None:
        cache = SolveCache()
    return cache


def _checked(build):
    # ValidationError hereda de ValueError
    try:
        return build()
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.get("/")
async def root():
    """Endpoint raíz con información básica"""
    return {
        "message": "Soliton Rogue Lab API",
        "version": settings.API_VERSION,
        "status": "running",
        "endpoints": {
            "model": "/model",
            "soliton": "/soliton",
            "sample": "/sample",
            "health": "/health",
            "docs": "/docs",
        },
        "solver": {
            "default_modes": settings.DEFAULT_MODES,
            "max_modes": settings.MAX_MODES,
            "precision_ladder": settings.PRECISION_LADDER,
        },
    }


@app.get("/health", response_model=HealthResponse)
async def health_check():
    """Verifica el estado del solver y de la caché"""
    cache_health = get_cache().health_check()
    try:
        origin = model_solution(ModelParams(case="PIII"), settings.DEFAULT_MODES, get_cache())
        solver = {"status": "healthy", "abs_psi_00": abs(origin.value)}
    except NumericalError as e:
        solver = {"status": "error", "error": str(e)}
    status = "healthy" if solver["status"] == "healthy" and cache_health.get("status") == "healthy" else "degraded"
    return HealthResponse(status=status, components={"solver": solver}, cache=cache_health)


@app.post("/model", response_model=ModelResponse)
def solve_model(request: ModelRequest):
    """Ψ, m y diagnósticos del problema modelo en (X, T)"""
    params = _checked(lambda: ModelParams(
        case=request.case, X=request.X, T=request.T, zeta=request.zeta, mu_mean=request.mu_mean,
    ))
    point = model_solution(params, request.modes, get_cache())
    return ModelResponse(
        case=params.case, X=point.X, T=point.T, psi_re=point.psi[0], psi_im=point.psi[1],
        abs_psi=abs(point.value), mass=point.mass, diagnostics=point.diagnostics.model_dump(),
    )


@app.post("/soliton", response_model=SolitonResponse)
def soliton_profile(request: SolitonRequest):
    """ψ_N(x, t) sobre una malla uniforme en x"""
    lam = [complex(re, im) for re, im in request.eigenvalues]
    p = None if request.darboux_params is None else [complex(re, im) for re, im in request.darboux_params]
    data = _checked(lambda: build_spectral_data(lam, p))
    precision = _checked(lambda: PrecisionPolicy.parse(request.precision))
    x = np.linspace(request.x_min, request.x_max, request.points)
    field = evaluate_field(data, x, [request.t], precision)
    values = field.values[0]
    return SolitonResponse(
        n=data.n, x=x.tolist(), re=values.real.tolist(), im=values.imag.tolist(),
        abs=np.abs(values).tolist(), mass=None if field.mass is None else field.mass[0].tolist(),
        peak=extremal_peak(data),
    )


@app.post("/sample")
def sample(request: SampleRequest):
    """Una realización del ensamble aleatorio como JSON de datos espectrales"""
    config = _checked(lambda: RandomEnsembleConfig(
        case=request.case, n=request.n, amplitude_dist=Distribution.parse(request.mu),
        velocity_dist=Distribution.parse(request.v), realizations=request.realization + 1,
        seed=request.seed, zeta=request.zeta, eta=request.eta,
    ))
    return sample_ensemble(config, request.realization).to_json_dict()


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=settings.API_HOST,
        port=settings.API_PORT,
        reload=settings.API_DEBUG
    )
