# app/models/requests.py
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field


class ModelRequest(BaseModel):
    case: str = "PIII"
    X: float = 0.0
    T: float = 0.0
    zeta: Optional[float] = None
    mu_mean: float = 2.0
    modes: Optional[int] = None


class ModelResponse(BaseModel):
    case: str
    X: float
    T: float
    psi_re: float
    psi_im: float
    abs_psi: float
    mass: float
    diagnostics: Dict[str, Any]


class SolitonRequest(BaseModel):
    eigenvalues: List[Tuple[float, float]]
    darboux_params: Optional[List[Tuple[float, float]]] = None
    x_min: float = -3.0
    x_max: float = 3.0
    points: int = Field(default=61, ge=1, le=2001)
    t: float = 0.0
    precision: str = "auto"


class SolitonResponse(BaseModel):
    n: int
    x: List[float]
    re: List[float]
    im: List[float]
    abs: List[float]
    mass: Optional[List[float]] = None
    peak: float


class SampleRequest(BaseModel):
    case: str = "PIII"
    n: int = Field(default=10, ge=1, le=5000)
    mu: str = "chi2:4"
    v: str = "gauss:0:15"
    seed: int = Field(default=0, ge=0)
    realization: int = Field(default=0, ge=0)
    zeta: Optional[float] = None
    eta: float = 0.0


class HealthResponse(BaseModel):
    status: str
    components: dict
    cache: dict
