# app/models/report.py
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class ErrorRecord(BaseModel):
    """Error L2 de una realización frente al perfil modelo"""
    N: int
    realization: int
    seed: int
    l2_error: float
    peak: float
    attempt: int = 0


class FailureRecord(BaseModel):
    N: int
    realization: int
    error: str
    kind: str


class ExperimentReport(BaseModel):
    case: Literal["PIII", "PV"]
    n_values: List[int]
    records: List[ErrorRecord] = Field(default_factory=list)
    failures: List[FailureRecord] = Field(default_factory=list)
    grid: Dict[str, Any] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
    diagnostics: Dict[str, Any] = Field(default_factory=dict)
    timings: Dict[str, float] = Field(default_factory=dict)
    profile: Dict[str, List[float]] = Field(default_factory=dict)

    def errors_for(self, n: int) -> np.ndarray:
        return np.array([r.l2_error for r in self.records if r.N == n], dtype=float)

    def peaks_for(self, n: int) -> np.ndarray:
        return np.array([r.peak for r in self.records if r.N == n], dtype=float)

    def mean_error(self, n: int) -> float:
        errors = self.errors_for(n)
        return float(errors.mean()) if errors.size else float("nan")

    def std_error(self, n: int) -> float:
        errors = self.errors_for(n)
        return float(errors.std(ddof=1)) if errors.size > 1 else 0.0

    def summary(self) -> List[Dict[str, Any]]:
        return [
            {"case": self.case, "N": n, "mean_error": self.mean_error(n), "std_error": self.std_error(n)}
            for n in self.n_values
        ]


class GoodSetStats(BaseModel):
    """Frecuencias empíricas de fallo de Ω_δ, V_{2δ} y 𝒰_{2δ}"""
    N: int = Field(ge=1)
    delta: float
    trials: int = Field(ge=1)
    omega_fail: float = Field(ge=0, le=1)
    partial_sum_fail: float = Field(ge=0, le=1)
    uniform_fail: Optional[float] = Field(default=None, ge=0, le=1)
    zeta: Optional[float] = None

    def std(self, frequency: float) -> float:
        """Desviación binomial de una frecuencia estimada"""
        return float(np.sqrt(max(frequency * (1.0 - frequency), 0.0) / self.trials))

    @property
    def any_fail(self) -> float:
        values = [self.omega_fail, self.partial_sum_fail] + (
            [self.uniform_fail] if self.uniform_fail is not None else []
        )
        return max(values)


class RunConfig(BaseModel):
    """Configuración validada de un comando de la CLI"""
    command: Literal["sample", "soliton", "model", "universality", "verify", "goodset", "serve"]
    case: Literal["PIII", "PV"] = "PIII"
    n_values: List[int] = Field(default_factory=lambda: [10])
    amplitude: str = "chi2:4"
    velocity: str = "gauss:0:15"
    zeta: Optional[float] = None
    mu_mean: Optional[float] = None
    realizations: int = Field(default=1, ge=1)
    x_min: float = -3.0
    x_max: float = 3.0
    points: int = Field(default=121, ge=1)
    t_values: List[float] = Field(default_factory=lambda: [0.0])
    modes: Optional[int] = None
    precision: str = "auto"
    seed: int = Field(default=0, ge=0)
    delta: Optional[float] = None
    trials: int = Field(default=1000, ge=1)
    out: str = "out"
    format: Literal["csv", "json"] = "csv"
    data_file: Optional[str] = None
    compare_oracle: bool = False
    jump_check: bool = False
    eta: float = 0.0

    @field_validator("case", mode="before")
    @classmethod
    def _upper_case(cls, v):
        return v.upper() if isinstance(v, str) else v

    @model_validator(mode="after")
    def _check(self):
        if self.case == "PV" and self.command in ("sample", "model", "universality", "goodset"):
            if self.zeta is None:
                raise ValueError("--zeta is required with --case pv")
            if not 0.0 < self.zeta < 1.0:
                raise ValueError(f"zeta must lie in (0, 1), got {self.zeta}")
        if self.x_max < self.x_min:
            raise ValueError("x_max must not be smaller than x_min")
        if any(n < 1 for n in self.n_values):
            raise ValueError("N values must be positive")
        return self

    @property
    def x_grid(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.points)
