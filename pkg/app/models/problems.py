# app/models/problems.py
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .rhp import SolverDiagnostics


class ModelParams(BaseModel):
    """Parámetros del problema modelo PIII / PV en el punto (X, T)"""
    model_config = ConfigDict(frozen=True)

    case: Literal["PIII", "PV"]
    X: float = 0.0
    T: float = 0.0
    zeta: Optional[float] = None
    mu_mean: float = Field(default=2.0, gt=0)

    @field_validator("case", mode="before")
    @classmethod
    def _upper_case(cls, v):
        return v.upper() if isinstance(v, str) else v

    @model_validator(mode="after")
    def _check_zeta(self):
        if self.case == "PV" and (self.zeta is None or not 0.0 < self.zeta < 1.0):
            raise ValueError(f"PV requires 0 < zeta < 1, got {self.zeta}")
        return self

    def at(self, X: float, T: Optional[float] = None) -> "ModelParams":
        return self.model_copy(update={"X": float(X), "T": self.T if T is None else float(T)})

    def cache_key(self, M: Optional[int]) -> str:
        if self.case == "PIII":
            return f"PIII:{self.X!r}:{self.T!r}:{M}"
        return f"PV:{self.X!r}:{self.T!r}:{self.zeta!r}:{self.mu_mean!r}:{M}"


class ModelPoint(BaseModel):
    """Potencial Ψ, masa m y diagnósticos del solver en un punto (X, T)"""
    X: float
    T: float
    psi: Tuple[float, float]
    mass: float
    R1: Tuple[Tuple[float, float], ...]
    diagnostics: SolverDiagnostics

    @property
    def value(self) -> complex:
        return complex(*self.psi)

    @property
    def R1_matrix(self) -> np.ndarray:
        return np.array([complex(*v) for v in self.R1], dtype=complex).reshape(2, 2)

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump()
