# app/models/painleve.py
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SampledFunction(BaseModel):
    """Valores complejos sobre una malla real uniforme; el argumento real es scale·abscissa"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    abscissae: np.ndarray
    values: np.ndarray
    stencil: Literal[2, 4] = 2
    scale_re: float = 1.0
    scale_im: float = 0.0

    @field_validator("abscissae", mode="before")
    @classmethod
    def _grid(cls, v):
        arr = np.array(v, dtype=float).reshape(-1)
        arr.setflags(write=False)
        return arr

    @field_validator("values", mode="before")
    @classmethod
    def _values(cls, v):
        arr = np.array(v, dtype=complex).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self):
        if self.values.shape != self.abscissae.shape:
            raise ValueError(f"{self.values.size} values for {self.abscissae.size} abscissae")
        if self.abscissae.size < self.stencil + 1:
            raise ValueError(f"order-{self.stencil} stencil needs at least {self.stencil + 1} points")
        if not np.all(np.diff(self.abscissae) > 0):
            raise ValueError("abscissae must be strictly increasing")
        return self

    @property
    def scale(self) -> complex:
        return complex(self.scale_re, self.scale_im)

    @property
    def argument(self) -> np.ndarray:
        return self.scale * self.abscissae

    @property
    def h(self) -> float:
        return float(self.abscissae[1] - self.abscissae[0])

    def with_values(self, abscissae, values, scale: Optional[complex] = None) -> "SampledFunction":
        scale = self.scale if scale is None else complex(scale)
        return SampledFunction(abscissae=abscissae, values=values, stencil=self.stencil,
                               scale_re=scale.real, scale_im=scale.imag)


class PainleveParams(BaseModel):
    """Constantes de PV a partir de θ₀ = −θ₁ = 2iμ/ζ, θ∞ = 0; `sign` es el ± de 1/(u−1)"""
    model_config = ConfigDict(frozen=True)

    case: Literal["PIII", "PV"] = "PV"
    mu_mean: float = Field(default=2.0, gt=0)
    zeta: float = Field(default=0.3, gt=0, lt=1)
    sign: Literal[1, -1] = 1

    @property
    def kappa(self) -> float:
        return self.mu_mean / self.zeta

    @property
    def theta_0(self) -> complex:
        return 2j * self.kappa

    @property
    def theta_1(self) -> complex:
        return -self.theta_0

    @property
    def theta_inf(self) -> complex:
        return 0j

    @property
    def alpha(self) -> float:
        return ((self.theta_0 - self.theta_1 + self.theta_inf) ** 2 / 8).real

    @property
    def beta(self) -> float:
        return (-((self.theta_0 - self.theta_1 - self.theta_inf) ** 2) / 8).real

    @property
    def gamma(self) -> float:
        return (1 - self.theta_0 - self.theta_1).real

    @property
    def delta(self) -> float:
        return -0.5


class ResidualReport(BaseModel):
    """Residuo máximo de una ecuación sobre los puntos interiores que no se excluyeron"""
    residual: float
    h: float
    points: int
    excluded: List[float] = Field(default_factory=list)
