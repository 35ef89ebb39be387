# app/models/field.py
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class PrecisionPolicy(BaseModel):
    """Política de precisión: fija (bits de mantisa) o automática con escalera"""
    model_config = ConfigDict(frozen=True)

    mode: Literal["fixed", "auto"] = "fixed"
    mantissa_bits: int = Field(default=53, ge=53)
    escalation_tol: float = 1e-8

    @classmethod
    def fixed(cls, bits: int = 53) -> "PrecisionPolicy":
        return cls(mode="fixed", mantissa_bits=bits)

    @classmethod
    def auto(cls, max_bits: int = 512, tol: float = 1e-8) -> "PrecisionPolicy":
        return cls(mode="auto", mantissa_bits=max_bits, escalation_tol=tol)

    @classmethod
    def parse(cls, text: str) -> "PrecisionPolicy":
        """'53', '256', 'auto' o 'auto:512'"""
        head, _, tail = text.strip().partition(":")
        if head == "auto":
            return cls.auto(int(tail) if tail else 512)
        return cls.fixed(int(head))

    def ladder(self, rungs) -> Tuple[int, ...]:
        if self.mode == "fixed":
            return (self.mantissa_bits,)
        return tuple(b for b in rungs if b <= self.mantissa_bits) or (53,)


class WaveField(BaseModel):
    """Muestras complejas ψ sobre una malla (x, t); values[i, j] = ψ(x_j, t_i)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray
    frame: Literal["raw", "PIII", "PV"] = "raw"
    frame_params: Dict[str, Any] = Field(default_factory=dict)
    mass: Optional[np.ndarray] = None

    @field_validator("x", "t", mode="before")
    @classmethod
    def _grid(cls, v):
        arr = np.array(v, dtype=float).reshape(-1)
        arr.setflags(write=False)
        return arr

    @field_validator("values", mode="before")
    @classmethod
    def _values(cls, v):
        arr = np.array(v, dtype=complex)
        arr.setflags(write=False)
        return arr

    @field_validator("mass", mode="before")
    @classmethod
    def _mass(cls, v):
        if v is None:
            return None
        arr = np.array(v, dtype=float)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_shape(self):
        shape = (self.t.size, self.x.size)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {shape}")
        if self.mass is not None and self.mass.shape != shape:
            raise ValueError(f"mass shape {self.mass.shape} does not match grid {shape}")
        return self

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def metadata(self) -> Dict[str, Any]:
        return {
            "frame": self.frame,
            "frame_params": self.frame_params,
            "nx": int(self.x.size),
            "nt": int(self.t.size),
            "has_mass": self.mass is not None,
        }


class ScalingMap(BaseModel):
    """Cambio de variables (X, T) → (x, t) y factor de amplitud del marco reescalado"""
    model_config = ConfigDict(frozen=True)

    case: Literal["PIII", "PV"]
    n: int = Field(ge=1)
    mu_mean: float = Field(gt=0)

    @property
    def amplitude(self) -> float:
        if self.case == "PIII":
            return 2.0 / (self.n * self.mu_mean)
        return 1.0 / self.n

    @property
    def radius(self) -> float:
        """Radio del círculo que encierra los polos en el plano z"""
        if self.case == "PIII":
            return self.n * self.mu_mean / 2.0
        return float(self.n)

    def forward(self, X, T):
        X = np.asarray(X, dtype=float)
        T = np.asarray(T, dtype=float)
        if self.case == "PIII":
            s = self.n * self.mu_mean
            return 2.0 * X / s, 4.0 * T / s ** 2
        return X / self.n, T / self.n ** 2
