# app/models/spectral.py
import math
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _frozen_complex(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=complex).reshape(-1)
    arr.setflags(write=False)
    return arr


def _pairs(arr: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in arr]


def _from_pairs(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


class Distribution(BaseModel):
    """Ley de probabilidad de amplitudes o velocidades"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["chi2", "gauss", "exp", "const"]
    params: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_params(self):
        expected = {"chi2": 1, "gauss": 2, "exp": 1, "const": 1}[self.kind]
        if len(self.params) != expected:
            raise ValueError(f"{self.kind} expects {expected} parameter(s), got {len(self.params)}")
        if self.kind == "chi2" and self.params[0] <= 0:
            raise ValueError("chi2 degrees of freedom must be positive")
        if self.kind == "gauss" and self.params[1] <= 0:
            raise ValueError("gauss variance must be positive")
        if self.kind == "exp" and self.params[0] <= 0:
            raise ValueError("exp rate must be positive")
        return self

    @classmethod
    def parse(cls, text: str) -> "Distribution":
        """Interpreta la gramática dist:param[:param] (chi2:4, gauss:0:15, exp:1, const:0)"""
        kind, *raw = text.strip().split(":")
        try:
            params = tuple(float(p) for p in raw)
        except ValueError as e:
            raise ValueError(f"invalid distribution parameters in '{text}'") from e
        return cls(kind=kind, params=params)

    @property
    def mean(self) -> float:
        if self.kind == "chi2":
            return self.params[0]
        if self.kind == "exp":
            return 1.0 / self.params[0]
        return self.params[0]

    @property
    def std(self) -> float:
        if self.kind == "chi2":
            return math.sqrt(2.0 * self.params[0])
        if self.kind == "gauss":
            return math.sqrt(self.params[1])
        if self.kind == "exp":
            return 1.0 / self.params[0]
        return 0.0

    @property
    def positive_support(self) -> bool:
        if self.kind in ("chi2", "exp"):
            return True
        if self.kind == "const":
            return self.params[0] > 0
        return False

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "chi2":
            return rng.chisquare(self.params[0], size=size)
        if self.kind == "gauss":
            return rng.normal(self.params[0], math.sqrt(self.params[1]), size=size)
        if self.kind == "exp":
            return rng.exponential(1.0 / self.params[0], size=size)
        return np.full(size, self.params[0], dtype=float)

    def describe(self) -> str:
        return ":".join([self.kind] + [repr(p) for p in self.params])


class SpectralData(BaseModel):
    """Datos de scattering sin reflexión: autovalores, parámetros de Darboux y constantes de normalización"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    eigenvalues: np.ndarray
    darboux_params: np.ndarray
    norming_constants: Optional[np.ndarray] = None
    drift: Optional[float] = None
    reflectionless: bool = True
    meta: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _default_params(cls, data: Any):
        if isinstance(data, dict) and data.get("darboux_params") is None:
            n = len(np.atleast_1d(data.get("eigenvalues", [])))
            data = {**data, "darboux_params": np.ones(n, dtype=complex)}
        return data

    @field_validator("eigenvalues", "darboux_params", mode="before")
    @classmethod
    def _to_array(cls, v):
        return _frozen_complex(v)

    @field_validator("norming_constants", mode="before")
    @classmethod
    def _to_optional_array(cls, v):
        return None if v is None else _frozen_complex(v)

    @model_validator(mode="after")
    def _check(self):
        if np.any(self.eigenvalues.imag <= 0):
            raise ValueError("eigenvalues must lie in the upper half plane")
        if self.darboux_params.shape != self.eigenvalues.shape:
            raise ValueError("darboux_params must match eigenvalues")
        if self.norming_constants is not None and self.norming_constants.shape != self.eigenvalues.shape:
            raise ValueError("norming_constants must match eigenvalues")
        if self.drift is not None and not (0.0 < self.drift < 1.0):
            raise ValueError("drift must lie in (0, 1)")
        return self

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.eigenvalues.imag

    def replace(self, **changes) -> "SpectralData":
        fields = {
            "eigenvalues": self.eigenvalues,
            "darboux_params": self.darboux_params,
            "norming_constants": self.norming_constants,
            "drift": self.drift,
            "reflectionless": self.reflectionless,
            "meta": dict(self.meta),
        }
        fields.update(changes)
        return SpectralData(**fields)

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "zeta": self.drift,
            "eigenvalues": _pairs(self.eigenvalues),
            "p": _pairs(self.darboux_params),
            "c": None if self.norming_constants is None else _pairs(self.norming_constants),
            "seed": self.meta.get("seed"),
            "meta": {k: v for k, v in self.meta.items() if k != "seed"},
        }

    @classmethod
    def from_json_dict(cls, payload: Dict[str, Any]) -> "SpectralData":
        meta = dict(payload.get("meta") or {})
        if payload.get("seed") is not None:
            meta["seed"] = payload["seed"]
        c = payload.get("c")
        data = cls(
            eigenvalues=_from_pairs(payload.get("eigenvalues", [])),
            darboux_params=None if payload.get("p") is None else _from_pairs(payload["p"]),
            norming_constants=None if c is None else _from_pairs(c),
            drift=payload.get("zeta"),
            meta=meta,
        )
        if "n" in payload and payload["n"] != data.n:
            raise ValueError(f"n={payload['n']} does not match {data.n} eigenvalues")
        return data


class RandomEnsembleConfig(BaseModel):
    """Configuración de un ensamble aleatorio PIII o PV"""
    model_config = ConfigDict(frozen=True)

    case: Literal["PIII", "PV"]
    n: int = Field(ge=1)
    amplitude_dist: Distribution
    velocity_dist: Distribution
    realizations: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    zeta: Optional[float] = None
    eta: float = 0.0

    @field_validator("case", mode="before")
    @classmethod
    def _upper_case(cls, v):
        return v.upper() if isinstance(v, str) else v

    @model_validator(mode="after")
    def _check(self):
        if self.case == "PV" and (self.zeta is None or not (0.0 < self.zeta < 1.0)):
            raise ValueError("PV requires 0 < zeta < 1")
        if not self.amplitude_dist.positive_support:
            raise ValueError("amplitude law must have positive support (gauss is for velocities only)")
        return self

    @property
    def mu_mean(self) -> float:
        return self.amplitude_dist.mean

    def with_n(self, n: int) -> "RandomEnsembleConfig":
        return self.model_copy(update={"n": n})
