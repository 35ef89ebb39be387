# app/models/rhp.py
from typing import Any, Callable, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class JumpMatrix(BaseModel):
    """Salto 2×2 definido en el anillo r_in ≤ |Z| ≤ r_out alrededor del círculo unidad"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    evaluator: Callable[[np.ndarray], np.ndarray]
    analyticity_margin: Tuple[float, float] = (0.5, 2.0)
    symmetric: bool = True
    label: str = "jump"
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_margin(self):
        r_in, r_out = self.analyticity_margin
        if not (0.0 <= r_in < 1.0 < r_out):
            raise ValueError(f"analyticity margin must satisfy r_in < 1 < r_out, got {self.analyticity_margin}")
        return self

    def __call__(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=complex)
        values = np.asarray(self.evaluator(Z.reshape(-1)), dtype=complex)
        return values.reshape(Z.shape + (2, 2))


class LaurentSeries(BaseModel):
    """Coeficientes matriciales a_k, k = −M..M; modes[k + M] = a_k"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    modes: np.ndarray
    M: int = Field(ge=0)

    @field_validator("modes", mode="before")
    @classmethod
    def _to_array(cls, v):
        arr = np.array(v, dtype=complex)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self):
        if self.modes.shape[0] != 2 * self.M + 1:
            raise ValueError(f"expected {2 * self.M + 1} modes, got {self.modes.shape[0]}")
        return self

    @classmethod
    def from_modes(cls, coeffs: Dict[int, Any], M: int, shape=(2, 2)) -> "LaurentSeries":
        modes = np.zeros((2 * M + 1,) + tuple(shape), dtype=complex)
        for k, a in coeffs.items():
            modes[k + M] = a
        return cls(modes=modes, M=M)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def mode(self, k: int) -> np.ndarray:
        if abs(k) > self.M:
            return np.zeros(self.modes.shape[1:], dtype=complex)
        return self.modes[k + self.M]

    def evaluate(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=complex)
        powers = Z[..., None] ** self.indices
        return np.tensordot(powers, self.modes, axes=([-1], [0]))

    def tail(self, fraction: float = 1.0 / 8.0) -> float:
        """max ‖a_k‖ para |k| ∈ [M − M·fraction, M], relativo a max(1, max ‖a_k‖)"""
        if self.M == 0:
            return 0.0
        norms = np.abs(self.modes).reshape(self.modes.shape[0], -1).max(axis=1)
        k = np.abs(self.indices)
        band = norms[k >= self.M - int(self.M * fraction)]
        return float(band.max() / max(1.0, norms.max()))

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        M = max(self.M, other.M)
        modes = np.zeros((2 * M + 1,) + self.modes.shape[1:], dtype=complex)
        modes[M - self.M:M + self.M + 1] += self.modes
        modes[M - other.M:M + other.M + 1] += other.modes
        return LaurentSeries(modes=modes, M=M)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + LaurentSeries(modes=-other.modes, M=other.M)


class SolverDiagnostics(BaseModel):
    M: int
    method: Literal["collocation", "neumann"]
    residual: float
    tail_jump: float
    tail_mu: float
    tail_tol: Optional[float] = None
    jump_scale: Optional[float] = None
    iterations: int = 0
    condition: Optional[float] = None
    jump_norm: Optional[float] = None

    def to_json_dict(self, R1: Optional[np.ndarray] = None) -> Dict[str, Any]:
        payload = self.model_dump()
        if R1 is not None:
            payload["R1"] = [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(R1)]
        return payload


class RhpSolution(BaseModel):
    """Solución del RHP: μ = E₋ en modos de Laurent, modos interiores de g = μ(J − I) y R1"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mu: LaurentSeries
    g_plus: np.ndarray
    R1: np.ndarray
    diagnostics: SolverDiagnostics
    label: str = "jump"

    @field_validator("g_plus", "R1", mode="before")
    @classmethod
    def _to_array(cls, v):
        arr = np.array(v, dtype=complex)
        arr.setflags(write=False)
        return arr

    @property
    def M(self) -> int:
        return self.mu.M
