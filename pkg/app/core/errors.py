# app/core/errors.py
"""
Jerarquía de errores del laboratorio con códigos de salida para la CLI
"""
from typing import Optional, Sequence, Tuple


class LabError(Exception):
    exit_code = 1


class ConfigError(LabError):
    exit_code = 2


class NumericalError(LabError):
    exit_code = 3


class OutputError(LabError):
    exit_code = 4


class InvalidDataError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    def __init__(self, message: str, condition: Optional[float] = None,
                 pair: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.condition = condition
        self.pair = pair


class PrecisionExhaustedError(NumericalError):
    def __init__(self, message: str, bits: int):
        super().__init__(message)
        self.bits = bits


class ResolutionError(NumericalError):
    def __init__(self, message: str, modes: int, tail: float):
        super().__init__(message)
        self.modes = modes
        self.tail = tail


class DivergenceError(NumericalError):
    def __init__(self, message: str, norm: float):
        super().__init__(message)
        self.norm = norm


class NoConvergenceError(NumericalError):
    pass


class GeometryError(NumericalError):
    pass


class PoleError(NumericalError):
    pass


class StructureError(NumericalError):
    pass


class StencilError(NumericalError):
    pass


class ShapeError(NumericalError):
    pass


class SingularPointError(NumericalError):
    def __init__(self, message: str, abscissae: Sequence[float] = ()):
        super().__init__(message)
        self.abscissae = list(abscissae)
