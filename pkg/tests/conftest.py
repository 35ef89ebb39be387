# tests/conftest.py
import numpy as np
import pytest

from app.core.spectral import build_spectral_data
from app.models.solve_cache import SolveCache


@pytest.fixture
def cache():
    """Caché en memoria aislada por prueba"""
    return SolveCache(url="")


@pytest.fixture
def three_solitons():
    return build_spectral_data([0.3 + 1.0j, -0.5 + 0.7j, 0.1 + 1.5j])


@pytest.fixture
def x_grid():
    return np.linspace(-2.0, 2.0, 9)
