"""
Fixtures de Pytest para tests de polyirls.

Estrategia:
- Tablas poblacionales exactas (umbrales en cero) como conteos reales
- Configuración limpia en cada test: get_settings se cachea con lru_cache
- Ficheros CSV de prueba escritos en tmp_path
- Celery en modo eager: las tareas corren en el mismo proceso
"""

import math
from collections.abc import Callable, Generator
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from app.config import get_settings
from app.models.tables import ContingencyTable


def population_2x2(rho: float, N: float = 1000.0) -> ContingencyTable:
    """Tabla 2×2 poblacional con umbrales en 0: P_11 = 1/4 + asin(ρ)/2π."""
    p11 = 0.25 + math.asin(rho) / (2.0 * math.pi)
    p12 = 0.5 - p11
    return ContingencyTable.from_counts([[p11 * N, p12 * N], [p12 * N, p11 * N]])


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch: pytest.MonkeyPatch) -> Generator[None, None, None]:
    """Cada test parte de la configuración por defecto."""
    monkeypatch.setenv("CELERY_TASK_ALWAYS_EAGER", "true")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


# --- Tablas de prueba ---

@pytest.fixture
def population_table() -> Callable[..., ContingencyTable]:
    """Factory de tablas poblacionales 2×2."""
    return population_2x2


@pytest.fixture
def rho_half_table() -> ContingencyTable:
    """Tabla poblacional ρ=0.5, N=1000 (proporciones 1/3, 1/6, 1/6, 1/3)."""
    return population_2x2(0.5)


@pytest.fixture
def skewed_table() -> ContingencyTable:
    """Tabla 3×4 asimétrica sin celdas vacías."""
    return ContingencyTable.from_counts([
        [40, 22, 9, 3],
        [18, 35, 27, 11],
        [4, 13, 30, 38],
    ])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


# --- Ficheros CSV ---

@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[[pd.DataFrame, str], Path]:
    """Escribe un DataFrame como CSV en tmp_path y devuelve la ruta."""

    def _write(frame: pd.DataFrame, name: str = "data.csv") -> Path:
        path = tmp_path / name
        frame.to_csv(path, index=False)
        return path

    return _write


@pytest.fixture
def mixed_frame(rng: np.random.Generator) -> pd.DataFrame:
    """Datos mixtos: dos ordinales, una continua, una constante y una de texto."""
    n = 400
    z = rng.multivariate_normal([0, 0, 0], [[1, .5, .4], [.5, 1, .3], [.4, .3, 1]], n)
    return pd.DataFrame({
        "A": np.digitize(z[:, 0], [-0.5, 0.6]) + 1,
        "B": np.digitize(z[:, 1], [0.0]) + 1,
        "C": np.round(z[:, 2], 6) + 0.5,
        "K": np.full(n, 3),
        "T": ["x"] * n,
    })
