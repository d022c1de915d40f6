"""
Interfaz base para los estimadores de correlación.

Todos los estimadores implementan el mismo contrato sobre un par de
series (x, y). Así el modo matriz y la simulación pueden añadir o
quitar estimadores sin tocar el resto del pipeline.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any

from numpy.typing import ArrayLike

from app.models.enums import ColumnKind, Engine, Method
from app.services.errors import EstimationError

logger = logging.getLogger(__name__)


@dataclass
class EstimateResult:
    """
    Resultado de un estimador.

    - estimator: nombre del estimador que lo produjo
    - success: si la estimación terminó sin error
    - method: coeficiente calculado (tetracórica, policórica...)
    - rho, se, iterations, converged: resumen del ajuste
    - n: observaciones usadas
    - error: mensaje si falló
    - fit: el objeto de ajuste completo (PolychoricFit, MlFit...)
    """
    estimator: str
    success: bool
    method: Method | None = None
    rho: float | None = None
    se: float | None = None
    iterations: int | None = None
    converged: bool | None = None
    n: int = 0
    error: str | None = None
    fit: Any = None


class CorrelationEstimator(ABC):
    """Interfaz que todos los estimadores deben implementar."""

    #: Tipos de columna (x, y) que acepta el estimador
    kinds: tuple[ColumnKind, ColumnKind]
    engine: Engine

    @property
    @abstractmethod
    def name(self) -> str:
        """Nombre único del estimador."""
        ...

    @abstractmethod
    def estimate(self, x: ArrayLike, y: ArrayLike) -> EstimateResult:
        """
        Estima la correlación entre x e y.

        Args:
            x: primera serie (códigos ordinales o valores continuos)
            y: segunda serie, misma longitud

        Returns:
            EstimateResult con el ajuste

        Raises:
            EstimationError: si los datos no permiten estimar
        """
        ...

    def safe_estimate(self, x: ArrayLike, y: ArrayLike) -> EstimateResult:
        """
        Wrapper que captura los EstimationError.

        Así un par degenerado no rompe la matriz ni la simulación; los
        errores de programación se propagan.
        """
        try:
            return self.estimate(x, y)
        except EstimationError as e:
            logger.error("Error en estimador %s: %s", self.name, e)
            return EstimateResult(
                estimator=self.name,
                success=False,
                error=str(e),
            )
