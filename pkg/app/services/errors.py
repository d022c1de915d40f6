"""Excepciones de negocio de la estimación.

Todas heredan de EstimationError, que es lo que capturan
`safe_estimate`, la simulación y el modo matriz.
La no convergencia NO es una excepción: se marca en el resultado.
"""

from typing import Any


class EstimationError(Exception):
    """Error base de cualquier estimación."""


class DomainError(EstimationError, ValueError):
    """Argumento fuera de dominio (p ∉ (0,1), |ρ| fuera de rango, formas)."""


class DegenerateCellError(EstimationError):
    """La masa de una celda o intervalo es despreciable."""

    def __init__(self, cell: Any, mass: float) -> None:
        self.cell = cell
        self.mass = mass
        super().__init__(f"Celda degenerada {cell}: masa {mass:.3e}")


class DegenerateTableError(EstimationError):
    """La tabla no permite estimar (categorías vacías, menos de 2×2...)."""

    def __init__(self, reason: str) -> None:
        self.reason = reason
        super().__init__(f"Tabla degenerada: {reason}")


class DegenerateDataError(EstimationError):
    """Los datos no permiten estimar (serie constante, pocos casos...)."""

    def __init__(self, reason: str) -> None:
        self.reason = reason
        super().__init__(f"Datos degenerados: {reason}")


class SingularityError(EstimationError):
    """|ρ| ≥ 1 donde se necesita √(1 − ρ²) > 0."""

    def __init__(self, rho: float) -> None:
        self.rho = rho
        super().__init__(f"Correlación singular: |ρ| = {abs(rho)!r} ≥ 1")


class NumericalBreakdownError(EstimationError):
    """Una cantidad que debe ser positiva no lo es."""

    def __init__(self, quantity: str, values: Any = None) -> None:
        self.quantity = quantity
        self.values = values
        super().__init__(f"Ruptura numérica en {quantity}: {values}")


class SingularCovarianceError(EstimationError):
    """Σ no es factorizable ni siquiera tras añadir el ridge."""

    def __init__(self, trace: float) -> None:
        self.trace = trace
        super().__init__(f"Covarianza singular (traza {trace:.3e})")
