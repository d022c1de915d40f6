"""
Schemas Pydantic de los ajustes.

Es lo que devuelven los servicios de estimación y lo que el CLI
serializa con `model_dump(mode="json")`.
"""

from pydantic import BaseModel, Field, field_validator

from app.models.enums import JacobianMode, Method


class TraceStep(BaseModel):
    """Una fila de la traza de iteraciones.

    En la polisérica solo hay (iteration, rho); e_x y E_Y quedan vacíos.
    """
    iteration: int = Field(..., ge=0, examples=[1])
    rho: float = Field(..., examples=[0.7532])
    e_x: list[float] = Field(default_factory=list)
    E_Y: list[float] = Field(default_factory=list)


class _CorrelationFit(BaseModel):
    """Campos comunes de los ajustes IRLS."""
    method: Method
    rho: float = Field(..., gt=-1.0, lt=1.0, examples=[0.3973])
    se: float = Field(..., ge=0.0, examples=[0.0414])
    iterations: int = Field(..., ge=0, examples=[7])
    converged: bool
    n: float = Field(..., gt=0, examples=[500])
    trace: list[TraceStep] = Field(default_factory=list)

    @field_validator("trace")
    @classmethod
    def trace_not_empty(cls, v: list[TraceStep]) -> list[TraceStep]:
        """Todo ajuste registra al menos el punto de partida."""
        if not v:
            raise ValueError("la traza no puede estar vacía")
        return v


class PolyserialFit(_CorrelationFit):
    """Resultado de la correlación polisérica por IRLS."""
    method: Method = Method.POLYSERIAL
    categories: int = Field(..., ge=2, examples=[3])


class PolychoricFit(_CorrelationFit):
    """Resultado de la correlación tetracórica o policórica por IRLS."""
    method: Method = Method.POLYCHORIC
    shape: tuple[int, int] = Field(..., examples=[(2, 2)])
    jacobian: JacobianMode | None = None


class MlFit(BaseModel):
    """Resultado del oráculo de máxima verosimilitud en dos pasos."""
    method: Method
    rho: float = Field(..., gt=-1.0, lt=1.0)
    loglik: float
    evaluations: int = Field(..., ge=0)
    converged: bool

    @field_validator("loglik")
    @classmethod
    def loglik_finite(cls, v: float) -> float:
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError("loglik debe ser finita")
        return v


class TransposeReport(BaseModel):
    """Comparación del ajuste de una tabla y de su traspuesta."""
    rho: float
    rho_transposed: float
    gap: float = Field(..., ge=0.0)
    se: float
    se_transposed: float
