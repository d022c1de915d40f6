"""
Schemas Pydantic de la simulación Monte Carlo.

SimConfig viaja como JSON a las tareas Celery: todo lo que contiene
debe ser serializable.
"""

from pydantic import BaseModel, Field, field_validator

from app.models.enums import Engine, Executor, JacobianMode

# Semillas de 64 bits
_SEED_LIMIT = 2**64


class SimConfig(BaseModel):
    """Configuración de un experimento.

    r = None indica polisérica (la segunda variable queda continua).
    """
    model_config = {"frozen": True}

    rho: float = Field(..., ge=-1.0, le=1.0, examples=[0.4])
    N: int = Field(..., ge=4, examples=[500])
    s: int = Field(..., ge=2, le=9, examples=[2])
    r: int | None = Field(None, ge=2, le=9, examples=[2])
    reps: int = Field(..., ge=1, examples=[1000])
    seed: int = Field(0, ge=0, lt=_SEED_LIMIT, examples=[1])
    estimators: list[Engine] = Field(default_factory=lambda: [Engine.IRLS])
    jacobian: JacobianMode | None = None
    executor: Executor = Executor.SERIAL
    threads: int = Field(1, ge=1)
    batch_size: int = Field(50, ge=1)

    @field_validator("estimators")
    @classmethod
    def estimators_unique(cls, v: list[Engine]) -> list[Engine]:
        """Al menos un estimador, sin repetir, en orden canónico."""
        if not v:
            raise ValueError("hace falta al menos un estimador")
        return sorted(set(v), key=lambda e: list(Engine).index(e))

    @property
    def is_polyserial(self) -> bool:
        return self.r is None


class ReplicationRecord(BaseModel):
    """Resultado de un estimador en una réplica."""
    index: int = Field(..., ge=0)
    engine: Engine
    success: bool
    rho: float | None = None
    se: float | None = None
    converged: bool | None = None
    error: str | None = None
    seconds: float = Field(0.0, ge=0.0)


class EstimatorMetrics(BaseModel):
    """Métricas de un estimador sobre las réplicas válidas.

    - mean: media de ρ̂
    - mb: sesgo medio, mean − ρ
    - mrb: sesgo relativo medio, mb / ρ (None si ρ = 0: se usa mb)
    - rmse: √(media de (ρ̂ − ρ)²)
    - sd: desviación típica de ρ̂ con denominador n (None si n < 2)
    - msd: media de los errores estándar reportados
    """
    engine: Engine
    successes: int = Field(..., ge=0)
    failures: int = Field(..., ge=0)
    nonconverged: int = Field(0, ge=0)
    mean: float | None = None
    mb: float | None = None
    mrb: float | None = None
    rmse: float | None = None
    sd: float | None = None
    msd: float | None = None
    seconds: float = Field(0.0, ge=0.0)


class SimReport(BaseModel):
    """Informe de una simulación."""
    config: SimConfig
    metrics: list[EstimatorMetrics]
    wall_seconds: float = Field(0.0, ge=0.0)

    def statistics(self) -> dict:
        """El informe sin tiempos: depende solo de la configuración."""
        return self.model_dump(
            mode="json",
            exclude={"wall_seconds": True, "metrics": {"__all__": {"seconds"}}},
        )

    def for_engine(self, engine: Engine) -> EstimatorMetrics:
        for m in self.metrics:
            if m.engine == engine:
                return m
        raise KeyError(engine)


class BenchmarkReport(BaseModel):
    """Tiempos de IRLS frente a ML sobre las mismas tablas."""
    config: SimConfig
    irls_seconds: float = Field(..., ge=0.0)
    ml_seconds: float = Field(..., ge=0.0)
    ratio: float | None = Field(None, description="ml_seconds / irls_seconds")
    report: SimReport
