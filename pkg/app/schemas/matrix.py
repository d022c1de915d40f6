"""
Schemas Pydantic del esquema de columnas y de la matriz de correlaciones.
"""

from pydantic import BaseModel, Field, field_validator

from app.models.enums import ColumnKind, Method


class ColumnSpec(BaseModel):
    """Una columna del CSV y su tipo declarado."""
    name: str = Field(..., min_length=1, examples=["A1"])
    kind: ColumnKind = Field(..., examples=["ordinal"])


class Schema(BaseModel):
    """Tipos de todas las columnas, en el orden del fichero."""
    columns: list[ColumnSpec]

    @field_validator("columns")
    @classmethod
    def unique_names(cls, v: list[ColumnSpec]) -> list[ColumnSpec]:
        """Los nombres de columna no se pueden repetir."""
        names = [c.name for c in v]
        if len(names) != len(set(names)):
            raise ValueError("nombres de columna repetidos")
        return v

    @property
    def active(self) -> list[ColumnSpec]:
        """Columnas que participan (no ignoradas)."""
        return [c for c in self.columns if c.kind != ColumnKind.IGNORE]

    def kind_of(self, name: str) -> ColumnKind:
        for column in self.columns:
            if column.name == name:
                return column.kind
        raise KeyError(name)

    def with_overrides(self, overrides: dict[str, ColumnKind]) -> "Schema":
        """Copia con los tipos sustituidos para las columnas indicadas."""
        unknown = set(overrides) - {c.name for c in self.columns}
        if unknown:
            raise KeyError(", ".join(sorted(unknown)))
        return Schema(columns=[
            ColumnSpec(name=c.name, kind=overrides.get(c.name, c.kind))
            for c in self.columns
        ])


class PairResult(BaseModel):
    """Resultado de un par (i, j) de la matriz."""
    i: int
    j: int
    method: Method | None = None
    rho: float | None = None
    se: float | None = None
    n: int = 0
    converged: bool | None = None
    seconds: float = 0.0
    reason: str | None = None


class MatrixResult(BaseModel):
    """Matriz de correlaciones por pares completos.

    Las entradas ausentes son None y su motivo queda en `reasons`
    con clave "fila|columna".
    """
    names: list[str]
    estimate: list[list[float | None]]
    se: list[list[float | None]]
    method: list[list[Method | None]]
    n: list[list[int]]
    seconds: list[list[float]]
    reasons: dict[str, str] = Field(default_factory=dict)
