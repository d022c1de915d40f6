"""
Tipos de valor que consumen los estimadores.

Dataclasses inmutables sobre arrays de numpy. Validan sus invariantes
estructurales al construirse; las reglas de "tabla estimable"
(2×2 mínimo, sin filas vacías) las aplican los servicios.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from app.services.errors import DegenerateTableError, DomainError


def _frozen(values: np.ndarray) -> np.ndarray:
    """Copia de solo lectura."""
    out = np.array(values, dtype=float, copy=True)
    out.setflags(write=False)
    return out


# ============================================
# Intervalos y umbrales
# ============================================


@dataclass(frozen=True)
class Interval:
    """Intervalo (lo, hi] sobre la recta real extendida."""
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi) or not self.lo < self.hi:
            raise DomainError(f"Intervalo inválido: ({self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Thresholds:
    """Puntos de corte interiores a_1 < … < a_{s−1}.

    a_0 = −∞ y a_s = +∞ están implícitos (ver `bounds`).
    """
    interior: np.ndarray

    def __post_init__(self) -> None:
        values = np.atleast_1d(np.asarray(self.interior, dtype=float))
        if values.ndim != 1 or values.size == 0:
            raise DomainError("Se necesita al menos un umbral interior")
        if not np.all(np.isfinite(values)):
            raise DomainError(f"Umbrales no finitos: {values}")
        if np.any(np.diff(values) <= 0):
            raise DomainError(f"Umbrales no estrictamente crecientes: {values}")
        object.__setattr__(self, "interior", _frozen(values))

    @property
    def n_categories(self) -> int:
        return self.interior.size + 1

    @property
    def bounds(self) -> np.ndarray:
        """(−∞, a_1, …, a_{s−1}, +∞)."""
        return np.concatenate(([-np.inf], self.interior, [np.inf]))

    def interval(self, i: int) -> Interval:
        """Intervalo de la categoría i (base 0)."""
        b = self.bounds
        return Interval(float(b[i]), float(b[i + 1]))


# ============================================
# Tablas de contingencia
# ============================================


@dataclass(frozen=True)
class CategoryMapping:
    """Correspondencia entre categorías originales y densas.

    rows[i] / cols[j] es la etiqueta original de la fila i / columna j.
    """
    rows: tuple[int, ...]
    cols: tuple[int, ...]


@dataclass(frozen=True)
class ContingencyTable:
    """Frecuencias n_ij de una tabla s×r.

    Los conteos pueden ser reales no negativos: así se representan
    tablas poblacionales (proporciones exactas por un N nominal).
    """
    counts: np.ndarray
    row_labels: tuple[int, ...] = ()
    col_labels: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=float)
        if counts.ndim != 2:
            raise DomainError(f"La tabla debe ser 2-D, forma {counts.shape}")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise DomainError("Los conteos deben ser finitos y no negativos")
        if counts.sum() <= 0:
            raise DegenerateTableError("tabla sin observaciones")
        s, r = counts.shape
        rows = tuple(self.row_labels) or tuple(range(1, s + 1))
        cols = tuple(self.col_labels) or tuple(range(1, r + 1))
        if len(rows) != s or len(cols) != r:
            raise DomainError("Etiquetas incompatibles con la forma de la tabla")
        object.__setattr__(self, "counts", _frozen(counts))
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @classmethod
    def from_counts(cls, grid: object) -> "ContingencyTable":
        """Construye la tabla desde cualquier rejilla anidada de números."""
        return cls(np.asarray(grid, dtype=float))

    @property
    def N(self) -> float:
        return float(self.counts.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape  # type: ignore[return-value]

    def transpose(self) -> "ContingencyTable":
        return ContingencyTable(self.counts.T, self.col_labels, self.row_labels)

    def reverse_columns(self) -> "ContingencyTable":
        return ContingencyTable(
            self.counts[:, ::-1], self.row_labels, self.col_labels[::-1],
        )

    def reverse_rows(self) -> "ContingencyTable":
        return ContingencyTable(
            self.counts[::-1, :], self.row_labels[::-1], self.col_labels,
        )

    def scaled(self, factor: float) -> "ContingencyTable":
        return ContingencyTable(self.counts * factor, self.row_labels, self.col_labels)


@dataclass(frozen=True)
class ProportionTable:
    """Proporciones P_ij con marginales y acumuladas.

    Construir con `tabulate.proportions`; `from_matrix` no normaliza
    (se usa para perturbar P en diferencias finitas).
    """
    P: np.ndarray
    N: float
    row_marginals: np.ndarray
    col_marginals: np.ndarray
    cum_row: np.ndarray
    cum_col: np.ndarray

    @classmethod
    def from_matrix(cls, P: np.ndarray, N: float) -> "ProportionTable":
        P = np.asarray(P, dtype=float)
        rows = P.sum(axis=1)
        cols = P.sum(axis=0)
        return cls(
            P=_frozen(P),
            N=float(N),
            row_marginals=_frozen(rows),
            col_marginals=_frozen(cols),
            cum_row=_frozen(np.cumsum(rows)),
            cum_col=_frozen(np.cumsum(cols)),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.P.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class ProportionCovariance:
    """Covarianza multinomial B de las proporciones apiladas por filas."""
    B: np.ndarray


# ============================================
# Resúmenes para la correlación polisérica
# ============================================


@dataclass(frozen=True)
class GroupedSummary:
    """Tamaños n_i y medias ȳ_i de la continua estandarizada por categoría.

    `pearson` es la correlación de Pearson entre los códigos 1..s y la y
    estandarizada, calculada a partir de los mismos resúmenes.
    """
    counts: np.ndarray
    ybar: np.ndarray
    N: int
    y_mean: float
    y_sd: float
    labels: tuple[int, ...]
    dropped: tuple[tuple[int, int], ...] = ()
    pearson: float = field(default=0.0)

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=float)
        ybar = np.asarray(self.ybar, dtype=float)
        if counts.shape != ybar.shape or counts.ndim != 1:
            raise DomainError("counts e ybar deben ser vectores de igual longitud")
        object.__setattr__(self, "counts", _frozen(counts))
        object.__setattr__(self, "ybar", _frozen(ybar))

    @property
    def n_categories(self) -> int:
        return self.counts.size

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def negated(self) -> "GroupedSummary":
        """Mismo resumen con la continua cambiada de signo."""
        return GroupedSummary(
            counts=self.counts,
            ybar=-self.ybar,
            N=self.N,
            y_mean=-self.y_mean,
            y_sd=self.y_sd,
            labels=self.labels,
            dropped=self.dropped,
            pearson=-self.pearson,
        )


@dataclass(frozen=True)
class CellMoments:
    """Momentos por categoría en la regresión polisérica.

    mu es informativo: el algoritmo solo usa e_x y sigma2.
    """
    e_x: np.ndarray
    mu: np.ndarray
    sigma2: np.ndarray
    n: np.ndarray


@dataclass(frozen=True)
class IterationState:
    """Estado de una iteración policórica."""
    e_x: np.ndarray
    e_cell: np.ndarray
    E_Y: np.ndarray
    Sigma: np.ndarray
