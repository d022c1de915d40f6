"""
Resúmenes de datos crudos para los estimadores.

Tablas de contingencia, proporciones con su covarianza multinomial,
umbrales a partir de marginales acumuladas y resúmenes agrupados
para la polisérica.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike

from app.models.tables import (
    CategoryMapping,
    ContingencyTable,
    GroupedSummary,
    ProportionCovariance,
    ProportionTable,
    Thresholds,
)
from app.services.errors import (
    DegenerateDataError,
    DegenerateTableError,
    DomainError,
)
from app.services.gaussian import quantile

logger = logging.getLogger(__name__)

# Tolerancia para aceptar que la última acumulada vale 1
_CUMULATIVE_SLACK = 1e-9


def ordinal_codes(values: ArrayLike, name: str) -> np.ndarray:
    """Valida que la serie sean enteros positivos y la devuelve como int64."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise DomainError(f"{name} debe ser una serie 1-D")
    as_float = arr.astype(float)
    if not np.all(np.isfinite(as_float)) or np.any(as_float != np.round(as_float)):
        raise DomainError(f"{name} debe contener códigos enteros")
    codes = as_float.astype(np.int64)
    if np.any(codes < 1):
        raise DomainError(f"{name} debe contener códigos positivos")
    return codes


def crosstab(x_codes: ArrayLike, y_codes: ArrayLike) -> ContingencyTable:
    """Tabla de contingencia de dos series ordinales.

    Las categorías se densifican: solo aparecen los códigos observados,
    en orden, y sus etiquetas originales quedan en row_labels/col_labels.
    """
    x = ordinal_codes(x_codes, "x_codes")
    y = ordinal_codes(y_codes, "y_codes")
    if x.size != y.size:
        raise DomainError(f"Longitudes distintas: {x.size} vs {y.size}")
    if x.size < 2:
        raise DegenerateDataError("se necesitan al menos 2 observaciones")

    row_labels, xi = np.unique(x, return_inverse=True)
    col_labels, yj = np.unique(y, return_inverse=True)
    if row_labels.size < 2:
        raise DegenerateTableError("x tiene una sola categoría observada")
    if col_labels.size < 2:
        raise DegenerateTableError("y tiene una sola categoría observada")

    counts = np.zeros((row_labels.size, col_labels.size))
    np.add.at(counts, (xi, yj), 1.0)
    return ContingencyTable(
        counts,
        tuple(int(v) for v in row_labels),
        tuple(int(v) for v in col_labels),
    )


def proportions(t: ContingencyTable) -> ProportionTable:
    """P_ij = n_ij / N con marginales y acumuladas (la última es 1)."""
    N = t.N
    P = t.counts / N
    table = ProportionTable.from_matrix(P, N)
    cum_row = table.cum_row.copy()
    cum_col = table.cum_col.copy()
    cum_row[-1] = 1.0
    cum_col[-1] = 1.0
    return ProportionTable(
        P=table.P,
        N=N,
        row_marginals=table.row_marginals,
        col_marginals=table.col_marginals,
        cum_row=cum_row,
        cum_col=cum_col,
    )


def thresholds_from_marginals(cum: ArrayLike) -> Thresholds:
    """a_i = Φ⁻¹(CP_i) para i = 1..s−1.

    Raises:
        DegenerateTableError: si alguna acumulada interior es 0 o 1
            (categoría vacía sin colapsar).
    """
    cum = np.asarray(cum, dtype=float)
    if cum.ndim != 1 or cum.size < 2:
        raise DomainError("Se necesitan al menos dos proporciones acumuladas")
    if abs(cum[-1] - 1.0) > _CUMULATIVE_SLACK:
        raise DomainError(f"La última acumulada debe ser 1, es {cum[-1]!r}")
    interior = cum[:-1]
    if np.any(interior <= 0.0) or np.any(interior >= 1.0):
        raise DegenerateTableError(
            "acumulada interior en 0 o 1: hay una categoría vacía sin colapsar"
        )
    if np.any(np.diff(cum) <= 0.0):
        raise DegenerateTableError("acumuladas no estrictamente crecientes")
    return Thresholds(np.atleast_1d(quantile(interior)))


def grouped_summary(x_codes: ArrayLike, y: ArrayLike) -> GroupedSummary:
    """Tamaños y medias de la continua estandarizada por categoría de x.

    y se estandariza con la media y la desviación típica muestral (N − 1).
    Los huecos entre códigos observados se anotan en `dropped` como rangos
    (inicio, fin) inclusivos; el coste depende de las categorías, no del rango.
    """
    x = ordinal_codes(x_codes, "x_codes")
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size != x.size:
        raise DomainError(f"Longitudes distintas: {x.size} vs {y.size}")
    if not np.all(np.isfinite(y)):
        raise DomainError("y contiene valores no finitos")

    labels, idx = np.unique(x, return_inverse=True)
    if labels.size < 2:
        raise DegenerateDataError("x tiene una sola categoría observada")
    y_mean = float(y.mean())
    y_sd = float(y.std(ddof=1))
    if not y_sd > 0.0:
        raise DegenerateDataError("la variable continua es constante")
    z = (y - y_mean) / y_sd

    gaps = np.flatnonzero(np.diff(labels) > 1)
    dropped = tuple((int(labels[i]) + 1, int(labels[i + 1]) - 1) for i in gaps)
    if dropped:
        logger.warning(
            "%d huecos de códigos sin datos (primero: %s)",
            len(dropped),
            dropped[0],
        )

    counts = np.bincount(idx, minlength=labels.size).astype(float)
    ybar = np.bincount(idx, weights=z, minlength=labels.size) / counts

    # Pearson entre los códigos densos 1..s y z, desde los resúmenes
    codes = np.arange(1, labels.size + 1, dtype=float)
    N = x.size
    code_mean = float(np.dot(counts, codes)) / N
    code_var = float(np.dot(counts, (codes - code_mean) ** 2)) / (N - 1)
    r = float(np.dot(counts * codes, ybar)) / ((N - 1) * np.sqrt(code_var))

    return GroupedSummary(
        counts=counts,
        ybar=ybar,
        N=N,
        y_mean=y_mean,
        y_sd=y_sd,
        labels=tuple(int(v) for v in labels),
        dropped=dropped,
        pearson=float(np.clip(r, -1.0, 1.0)),
    )


def proportion_covariance(p: ProportionTable, N: float) -> ProportionCovariance:
    """B = (diag(P) − P Pᵀ) / N sobre las celdas apiladas por filas."""
    if not N >= 1:
        raise DomainError(f"N debe ser ≥ 1, es {N!r}")
    v = p.P.reshape(-1)
    return ProportionCovariance((np.diag(v) - np.outer(v, v)) / N)


def collapse_empty(t: ContingencyTable) -> tuple[ContingencyTable, CategoryMapping]:
    """Elimina filas y columnas vacías.

    Devuelve la tabla reducida y la etiqueta original de cada fila y
    columna conservada. Es idempotente.

    Raises:
        DegenerateTableError: si queda menos de 2×2.
    """
    keep_rows = t.counts.sum(axis=1) > 0
    keep_cols = t.counts.sum(axis=0) > 0
    if keep_rows.sum() < 2 or keep_cols.sum() < 2:
        raise DegenerateTableError(
            f"al colapsar queda {int(keep_rows.sum())}×{int(keep_cols.sum())}"
        )
    rows = tuple(lab for lab, k in zip(t.row_labels, keep_rows, strict=True) if k)
    cols = tuple(lab for lab, k in zip(t.col_labels, keep_cols, strict=True) if k)
    if not keep_rows.all() or not keep_cols.all():
        logger.warning(
            "Tabla colapsada de %s×%s a %s×%s", *t.shape, len(rows), len(cols),
        )
    collapsed = ContingencyTable(t.counts[keep_rows][:, keep_cols], rows, cols)
    return collapsed, CategoryMapping(rows=rows, cols=cols)


def pearson(x: ArrayLike, y: ArrayLike) -> float:
    """Correlación de Pearson muestral."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("x e y deben ser series 1-D de igual longitud")
    if x.size < 3:
        raise DegenerateDataError("se necesitan al menos 3 observaciones")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateDataError("serie constante")
    return float(np.clip(np.corrcoef(x, y)[0, 1], -1.0, 1.0))


def table_pearson(t: ContingencyTable) -> float:
    """Pearson de los códigos 1..s y 1..r ponderados por los conteos."""
    s, r = t.shape
    w = t.counts / t.N
    a = np.arange(1, s + 1, dtype=float)
    b = np.arange(1, r + 1, dtype=float)
    pa = w.sum(axis=1)
    pb = w.sum(axis=0)
    da = a - pa @ a
    db = b - pb @ b
    var_a = float(pa @ da**2)
    var_b = float(pb @ db**2)
    if var_a <= 0 or var_b <= 0:
        raise DegenerateTableError("un margen concentra toda la masa")
    return float(np.clip(da @ w @ db / np.sqrt(var_a * var_b), -1.0, 1.0))
