"""Servicio orquestador de estimación.

Elige el estimador según los tipos de columna, y construye la matriz
de correlaciones por pares completos repartiendo los pares en hilos.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor

import pandas as pd
from numpy.typing import ArrayLike

from app.config import get_settings
from app.models.enums import ColumnKind, Engine, JacobianMode
from app.models.tables import ContingencyTable
from app.schemas.matrix import MatrixResult, PairResult, Schema
from app.services.errors import DomainError
from app.services.estimators.base import CorrelationEstimator, EstimateResult
from app.services.estimators.providers import (
    IrlsPolychoricEstimator,
    IrlsPolyserialEstimator,
    MlPolychoricEstimator,
    MlPolyserialEstimator,
    PearsonEstimator,
)

logger = logging.getLogger(__name__)


class CorrelationService:
    """Despacha pares de columnas al estimador que corresponde."""

    def __init__(
        self, engine: Engine = Engine.IRLS, jacobian: JacobianMode | None = None,
    ) -> None:
        self.engine = engine
        if engine == Engine.IRLS:
            ordinal: CorrelationEstimator = IrlsPolychoricEstimator(jacobian)
            mixed: CorrelationEstimator = IrlsPolyserialEstimator()
        else:
            ordinal = MlPolychoricEstimator()
            mixed = MlPolyserialEstimator()
        self.estimators: dict[tuple[ColumnKind, ColumnKind], CorrelationEstimator] = {
            (ColumnKind.ORDINAL, ColumnKind.ORDINAL): ordinal,
            (ColumnKind.ORDINAL, ColumnKind.CONTINUOUS): mixed,
            (ColumnKind.CONTINUOUS, ColumnKind.CONTINUOUS): PearsonEstimator(),
        }

    def estimator_for(
        self, kind_x: ColumnKind, kind_y: ColumnKind,
    ) -> tuple[CorrelationEstimator, bool]:
        """Devuelve el estimador y si hay que intercambiar (x, y)."""
        if (kind_x, kind_y) in self.estimators:
            return self.estimators[(kind_x, kind_y)], False
        if (kind_y, kind_x) in self.estimators:
            return self.estimators[(kind_y, kind_x)], True
        raise DomainError(f"Par de tipos no estimable: {kind_x.value} × {kind_y.value}")

    def estimate_pair(
        self,
        x: ArrayLike,
        kind_x: ColumnKind,
        y: ArrayLike,
        kind_y: ColumnKind,
        *,
        safe: bool = True,
    ) -> EstimateResult:
        """Estima la correlación de un par.

        Con safe=False las excepciones de estimación se propagan
        (el CLI las traduce a códigos de salida).
        """
        estimator, swap = self.estimator_for(kind_x, kind_y)
        if swap:
            x, y = y, x
        logger.info("Par %s × %s → %s", kind_x.value, kind_y.value, estimator.name)
        if safe:
            return estimator.safe_estimate(x, y)
        return estimator.estimate(x, y)

    def estimate_table(self, t: ContingencyTable) -> EstimateResult:
        """Estima directamente desde una tabla de conteos (errores propagados)."""
        estimator = self.estimators[(ColumnKind.ORDINAL, ColumnKind.ORDINAL)]
        return estimator.estimate_table(t)  # type: ignore[attr-defined]

    # ------------------------------------------
    # Matriz
    # ------------------------------------------

    def matrix(
        self, frame: pd.DataFrame, schema: Schema, threads: int | None = None,
    ) -> MatrixResult:
        """Matriz simétrica con diagonal unitaria, por pares completos.

        Un par degenerado queda ausente con su motivo; el resto sigue.
        El orden de salida lo fija el orden de columnas, no los hilos.
        """
        columns = schema.active
        if len(columns) < 2:
            raise DomainError("el modo matriz necesita al menos dos columnas activas")
        threads = threads or get_settings().POLYIRLS_THREADS
        names = [c.name for c in columns]
        k = len(columns)

        constant = {
            c.name for c in columns if frame[c.name].dropna().nunique() < 2
        }
        for name in sorted(constant):
            logger.warning("Columna %s constante o vacía: se marca ausente", name)

        pairs = [
            (i, j) for i in range(k) for j in range(i + 1, k)
            if names[i] not in constant and names[j] not in constant
        ]

        def _run(pair: tuple[int, int]) -> PairResult:
            i, j = pair
            a, b = columns[i], columns[j]
            mask = frame[a.name].notna() & frame[b.name].notna()
            x = frame.loc[mask, a.name].to_numpy(dtype=float)
            y = frame.loc[mask, b.name].to_numpy(dtype=float)
            start = time.perf_counter()
            result = self.estimate_pair(x, a.kind, y, b.kind)
            return PairResult(
                i=i,
                j=j,
                method=result.method,
                rho=result.rho,
                se=result.se,
                n=int(mask.sum()),
                converged=result.converged,
                seconds=time.perf_counter() - start,
                reason=None if result.success else result.error,
            )

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run, pairs))

        estimate: list[list[float | None]] = [[None] * k for _ in range(k)]
        se: list[list[float | None]] = [[None] * k for _ in range(k)]
        method: list[list] = [[None] * k for _ in range(k)]
        n = [[0] * k for _ in range(k)]
        seconds = [[0.0] * k for _ in range(k)]
        reasons: dict[str, str] = {}

        for i, name in enumerate(names):
            n[i][i] = int(frame[name].notna().sum())
            if name in constant:
                reasons[f"{name}|{name}"] = "columna constante o vacía"
                continue
            estimate[i][i] = 1.0
            se[i][i] = 0.0

        for i in range(k):
            for j in range(i + 1, k):
                if names[i] in constant or names[j] in constant:
                    reasons[f"{names[i]}|{names[j]}"] = "columna constante o vacía"

        for res in results:
            i, j = res.i, res.j
            n[i][j] = n[j][i] = res.n
            seconds[i][j] = seconds[j][i] = res.seconds
            if res.reason is not None:
                reasons[f"{names[i]}|{names[j]}"] = res.reason
                continue
            estimate[i][j] = estimate[j][i] = res.rho
            se[i][j] = se[j][i] = res.se
            method[i][j] = method[j][i] = res.method

        done = sum(r.reason is None for r in results)
        logger.info("Matriz %d×%d: %d/%d pares estimados", k, k, done, len(pairs))
        return MatrixResult(
            names=names,
            estimate=estimate,
            se=se,
            method=method,
            n=n,
            seconds=seconds,
            reasons=reasons,
        )
