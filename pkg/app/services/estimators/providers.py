"""
Estimadores concretos.

Cada uno envuelve un servicio (IRLS, ML o Pearson) y traduce su
ajuste a EstimateResult.
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike

from app.models.enums import ColumnKind, Engine, JacobianMode, Method
from app.models.tables import ContingencyTable
from app.services.estimators.base import CorrelationEstimator, EstimateResult
from app.services.mle_oracle import fit_two_step_polychoric, fit_two_step_polyserial
from app.services.polychoric import fit_table
from app.services.polyserial import fit_polyserial
from app.services.tabulate import collapse_empty, crosstab, grouped_summary, pearson

logger = logging.getLogger(__name__)

_ORDINAL_PAIR = (ColumnKind.ORDINAL, ColumnKind.ORDINAL)
_MIXED_PAIR = (ColumnKind.ORDINAL, ColumnKind.CONTINUOUS)
_CONTINUOUS_PAIR = (ColumnKind.CONTINUOUS, ColumnKind.CONTINUOUS)


class IrlsPolychoricEstimator(CorrelationEstimator):
    """Tetracórica (2×2) o policórica por IRLS."""

    kinds = _ORDINAL_PAIR
    engine = Engine.IRLS

    def __init__(self, jacobian: JacobianMode | None = None) -> None:
        self.jacobian = jacobian

    @property
    def name(self) -> str:
        return "irls_polychoric"

    def estimate(self, x: ArrayLike, y: ArrayLike) -> EstimateResult:
        return self.estimate_table(crosstab(x, y))

    def estimate_table(self, t: ContingencyTable) -> EstimateResult:
        table, _ = collapse_empty(t)
        fit = fit_table(table, jacobian=self.jacobian)
        return EstimateResult(
            estimator=self.name,
            success=True,
            method=fit.method,
            rho=fit.rho,
            se=fit.se,
            iterations=fit.iterations,
            converged=fit.converged,
            n=int(round(table.N)),
            fit=fit,
        )


class IrlsPolyserialEstimator(CorrelationEstimator):
    """Polisérica por IRLS (x ordinal, y continua)."""

    kinds = _MIXED_PAIR
    engine = Engine.IRLS

    @property
    def name(self) -> str:
        return "irls_polyserial"

    def estimate(self, x: ArrayLike, y: ArrayLike) -> EstimateResult:
        summary = grouped_summary(x, y)
        fit = fit_polyserial(summary)
        return EstimateResult(
            estimator=self.name,
            success=True,
            method=Method.POLYSERIAL,
            rho=fit.rho,
            se=fit.se,
            iterations=fit.iterations,
            converged=fit.converged,
            n=summary.N,
            fit=fit,
        )


class MlPolychoricEstimator(CorrelationEstimator):
    """Tetracórica o policórica por ML en dos pasos."""

    kinds = _ORDINAL_PAIR
    engine = Engine.ML

    @property
    def name(self) -> str:
        return "ml_polychoric"

    def estimate(self, x: ArrayLike, y: ArrayLike) -> EstimateResult:
        return self.estimate_table(crosstab(x, y))

    def estimate_table(self, t: ContingencyTable) -> EstimateResult:
        table, _ = collapse_empty(t)
        fit = fit_two_step_polychoric(table)
        return EstimateResult(
            estimator=self.name,
            success=True,
            method=fit.method,
            rho=fit.rho,
            iterations=fit.evaluations,
            converged=fit.converged,
            n=int(round(table.N)),
            fit=fit,
        )


class MlPolyserialEstimator(CorrelationEstimator):
    """Polisérica por ML en dos pasos."""

    kinds = _MIXED_PAIR
    engine = Engine.ML

    @property
    def name(self) -> str:
        return "ml_polyserial"

    def estimate(self, x: ArrayLike, y: ArrayLike) -> EstimateResult:
        fit = fit_two_step_polyserial(x, y)
        return EstimateResult(
            estimator=self.name,
            success=True,
            method=Method.POLYSERIAL,
            rho=fit.rho,
            iterations=fit.evaluations,
            converged=fit.converged,
            n=int(np.asarray(x).size),
            fit=fit,
        )


class PearsonEstimator(CorrelationEstimator):
    """Pearson entre dos continuas; se = (1 − r²)/√N."""

    kinds = _CONTINUOUS_PAIR
    engine = Engine.IRLS

    @property
    def name(self) -> str:
        return "pearson"

    def estimate(self, x: ArrayLike, y: ArrayLike) -> EstimateResult:
        r = pearson(x, y)
        n = int(np.asarray(x).size)
        return EstimateResult(
            estimator=self.name,
            success=True,
            method=Method.PEARSON,
            rho=r,
            se=(1.0 - r * r) / math.sqrt(n),
            iterations=0,
            converged=True,
            n=n,
        )
