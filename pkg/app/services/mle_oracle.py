"""
Oráculo de máxima verosimilitud en dos pasos.

Paso 1: umbrales desde las marginales (como en IRLS).
Paso 2: maximización unidimensional de la log-verosimilitud en ρ.

Sirve de referencia en los tests y de línea base de tiempos.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
from numpy.typing import ArrayLike
from scipy import optimize

from app.config import get_settings
from app.models.enums import Method
from app.models.tables import ContingencyTable, Thresholds
from app.schemas.fits import MlFit
from app.services.errors import (
    DegenerateDataError,
    DegenerateTableError,
    DomainError,
)
from app.services.gaussian import cell_prob, interval_mass
from app.services.tabulate import (
    ordinal_codes,
    proportions,
    thresholds_from_marginals,
)

logger = logging.getLogger(__name__)

_LOGLIK_RHO_LIMIT = 1.0 - 1e-9


def _check_rho(rho: float) -> None:
    if not abs(rho) <= _LOGLIK_RHO_LIMIT:
        raise DomainError(f"la log-verosimilitud requiere |ρ| ≤ 1 − 1e−9, es {rho!r}")


def polychoric_loglik(
    rho: float, t: ContingencyTable, a: Thresholds, b: Thresholds,
) -> float:
    """Σ n_ij log π_ij(ρ), con π_ij = Φ₂ en la celda y suelo en 1e−300.

    Las celdas vacías no aportan (n_ij · log π = 0).
    """
    _check_rho(rho)
    s, r = t.shape
    if (a.n_categories, b.n_categories) != (s, r):
        raise DomainError("umbrales incompatibles con la tabla")
    floor = get_settings().ML_PROBABILITY_FLOOR
    total = 0.0
    for i in range(s):
        ax = a.interval(i)
        for j in range(r):
            n_ij = t.counts[i, j]
            if n_ij == 0:
                continue
            total += n_ij * math.log(max(cell_prob(ax, b.interval(j), rho), floor))
    return total


def polyserial_loglik(
    rho: float, x_codes: ArrayLike, y: ArrayLike, a: Thresholds,
) -> float:
    """Σ_k [log φ(y_k) + log(Φ(v_hi) − Φ(v_lo))], v = (a − ρy)/√(1−ρ²).

    x_codes son categorías densas 1..s; y está estandarizada.
    """
    _check_rho(rho)
    x = np.asarray(x_codes, dtype=np.int64)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DomainError("x_codes e y deben tener la misma longitud")
    if x.min() < 1 or x.max() > a.n_categories:
        raise DomainError("códigos fuera de las categorías de los umbrales")
    bounds = a.bounds
    scale = math.sqrt((1.0 - rho) * (1.0 + rho))
    hi = (bounds[x] - rho * y) / scale
    lo = (bounds[x - 1] - rho * y) / scale
    mass = np.maximum(interval_mass(lo, hi), get_settings().ML_PROBABILITY_FLOOR)
    log_density = -0.5 * y * y - 0.5 * math.log(2.0 * math.pi)
    return float(np.sum(log_density) + np.sum(np.log(mass)))


def _maximize(objective: Callable[[float], float], method: Method) -> MlFit:
    """Maximiza en (−1 + ML_BOUND, 1 − ML_BOUND) con Brent acotado."""
    settings = get_settings()
    bound = 1.0 - settings.ML_BOUND
    result = optimize.minimize_scalar(
        lambda rho: -objective(rho),
        bounds=(-bound, bound),
        method="bounded",
        options={"xatol": settings.ML_TOLERANCE, "maxiter": 500},
    )
    converged = bool(result.success)
    if not converged:
        logger.warning("ML %s sin converger: %s", method.value, result.message)
    rho = float(result.x)
    return MlFit(
        method=method,
        rho=rho,
        loglik=float(-result.fun),
        evaluations=int(result.nfev),
        converged=converged,
    )


def fit_two_step_polychoric(t: ContingencyTable) -> MlFit:
    """ML en dos pasos para una tabla de contingencia."""
    if np.any(t.counts.sum(axis=1) <= 0) or np.any(t.counts.sum(axis=0) <= 0):
        raise DegenerateTableError("fila o columna vacía: colapsar antes de estimar")
    p = proportions(t)
    a = thresholds_from_marginals(p.cum_row)
    b = thresholds_from_marginals(p.cum_col)
    method = Method.TETRACHORIC if t.shape == (2, 2) else Method.POLYCHORIC
    fit = _maximize(lambda rho: polychoric_loglik(rho, t, a, b), method)
    logger.info(
        "ML %s: ρ=%.6f (%d evaluaciones)", method.value, fit.rho, fit.evaluations,
    )
    return fit


def fit_two_step_polyserial(x_codes: ArrayLike, y: ArrayLike) -> MlFit:
    """ML en dos pasos para un par ordinal × continua.

    Densifica los códigos y estandariza y (N − 1) igual que el resumen
    agrupado de IRLS.
    """
    x = ordinal_codes(x_codes, "x_codes")
    y = np.asarray(y, dtype=float)
    if y.shape != x.shape:
        raise DomainError("x_codes e y deben tener la misma longitud")
    sd = float(y.std(ddof=1)) if y.size > 1 else 0.0
    if not sd > 0:
        raise DegenerateDataError("la variable continua es constante")
    z = (y - y.mean()) / sd
    labels, idx = np.unique(x, return_inverse=True)
    if labels.size < 2:
        raise DegenerateTableError("x tiene una sola categoría observada")
    counts = np.bincount(idx).astype(float)
    a = thresholds_from_marginals(np.cumsum(counts) / counts.sum())
    dense = idx + 1
    fit = _maximize(lambda rho: polyserial_loglik(rho, dense, z, a), Method.POLYSERIAL)
    logger.info("ML polisérica: ρ=%.6f (%d evaluaciones)", fit.rho, fit.evaluations)
    return fit


def fit_two_step(
    table_or_mixed: ContingencyTable | tuple[ArrayLike, ArrayLike],
) -> MlFit:
    """Despacha según la entrada: tabla → policórica; (x, y) → polisérica."""
    if isinstance(table_or_mixed, ContingencyTable):
        return fit_two_step_polychoric(table_or_mixed)
    x_codes, y = table_or_mixed
    return fit_two_step_polyserial(x_codes, y)
