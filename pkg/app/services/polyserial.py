"""
Correlación polisérica por mínimos cuadrados reponderados (IRLS).

La media de la continua estandarizada en la categoría i es
E(Y | X = i) = ρ · e_x_i, con e_x_i la media truncada de Z1 en
(a_{i−1}, a_i]. ρ es la pendiente de una regresión por mínimos
cuadrados ponderados con pesos n_i / σ_i², y σ_i² depende de ρ:
se alterna entre ambos hasta que ρ se estabiliza.
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike

from app.config import get_settings
from app.models.tables import CellMoments, GroupedSummary, Thresholds
from app.schemas.fits import PolyserialFit, TraceStep
from app.services.errors import (
    DegenerateCellError,
    DomainError,
    NumericalBreakdownError,
)
from app.services.gaussian import pdf, x_pdf
from app.services.tabulate import thresholds_from_marginals

logger = logging.getLogger(__name__)


def clamp_rho(rho: float, margin: float | None = None) -> float:
    """Mete ρ en (−1 + margin, 1 − margin)."""
    if margin is None:
        margin = get_settings().RHO_CLAMP
    return float(min(1.0 - margin, max(-1.0 + margin, rho)))


def pearson_start(r: float) -> float:
    """Punto de partida: Pearson, sustituyendo ±1 exacto por ±0.99."""
    settings = get_settings()
    if abs(r) >= 1.0:
        r = math.copysign(settings.PEARSON_START_CAP, r)
    return clamp_rho(r, settings.RHO_CLAMP)


def _check_marginals(th: Thresholds, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (th.n_categories,):
        raise DomainError(
            f"{th.n_categories} categorías pero {p.size} marginales",
        )
    floor = get_settings().DEGENERATE_MASS
    for i, mass in enumerate(p):
        if not mass > floor:
            raise DegenerateCellError(i + 1, float(mass))
    return p


def cell_predictor_means(th: Thresholds, p: ArrayLike) -> np.ndarray:
    """e_x_i = (φ(a_{i−1}) − φ(a_i)) / P_i."""
    p = _check_marginals(th, p)
    phi = pdf(th.bounds)
    return (phi[:-1] - phi[1:]) / p


def cell_response_variance(rho: float, th: Thresholds, p: ArrayLike) -> np.ndarray:
    """Varianza de Y dentro de cada categoría de X.

    σ_i² = 1 + ρ²(a_{i−1}φ(a_{i−1}) − a_iφ(a_i))/P_i
             − ρ²(φ(a_{i−1}) − φ(a_i))²/P_i²

    Raises:
        NumericalBreakdownError: si algún σ_i² ≤ 0. No se recorta.
    """
    if not abs(rho) < 1.0:
        raise DomainError(f"cell_response_variance requiere |ρ| < 1, es {rho!r}")
    p = _check_marginals(th, p)
    bounds = th.bounds
    phi = pdf(bounds)
    a_phi = x_pdf(bounds)
    rho2 = rho * rho
    sigma2 = (
        1.0
        + rho2 * (a_phi[:-1] - a_phi[1:]) / p
        - rho2 * ((phi[:-1] - phi[1:]) / p) ** 2
    )
    if np.any(~(sigma2 > 0.0)):
        raise NumericalBreakdownError("sigma2", sigma2.tolist())
    return sigma2


def wls_slope(e_x: ArrayLike, e_y: ArrayLike, weights: ArrayLike) -> float:
    """Pendiente sin intercepto: Σ w e_x e_y / Σ w e_x²."""
    e_x = np.asarray(e_x, dtype=float)
    e_y = np.asarray(e_y, dtype=float)
    w = np.asarray(weights, dtype=float)
    if not (e_x.shape == e_y.shape == w.shape) or e_x.ndim != 1 or e_x.size < 2:
        raise DomainError("e_x, e_y y weights deben ser vectores iguales, n ≥ 2")
    den = float(np.dot(w, e_x * e_x))
    if not den > 0.0:
        raise NumericalBreakdownError("denominador de la pendiente", den)
    return float(np.dot(w, e_x * e_y)) / den


def polyserial_variance(e_x: ArrayLike, sigma2: ArrayLike, n: ArrayLike) -> float:
    """Var(ρ̂) = (Σ n_i σ_i⁻² e_x_i²)⁻¹."""
    e_x = np.asarray(e_x, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    n = np.asarray(n, dtype=float)
    if np.any(sigma2 <= 0) or np.any(n <= 0):
        raise NumericalBreakdownError("varianzas o conteos no positivos")
    info = float(np.dot(n / sigma2, e_x * e_x))
    if not info > 0.0:
        raise NumericalBreakdownError("información de ρ", info)
    return 1.0 / info


def cell_moments(rho: float, th: Thresholds, g: GroupedSummary) -> CellMoments:
    """Momentos de la regresión en un ρ dado."""
    p = g.proportions
    e_x = cell_predictor_means(th, p)
    return CellMoments(
        e_x=e_x,
        mu=rho * e_x,
        sigma2=cell_response_variance(rho, th, p),
        n=g.counts,
    )


def fit_polyserial(
    g: GroupedSummary,
    *,
    tolerance: float | None = None,
    max_iter: int | None = None,
) -> PolyserialFit:
    """Ajusta la correlación polisérica a partir de un resumen agrupado.

    Parte de Pearson, alterna σ² y pendiente ponderada hasta que
    |ρ_nuevo − ρ_viejo| ≤ tolerance o max_iter iteraciones. Si no
    converge devuelve el último iterado con converged=False.
    """
    settings = get_settings()
    tolerance = settings.IRLS_TOLERANCE if tolerance is None else tolerance
    max_iter = settings.IRLS_MAX_ITER if max_iter is None else max_iter
    if g.n_categories < 2:
        raise DomainError("se necesitan al menos 2 categorías")

    p = g.proportions
    th = thresholds_from_marginals(np.cumsum(p))
    e_x = cell_predictor_means(th, p)

    rho = pearson_start(g.pearson)
    trace = [TraceStep(iteration=0, rho=rho)]
    converged = False
    iterations = 0

    for iteration in range(1, max_iter + 1):
        sigma2 = cell_response_variance(rho, th, p)
        rho_new = clamp_rho(wls_slope(e_x, g.ybar, g.counts / sigma2))
        diff = abs(rho_new - rho)
        rho = rho_new
        iterations = iteration
        trace.append(TraceStep(iteration=iteration, rho=rho))
        logger.debug("Polisérica iter %d: ρ=%.10f diff=%.3e", iteration, rho, diff)
        if diff <= tolerance:
            converged = True
            break

    if not converged:
        logger.warning("Polisérica sin converger tras %d iteraciones", max_iter)

    sigma2 = cell_response_variance(rho, th, p)
    se = math.sqrt(polyserial_variance(e_x, sigma2, g.counts))
    logger.info(
        "Polisérica: ρ=%.6f se=%.6f (%d iteraciones, s=%d)",
        rho, se, iterations, g.n_categories,
    )
    return PolyserialFit(
        rho=rho,
        se=se,
        iterations=iterations,
        converged=converged,
        n=float(g.N),
        trace=trace,
        categories=g.n_categories,
    )
