"""
Funciones especiales de la normal estándar univariante y bivariante.

Todo lo que necesitan los estimadores: φ, Φ, Φ⁻¹, masa de intervalos,
media truncada, umbral residual y Φ₂ por cuadratura de Gauss-Legendre.

Convenciones en ±∞: φ(±∞) = 0, Φ(−∞) = 0, Φ(+∞) = 1 y a·φ(a) = 0.
Las funciones univariantes aceptan escalares o arrays de numpy.
"""

import logging
import math
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from app.config import get_settings
from app.models.tables import Interval
from app.services.errors import (
    DegenerateCellError,
    DomainError,
    SingularityError,
)

logger = logging.getLogger(__name__)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_TWO_PI = 2.0 * math.pi

# Límite de |ρ| admitido por Φ₂
BIVARIATE_RHO_LIMIT = 1.0 - 1e-12


def _as_output(values: np.ndarray) -> float | np.ndarray:
    """Devuelve float si la entrada era escalar."""
    return float(values) if np.ndim(values) == 0 else values


def pdf(x: ArrayLike) -> float | np.ndarray:
    """Densidad normal estándar φ(x). En ±∞ vale 0."""
    x = np.asarray(x, dtype=float)
    return _as_output(_INV_SQRT_2PI * np.exp(-0.5 * x * x))


def x_pdf(x: ArrayLike) -> float | np.ndarray:
    """Producto x·φ(x), definido como 0 en ±∞."""
    x = np.asarray(x, dtype=float)
    finite = np.isfinite(x)
    safe = np.where(finite, x, 0.0)
    density = safe * _INV_SQRT_2PI * np.exp(-0.5 * safe**2)
    return _as_output(np.where(finite, density, 0.0))


def cdf(x: ArrayLike) -> float | np.ndarray:
    """Función de distribución Φ(x) (scipy.special.ndtr, basada en erfc)."""
    return _as_output(special.ndtr(np.asarray(x, dtype=float)))


def quantile(p: ArrayLike) -> float | np.ndarray:
    """Cuantil Φ⁻¹(p) para p ∈ (0, 1).

    Estimación inicial con ndtri y un paso de Newton sobre Φ; el paso
    solo se acepta si reduce el residuo.

    Raises:
        DomainError: si algún p ≤ 0 o p ≥ 1 (los umbrales ±∞ los
            asigna el llamador de forma explícita).
    """
    p = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p <= 0.0) or np.any(p >= 1.0):
        raise DomainError(f"quantile requiere 0 < p < 1, recibido {p!r}")

    x = special.ndtri(p)
    residual = special.ndtr(x) - p
    refined = x - residual / (_INV_SQRT_2PI * np.exp(-0.5 * x * x))
    better = np.abs(special.ndtr(refined) - p) < np.abs(residual)
    return _as_output(np.where(better, refined, x))


def interval_mass(lo: ArrayLike, hi: ArrayLike) -> float | np.ndarray:
    """Φ(hi) − Φ(lo), usando la cola superior cuando lo > 0."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    upper = special.ndtr(-lo) - special.ndtr(-hi)
    lower = special.ndtr(hi) - special.ndtr(lo)
    return _as_output(np.where(lo > 0.0, upper, lower))


def truncated_mean(iv: Interval) -> float:
    """Media de la normal estándar truncada a (lo, hi].

    (φ(lo) − φ(hi)) / (Φ(hi) − Φ(lo)).

    Raises:
        DegenerateCellError: si la masa del intervalo es menor que
            DEGENERATE_MASS.
    """
    mass = float(interval_mass(iv.lo, iv.hi))
    if mass < get_settings().DEGENERATE_MASS:
        raise DegenerateCellError((iv.lo, iv.hi), mass)
    return (float(pdf(iv.lo)) - float(pdf(iv.hi))) / mass


def residual_threshold(
    t: ArrayLike, z: ArrayLike, rho: float,
) -> float | np.ndarray:
    """Umbral estandarizado (t − ρz) / √(1 − ρ²).

    Raises:
        SingularityError: si |ρ| ≥ 1.
    """
    if not abs(rho) < 1.0:
        raise SingularityError(rho)
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    return _as_output((t - rho * z) / math.sqrt((1.0 - rho) * (1.0 + rho)))


# ============================================
# Normal bivariante
# ============================================


@lru_cache
def _legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodos y pesos de Gauss-Legendre de orden n en [−1, 1]."""
    return np.polynomial.legendre.leggauss(n)


def _upper_orthant(h: float, k: float, r: float, nodes: int) -> float:
    """P(Z1 > h, Z2 > k) con correlación r (Drezner-Wesolowsky / Genz).

    Para |r| < 0.925 integra ∂Φ₂/∂ρ de 0 a asin(r); cerca de ±1 usa el
    desarrollo asintótico más una corrección por cuadratura.
    """
    x, w = _legendre_rule(nodes)
    hk = h * k

    if abs(r) < 0.925:
        hs = 0.5 * (h * h + k * k)
        asr = 0.5 * math.asin(r)
        sn = np.sin(asr * (1.0 + x))
        bvn = asr * float(np.dot(w, np.exp((sn * hk - hs) / (1.0 - sn * sn))))
        return bvn / _TWO_PI + float(special.ndtr(-h) * special.ndtr(-k))

    if r < 0.0:
        k = -k
        hk = -hk

    bvn = 0.0
    if abs(r) < 1.0:
        a_s = (1.0 - r) * (1.0 + r)
        a = math.sqrt(a_s)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        asr = -0.5 * (bs / a_s + hk)
        if asr > -100.0:
            bvn = a * math.exp(asr) * (
                1.0
                - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0
                + c * d * a_s * a_s / 5.0
            )
        if hk > -100.0:
            b = math.sqrt(bs)
            sp = _SQRT_2PI * float(special.ndtr(-b / a))
            bvn -= (
                math.exp(-0.5 * hk) * sp * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
            )

        a *= 0.5
        xs = (a * (1.0 + x)) ** 2
        rs = np.sqrt(1.0 - xs)
        asr_nodes = -0.5 * (bs / xs + hk)
        keep = asr_nodes > -100.0
        if np.any(keep):
            xs_k = xs[keep]
            rs_k = rs[keep]
            sp_k = 1.0 + c * xs_k * (1.0 + d * xs_k)
            ep_k = np.exp(-hk * xs_k / (2.0 * (1.0 + rs_k) ** 2)) / rs_k
            bvn += a * float(np.dot(w[keep], np.exp(asr_nodes[keep]) * (ep_k - sp_k)))
        bvn = -bvn / _TWO_PI

    if r > 0.0:
        return bvn + float(special.ndtr(-max(h, k)))
    if h >= k:
        return -bvn
    if h < 0.0:
        lower = float(special.ndtr(k) - special.ndtr(h))
    else:
        lower = float(special.ndtr(-h) - special.ndtr(-k))
    return lower - bvn


def bivariate_cdf(h: float, k: float, rho: float) -> float:
    """Φ₂(h, k; ρ) = P(Z1 ≤ h, Z2 ≤ k).

    Acepta límites ±∞. Error absoluto ≤ 1e−7 con ≥ 24 nodos.

    Raises:
        DomainError: si |ρ| > 1 − 1e−12.
    """
    if not abs(rho) <= BIVARIATE_RHO_LIMIT:
        raise DomainError(f"bivariate_cdf requiere |ρ| ≤ 1 − 1e−12, recibido {rho!r}")
    h = float(h)
    k = float(k)
    if h == -math.inf or k == -math.inf:
        return 0.0
    if h == math.inf:
        return float(special.ndtr(k))
    if k == math.inf:
        return float(special.ndtr(h))

    nodes = get_settings().QUADRATURE_NODES
    value = _upper_orthant(-h, -k, rho, nodes)
    return min(1.0, max(0.0, value))


def cell_prob(ax: Interval, by: Interval, rho: float) -> float:
    """Probabilidad de la celda (ax.lo, ax.hi] × (by.lo, by.hi].

    Inclusión-exclusión de cuatro evaluaciones de Φ₂.
    """
    prob = (
        bivariate_cdf(ax.hi, by.hi, rho)
        - bivariate_cdf(ax.lo, by.hi, rho)
        - bivariate_cdf(ax.hi, by.lo, rho)
        + bivariate_cdf(ax.lo, by.lo, rho)
    )
    return min(1.0, max(0.0, prob))
