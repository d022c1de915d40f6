"""
Correlaciones tetracórica y policórica por IRLS.

Regresión de E_Y (media de Z2 por fila) sobre e_x (media de Z1 por
fila): la pendiente es ρ. Cada iteración:

1. e_ij = E(Z2 | Z1 = e_x_i, b_{j−1} < Z2 ≤ b_j) con el ρ actual.
2. E_Y_i = Σ_j (P_ij / P_i·) e_ij.
3. Σ = D B Dᵀ por el método delta (B: covarianza multinomial).
4. ρ = (e_xᵀ Σ⁻¹ e_x)⁻¹ e_xᵀ Σ⁻¹ E_Y.
5. e_x se recalcula condicionando en sentido inverso con el nuevo ρ.

El error estándar sale del último par (e_x, Σ) que produjo ρ̂.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
from scipy import linalg

from app.config import get_settings
from app.models.enums import JacobianMode, Method
from app.models.tables import (
    ContingencyTable,
    IterationState,
    ProportionCovariance,
    ProportionTable,
    Thresholds,
)
from app.schemas.fits import PolychoricFit, TraceStep, TransposeReport
from app.services.errors import (
    DegenerateCellError,
    DegenerateTableError,
    DomainError,
    SingularCovarianceError,
)
from app.services.gaussian import interval_mass, pdf, residual_threshold
from app.services.polyserial import cell_predictor_means, clamp_rho, pearson_start
from app.services.tabulate import (
    proportion_covariance,
    proportions,
    table_pearson,
    thresholds_from_marginals,
)

logger = logging.getLogger(__name__)

JacobianFn = Callable[
    [ProportionTable, np.ndarray, np.ndarray, float, Thresholds], np.ndarray
]


# ============================================
# Piezas de una iteración
# ============================================


def initial_predictors(th_a: Thresholds, p: np.ndarray) -> np.ndarray:
    """e_x_i = (φ(a_{i−1}) − φ(a_i)) / P_i· (media truncada de Z1)."""
    return cell_predictor_means(th_a, p)


def _truncated_conditional_means(
    rho: float, centers: np.ndarray, bounds: np.ndarray, cell_of: Callable,
) -> np.ndarray:
    """ρc + √(1−ρ²)·(φ(u_lo) − φ(u_hi)) / (Φ(u_hi) − Φ(u_lo)).

    centers: valores condicionantes (uno por fila del resultado).
    bounds: umbrales extendidos con ±∞ de la variable truncada.
    cell_of(fila, intervalo) nombra la celda en el error.
    """
    u = np.asarray(residual_threshold(bounds[None, :], centers[:, None], rho))
    lo = u[:, :-1]
    hi = u[:, 1:]
    mass = np.asarray(interval_mass(lo, hi))
    floor = get_settings().DEGENERATE_MASS
    bad = np.argwhere(~(mass >= floor))
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise DegenerateCellError(cell_of(i, j), float(mass[i, j]))
    scale = math.sqrt((1.0 - rho) * (1.0 + rho))
    return rho * centers[:, None] + scale * (pdf(lo) - pdf(hi)) / mass


def conditional_cell_means(
    rho: float, e_x: np.ndarray, th_b: Thresholds,
) -> np.ndarray:
    """Matriz s×r de e_ij = E(Z2 | Z1 = e_x_i, Z2 ∈ (b_{j−1}, b_j])."""
    if not abs(rho) < 1.0:
        raise DomainError(f"conditional_cell_means requiere |ρ| < 1, es {rho!r}")
    e_x = np.asarray(e_x, dtype=float)
    return _truncated_conditional_means(
        rho, e_x, th_b.bounds, lambda i, j: (i + 1, j + 1),
    )


def response_means(p: ProportionTable, e_cell: np.ndarray) -> np.ndarray:
    """E_Y_i = Σ_j (P_ij / P_i·) e_ij."""
    e_cell = np.asarray(e_cell, dtype=float)
    if e_cell.shape != p.shape:
        raise DomainError(f"e_cell {e_cell.shape} no encaja con P {p.shape}")
    rows = p.row_marginals
    if np.any(rows <= 0):
        raise DegenerateTableError("fila con masa cero")
    return (p.P * e_cell).sum(axis=1) / rows


def jacobian_general(p: ProportionTable, e_cell: np.ndarray) -> np.ndarray:
    """D (s × s·r) con e_cell constante: ∂E_Y_i/∂P_ij = (e_ij − E_Y_i)/P_i·.

    Bloque diagonal: la fila i solo depende de las celdas de la fila i.
    """
    s, r = p.shape
    E_Y = response_means(p, e_cell)
    D = np.zeros((s, s * r))
    for i in range(s):
        D[i, i * r:(i + 1) * r] = (e_cell[i] - E_Y[i]) / p.row_marginals[i]
    return D


def _threshold_derivatives(e_x: np.ndarray, rho: float, b: float) -> np.ndarray:
    """∂e_ij/∂b para la tabla 2×2 (matriz 2×2)."""
    u = np.asarray(residual_threshold(b, e_x, rho))
    phi = pdf(u)
    lower = np.asarray(interval_mass(-np.inf, u))
    upper = np.asarray(interval_mass(u, np.inf))
    d_first = phi * (u * lower + phi) / lower**2
    d_second = phi * (-u * upper + phi) / upper**2
    return np.column_stack([d_first, d_second])


def jacobian_2x2(
    p: ProportionTable,
    e_cell: np.ndarray,
    e_x: np.ndarray,
    rho: float,
    b: float,
    mode: JacobianMode = JacobianMode.FULL,
) -> np.ndarray:
    """D = D1 + D2 (2×4) de la tabla 2×2.

    D1 es `jacobian_general`. D2 propaga el umbral b = Φ⁻¹(P_11 + P_21):
    ∂b/∂P_11 = ∂b/∂P_21 = 1/φ(b) y ∂b/∂P_i2 = 0.
    """
    if p.shape != (2, 2):
        raise DomainError(f"jacobian_2x2 requiere tabla 2×2, forma {p.shape}")
    if not abs(rho) < 1.0:
        raise DomainError(f"jacobian_2x2 requiere |ρ| < 1, es {rho!r}")
    D = jacobian_general(p, e_cell)
    if mode == JacobianMode.D1_ONLY:
        return D

    q = p.P / p.row_marginals[:, None]
    de_db = _threshold_derivatives(np.asarray(e_x, dtype=float), rho, b)
    dE_db = (q * de_db).sum(axis=1) / float(pdf(b))
    # Columnas apiladas por filas: P_11 → 0, P_21 → 2
    D[:, 0] += dE_db
    D[:, 2] += dE_db
    return D


def response_covariance(D: np.ndarray, B: ProportionCovariance) -> np.ndarray:
    """Σ = D B Dᵀ, simetrizada."""
    D = np.asarray(D, dtype=float)
    if D.shape[1] != B.B.shape[0]:
        raise DomainError(f"D {D.shape} no es conformable con B {B.B.shape}")
    Sigma = D @ B.B @ D.T
    return 0.5 * (Sigma + Sigma.T)


def _cholesky(Sigma: np.ndarray) -> tuple[np.ndarray, bool]:
    """Factoriza Σ; si falla añade un ridge una sola vez."""
    try:
        return linalg.cho_factor(Sigma, lower=True, check_finite=True), False
    except linalg.LinAlgError:
        pass
    s = Sigma.shape[0]
    trace = float(np.trace(Sigma))
    ridge = get_settings().RIDGE_FACTOR * trace / s
    if not ridge > 0.0:
        raise SingularCovarianceError(trace)
    logger.warning("Σ no definida positiva: ridge %.3e en la diagonal", ridge)
    try:
        return linalg.cho_factor(Sigma + ridge * np.eye(s), lower=True), True
    except linalg.LinAlgError as exc:
        raise SingularCovarianceError(trace) from exc


def _gls(
    e_x: np.ndarray, E_Y: np.ndarray, Sigma: np.ndarray,
) -> tuple[float, float]:
    """Devuelve (ρ, (e_xᵀ Σ⁻¹ e_x)⁻¹)."""
    factor, _ = _cholesky(np.asarray(Sigma, dtype=float))
    w = linalg.cho_solve(factor, np.asarray(e_x, dtype=float))
    info = float(np.dot(e_x, w))
    if not info > 0.0:
        raise SingularCovarianceError(float(np.trace(Sigma)))
    return float(np.dot(w, E_Y)) / info, 1.0 / info


def weighted_estimate(e_x: np.ndarray, E_Y: np.ndarray, Sigma: np.ndarray) -> float:
    """ρ = (e_xᵀ Σ⁻¹ e_x)⁻¹ e_xᵀ Σ⁻¹ E_Y."""
    return _gls(e_x, E_Y, Sigma)[0]


def update_predictors(
    rho: float, p: ProportionTable, e_cell: np.ndarray, th_a: Thresholds,
) -> np.ndarray:
    """Recalcula e_x con el ρ nuevo.

    E_Yx_j = Σ_i (P_ij/P_·j) e_ij; e_xij = E(Z1 | Z2 = E_Yx_j, Z1 en la
    fila i); e_x_i = Σ_j (P_ij/P_i·) e_xij.
    """
    if not abs(rho) < 1.0:
        raise DomainError(f"update_predictors requiere |ρ| < 1, es {rho!r}")
    cols = p.col_marginals
    if np.any(cols <= 0):
        raise DegenerateTableError("columna con masa cero")
    column_means = (p.P * e_cell).sum(axis=0) / cols
    # Filas del resultado: columnas j; intervalos: filas i
    e_xij = _truncated_conditional_means(
        rho, column_means, th_a.bounds, lambda j, i: (i + 1, j + 1),
    ).T
    return (p.P * e_xij).sum(axis=1) / p.row_marginals


# ============================================
# Bucle IRLS
# ============================================


def _prepare(t: ContingencyTable) -> tuple[ProportionTable, Thresholds, Thresholds]:
    s, r = t.shape
    if s < 2 or r < 2:
        raise DegenerateTableError(f"tabla {s}×{r} menor que 2×2")
    if np.any(t.counts.sum(axis=1) <= 0) or np.any(t.counts.sum(axis=0) <= 0):
        raise DegenerateTableError("fila o columna vacía: colapsar antes de estimar")
    p = proportions(t)
    return p, thresholds_from_marginals(p.cum_row), thresholds_from_marginals(p.cum_col)


def _general_jacobian(
    p: ProportionTable, e_cell: np.ndarray, e_x: np.ndarray, rho: float,
    th_b: Thresholds,
) -> np.ndarray:
    return jacobian_general(p, e_cell)


def _irls(
    t: ContingencyTable,
    jacobian: JacobianFn,
    method: Method,
    jacobian_mode: JacobianMode | None,
    tolerance: float | None,
    max_iter: int | None,
    on_state: Callable[[int, IterationState], None] | None = None,
) -> PolychoricFit:
    settings = get_settings()
    tolerance = settings.IRLS_TOLERANCE if tolerance is None else tolerance
    max_iter = settings.IRLS_MAX_ITER if max_iter is None else max_iter

    p, th_a, th_b = _prepare(t)
    B = proportion_covariance(p, t.N)
    e_x = initial_predictors(th_a, p.row_marginals)
    rho = pearson_start(table_pearson(t))

    start_means = response_means(p, conditional_cell_means(rho, e_x, th_b))
    trace = [
        TraceStep(iteration=0, rho=rho, e_x=e_x.tolist(), E_Y=start_means.tolist()),
    ]
    variance = math.nan
    converged = False
    iterations = 0

    for iteration in range(1, max_iter + 1):
        e_cell = conditional_cell_means(rho, e_x, th_b)
        E_Y = response_means(p, e_cell)
        D = jacobian(p, e_cell, e_x, rho, th_b)
        Sigma = response_covariance(D, B)
        rho_hat, variance = _gls(e_x, E_Y, Sigma)
        rho_new = clamp_rho(rho_hat)
        diff = abs(rho_new - rho)
        rho = rho_new
        iterations = iteration
        trace.append(
            TraceStep(iteration=iteration, rho=rho, e_x=e_x.tolist(), E_Y=E_Y.tolist())
        )
        if on_state is not None:
            state = IterationState(e_x=e_x, e_cell=e_cell, E_Y=E_Y, Sigma=Sigma)
            on_state(iteration, state)
        logger.debug(
            "%s iter %d: ρ=%.10f diff=%.3e", method.value, iteration, rho, diff,
        )
        if diff <= tolerance:
            converged = True
            break
        e_x = update_predictors(rho, p, e_cell, th_a)

    if not converged:
        logger.warning(
            "%s sin converger tras %d iteraciones (ρ=%.6f)",
            method.value, max_iter, rho,
        )
    se = math.sqrt(variance)
    logger.info(
        "%s %s×%s: ρ=%.6f se=%.6f (%d iteraciones)",
        method.value, *t.shape, rho, se, iterations,
    )
    return PolychoricFit(
        method=method,
        rho=rho,
        se=se,
        iterations=iterations,
        converged=converged,
        n=t.N,
        trace=trace,
        shape=t.shape,
        jacobian=jacobian_mode,
    )


def fit_polychoric(
    t: ContingencyTable,
    *,
    tolerance: float | None = None,
    max_iter: int | None = None,
    on_state: Callable[[int, IterationState], None] | None = None,
) -> PolychoricFit:
    """Correlación policórica de una tabla s×r ya colapsada.

    Usa el jacobiano bloque diagonal (sin derivada de los umbrales).
    La no convergencia se marca en el resultado, no se lanza.
    """
    return _irls(
        t, _general_jacobian, Method.POLYCHORIC, None, tolerance, max_iter, on_state,
    )


def fit_tetrachoric(
    t: ContingencyTable,
    *,
    jacobian: JacobianMode | None = None,
    tolerance: float | None = None,
    max_iter: int | None = None,
    on_state: Callable[[int, IterationState], None] | None = None,
) -> PolychoricFit:
    """Correlación tetracórica de una tabla 2×2 (jacobiano D1 + D2 por defecto)."""
    if t.shape != (2, 2):
        raise DomainError(f"fit_tetrachoric requiere tabla 2×2, forma {t.shape}")
    mode = JacobianMode(jacobian or get_settings().JACOBIAN_MODE)

    def _jacobian(
        p: ProportionTable, e_cell: np.ndarray, e_x: np.ndarray, rho: float,
        th_b: Thresholds,
    ) -> np.ndarray:
        return jacobian_2x2(p, e_cell, e_x, rho, float(th_b.interior[0]), mode)

    return _irls(
        t, _jacobian, Method.TETRACHORIC, mode, tolerance, max_iter, on_state,
    )


def fit_table(t: ContingencyTable, **kwargs: object) -> PolychoricFit:
    """Tetracórica si la tabla es 2×2, policórica en otro caso."""
    if t.shape == (2, 2):
        return fit_tetrachoric(t, **kwargs)  # type: ignore[arg-type]
    kwargs.pop("jacobian", None)
    return fit_polychoric(t, **kwargs)  # type: ignore[arg-type]


def transpose_report(t: ContingencyTable, **kwargs: object) -> TransposeReport:
    """Ajusta t y tᵀ: el método no garantiza simetría al intercambiar X e Y."""
    fit = fit_table(t, **kwargs)
    fit_t = fit_table(t.transpose(), **kwargs)
    return TransposeReport(
        rho=fit.rho,
        rho_transposed=fit_t.rho,
        gap=abs(fit.rho - fit_t.rho),
        se=fit.se,
        se_transposed=fit_t.se,
    )
