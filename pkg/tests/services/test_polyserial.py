"""
Tests para la correlación polisérica por IRLS.

Naming convention: test_<acción>_<escenario>_<resultado>
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from app.models.tables import GroupedSummary, Interval, Thresholds
from app.services.errors import DegenerateCellError, NumericalBreakdownError
from app.services.gaussian import truncated_mean
from app.services.mle_oracle import fit_two_step_polyserial
from app.services.polyserial import (
    cell_moments,
    cell_predictor_means,
    cell_response_variance,
    clamp_rho,
    fit_polyserial,
    pearson_start,
    polyserial_variance,
    wls_slope,
)
from app.services.tabulate import grouped_summary, thresholds_from_marginals

RHO_GRID = [-0.8, -0.6, -0.4, -0.2, 0.2, 0.4, 0.6, 0.8]


def population_summary(rho: float, p: list[float], N: int = 1000) -> GroupedSummary:
    """Resumen exacto: ȳ_i = ρ·e_x_i con e_x_i la media truncada de Z1."""
    p_arr = np.asarray(p, dtype=float)
    th = thresholds_from_marginals(np.cumsum(p_arr))
    e_x = cell_predictor_means(th, p_arr)
    return GroupedSummary(
        counts=p_arr * N,
        ybar=rho * e_x,
        N=N,
        y_mean=0.0,
        y_sd=1.0,
        labels=tuple(range(1, p_arr.size + 1)),
        pearson=0.9 * rho,
    )


PARTITIONS = {
    2: [0.5, 0.5],
    3: [0.2, 0.5, 0.3],
    5: [0.1, 0.2, 0.3, 0.25, 0.15],
    7: [0.05, 0.1, 0.15, 0.2, 0.2, 0.18, 0.12],
}


# ============================================
# Piezas de la iteración
# ============================================


class TestCellMoments:
    """Medias del predictor y varianzas de la respuesta por categoría."""

    def test_predictor_means_two_categories(self) -> None:
        e_x = cell_predictor_means(Thresholds([0.0]), [0.5, 0.5])
        assert_allclose(e_x, [-0.7978845608, 0.7978845608], atol=1e-10)

    def test_predictor_means_three_categories(self) -> None:
        th = Thresholds([-1.0, 1.0])
        p = [stats.norm.cdf(-1), stats.norm.cdf(1) - stats.norm.cdf(-1), stats.norm.sf(1)]
        e_x = cell_predictor_means(th, p)
        assert_allclose(e_x, [-1.52514, 0.0, 1.52514], atol=1e-5)
        expected = [truncated_mean(th.interval(i)) for i in range(3)]
        assert_allclose(e_x, expected, atol=1e-12)

    def test_predictor_means_total_expectation_zero(self) -> None:
        for p in PARTITIONS.values():
            th = thresholds_from_marginals(np.cumsum(p))
            e_x = cell_predictor_means(th, p)
            assert np.dot(p, e_x) == pytest.approx(0.0, abs=1e-10)
            assert np.all(np.diff(e_x) > 0)

    def test_predictor_means_empty_category_raises(self) -> None:
        with pytest.raises(DegenerateCellError):
            cell_predictor_means(Thresholds([0.0]), [1.0, 0.0])

    def test_response_variance_rho_zero_is_one(self) -> None:
        th = Thresholds([-0.5, 0.4, 1.3])
        p = np.diff(stats.norm.cdf(np.concatenate(([-np.inf], th.interior, [np.inf]))))
        assert_allclose(cell_response_variance(0.0, th, p), 1.0)

    def test_response_variance_rho_08_two_categories(self) -> None:
        sigma2 = cell_response_variance(0.8, Thresholds([0.0]), [0.5, 0.5])
        assert_allclose(sigma2, [0.5926, 0.5926], atol=1e-4)

    def test_response_variance_matches_monte_carlo(self, rng: np.random.Generator) -> None:
        z = rng.multivariate_normal([0, 0], [[1, 0.8], [0.8, 1]], 1_000_000)
        low = z[z[:, 0] <= 0.0, 1]
        sigma2 = cell_response_variance(0.8, Thresholds([0.0]), [0.5, 0.5])
        assert sigma2[0] == pytest.approx(low.var(), abs=3e-3)

    def test_response_variance_symmetric_thresholds_palindromic(self) -> None:
        th = Thresholds([-1.2, -0.3, 0.3, 1.2])
        p = np.diff(stats.norm.cdf(th.bounds))
        sigma2 = cell_response_variance(0.7, th, p)
        assert_allclose(sigma2, sigma2[::-1], atol=1e-12)

    def test_response_variance_inconsistent_marginals_raises(self) -> None:
        """Marginales que no casan con los umbrales pueden dar σ² ≤ 0."""
        with pytest.raises(NumericalBreakdownError):
            cell_response_variance(0.99, Thresholds([0.0]), [1e-3, 1 - 1e-3])

    def test_cell_moments_mu_is_rho_times_predictor(self) -> None:
        g = population_summary(0.4, PARTITIONS[3])
        th = thresholds_from_marginals(np.cumsum(g.proportions))
        moments = cell_moments(0.4, th, g)
        assert_allclose(moments.mu, 0.4 * moments.e_x)
        assert np.all(moments.sigma2 > 0)


class TestWlsSlope:
    """Pendiente sin intercepto y varianza de ρ̂."""

    def test_wls_slope_proportional_response(self, rng: np.random.Generator) -> None:
        e_x = rng.normal(size=6)
        assert wls_slope(e_x, 0.5 * e_x, rng.uniform(0.1, 3.0, 6)) == pytest.approx(0.5)

    def test_wls_slope_arithmetic(self) -> None:
        assert wls_slope([-1.0, 1.0], [-0.3, 0.5], [1.0, 1.0]) == pytest.approx(0.4)

    def test_wls_slope_matches_normal_equations(self, rng: np.random.Generator) -> None:
        e_x = rng.normal(size=8)
        e_y = rng.normal(size=8)
        w = rng.uniform(0.1, 5.0, 8)
        X = e_x[:, None]
        W = np.diag(w)
        expected = np.linalg.solve(X.T @ W @ X, X.T @ W @ e_y)[0]
        assert wls_slope(e_x, e_y, w) == pytest.approx(expected, abs=1e-12)

    def test_wls_slope_zero_predictor_raises(self) -> None:
        with pytest.raises(NumericalBreakdownError):
            wls_slope([0.0, 0.0], [1.0, 2.0], [1.0, 1.0])

    def test_variance_halves_when_counts_double(self) -> None:
        e_x = np.array([-1.2, 0.1, 0.9])
        sigma2 = np.array([0.7, 0.8, 0.75])
        n = np.array([100.0, 250.0, 150.0])
        assert polyserial_variance(e_x, sigma2, 2 * n) == pytest.approx(
            polyserial_variance(e_x, sigma2, n) / 2, rel=1e-12,
        )

    def test_variance_matches_dense_matrix_form(self) -> None:
        e_x = np.array([-1.2, 0.1, 0.9])
        sigma2 = np.array([0.7, 0.8, 0.75])
        n = np.array([100.0, 250.0, 150.0])
        Sigma = np.diag(sigma2 / n)
        expected = 1.0 / (e_x @ np.linalg.solve(Sigma, e_x))
        assert polyserial_variance(e_x, sigma2, n) == pytest.approx(expected, rel=1e-12)


class TestStartValues:
    """Arranque desde Pearson y recorte de ρ."""

    def test_pearson_start_replaces_perfect_association(self) -> None:
        assert pearson_start(1.0) == 0.99
        assert pearson_start(-1.0) == -0.99
        assert pearson_start(0.37) == 0.37

    def test_clamp_rho_keeps_open_interval(self) -> None:
        assert clamp_rho(1.5) == pytest.approx(1.0 - 1e-9)
        assert clamp_rho(-1.0) == pytest.approx(-1.0 + 1e-9)
        assert abs(clamp_rho(1.0)) < 1.0


# ============================================
# fit_polyserial
# ============================================


class TestFitPolyserial:
    """Bucle IRLS completo."""

    @pytest.mark.parametrize("rho", RHO_GRID)
    @pytest.mark.parametrize("s", sorted(PARTITIONS))
    def test_fit_population_summary_recovers_rho(self, rho: float, s: int) -> None:
        fit = fit_polyserial(population_summary(rho, PARTITIONS[s]))
        assert fit.rho == pytest.approx(rho, abs=1e-6)
        assert fit.converged
        assert fit.se > 0
        assert fit.categories == s

    def test_fit_zero_means_gives_zero(self) -> None:
        fit = fit_polyserial(population_summary(0.0, PARTITIONS[3]))
        assert fit.rho == pytest.approx(0.0, abs=1e-12)

    def test_fit_negated_response_negates_rho(self, rng: np.random.Generator) -> None:
        x = rng.integers(1, 4, 300)
        y = 0.6 * x + rng.normal(size=300)
        g = grouped_summary(x, y)
        fit = fit_polyserial(g)
        flipped = fit_polyserial(g.negated())
        assert flipped.rho == pytest.approx(-fit.rho, abs=1e-15)
        assert flipped.se == pytest.approx(fit.se, abs=1e-15)

    def test_fit_trace_starts_at_pearson(self) -> None:
        g = population_summary(0.4, PARTITIONS[5])
        fit = fit_polyserial(g)
        assert fit.trace[0].iteration == 0
        assert fit.trace[0].rho == pytest.approx(g.pearson)
        assert len(fit.trace) == fit.iterations + 1
        assert fit.trace[-1].rho == fit.rho
        assert fit.trace[0].e_x == []

    def test_fit_iteration_cap_flags_nonconvergence(self) -> None:
        fit = fit_polyserial(population_summary(0.6, PARTITIONS[3]), max_iter=1)
        assert not fit.converged
        assert fit.iterations == 1

    def test_fit_agrees_with_ml_on_large_sample(self, rng: np.random.Generator) -> None:
        z = rng.multivariate_normal([0, 0], [[1, 0.5], [0.5, 1]], 5000)
        x = np.digitize(z[:, 0], [-1.0, 0.2, 1.1]) + 1
        irls = fit_polyserial(grouped_summary(x, z[:, 1]))
        ml = fit_two_step_polyserial(x, z[:, 1])
        assert irls.rho == pytest.approx(ml.rho, abs=0.02)
        assert irls.rho == pytest.approx(0.5, abs=4 * irls.se)

    def test_fit_se_close_to_sampling_spread(self) -> None:
        """El error estándar delta es del orden de √((1 − ρ²)/N)."""
        fit = fit_polyserial(population_summary(0.4, PARTITIONS[2], N=500))
        assert 0.03 < fit.se < 0.08
        assert math.isfinite(fit.se)

    def test_interval_helper_matches_thresholds(self) -> None:
        th = Thresholds([0.0])
        assert th.interval(0) == Interval(-math.inf, 0.0)
