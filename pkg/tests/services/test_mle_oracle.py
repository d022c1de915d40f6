"""
Tests para el oráculo de máxima verosimilitud en dos pasos.

Naming convention: test_<acción>_<escenario>_<resultado>
"""

import math
from collections.abc import Callable

import numpy as np
import pytest
from scipy import stats

from app.models.enums import Method
from app.models.tables import ContingencyTable, Thresholds
from app.services.errors import DegenerateDataError, DomainError
from app.services.mle_oracle import (
    fit_two_step,
    fit_two_step_polychoric,
    fit_two_step_polyserial,
    polychoric_loglik,
    polyserial_loglik,
)
from app.services.tabulate import proportions, thresholds_from_marginals


def table_thresholds(t: ContingencyTable) -> tuple[Thresholds, Thresholds]:
    p = proportions(t)
    return thresholds_from_marginals(p.cum_row), thresholds_from_marginals(p.cum_col)


# ============================================
# Log-verosimilitudes
# ============================================


class TestPolychoricLoglik:
    """Σ n_ij log π_ij(ρ)."""

    def test_loglik_uniform_table_independence(self) -> None:
        t = ContingencyTable.from_counts([[25, 25], [25, 25]])
        a, b = table_thresholds(t)
        assert polychoric_loglik(0.0, t, a, b) == pytest.approx(100 * math.log(0.25))

    def test_loglik_independence_factorizes(self, skewed_table: ContingencyTable) -> None:
        a, b = table_thresholds(skewed_table)
        p = proportions(skewed_table)
        expected = float(np.sum(
            skewed_table.counts * np.log(np.outer(p.row_marginals, p.col_marginals))
        ))
        assert polychoric_loglik(0.0, skewed_table, a, b) == pytest.approx(expected, abs=1e-6)

    def test_loglik_population_maximized_at_true_rho(
        self, population_table: Callable,
    ) -> None:
        t = population_table(0.5)
        a, b = table_thresholds(t)
        grid = np.arange(0.45, 0.55 + 1e-12, 1e-4)
        values = [polychoric_loglik(r, t, a, b) for r in grid]
        assert grid[int(np.argmax(values))] == pytest.approx(0.5, abs=1e-4)

    def test_loglik_zero_cells_do_not_contribute(self) -> None:
        t = ContingencyTable.from_counts([[20, 0], [5, 15]])
        a, b = table_thresholds(t)
        assert math.isfinite(polychoric_loglik(0.99, t, a, b))

    def test_loglik_unimodal_on_grid(self, skewed_table: ContingencyTable) -> None:
        a, b = table_thresholds(skewed_table)
        grid = np.linspace(-0.95, 0.95, 77)
        values = np.array([polychoric_loglik(r, skewed_table, a, b) for r in grid])
        peak = int(np.argmax(values))
        assert np.all(np.diff(values[: peak + 1]) > 0)
        assert np.all(np.diff(values[peak:]) < 0)

    def test_loglik_rho_outside_range_raises(self, skewed_table: ContingencyTable) -> None:
        a, b = table_thresholds(skewed_table)
        with pytest.raises(DomainError):
            polychoric_loglik(1.0, skewed_table, a, b)


class TestPolyserialLoglik:
    """Σ log φ(y) + log masa del intervalo condicional."""

    def test_loglik_rho_zero_decouples(self, rng: np.random.Generator) -> None:
        x = rng.integers(1, 4, 50)
        y = rng.normal(size=50)
        counts = np.bincount(x, minlength=4)[1:]
        a = thresholds_from_marginals(np.cumsum(counts) / counts.sum())
        P = counts / counts.sum()
        expected = float(np.sum(stats.norm.logpdf(y)) + np.dot(counts, np.log(P)))
        assert polyserial_loglik(0.0, x, y, a) == pytest.approx(expected, abs=1e-9)

    def test_loglik_single_observation_at_zero(self) -> None:
        a = Thresholds([0.0])
        for code in (1, 2):
            value = polyserial_loglik(0.6, [code], [0.0], a)
            assert value == pytest.approx(stats.norm.logpdf(0.0) + math.log(0.5))

    def test_loglik_codes_outside_thresholds_raise(self) -> None:
        with pytest.raises(DomainError):
            polyserial_loglik(0.2, [1, 3], [0.1, 0.2], Thresholds([0.0]))


# ============================================
# Ajuste en dos pasos
# ============================================


class TestTwoStepFit:
    """Maximización acotada de la log-verosimilitud."""

    def test_fit_population_table_recovers_rho(self, population_table: Callable) -> None:
        fit = fit_two_step_polychoric(population_table(0.5))
        assert fit.rho == pytest.approx(0.5, abs=1e-4)
        assert fit.method == Method.TETRACHORIC
        assert fit.converged

    def test_fit_independence_table_gives_zero(self) -> None:
        t = ContingencyTable(np.outer([1.0, 3.0, 2.0], [2.0, 1.0, 1.0]) * 50)
        fit = fit_two_step_polychoric(t)
        assert fit.rho == pytest.approx(0.0, abs=1e-6)
        assert fit.method == Method.POLYCHORIC

    def test_fit_polyserial_large_sample(self, rng: np.random.Generator) -> None:
        z = rng.multivariate_normal([0, 0], [[1, 0.4], [0.4, 1]], 4000)
        x = np.digitize(z[:, 0], [-0.7, 0.5]) + 1
        fit = fit_two_step_polyserial(x, z[:, 1])
        # Error típico ≈ 0.016 con N = 4000 y tres categorías
        assert fit.rho == pytest.approx(0.4, abs=0.05)
        assert fit.method == Method.POLYSERIAL

    def test_fit_polyserial_constant_y_raises(self) -> None:
        with pytest.raises(DegenerateDataError):
            fit_two_step_polyserial([1, 2, 1, 2], [1.0, 1.0, 1.0, 1.0])

    def test_fit_dispatches_on_input(self, population_table: Callable) -> None:
        table_fit = fit_two_step(population_table(0.3))
        assert table_fit.method == Method.TETRACHORIC
        mixed_fit = fit_two_step(([1, 1, 2, 2, 3, 3], [0.1, -0.4, 0.3, 0.2, 1.1, 0.9]))
        assert mixed_fit.method == Method.POLYSERIAL
        assert -1 < mixed_fit.rho < 1
