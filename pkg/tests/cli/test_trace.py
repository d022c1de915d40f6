"""
Tests para el comando `trace`.

Naming convention: test_<acción>_<escenario>_<resultado>
"""

import io
import json
from collections.abc import Callable
from pathlib import Path

import pandas as pd
import pytest

from app.main import main


class TestTraceCommand:
    """Una fila por iteración."""

    def test_trace_counts_csv_columns(self, capsys: pytest.CaptureFixture) -> None:
        assert main(["trace", "--counts", "3333,1667;1667,3333", "--format", "csv"]) == 0
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert list(frame.columns) == [
            "iteration", "rho", "e_x_1", "e_x_2", "E_Y_1", "E_Y_2",
        ]
        assert frame["iteration"].tolist() == list(range(len(frame)))
        assert frame["rho"].iloc[-1] == pytest.approx(0.5, abs=0.02)

    def test_trace_json_last_step_is_estimate(self, capsys: pytest.CaptureFixture) -> None:
        main(["trace", "--counts", "30,10;10,50", "--format", "json"])
        steps = json.loads(capsys.readouterr().out)
        main(["estimate", "--counts", "30,10;10,50", "--format", "json"])
        estimate = json.loads(capsys.readouterr().out)
        assert steps[-1]["rho"] == estimate["rho"]
        assert len(steps) == estimate["iterations"] + 1

    def test_trace_ml_engine_is_usage_error(self) -> None:
        assert main(["trace", "--counts", "30,10;10,50", "--engine", "ml"]) == 1

    def test_trace_continuous_pair_is_usage_error(
        self,
        write_csv: Callable[[pd.DataFrame, str], Path],
        mixed_frame: pd.DataFrame,
    ) -> None:
        frame = mixed_frame.assign(D=mixed_frame["C"] * 2 + 0.25)
        path = write_csv(frame, "data.csv")
        assert main(["trace", str(path), "--x", "C", "--y", "D"]) == 1

    def test_trace_ordinal_continuous_pair_is_usage_error(
        self,
        write_csv: Callable[[pd.DataFrame, str], Path],
        mixed_frame: pd.DataFrame,
    ) -> None:
        """Una columna continua, aunque la otra sea ordinal, sale con 1."""
        path = write_csv(mixed_frame, "data.csv")
        assert main(["trace", str(path), "--x", "A", "--y", "C"]) == 1
        assert main(["trace", str(path), "--x", "C", "--y", "A"]) == 1

    def test_trace_ordinal_file_pair(
        self,
        capsys: pytest.CaptureFixture,
        write_csv: Callable[[pd.DataFrame, str], Path],
        mixed_frame: pd.DataFrame,
    ) -> None:
        path = write_csv(mixed_frame, "data.csv")
        assert main(["trace", str(path), "--x", "A", "--y", "B", "--format", "json"]) == 0
        steps = json.loads(capsys.readouterr().out)
        assert steps[0]["iteration"] == 0
        assert len(steps[-1]["e_x"]) > 0

    def test_trace_converged_last_steps_within_tolerance(
        self, capsys: pytest.CaptureFixture,
    ) -> None:
        assert main(["trace", "--counts", "3333,1667;1667,3333", "--format", "json"]) == 0
        rho = [s["rho"] for s in json.loads(capsys.readouterr().out)]
        assert abs(rho[-1] - rho[-2]) <= 1e-8

    def test_trace_population_table_steps_shrink(
        self, capsys: pytest.CaptureFixture,
    ) -> None:
        main(["trace", "--counts", "3333,1667;1667,3333", "--format", "json"])
        rho = [s["rho"] for s in json.loads(capsys.readouterr().out)]
        steps = [abs(b - a) for a, b in zip(rho[1:], rho[2:], strict=False)]
        pairs = zip(steps, steps[1:], strict=False)
        assert all(later <= earlier + 1e-12 for earlier, later in pairs)
