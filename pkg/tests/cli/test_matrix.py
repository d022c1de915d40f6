"""
Tests para el comando `matrix`.

Naming convention: test_<acción>_<escenario>_<resultado>
"""

import io
import json
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from app.main import main

WriteCsv = Callable[[pd.DataFrame, str], Path]


class TestMatrixCommand:
    """Matriz mixta desde un CSV."""

    def test_matrix_json_excludes_text_column(
        self, capsys: pytest.CaptureFixture, write_csv: WriteCsv, mixed_frame: pd.DataFrame,
    ) -> None:
        path = write_csv(mixed_frame, "data.csv")
        assert main(["matrix", str(path), "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["names"] == ["A", "B", "C", "K"]
        assert payload["estimate"][0][0] == 1.0
        assert payload["estimate"][0][2] == payload["estimate"][2][0]
        assert payload["method"][0][1] == "polychoric"
        assert payload["method"][0][2] == "polyserial"
        assert "A|K" in payload["reasons"]

    def test_matrix_csv_uses_na_for_absent(
        self, capsys: pytest.CaptureFixture, write_csv: WriteCsv, mixed_frame: pd.DataFrame,
    ) -> None:
        path = write_csv(mixed_frame, "data.csv")
        assert main(["matrix", str(path), "--format", "csv"]) == 0
        frame = pd.read_csv(
            io.StringIO(capsys.readouterr().out), index_col="variable",
            keep_default_na=False,
        )
        assert list(frame.columns) == ["A", "B", "C", "K"]
        assert frame.loc["K", "A"] == "NA"
        assert float(frame.loc["A", "A"]) == 1.0

    def test_matrix_table_lists_reasons(
        self, capsys: pytest.CaptureFixture, write_csv: WriteCsv, mixed_frame: pd.DataFrame,
    ) -> None:
        path = write_csv(mixed_frame, "data.csv")
        assert main(["matrix", str(path)]) == 0
        assert "K|K:" in capsys.readouterr().out

    def test_matrix_threads_same_output(
        self, capsys: pytest.CaptureFixture, write_csv: WriteCsv, mixed_frame: pd.DataFrame,
    ) -> None:
        path = write_csv(mixed_frame, "data.csv")
        main(["matrix", str(path), "--format", "csv", "--threads", "1"])
        one = capsys.readouterr().out
        main(["matrix", str(path), "--format", "csv", "--threads", "3"])
        assert capsys.readouterr().out == one

    def test_matrix_missing_values_pairwise(
        self, capsys: pytest.CaptureFixture, write_csv: WriteCsv, mixed_frame: pd.DataFrame,
    ) -> None:
        frame = mixed_frame.astype(object)
        frame.loc[:9, "A"] = "NA"
        frame.loc[10:14, "B"] = ""
        path = write_csv(frame, "data.csv")
        assert main(["matrix", str(path), "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["n"][0][1] == 385

    def test_matrix_kinds_override(
        self, capsys: pytest.CaptureFixture, write_csv: WriteCsv, mixed_frame: pd.DataFrame,
    ) -> None:
        path = write_csv(mixed_frame, "data.csv")
        code = main([
            "matrix", str(path), "--kinds", "B=continuous,K=ignore", "--format", "json",
        ])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["names"] == ["A", "B", "C"]
        assert payload["method"][1][2] == "pearson"

    def test_matrix_single_usable_column_is_usage_error(
        self, write_csv: WriteCsv, mixed_frame: pd.DataFrame,
    ) -> None:
        path = write_csv(mixed_frame[["A", "T"]], "data.csv")
        assert main(["matrix", str(path)]) == 1

    def test_matrix_zero_threads_is_usage_error(
        self, write_csv: WriteCsv, mixed_frame: pd.DataFrame,
    ) -> None:
        path = write_csv(mixed_frame, "data.csv")
        assert main(["matrix", str(path), "--threads", "0"]) == 1

    def test_matrix_unknown_kinds_column_is_data_error(
        self, write_csv: WriteCsv, mixed_frame: pd.DataFrame,
    ) -> None:
        path = write_csv(mixed_frame, "data.csv")
        assert main(["matrix", str(path), "--kinds", "Z=ordinal"]) == 2

    def test_matrix_all_continuous_is_pearson(
        self, capsys: pytest.CaptureFixture, write_csv: WriteCsv, rng: np.random.Generator,
    ) -> None:
        z = rng.normal(size=(200, 3)) + 0.5
        frame = pd.DataFrame(z, columns=["u", "v", "w"])
        path = write_csv(frame, "continuous.csv")
        assert main(["matrix", str(path), "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        for i in range(3):
            assert payload["estimate"][i][i] == 1.0
            assert payload["se"][i][i] == 0.0
            for j in range(3):
                assert payload["estimate"][i][j] == payload["estimate"][j][i]
                if i != j:
                    assert payload["method"][i][j] == "pearson"
        expected = np.corrcoef(frame.to_numpy().T)[0, 1]
        assert payload["estimate"][0][1] == pytest.approx(expected, abs=1e-6)

    @pytest.mark.slow
    def test_matrix_survey_scale_completes(
        self, capsys: pytest.CaptureFixture, write_csv: WriteCsv, rng: np.random.Generator,
    ) -> None:
        """25 ítems Likert de 6 puntos y N = 2800."""
        loadings = rng.uniform(0.4, 0.8, 25)
        factor = rng.normal(size=(2800, 1))
        latent = factor * loadings + rng.normal(size=(2800, 25)) * np.sqrt(1 - loadings**2)
        items = np.digitize(latent, [-1.5, -0.7, 0.0, 0.7, 1.5]) + 1
        path = write_csv(pd.DataFrame(items, columns=[f"i{k}" for k in range(25)]), "bfi.csv")
        assert main(["matrix", str(path), "--format", "json", "--threads", "4"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["names"]) == 25
        assert not payload["reasons"]
        assert all(s >= 0 for row in payload["seconds"] for s in row)
