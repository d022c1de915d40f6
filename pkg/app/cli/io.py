"""
Entrada y salida del CLI: lectura de CSV, inferencia de tipos,
tablas de conteos en línea y formateo de resultados.

Los comandos solo llaman a estas funciones y a los servicios.
"""

import enum
import json
import re
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from app.models.enums import ColumnKind
from app.models.tables import ContingencyTable
from app.schemas.matrix import ColumnSpec, Schema

_INTEGER = re.compile(r"^[+-]?\d+$")
MISSING_TOKENS = ["", "NA"]


class ExitCode(enum.IntEnum):
    """Códigos de salida estables del CLI."""
    SUCCESS = 0
    USAGE = 1
    DATA = 2
    NONCONVERGENCE = 3


class UsageError(Exception):
    """Invocación incorrecta (flags, tipos de columna no admitidos)."""


class DataError(Exception):
    """Fichero ilegible o columna inexistente."""


# ============================================
# Lectura
# ============================================


def read_frame(path: str | Path) -> pd.DataFrame:
    """Lee un CSV con cabecera como texto; vacío y NA son ausentes."""
    try:
        return pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            na_values=MISSING_TOKENS,
            skipinitialspace=True,
        )
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError,
            UnicodeDecodeError) as e:
        raise DataError(f"No se puede leer {path}: {e}") from e


def infer_kind(values: pd.Series) -> ColumnKind:
    """Enteros → ordinal; decimales → continua; otra cosa → ignorada."""
    present = values.dropna().astype(str).str.strip()
    if present.empty:
        return ColumnKind.IGNORE
    if present.map(lambda v: bool(_INTEGER.match(v))).all():
        return ColumnKind.ORDINAL
    if pd.to_numeric(present, errors="coerce").notna().all():
        return ColumnKind.CONTINUOUS
    return ColumnKind.IGNORE


def infer_schema(frame: pd.DataFrame) -> Schema:
    return Schema(columns=[
        ColumnSpec(name=str(name), kind=infer_kind(frame[name]))
        for name in frame.columns
    ])


def parse_kinds(text: str | None) -> dict[str, ColumnKind]:
    """"A=ordinal,B=continuous" → {"A": ORDINAL, "B": CONTINUOUS}."""
    if not text:
        return {}
    overrides: dict[str, ColumnKind] = {}
    for item in text.split(","):
        name, sep, kind = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"Tipo de columna mal formado: {item!r}")
        try:
            overrides[name.strip()] = ColumnKind(kind.strip().lower())
        except ValueError as e:
            raise UsageError(f"Tipo desconocido {kind!r} en {item!r}") from e
    return overrides


def resolve_schema(frame: pd.DataFrame, kinds: str | None) -> Schema:
    try:
        return infer_schema(frame).with_overrides(parse_kinds(kinds))
    except KeyError as e:
        raise DataError(f"Columna inexistente en --kinds: {e}") from e


def numeric_columns(frame: pd.DataFrame, names: Sequence[str]) -> pd.DataFrame:
    """Convierte las columnas pedidas a float (ausentes → NaN)."""
    missing = [n for n in names if n not in frame.columns]
    if missing:
        raise DataError(f"Columnas inexistentes: {', '.join(missing)}")
    out = pd.DataFrame(index=frame.index)
    for name in names:
        converted = pd.to_numeric(frame[name], errors="coerce")
        bad = converted.isna() & frame[name].notna()
        if bad.any():
            raise DataError(f"Valores no numéricos en la columna {name}")
        out[name] = converted.astype(float)
    return out


def parse_counts(text: str) -> ContingencyTable:
    """"a,b;c,d" → tabla de conteos (filas separadas por ';')."""
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.split(";")]
    except ValueError as e:
        raise UsageError(f"Conteos mal formados: {text!r}") from e
    if len({len(row) for row in rows}) != 1:
        raise UsageError("Todas las filas de --counts deben tener la misma longitud")
    return ContingencyTable.from_counts(rows)


def parse_list(text: str, cast: type) -> list[Any]:
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"Lista mal formada: {text!r}") from e


# ============================================
# Salida
# ============================================


def format_value(value: Any) -> str:
    """Floats con repr exacto; ausentes como NA."""
    if value is None:
        return "NA"
    if isinstance(value, float):
        if np.isnan(value):
            return "NA"
        return repr(float(value))
    if isinstance(value, enum.Enum):
        return str(value.value)
    return str(value)


def render_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False)


def render_key_values(payload: dict[str, Any]) -> str:
    width = max(len(k) for k in payload)
    return "\n".join(f"{k.ljust(width)}  {format_value(v)}" for k, v in payload.items())


def render_frame(frame: pd.DataFrame, fmt: str) -> str:
    """Tabla alineada o CSV; los ausentes se escriben como NA."""
    text = frame.map(format_value)
    if fmt == "csv":
        return text.to_csv(index=frame.index.name is not None).rstrip("\n")
    return text.to_string()
