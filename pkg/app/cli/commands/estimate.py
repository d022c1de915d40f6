"""
Comando `estimate`: correlación de un par de columnas o de una tabla.

Recibe argumentos, delega al servicio, y formatea la salida.
No hay lógica de estimación aquí.
"""

import argparse
import logging

from app.cli.io import (
    ExitCode,
    UsageError,
    numeric_columns,
    parse_counts,
    read_frame,
    render_json,
    render_key_values,
    resolve_schema,
)
from app.models.enums import ColumnKind, Engine, JacobianMode
from app.services.estimators.base import EstimateResult
from app.services.estimators.service import CorrelationService
from app.services.polychoric import transpose_report
from app.services.tabulate import collapse_empty, crosstab

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "estimate",
        help="Estima la correlación de un par de columnas o de una tabla de conteos",
    )
    parser.add_argument("file", nargs="?", help="CSV con cabecera")
    parser.add_argument("--x", dest="xcol", help="Primera columna")
    parser.add_argument("--y", dest="ycol", help="Segunda columna")
    parser.add_argument(
        "--kinds", help="Tipos forzados: A=ordinal,B=continuous,C=ignore",
    )
    parser.add_argument(
        "--counts", help='Tabla de conteos en línea, p. ej. "30,10;10,50"',
    )
    add_engine_arguments(parser)
    parser.add_argument(
        "--transpose-check",
        action="store_true",
        help="Ajusta también la tabla traspuesta y muestra la diferencia",
    )
    parser.add_argument("--format", choices=["table", "json"], default="table")
    parser.set_defaults(handler=run)


def add_engine_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--engine", type=Engine, choices=list(Engine), default=Engine.IRLS,
    )
    parser.add_argument(
        "--jacobian", type=JacobianMode, choices=list(JacobianMode), default=None,
        help="Jacobiano de la tabla 2×2 (por defecto el de la configuración)",
    )


def load_pair(args: argparse.Namespace) -> tuple:
    """Lee el CSV y devuelve (x, kind_x, y, kind_y) por pares completos."""
    if not args.file or not args.xcol or not args.ycol:
        raise UsageError("Se necesitan FILE, --x y --y (o --counts)")
    frame = read_frame(args.file)
    schema = resolve_schema(frame, args.kinds)
    data = numeric_columns(frame, [args.xcol, args.ycol]).dropna()
    kind_x = schema.kind_of(args.xcol)
    kind_y = schema.kind_of(args.ycol)
    if ColumnKind.IGNORE in (kind_x, kind_y):
        raise UsageError(f"Columna no utilizable: {args.xcol}={kind_x.value}, "
                         f"{args.ycol}={kind_y.value}")
    return data[args.xcol].to_numpy(), kind_x, data[args.ycol].to_numpy(), kind_y


def summary(result: EstimateResult) -> dict:
    """Estructura estable de salida."""
    return {
        "method": result.method.value if result.method else None,
        "rho": result.rho,
        "se": result.se,
        "iterations": result.iterations,
        "converged": result.converged,
        "n": result.n,
    }


def run(args: argparse.Namespace) -> int:
    service = CorrelationService(args.engine, args.jacobian)

    table = None
    if args.counts:
        table, _ = collapse_empty(parse_counts(args.counts))
        result = service.estimate_table(table)
    else:
        x, kind_x, y, kind_y = load_pair(args)
        if args.transpose_check:
            if (kind_x, kind_y) != (ColumnKind.ORDINAL, ColumnKind.ORDINAL):
                raise UsageError("--transpose-check solo aplica a pares ordinales")
            table = crosstab(x, y)
        result = service.estimate_pair(x, kind_x, y, kind_y, safe=False)

    payload = summary(result)
    if args.transpose_check and table is not None:
        report = transpose_report(table, jacobian=args.jacobian)
        payload["transpose"] = report.model_dump(mode="json")

    if args.format == "json":
        print(render_json(payload))
    else:
        flat = {k: v for k, v in payload.items() if k != "transpose"}
        for key, value in payload.get("transpose", {}).items():
            flat[f"transpose_{key}"] = value
        print(render_key_values(flat))

    if result.converged is False:
        logger.warning("La estimación no convergió")
        return ExitCode.NONCONVERGENCE
    return ExitCode.SUCCESS
