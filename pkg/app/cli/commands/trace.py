"""Comando `trace`: una fila por iteración (ρ, e_x, E_Y) para dibujar fuera."""

import argparse

import pandas as pd

from app.cli.commands.estimate import add_engine_arguments, load_pair
from app.cli.io import (
    ExitCode,
    UsageError,
    parse_counts,
    render_frame,
    render_json,
)
from app.models.enums import ColumnKind, Engine
from app.services.estimators.service import CorrelationService
from app.services.tabulate import collapse_empty


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "trace", help="Traza de iteraciones IRLS de un par ordinal × ordinal",
    )
    parser.add_argument("file", nargs="?", help="CSV con cabecera")
    parser.add_argument("--x", dest="xcol")
    parser.add_argument("--y", dest="ycol")
    parser.add_argument("--kinds")
    parser.add_argument("--counts")
    add_engine_arguments(parser)
    parser.add_argument("--format", choices=["table", "csv", "json"], default="table")
    parser.set_defaults(handler=run)


def trace_frame(steps: list) -> pd.DataFrame:
    """Columnas: iteration, rho, e_x_1..e_x_s, E_Y_1..E_Y_s."""
    rows = []
    for step in steps:
        row = {"iteration": step.iteration, "rho": step.rho}
        row.update({f"e_x_{i + 1}": v for i, v in enumerate(step.e_x)})
        row.update({f"E_Y_{i + 1}": v for i, v in enumerate(step.E_Y)})
        rows.append(row)
    return pd.DataFrame(rows).set_index("iteration")


def run(args: argparse.Namespace) -> int:
    if args.engine != Engine.IRLS:
        raise UsageError("La traza solo existe para el motor irls")
    service = CorrelationService(Engine.IRLS, args.jacobian)

    if args.counts:
        table, _ = collapse_empty(parse_counts(args.counts))
        result = service.estimate_table(table)
    else:
        x, kind_x, y, kind_y = load_pair(args)
        if kind_x != ColumnKind.ORDINAL or kind_y != ColumnKind.ORDINAL:
            raise UsageError("La traza requiere dos columnas ordinales")
        result = service.estimate_pair(x, kind_x, y, kind_y, safe=False)

    steps = result.fit.trace
    if args.format == "json":
        print(render_json([s.model_dump(mode="json") for s in steps]))
    else:
        print(render_frame(trace_frame(steps), args.format))

    if result.converged is False:
        return ExitCode.NONCONVERGENCE
    return ExitCode.SUCCESS
