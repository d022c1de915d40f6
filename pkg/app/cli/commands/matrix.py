"""Comando `matrix`: matriz de correlaciones mixta por pares completos."""

import argparse
import logging

import pandas as pd

from app.cli.io import (
    ExitCode,
    UsageError,
    numeric_columns,
    read_frame,
    render_frame,
    render_json,
    resolve_schema,
)
from app.models.enums import Engine, JacobianMode
from app.services.estimators.service import CorrelationService

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "matrix", help="Matriz de correlaciones de todas las columnas utilizables",
    )
    parser.add_argument("file", help="CSV con cabecera")
    parser.add_argument("--kinds", help="Tipos forzados: A=ordinal,B=ignore")
    parser.add_argument(
        "--engine", type=Engine, choices=list(Engine), default=Engine.IRLS,
    )
    parser.add_argument(
        "--jacobian", type=JacobianMode, choices=list(JacobianMode), default=None,
    )
    parser.add_argument(
        "--threads", type=int, default=None,
        help="Hilos para los pares (por defecto POLYIRLS_THREADS)",
    )
    parser.add_argument(
        "--missing", choices=["pairwise"], default="pairwise",
        help="Política de ausentes (solo pares completos)",
    )
    parser.add_argument("--format", choices=["table", "csv", "json"], default="table")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads debe ser ≥ 1")
    frame = read_frame(args.file)
    schema = resolve_schema(frame, args.kinds)
    if len(schema.active) < 2:
        raise UsageError("Se necesitan al menos dos columnas no ignoradas")
    names = [c.name for c in schema.active]
    data = numeric_columns(frame, names)

    service = CorrelationService(args.engine, args.jacobian)
    result = service.matrix(data, schema, threads=args.threads)

    if args.format == "json":
        print(render_json(result.model_dump(mode="json")))
        return ExitCode.SUCCESS

    estimates = pd.DataFrame(
        result.estimate, index=pd.Index(result.names, name="variable"),
        columns=result.names,
    )
    print(render_frame(estimates, args.format))
    if args.format == "table" and result.reasons:
        print()
        for pair, reason in result.reasons.items():
            print(f"{pair}: {reason}")
    return ExitCode.SUCCESS
