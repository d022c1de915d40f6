"""Comandos `simulate` y `benchmark`: experimentos Monte Carlo."""

import argparse
import logging

import pandas as pd
from pydantic import ValidationError

from app.cli.io import (
    ExitCode,
    UsageError,
    format_value,
    parse_list,
    render_frame,
    render_json,
    render_key_values,
)
from app.config import get_settings
from app.models.enums import Engine, Executor, JacobianMode
from app.schemas.simulation import SimConfig, SimReport
from app.services.simulation import benchmark, run_sweep

logger = logging.getLogger(__name__)

_METRIC_COLUMNS = [
    "successes", "failures", "nonconverged", "mean", "mb", "mrb", "rmse", "sd", "msd",
]


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rho", required=True, help="ρ o lista: 0.2,0.4")
    parser.add_argument("--N", dest="N", required=True, help="N o lista: 100,500")
    parser.add_argument("--s", type=int, required=True)
    parser.add_argument(
        "--r", type=int, default=None, help="Sin --r: polisérica (Y continua)",
    )
    parser.add_argument("--reps", type=int, required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--executor", type=Executor, choices=list(Executor), default=None,
    )
    parser.add_argument(
        "--threads", type=int, default=None,
        help="Hilos de réplica (por defecto POLYIRLS_THREADS)",
    )
    parser.add_argument(
        "--jacobian", type=JacobianMode, choices=list(JacobianMode), default=None,
    )
    parser.add_argument("--format", choices=["table", "json"], default="table")


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("simulate", help="Simulación Monte Carlo")
    _add_config_arguments(parser)
    parser.add_argument(
        "--estimators", default="irls", help="Motores separados por coma: irls,ml",
    )
    parser.add_argument(
        "--timing", action="store_true",
        help="Incluye tiempos (salida no reproducible)",
    )
    parser.set_defaults(handler=run)

    bench = subparsers.add_parser(
        "benchmark", help="Tiempo de IRLS frente a ML sobre las mismas tablas",
    )
    _add_config_arguments(bench)
    bench.set_defaults(handler=run_benchmark)


def build_config(args: argparse.Namespace, estimators: list[Engine]) -> SimConfig:
    """Configuración base con el primer ρ y el primer N."""
    rhos = parse_list(args.rho, float)
    sizes = parse_list(args.N, int)
    if not rhos or not sizes:
        raise UsageError("--rho y --N necesitan al menos un valor")
    settings = get_settings()
    threads = args.threads if args.threads is not None else settings.POLYIRLS_THREADS
    payload = {
        "rho": rhos[0],
        "N": sizes[0],
        "s": args.s,
        "r": args.r,
        "reps": args.reps,
        "seed": args.seed,
        "estimators": estimators,
        "jacobian": args.jacobian,
        "threads": threads,
    }
    if args.executor is not None:
        payload["executor"] = args.executor
    else:
        default = Executor(settings.SIM_EXECUTOR)
        payload["executor"] = Executor.THREADS if threads > 1 else default
    try:
        return SimConfig.model_validate(payload)
    except ValidationError as e:
        raise UsageError(f"Configuración inválida: {e.errors()[0]['msg']}") from e


def parse_engines(text: str) -> list[Engine]:
    try:
        return [Engine(v.strip().lower()) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"Estimador desconocido en {text!r}") from e


def metrics_frame(reports: list[SimReport], timing: bool) -> pd.DataFrame:
    """Una fila por (ρ, N, motor)."""
    columns = _METRIC_COLUMNS + (["seconds"] if timing else [])
    rows = []
    for report in reports:
        for m in report.metrics:
            row = {
                "rho": report.config.rho,
                "N": report.config.N,
                "engine": m.engine.value,
            }
            row.update({c: getattr(m, c) for c in columns})
            rows.append(row)
    return pd.DataFrame(rows).set_index(["rho", "N", "engine"])


def run(args: argparse.Namespace) -> int:
    base = build_config(args, parse_engines(args.estimators))
    rhos = parse_list(args.rho, float)
    sizes = parse_list(args.N, int)
    try:
        reports = run_sweep(base, rhos, sizes)
    except ValidationError as e:
        raise UsageError(f"Configuración inválida: {e.errors()[0]['msg']}") from e

    if args.format == "json":
        if args.timing:
            payload = [r.model_dump(mode="json") for r in reports]
        else:
            payload = [r.statistics() for r in reports]
        print(render_json(payload[0] if len(payload) == 1 else payload))
    else:
        print(render_frame(metrics_frame(reports, args.timing), "table"))
        if args.timing:
            wall = sum(r.wall_seconds for r in reports)
            print(f"\nwall_seconds  {format_value(wall)}")

    if any(m.successes == 0 for r in reports for m in r.metrics):
        logger.warning("Algún estimador no produjo ninguna réplica válida")
    return ExitCode.SUCCESS


def run_benchmark(args: argparse.Namespace) -> int:
    cfg = build_config(args, [Engine.IRLS, Engine.ML])
    result = benchmark(cfg)
    payload = {
        "irls_seconds": result.irls_seconds,
        "ml_seconds": result.ml_seconds,
        "ratio": result.ratio,
    }
    if args.format == "json":
        print(render_json(result.model_dump(mode="json")))
    else:
        print(render_key_values(payload))
    return ExitCode.SUCCESS
