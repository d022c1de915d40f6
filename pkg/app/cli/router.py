"""Parser principal del CLI. Agrupa todos los sub-comandos."""

import argparse
import sys

from app.cli.commands import estimate, matrix, simulate, trace
from app.cli.io import ExitCode
from app.config import get_settings


class CliParser(argparse.ArgumentParser):
    """argparse sale con 2 en errores de uso; aquí el contrato es 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    settings = get_settings()
    parser = CliParser(
        prog="polyirls",
        description="Correlaciones polisérica, tetracórica y policórica por IRLS",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {settings.APP_VERSION}",
    )
    parser.add_argument(
        "--log-level",
        default=None,
        help="Nivel de log en stderr (por defecto LOG_LEVEL)",
    )
    subparsers = parser.add_subparsers(
        dest="command", required=True, parser_class=CliParser,
    )

    # Registrar sub-comandos
    estimate.register(subparsers)
    matrix.register(subparsers)
    trace.register(subparsers)
    simulate.register(subparsers)
    return parser
