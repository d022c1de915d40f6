"""
Entry point del CLI `polyirls`.

Configura el logging, despacha al sub-comando y traduce las
excepciones a códigos de salida estables.
"""

import logging
import sys
from collections.abc import Sequence

from pydantic import ValidationError

from app.cli.io import DataError, ExitCode, UsageError
from app.cli.router import build_parser
from app.config import get_settings
from app.services.errors import EstimationError

logger = logging.getLogger("app")


def configure_logging(level: str | None = None) -> None:
    """Logs a stderr; stdout queda solo para resultados."""
    settings = get_settings()
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging(args.log_level)
    except ValueError:
        parser.error(f"nivel de log desconocido: {args.log_level}")

    try:
        return int(args.handler(args))
    except (UsageError, ValidationError) as e:
        print(f"polyirls: error de uso: {e}", file=sys.stderr)
        return ExitCode.USAGE
    except (DataError, EstimationError) as e:
        logger.debug("Detalle del error", exc_info=True)
        print(f"polyirls: error de datos: {e}", file=sys.stderr)
        return ExitCode.DATA


if __name__ == "__main__":
    raise SystemExit(main())
