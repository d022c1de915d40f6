"""Enumeraciones compartidas por servicios, schemas y CLI."""

import enum


class ColumnKind(str, enum.Enum):
    """Tipo declarado de una columna de datos."""
    ORDINAL = "ordinal"          # Enteros: categorías ordenadas
    CONTINUOUS = "continuous"    # Decimales: variable normal observada
    IGNORE = "ignore"            # No participa en el análisis


class Method(str, enum.Enum):
    """Coeficiente estimado para un par de variables."""
    POLYCHORIC = "polychoric"    # Ordinal × ordinal, s×r
    TETRACHORIC = "tetrachoric"  # Ordinal × ordinal, 2×2
    POLYSERIAL = "polyserial"    # Ordinal × continua
    PEARSON = "pearson"          # Continua × continua


class Engine(str, enum.Enum):
    """Motor de estimación."""
    IRLS = "irls"                # Mínimos cuadrados reponderados
    ML = "ml"                    # Máxima verosimilitud en dos pasos


class JacobianMode(str, enum.Enum):
    """Jacobiano usado en la tabla 2×2."""
    FULL = "full"                # D1 + D2 (incluye el umbral)
    D1_ONLY = "d1_only"          # Solo D1


class Executor(str, enum.Enum):
    """Dónde se ejecutan las réplicas de una simulación."""
    SERIAL = "serial"
    THREADS = "threads"
    CELERY = "celery"
