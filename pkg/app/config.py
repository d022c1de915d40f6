"""
Configuración central de polyirls.

Usa Pydantic BaseSettings para leer variables de entorno
y validarlas automáticamente al arrancar la aplicación.
Los servicios numéricos leen aquí sus tolerancias por defecto.
"""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configuración de la aplicación cargada desde variables de entorno."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # --- App ---
    APP_NAME: str = "polyirls"
    APP_VERSION: str = "0.1.0"
    DEBUG: bool = False
    LOG_LEVEL: str = "WARNING"

    # --- IRLS ---
    IRLS_TOLERANCE: float = Field(1e-8, gt=0)
    IRLS_MAX_ITER: int = Field(100, ge=1)
    RHO_CLAMP: float = Field(1e-9, gt=0, lt=0.5)
    RIDGE_FACTOR: float = Field(1e-12, gt=0)
    DEGENERATE_MASS: float = Field(1e-300, gt=0)
    PEARSON_START_CAP: float = Field(0.99, gt=0, lt=1)
    JACOBIAN_MODE: str = "full"

    # --- Oráculo de máxima verosimilitud ---
    ML_TOLERANCE: float = Field(1e-8, gt=0)
    ML_BOUND: float = Field(1e-6, gt=0, lt=0.5)
    ML_PROBABILITY_FLOOR: float = Field(1e-300, gt=0)

    # --- Cuadratura ---
    QUADRATURE_NODES: int = Field(24, ge=24)

    # --- Concurrencia ---
    POLYIRLS_THREADS: int = Field(1, ge=1)
    SIM_EXECUTOR: str = "serial"

    # --- Redis ---
    REDIS_HOST: str = "localhost"
    REDIS_PORT: int = 6379
    REDIS_DB: int = 0

    @property
    def redis_url(self) -> str:
        """Genera la URL de conexión a Redis."""
        return f"redis://{self.REDIS_HOST}:{self.REDIS_PORT}/{self.REDIS_DB}"

    # --- Celery ---
    CELERY_BROKER_URL: str = ""
    CELERY_RESULT_BACKEND: str = ""
    # Sin worker configurado las tareas corren en el mismo proceso
    CELERY_TASK_ALWAYS_EAGER: bool = True

    def model_post_init(self, __context: object) -> None:
        """Asigna valores por defecto que dependen de otros campos."""
        if not self.CELERY_BROKER_URL:
            self.CELERY_BROKER_URL = self.redis_url
        if not self.CELERY_RESULT_BACKEND:
            self.CELERY_RESULT_BACKEND = self.redis_url
        if self.DEBUG:
            self.LOG_LEVEL = "DEBUG"
        self.LOG_LEVEL = self.LOG_LEVEL.upper()


@lru_cache
def get_settings() -> Settings:
    """Devuelve la instancia de configuración (cacheada).

    Usar lru_cache asegura que solo se crea una instancia
    de Settings durante toda la vida de la aplicación.
    """
    return Settings()
