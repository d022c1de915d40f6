"""
Tareas Celery de la simulación.

Un lote de réplicas por tarea. Argumentos y resultado son JSON:
la configuración se valida de nuevo en el worker.
"""

import logging

from app.tasks.celery_app import celery_app

logger = logging.getLogger(__name__)


@celery_app.task(bind=True, name="run_replication_batch")
def run_replication_batch(self, config: dict, indices: list[int]) -> list[dict]:
    """Ejecuta las réplicas `indices` y devuelve sus registros serializados."""
    from app.schemas.simulation import SimConfig
    from app.services.simulation import run_replication

    cfg = SimConfig.model_validate(config)
    logger.info(
        "🎲 Lote de %d réplicas (task: %s)", len(indices), self.request.id,
    )
    records = [
        record.model_dump(mode="json")
        for index in indices
        for record in run_replication(cfg, index)
    ]
    logger.info("✅ Lote terminado: %d registros", len(records))
    return records
