"""App de Celery para repartir lotes de réplicas Monte Carlo.

Los lotes viajan como JSON (configuración e índices) y vuelven como
listas de ReplicationRecord serializados. Sin worker configurado
(CELERY_TASK_ALWAYS_EAGER) los lotes se ejecutan en el proceso que llama.
"""

from celery import Celery

from app.config import get_settings

settings = get_settings()

celery_app = Celery(
    "polyirls",
    broker=settings.CELERY_BROKER_URL,
    backend=settings.CELERY_RESULT_BACKEND,
)

celery_app.conf.update(
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    # El informe se agrega en cuanto vuelven los lotes
    result_expires=3600,
    task_always_eager=settings.CELERY_TASK_ALWAYS_EAGER,
    task_eager_propagates=True,
    imports=["app.tasks.simulation_tasks"],
)
