"""
Simulación Monte Carlo de los estimadores.

Genera normales bivariantes, las discretiza con umbrales
equiespaciados en [−3, 3], estima en cada réplica y agrega
MEAN, MB, MRB, RMSE, SD y MSD.

Cada réplica deriva su propio generador de (seed, índice), así que el
informe no depende del orden ni del ejecutor (serie, hilos o Celery).
"""

import hashlib
import logging
import math
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.typing import ArrayLike

from app.models.enums import Engine, Executor
from app.models.tables import Thresholds
from app.schemas.simulation import (
    BenchmarkReport,
    EstimatorMetrics,
    ReplicationRecord,
    SimConfig,
    SimReport,
)
from app.services.errors import DomainError
from app.services.estimators.base import CorrelationEstimator
from app.services.estimators.providers import (
    IrlsPolychoricEstimator,
    IrlsPolyserialEstimator,
    MlPolychoricEstimator,
    MlPolyserialEstimator,
)
from app.services.gaussian import quantile

logger = logging.getLogger(__name__)

# Uniformes en (0, 1) con 53 bits: (k + 0.5) / 2⁵³
_UNIFORM_BITS = 53
_UNIFORM_SCALE = float(2**_UNIFORM_BITS)
# Extremo del rango de umbrales
_THRESHOLD_SPAN = 3.0


# ============================================
# Generación de datos
# ============================================


def replication_rng(seed: int, index: int) -> np.random.Generator:
    """Generador propio de la réplica, derivado por hash de (seed, index)."""
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


def _uniforms(rng: np.random.Generator, size: tuple[int, ...]) -> np.ndarray:
    k = rng.integers(0, 2**_UNIFORM_BITS, size=size, dtype=np.int64)
    return (k + 0.5) / _UNIFORM_SCALE


def sample_bivariate(rho: float, N: int, rng: np.random.Generator) -> np.ndarray:
    """N pares (Z1, Z2) con Z2 = ρZ1 + √(1 − ρ²)ε.

    Normales por transformada inversa de uniformes: mismo flujo,
    mismos datos en cualquier plataforma.
    """
    if not abs(rho) <= 1.0:
        raise DomainError(f"|ρ| debe ser ≤ 1, es {rho!r}")
    if N < 1:
        raise DomainError(f"N debe ser ≥ 1, es {N!r}")
    z = np.asarray(quantile(_uniforms(rng, (2, N))))
    z1 = z[0]
    eps = z[1]
    z2 = rho * z1 + math.sqrt(max(0.0, (1.0 - rho) * (1.0 + rho))) * eps
    return np.column_stack([z1, z2])


def bollen_thresholds(s: int) -> Thresholds:
    """Umbrales equiespaciados y simétricos: t_k = −3 + 6k/s, k = 1..s−1."""
    if not 2 <= s <= 9:
        raise DomainError(f"s debe estar entre 2 y 9, es {s!r}")
    k = np.arange(1, s)
    return Thresholds(-_THRESHOLD_SPAN + 2.0 * _THRESHOLD_SPAN * k / s)


def discretize(z: ArrayLike, th: Thresholds) -> np.ndarray:
    """Categoría i si a_{i−1} < z ≤ a_i (intervalos cerrados por la derecha)."""
    z = np.asarray(z, dtype=float)
    return np.searchsorted(th.interior, z, side="left").astype(np.int64) + 1


def replication_data(cfg: SimConfig, index: int) -> tuple[np.ndarray, np.ndarray]:
    """(x, y) de la réplica: y ordinal, o continua si la config es polisérica."""
    z = sample_bivariate(cfg.rho, cfg.N, replication_rng(cfg.seed, index))
    x = discretize(z[:, 0], bollen_thresholds(cfg.s))
    if cfg.is_polyserial:
        return x, z[:, 1]
    return x, discretize(z[:, 1], bollen_thresholds(cfg.r))  # type: ignore[arg-type]


def _estimator(cfg: SimConfig, engine: Engine) -> CorrelationEstimator:
    if cfg.is_polyserial:
        if engine == Engine.IRLS:
            return IrlsPolyserialEstimator()
        return MlPolyserialEstimator()
    if engine == Engine.IRLS:
        return IrlsPolychoricEstimator(cfg.jacobian)
    return MlPolychoricEstimator()


def run_replication(cfg: SimConfig, index: int) -> list[ReplicationRecord]:
    """Genera la réplica y la pasa por cada estimador pedido."""
    x, y = replication_data(cfg, index)
    records = []
    for engine in cfg.estimators:
        estimator = _estimator(cfg, engine)
        start = time.perf_counter()
        result = estimator.safe_estimate(x, y)
        elapsed = time.perf_counter() - start
        records.append(ReplicationRecord(
            index=index,
            engine=engine,
            success=result.success,
            rho=result.rho,
            se=result.se,
            converged=result.converged,
            error=result.error,
            seconds=elapsed,
        ))
    return records


# ============================================
# Ejecución
# ============================================


def _batches(indices: Sequence[int], size: int) -> list[list[int]]:
    return [list(indices[i:i + size]) for i in range(0, len(indices), size)]


def _run_celery(cfg: SimConfig, indices: Sequence[int]) -> list[ReplicationRecord]:
    from app.tasks.simulation_tasks import run_replication_batch

    payload = cfg.model_dump(mode="json")
    pending = [
        run_replication_batch.apply_async(args=(payload, batch))
        for batch in _batches(indices, cfg.batch_size)
    ]
    return [
        ReplicationRecord.model_validate(item)
        for result in pending
        for item in result.get()
    ]


def execute_replications(cfg: SimConfig) -> list[ReplicationRecord]:
    """Ejecuta todas las réplicas con el ejecutor configurado.

    Los registros se devuelven ordenados por índice de réplica.
    """
    indices = list(range(cfg.reps))
    if cfg.executor == Executor.SERIAL:
        records = [rec for i in indices for rec in run_replication(cfg, i)]
    elif cfg.executor == Executor.THREADS:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = pool.map(lambda i: run_replication(cfg, i), indices)
            records = [rec for chunk in chunks for rec in chunk]
    else:
        records = _run_celery(cfg, indices)
    order = {engine: k for k, engine in enumerate(cfg.estimators)}
    return sorted(records, key=lambda r: (r.index, order[r.engine]))


# ============================================
# Métricas
# ============================================


def summarize(
    records: Iterable[ReplicationRecord], rho: float, engine: Engine,
) -> EstimatorMetrics:
    """Agrega las réplicas de un estimador.

    Las réplicas fallidas se excluyen y se cuentan. Las no convergidas
    se conservan (son el último iterado) y se cuentan aparte.
    SD usa denominador n, de modo que RMSE² = SD² + MB².
    """
    mine = [r for r in records if r.engine == engine]
    ok = [r for r in mine if r.success and r.rho is not None]
    failures = len(mine) - len(ok)
    seconds = float(sum(r.seconds for r in mine))
    nonconverged = sum(1 for r in ok if r.converged is False)
    if failures:
        logger.warning("%s: %d réplicas fallidas excluidas", engine.value, failures)
    if not ok:
        return EstimatorMetrics(
            engine=engine, successes=0, failures=failures, seconds=seconds,
        )

    est = np.array([r.rho for r in ok], dtype=float)
    mean = float(est.mean())
    mb = mean - rho
    ses = [r.se for r in ok if r.se is not None]
    return EstimatorMetrics(
        engine=engine,
        successes=len(ok),
        failures=failures,
        nonconverged=nonconverged,
        mean=mean,
        mb=mb,
        mrb=None if rho == 0 else mb / rho,
        rmse=float(np.sqrt(np.mean((est - rho) ** 2))),
        sd=float(est.std(ddof=0)) if est.size >= 2 else None,
        msd=float(np.mean(ses)) if ses else None,
        seconds=seconds,
    )


def run_simulation(cfg: SimConfig) -> SimReport:
    """Ejecuta el experimento completo y agrega las métricas."""
    logger.info(
        "🎲 Simulación ρ=%s N=%d s=%d r=%s reps=%d (%s)",
        cfg.rho, cfg.N, cfg.s, cfg.r, cfg.reps, cfg.executor.value,
    )
    start = time.perf_counter()
    records = execute_replications(cfg)
    metrics = [summarize(records, cfg.rho, engine) for engine in cfg.estimators]
    wall = time.perf_counter() - start
    logger.info("✅ Simulación terminada en %.2f s", wall)
    return SimReport(config=cfg, metrics=metrics, wall_seconds=wall)


def benchmark(cfg: SimConfig) -> BenchmarkReport:
    """Tiempo total de IRLS y ML sobre las mismas réplicas."""
    if set(cfg.estimators) != {Engine.IRLS, Engine.ML}:
        raise DomainError("benchmark requiere los estimadores irls y ml")
    report = run_simulation(cfg)
    irls = report.for_engine(Engine.IRLS).seconds
    ml = report.for_engine(Engine.ML).seconds
    return BenchmarkReport(
        config=cfg,
        irls_seconds=irls,
        ml_seconds=ml,
        ratio=ml / irls if irls > 0 else None,
        report=report,
    )


def run_sweep(
    base: SimConfig, rhos: Sequence[float], sizes: Sequence[int],
) -> list[SimReport]:
    """Rejilla ρ × N con el resto de la configuración fija."""
    reports = []
    for rho in rhos:
        for n in sizes:
            cfg = SimConfig.model_validate(
                {**base.model_dump(), "rho": rho, "N": n},
            )
            reports.append(run_simulation(cfg))
    return reports
