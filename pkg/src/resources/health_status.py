"""💚 Store health resource."""

import logging
import time

from src.config import ENABLE_LOGGING
from src.models import HealthCheck
from src.tools.engine import TrajectoryEngine

logger = logging.getLogger(__name__)


def get_health_status(engine: TrajectoryEngine) -> HealthCheck:
    """Engine self-test, entity counts, revision and index freshness."""
    start_time = time.time()
    store = engine.store

    checks = {
        "engine_functional": engine.health_check(),
        "regions_loaded": bool(store.forest.regions),
        "index_fresh": store.index_is_fresh,
        "logging_to_file": ENABLE_LOGGING,
    }
    # Only a failing engine self-test degrades the status
    status = "healthy" if checks["engine_functional"] else "degraded"
    response_time = time.time() - start_time
    logger.info(f"💚 Health check completed: {status} ({response_time:.3f}s)")

    return HealthCheck(
        status=status,
        checks=checks,
        counts=store.counts(),
        revision=store.revision,
        response_time=response_time,
    )
