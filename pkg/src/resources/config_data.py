"""⚙️ Configuration resource (safe subset)."""

from typing import Any

from src.config import (
    DEBUG_MODE,
    DEFAULT_CELL_SIZE,
    DEFAULT_SPATIAL_REFERENCE,
    DEFAULT_TIME_BUCKET,
    DEFAULT_TIME_REFERENCE,
    ENABLE_LOGGING,
    MAX_REPORTED_ERRORS,
    SERVER_NAME,
    SNAPSHOT_VERSION,
    STORE_PATH,
    VERSION,
    get_environment,
)


def get_safe_configuration() -> dict[str, Any]:
    return {
        "server": {
            "name": SERVER_NAME,
            "version": VERSION,
            "environment": get_environment(),
            "debug_mode": DEBUG_MODE,
        },
        "references": {
            "spatial": DEFAULT_SPATIAL_REFERENCE,
            "time": DEFAULT_TIME_REFERENCE,
        },
        "index": {
            "cell_size": DEFAULT_CELL_SIZE,
            "time_bucket": DEFAULT_TIME_BUCKET,
        },
        "storage": {
            "session_store": str(STORE_PATH),
            "snapshot_version": SNAPSHOT_VERSION,
        },
        "ingest": {
            "max_reported_errors": MAX_REPORTED_ERRORS,
        },
        "features": {
            "logging_enabled": ENABLE_LOGGING,
        },
    }
