"""🏗️ Central configuration for the Trajectory MCP engine.

All settings and constants in one place for easy management.
"""

from __future__ import annotations

import os
from pathlib import Path

# =============================================================================
# 🚀 APPLICATION SETTINGS
# =============================================================================

APP_NAME = "Trajectory MCP"
VERSION = "0.1.0"
DESCRIPTION = "🛰️ In-memory moving-object trajectory engine with a spatio-temporal query language"
DEBUG_MODE = os.getenv("DEBUG", "false").lower() == "true"

SERVER_NAME = "trajectory-mcp"
SERVER_VERSION = VERSION

# =============================================================================
# 🌍 REFERENCE SYSTEMS
# =============================================================================

# Carried as opaque tags; coordinates are planar meters, times epoch seconds.
DEFAULT_SPATIAL_REFERENCE = "local-planar-m"
DEFAULT_TIME_REFERENCE = "utc-epoch-s"

# =============================================================================
# 🗂️ GRID INDEX
# =============================================================================

DEFAULT_CELL_SIZE = float(os.getenv("TRAJ_CELL_SIZE", "100"))
DEFAULT_TIME_BUCKET = int(os.getenv("TRAJ_TIME_BUCKET", "3600"))

# =============================================================================
# 💾 SNAPSHOTS
# =============================================================================

SNAPSHOT_MAGIC = b"TRJSNAP"
SNAPSHOT_VERSION = 1

# =============================================================================
# 📥 INGESTION
# =============================================================================

MAX_REPORTED_ERRORS = 10

POINTS_HEADER = ("object_id", "t", "x", "y", "device_id")
DEVICES_HEADER = ("device_id", "kind", "reliability", "description")
ACTIVITIES_HEADER = ("id", "object_id", "kind", "label", "t_begin", "t_end", "x", "y")
OBSERVATIONS_HEADER = ("id", "event_id", "feature", "value", "unit", "t")

# =============================================================================
# 📁 PATHS
# =============================================================================

BASE_DIR = Path(__file__).parent.parent
DATA_DIR = BASE_DIR / "data"
LOGS_DIR = BASE_DIR / "logs"

# Session snapshot the CLI reloads between invocations
STORE_PATH = Path(os.getenv("TRAJ_STORE", str(DATA_DIR / "session.snap")))

# =============================================================================
# 📊 LOGGING
# =============================================================================

LOG_LEVEL = "DEBUG" if DEBUG_MODE else "INFO"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"
ENABLE_LOGGING = bool(os.getenv("TRAJ_LOG_FILE"))
LOG_FILE = Path(os.getenv("TRAJ_LOG_FILE", str(LOGS_DIR / "trajectory-mcp.log")))

# =============================================================================
# 🌍 ENVIRONMENT
# =============================================================================


def get_environment() -> str:
    """Get current environment."""
    env = os.getenv("ENVIRONMENT", "development").lower()
    valid_envs = ["development", "staging", "production"]
    return env if env in valid_envs else "development"


def is_production() -> bool:
    """Check if running in production."""
    return get_environment() == "production"


def validate_config() -> None:
    """Validate configuration at startup."""
    required_settings = {
        "APP_NAME": APP_NAME,
        "VERSION": VERSION,
        "SERVER_NAME": SERVER_NAME,
        "DEFAULT_SPATIAL_REFERENCE": DEFAULT_SPATIAL_REFERENCE,
        "DEFAULT_TIME_REFERENCE": DEFAULT_TIME_REFERENCE,
    }

    for name, setting in required_settings.items():
        if not setting:
            raise ValueError(f"❌ Missing required configuration: {name}")

    if DEFAULT_CELL_SIZE <= 0:
        raise ValueError("❌ DEFAULT_CELL_SIZE must be positive")

    if DEFAULT_TIME_BUCKET <= 0:
        raise ValueError("❌ DEFAULT_TIME_BUCKET must be positive")

    if MAX_REPORTED_ERRORS < 0:
        raise ValueError("❌ MAX_REPORTED_ERRORS must be non-negative")

    if is_production() and DEBUG_MODE:
        raise ValueError("❌ DEBUG must be off in production")
