"""🚀 Trajectory MCP Server.

FastMCP server exposing one long-lived trajectory engine:
- Tools: ingestion, segmentation, annotation, indexing, queries, snapshots
- Resources: server information, store health, configuration
- Prompts: query language guide, error handling guide
"""

from __future__ import annotations

import logging
import time
from typing import Any

from mcp.server.fastmcp import FastMCP

from src.config import (
    APP_NAME,
    ENABLE_LOGGING,
    LOG_FILE,
    LOG_FORMAT,
    LOG_LEVEL,
    SERVER_NAME,
    VERSION,
)
from src.models import (
    AnnotationSummary,
    IndexSummary,
    IngestReport,
    ResultTable,
    SegmentationParams,
    SegmentationSummary,
)
from src.prompts.error_handling import get_error_handling_guide
from src.prompts.system_guide import get_system_prompt
from src.resources.config_data import get_safe_configuration
from src.resources.health_status import get_health_status
from src.resources.server_info import get_server_info
from src.tools.engine import TrajectoryEngine

# =============================================================================
# 📊 LOGGING SETUP
# =============================================================================


def setup_logging() -> logging.Logger:
    """📊 Configure the server logger with console and optional file output."""
    logger = logging.getLogger(SERVER_NAME)
    logger.setLevel(getattr(logging, LOG_LEVEL))

    if logger.handlers:
        return logger

    formatter = logging.Formatter(LOG_FORMAT)
    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if ENABLE_LOGGING:
        LOG_FILE.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(LOG_FILE)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


# =============================================================================
# 🚀 MCP SERVER INITIALIZATION
# =============================================================================

mcp = FastMCP(SERVER_NAME)
logger = setup_logging()
server_start_time = time.time()

engine = TrajectoryEngine()

TOOLS_COUNT = 9


# =============================================================================
# 🔧 TOOLS IMPLEMENTATION
# =============================================================================


@mcp.tool()
def load_data(kind: str, path: str) -> IngestReport:
    """📥 Load an input file into the store.

    Args:
        kind: points, regions, devices, activities or observations
        path: File to read

    Returns:
        IngestReport with accepted/rejected counts and the first errors
    """
    logger.info(f"📥 Loading {kind} from {path}")
    report = engine.load(kind, path)
    logger.info(f"✅ {report.records_accepted} accepted, {report.records_rejected} rejected")
    return report


@mcp.tool()
def segment(eps: float, tau: int, object_id: str | None = None) -> SegmentationSummary:
    """✂️ Split raw trajectories into stops and moves.

    Args:
        eps: Neighbourhood radius in meters
        tau: Minimum stop duration in seconds
        object_id: Limit segmentation to one moving object (optional)
    """
    return engine.segment(SegmentationParams(eps=eps, tau=tau), object_id)


@mcp.tool()
def annotate() -> AnnotationSummary:
    """🏷️ Label segmented trajectories with the loaded regions of interest."""
    return engine.annotate()


@mcp.tool()
def build_index(cell_size: float | None = None, time_bucket: int | None = None) -> IndexSummary:
    """🗂️ Rebuild the spatio-temporal grid index.

    Args:
        cell_size: Grid cell edge in meters (default from configuration)
        time_bucket: Time bucket length in seconds (default from configuration)
    """
    return engine.build_index(cell_size, time_bucket)


@mcp.tool()
def run_query(dsl: str) -> ResultTable:
    """🔎 Evaluate a query; see the query language guide prompt for the grammar.

    Args:
        dsl: Query text, e.g. `stops where duration > 10min`
    """
    logger.info(f"🔎 Query: {dsl}")
    table = engine.query(dsl)
    logger.info(f"✅ {len(table.rows)} rows")
    return table


@mcp.tool()
def export_presentation(kind: str, object_id: str) -> dict[str, Any]:
    """📤 Export one presentation of a moving object as JSON.

    Args:
        kind: raw, structured, semantic, roi or stpath
        object_id: Moving object id
    """
    return engine.export(kind, object_id)


@mcp.tool()
def add_child_event(parent_id: str, child_id: str) -> dict[str, Any]:
    """🌳 Compose an event under a parent whose interval contains it."""
    return engine.add_child_event(parent_id, child_id).model_dump(mode="json")


@mcp.tool()
def save_snapshot(path: str) -> str:
    """💾 Save the whole store to a snapshot file."""
    target = engine.save(path)
    return f"saved revision {engine.store.revision} to {target}"


@mcp.tool()
def load_snapshot(path: str) -> str:
    """📂 Replace the store with a saved snapshot."""
    engine.restore(path)
    return f"loaded revision {engine.store.revision} from {path}"


# =============================================================================
# 📚 RESOURCES IMPLEMENTATION
# =============================================================================


@mcp.resource("server://info")
def server_info() -> str:
    """⚙️ Server information and status."""
    info = get_server_info(server_start_time, TOOLS_COUNT)
    return f"""
# Server Information

**Name:** {info.name}
**Version:** {info.version}
**Description:** {info.description}
**Status:** {info.status}
**Uptime:** {info.uptime:.1f} seconds
**Tools Available:** {info.tools_count}

**Capabilities:**
{chr(10).join(f"- {capability}" for capability in info.capabilities)}
"""


@mcp.resource("store://health")
def health_status() -> str:
    """💚 Store revision, entity counts and component checks."""
    health = get_health_status(engine)

    status_emoji = "💚" if health.status == "healthy" else "🔴"
    checks_list = [
        f"{'✅' if passed else '❌'} {name.replace('_', ' ').title()}" for name, passed in health.checks.items()
    ]
    counts_list = [f"- {name}: {count}" for name, count in health.counts.items()]

    return f"""
# Store Health {status_emoji}

**Overall Status:** {health.status.upper()}
**Revision:** {health.revision}
**Response Time:** {health.response_time:.3f}s

**Checks:**
{chr(10).join(checks_list)}

**Entities:**
{chr(10).join(counts_list)}
"""


@mcp.resource("config://settings")
def configuration() -> str:
    """⚙️ Current configuration (safe subset)."""
    config = get_safe_configuration()
    return f"""
# Server Configuration

## Server
- Name: {config['server']['name']}
- Version: {config['server']['version']}
- Environment: {config['server']['environment']}
- Debug Mode: {config['server']['debug_mode']}

## References
- Spatial: {config['references']['spatial']}
- Time: {config['references']['time']}

## Index
- Cell Size: {config['index']['cell_size']} m
- Time Bucket: {config['index']['time_bucket']} s

## Storage
- Session Store: {config['storage']['session_store']}
- Snapshot Version: {config['storage']['snapshot_version']}

## Features
- Max Reported Ingest Errors: {config['ingest']['max_reported_errors']}
- Logging Enabled: {config['features']['logging_enabled']}
"""


# =============================================================================
# 🎯 PROMPTS IMPLEMENTATION
# =============================================================================


@mcp.prompt()
def query_language_guide() -> str:
    """🎯 Workflow, grammar and example queries."""
    return get_system_prompt()


@mcp.prompt()
def error_handling_guide() -> str:
    """🚨 Error types and the step that fixes each."""
    return get_error_handling_guide()


# =============================================================================
# 🏃‍♂️ SERVER STARTUP
# =============================================================================


def run_server() -> None:
    """🏃‍♂️ Start the MCP server with proper initialization."""
    logger.info(f"🚀 Starting {APP_NAME} v{VERSION}")

    try:
        from src.config import validate_config

        validate_config()
        logger.info("✅ Configuration validated")

        engine.initialize()
        logger.info("✅ Engine initialized")

        logger.info(f"🌐 MCP Server ready at {SERVER_NAME}")
        mcp.run()

    except Exception as e:
        logger.error(f"❌ Failed to start server: {e}")
        raise


if __name__ == "__main__":
    run_server()
