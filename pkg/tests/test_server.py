"""🧪 Tests for the MCP server: tools, resources and prompts.

Tool functions are called directly against a fresh engine swapped into
the server module, so tests never share store state.

Test Coverage:
- Server initialization and logging
- Tool workflow from loading to snapshots
- Error propagation from the engine
- Resources and prompts
- Configuration validation
"""

from __future__ import annotations

import time

import pytest

from src.config import APP_NAME, SERVER_NAME, VERSION, get_environment, is_production, validate_config
from src.errors import EventTreeError, MissingPresentationError, QueryParseError
from src.resources.config_data import get_safe_configuration
from src.resources.health_status import get_health_status
from src.resources.server_info import CAPABILITIES, get_server_info
from src.server import (
    TOOLS_COUNT,
    add_child_event,
    annotate,
    build_index,
    configuration,
    error_handling_guide,
    export_presentation,
    health_status,
    load_data,
    load_snapshot,
    mcp,
    query_language_guide,
    run_query,
    save_snapshot,
    segment,
    server_info,
    setup_logging,
)
from src.tools.engine import TrajectoryEngine
from tests import TEST_DATA_DIR
from tests.builders import FIXTURE_FILES


@pytest.fixture
def server_engine(monkeypatch) -> TrajectoryEngine:
    """Fresh engine behind the server's tools."""
    engine = TrajectoryEngine()
    monkeypatch.setattr("src.server.engine", engine)
    return engine


@pytest.fixture
def loaded_server(server_engine) -> TrajectoryEngine:
    for kind, name in FIXTURE_FILES:
        load_data(kind.value, str(TEST_DATA_DIR / name))
    return server_engine


class TestServerInitialization:
    """🚀 Tests for server initialization and setup."""

    def test_logging_setup(self):
        """📊 Console handler always, file handler only when configured."""
        logger = setup_logging()
        assert logger.name == SERVER_NAME
        assert any(hasattr(handler, "stream") for handler in logger.handlers)

    def test_server_instance(self):
        """🚀 MCP server instance."""
        assert mcp is not None
        assert hasattr(mcp, "tool")
        assert hasattr(mcp, "resource")
        assert hasattr(mcp, "prompt")


class TestServerTools:
    """🔧 Tests for the tool workflow."""

    def test_load_data(self, server_engine):
        """📥 Reports come back per file."""
        report = load_data("points", str(TEST_DATA_DIR / "points.csv"))
        assert report.records_accepted == 20
        assert report.records_rejected == 0
        assert server_engine.store.object_ids() == ["MO", "P2"]

    def test_full_workflow(self, loaded_server):
        """✅ Segment, annotate, index and query."""
        summary = segment(eps=50, tau=600)
        assert (summary.objects, summary.stops) == (2, 6)
        assert annotate().annotated_episodes > 0
        assert build_index(cell_size=500, time_bucket=600).events == len(loaded_server.store.events)

        table = run_query("roi-visits group by region select count")
        assert ("city centre", 3) in table.rows

    def test_segment_one_object(self, loaded_server):
        """✂️ Only the named object is segmented."""
        assert segment(eps=50, tau=600, object_id="P2").objects == 1
        assert list(loaded_server.store.structured) == ["P2"]

    def test_export(self, loaded_server):
        """📤 JSON-ready presentations."""
        document = export_presentation("raw", "MO")
        assert document["object_id"] == "MO"
        assert len(document["points"]) == 13

    def test_snapshots(self, loaded_server, tmp_path):
        """💾 Save then restore."""
        path = tmp_path / "server.snap"
        revision = loaded_server.store.revision
        assert save_snapshot(str(path)).startswith(f"saved revision {revision}")
        assert load_snapshot(str(path)) == f"loaded revision {revision} from {path}"

    def test_engine_errors_propagate(self, loaded_server):
        """🚨 Engine errors reach the MCP layer unchanged."""
        with pytest.raises(MissingPresentationError):
            run_query("stops")
        with pytest.raises(QueryParseError):
            run_query("stops where")
        with pytest.raises(EventTreeError):
            add_child_event("MO#28800", "MO#29400")


class TestServerRegistration:
    """🔌 Tests for what the MCP server advertises to clients."""

    @pytest.mark.asyncio
    async def test_tools_registered(self):
        """🔧 Every engine tool is listed once."""
        names = sorted(tool.name for tool in await mcp.list_tools())
        assert len(names) == TOOLS_COUNT
        assert names == sorted(
            [
                "add_child_event",
                "annotate",
                "build_index",
                "export_presentation",
                "load_data",
                "load_snapshot",
                "run_query",
                "save_snapshot",
                "segment",
            ]
        )

    @pytest.mark.asyncio
    async def test_segment_schema_requires_parameters(self):
        """✂️ eps and tau have no defaults."""
        (tool,) = [tool for tool in await mcp.list_tools() if tool.name == "segment"]
        assert set(tool.inputSchema["required"]) == {"eps", "tau"}

    @pytest.mark.asyncio
    async def test_resources_and_prompts_registered(self):
        """📚 Resources and prompts are discoverable."""
        uris = {str(resource.uri) for resource in await mcp.list_resources()}
        assert {"server://info", "store://health", "config://settings"} <= uris
        prompts = {prompt.name for prompt in await mcp.list_prompts()}
        assert {"query_language_guide", "error_handling_guide"} <= prompts


class TestServerResources:
    """📚 Tests for server resource endpoints."""

    def test_server_info(self):
        """⚙️ Static description plus uptime."""
        info = get_server_info(time.time(), TOOLS_COUNT)
        assert (info.name, info.version, info.tools_count) == (APP_NAME, VERSION, 9)
        assert info.uptime >= 0
        assert "trajectory_queries" in info.capabilities
        text = server_info()
        assert f"**Tools Available:** {TOOLS_COUNT}" in text
        assert all(capability in text for capability in CAPABILITIES)

    def test_health(self, loaded_server):
        """💚 Healthy engine with counts and revision."""
        health = get_health_status(loaded_server)
        assert health.status == "healthy"
        assert health.checks["engine_functional"]
        assert health.checks["regions_loaded"]
        assert health.counts["raw"] == 2
        assert health.revision == loaded_server.store.revision
        assert "**Overall Status:** HEALTHY" in health_status()

    def test_configuration(self):
        """⚙️ Safe configuration subset."""
        config = get_safe_configuration()
        assert config["server"]["name"] == SERVER_NAME
        assert config["index"]["cell_size"] > 0
        assert config["ingest"]["max_reported_errors"] == 10
        for secret in ("api_key", "password", "secret"):
            assert secret not in str(config).lower()
        assert "Time Bucket" in configuration()


class TestServerPrompts:
    """🎯 Tests for server prompts."""

    def test_query_language_guide(self):
        """🎯 Grammar and workflow."""
        guide = query_language_guide()
        assert APP_NAME in guide
        assert "roi-visits" in guide
        assert "segment(eps=50, tau=600)" in guide

    def test_error_handling_guide(self):
        """🚨 Every error names its fix."""
        guide = error_handling_guide()
        for name in ("IngestFormatError", "QueryParseError", "MissingPresentationError", "SnapshotChecksumError"):
            assert name in guide


class TestServerConfiguration:
    """⚙️ Tests for configuration validation."""

    def test_config_validation(self):
        """⚙️ Defaults are valid."""
        validate_config()

    def test_environment_detection(self, monkeypatch):
        """🌍 Unknown environments fall back to development."""
        monkeypatch.setenv("ENVIRONMENT", "moon")
        assert get_environment() == "development"
        monkeypatch.setenv("ENVIRONMENT", "production")
        assert is_production()

    def test_production_rejects_debug(self, monkeypatch):
        """🚨 Startup validation refuses debug mode in production."""
        monkeypatch.setattr("src.config.DEBUG_MODE", True)
        monkeypatch.setenv("ENVIRONMENT", "production")
        with pytest.raises(ValueError, match="DEBUG must be off in production"):
            validate_config()
        monkeypatch.setenv("ENVIRONMENT", "staging")
        validate_config()
