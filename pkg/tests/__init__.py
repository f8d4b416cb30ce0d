"""🧪 Trajectory MCP Tests Package.

Test suite for the trajectory engine, its query language and both surfaces
(CLI and MCP server).

Test Structure:
- test_geometry.py / test_models.py: primitives and model validation
- test_trajectory.py / test_segmentation.py / test_regions.py: meta-model
- test_activity_path.py / test_observations.py: activities and devices
- test_store.py: store, grid index and snapshots
- test_query_parser.py / test_query_engine.py: query language
- test_ingest.py / test_factory.py: input files and presentations
- test_cli.py / test_server.py: surfaces and golden outputs

Fixture files and golden TSV tables live in ``tests/data``.
"""

from pathlib import Path

# Test data directory
TEST_DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = TEST_DATA_DIR / "golden"

__all__ = ["GOLDEN_DIR", "TEST_DATA_DIR"]
