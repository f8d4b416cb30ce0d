"""🧪 Shared fixtures: an empty store and the loaded house/school/stadium day."""

from __future__ import annotations

import pytest

from src.tools.engine import TrajectoryEngine
from src.tools.store import TrajectoryStore
from tests.builders import FIXTURE_PARAMS, load_fixture


@pytest.fixture
def store() -> TrajectoryStore:
    """Empty store."""
    return TrajectoryStore()


@pytest.fixture
def loaded_engine() -> TrajectoryEngine:
    """Engine with every fixture file loaded, nothing derived yet."""
    return load_fixture(TrajectoryEngine())


@pytest.fixture
def pipeline_engine(loaded_engine: TrajectoryEngine) -> TrajectoryEngine:
    """Loaded engine after segmentation (eps 50 m, tau 600 s) and annotation."""
    loaded_engine.segment(FIXTURE_PARAMS)
    loaded_engine.annotate()
    return loaded_engine
