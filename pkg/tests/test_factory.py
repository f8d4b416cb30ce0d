"""🏭 Tests for the presentation factory."""

from __future__ import annotations

import pytest

from src.errors import MissingPrerequisiteError, UnknownPresentationError
from src.models import (
    EpisodeKind,
    PresentationKind,
    RawTrajectory,
    RoiTrajectory,
    SegmentationParams,
    SemanticTrajectory,
    SpaceTimePath,
    StructuredTrajectory,
)
from src.tools.factory import PresentationContext, create_presentation, register_presentation, registered_kinds
from tests.builders import FIXTURE_PARAMS


def _context(engine, params: SegmentationParams | None = None) -> PresentationContext:
    return PresentationContext(store=engine.store, params=params)


class TestRegistry:
    """📋 Tests for builder registration."""

    def test_builtin_kinds(self):
        """✅ Every presentation kind has a builder."""
        assert {kind.value for kind in PresentationKind} <= set(registered_kinds())

    def test_unknown_kind(self, loaded_engine):
        """❌ The message lists the known kinds."""
        with pytest.raises(UnknownPresentationError, match="unknown presentation kind 'heatmap'; known: .*raw"):
            create_presentation("heatmap", "MO", _context(loaded_engine))

    def test_register_custom_kind(self, loaded_engine):
        """🔌 A plugged-in builder is reachable by name."""

        @register_presentation("point-count")
        def _count(object_id: str, context: PresentationContext) -> RawTrajectory:
            return context.store.raw[object_id]

        assert "point-count" in registered_kinds()
        assert create_presentation("point-count", "MO", _context(loaded_engine)).object_id == "MO"


class TestBuilders:
    """🧱 Tests for the built-in builders."""

    @pytest.mark.parametrize(
        "kind,expected",
        [
            (PresentationKind.RAW, RawTrajectory),
            (PresentationKind.STRUCTURED, StructuredTrajectory),
            (PresentationKind.SEMANTIC, SemanticTrajectory),
            (PresentationKind.ROI, RoiTrajectory),
            (PresentationKind.SPACE_TIME_PATH, SpaceTimePath),
        ],
    )
    def test_stored_presentations(self, pipeline_engine, kind, expected):
        """✅ Each kind builds from the segmented and annotated store."""
        presentation = create_presentation(kind, "MO", _context(pipeline_engine))
        assert isinstance(presentation, expected)
        assert presentation.object_id == "MO"

    @pytest.mark.parametrize("kind", list(PresentationKind))
    def test_deterministic(self, loaded_engine, kind):
        """✅ The same store and parameters give equal presentations."""
        context = _context(loaded_engine, FIXTURE_PARAMS)
        first = create_presentation(kind, "MO", context)
        second = create_presentation(kind, "MO", context)
        assert first == second
        assert first.model_dump(mode="json") == second.model_dump(mode="json")

    def test_stored_structured_is_reused(self, pipeline_engine):
        """✅ Without parameters the stored segmentation is returned."""
        presentation = create_presentation(PresentationKind.STRUCTURED, "MO", _context(pipeline_engine))
        assert presentation is pipeline_engine.store.structured["MO"]

    def test_params_compute_fresh(self, loaded_engine):
        """✅ Parameters segment on the fly without touching the store."""
        revision = loaded_engine.store.revision
        presentation = create_presentation(
            PresentationKind.STRUCTURED, "MO", _context(loaded_engine, FIXTURE_PARAMS)
        )
        assert sum(episode.kind == EpisodeKind.STOP for episode in presentation.episodes) == 4
        assert loaded_engine.store.structured == {}
        assert loaded_engine.store.revision == revision

    def test_roi_of_fixture(self, pipeline_engine):
        """✅ MO visits the bus station and stadium inside the city centre."""
        roi = create_presentation(PresentationKind.ROI, "MO", _context(pipeline_engine))
        rolled_up = [visit.region_id for visit in roi.visits if visit.via_descendant]
        assert rolled_up == ["r-centre", "r-centre"]

    def test_missing_raw(self, store):
        """❌ Unknown object."""
        with pytest.raises(MissingPrerequisiteError, match="run load-points"):
            create_presentation(PresentationKind.RAW, "ghost", PresentationContext(store=store))

    def test_missing_segmentation(self, loaded_engine):
        """❌ Structured without segmentation or parameters."""
        with pytest.raises(MissingPrerequisiteError, match="not segmented"):
            create_presentation(PresentationKind.STRUCTURED, "MO", _context(loaded_engine))

    def test_missing_regions(self, store):
        """❌ Semantic needs a region layer."""
        with pytest.raises(MissingPrerequisiteError, match="run load-regions"):
            create_presentation(PresentationKind.SEMANTIC, "MO", PresentationContext(store=store, params=FIXTURE_PARAMS))
