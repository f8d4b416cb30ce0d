"""🧠 Trajectory engine facade.

One ``TrajectoryEngine`` owns one store and runs every user-level
operation. The CLI and the MCP server both drive it, so both surfaces share
one code path.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from src.errors import MissingPrerequisiteError, UnknownEntityError
from src.models import (
    AnnotationSummary,
    EpisodeKind,
    IngestKind,
    IngestReport,
    IndexSummary,
    PresentationKind,
    Process,
    ResultTable,
    SegmentationParams,
    SegmentationSummary,
    SpaceTimeEvent,
)
from src.tools.activity_path import compose_process
from src.tools.factory import PresentationContext, create_presentation
from src.tools.grid_index import build_index
from src.tools.ingest import load_file
from src.tools.query_engine import evaluate
from src.tools.query_parser import parse
from src.tools.segmentation import annotate, detect_stops
from src.tools.snapshot import load_snapshot, save_snapshot
from src.tools.store import TrajectoryStore
from src.tools.trajectory import add_child_event

logger = logging.getLogger(__name__)


class TrajectoryEngine:
    """🧠 Load, segment, annotate, index, query and persist trajectories."""

    def __init__(self, store: TrajectoryStore | None = None) -> None:
        self.store = store if store is not None else TrajectoryStore()
        self._initialized = False

    def initialize(self) -> None:
        """🔧 Prepare the engine; safe to call more than once."""
        if self._initialized:
            return
        self._initialized = True
        logger.info(f"🧠 Trajectory engine ready (revision {self.store.revision})")

    def health_check(self) -> bool:
        """💚 Parse and evaluate a trivial query against the live store."""
        try:
            evaluate(parse("raw select count"), self.store)
            return True
        except Exception as e:
            logger.error(f"❌ Engine health check failed: {e}")
            return False

    # =========================================================================
    # 📥 INPUT
    # =========================================================================

    def load(self, kind: IngestKind | str, path: Path | str) -> IngestReport:
        self.initialize()
        return load_file(kind, path, self.store)

    def add_child_event(self, parent_id: str, child_id: str) -> SpaceTimeEvent:
        return add_child_event(parent_id, child_id, self.store)

    def compose_process(self, name: str, activity_ids: list[str]) -> Process:
        return compose_process(name, activity_ids, self.store)

    # =========================================================================
    # ✂️ PRESENTATIONS
    # =========================================================================

    def segment(self, params: SegmentationParams, object_id: str | None = None) -> SegmentationSummary:
        """Detect stops and moves for one object or every object with points."""
        if object_id is not None and object_id not in self.store.raw:
            raise UnknownEntityError("moving object", object_id)
        objects = [object_id] if object_id is not None else sorted(self.store.raw)

        stops = moves = 0
        for current in objects:
            structured = detect_stops(self.store.raw[current], params)
            self.store.upsert(structured)
            stops += sum(episode.kind == EpisodeKind.STOP for episode in structured.episodes)
            moves += sum(episode.kind == EpisodeKind.MOVE for episode in structured.episodes)

        logger.info(
            f"✂️ Segmented {len(objects)} objects: {stops} stops, {moves} moves (eps={params.eps}, tau={params.tau})"
        )
        return SegmentationSummary(objects=len(objects), stops=stops, moves=moves, params=params)

    def annotate(self) -> AnnotationSummary:
        """Annotate every segmented object with the loaded regions."""
        forest = self.store.forest
        if not forest.regions:
            raise MissingPrerequisiteError("annotation needs regions; run load-regions first")
        if not self.store.structured:
            raise MissingPrerequisiteError("nothing to annotate; run segment --eps <m> --tau <s> first")

        annotated = unannotated = 0
        for object_id in sorted(self.store.structured):
            semantic = annotate(self.store.structured[object_id], forest)
            self.store.upsert(semantic)
            labelled = sum(annotation is not None for annotation in semantic.annotations)
            annotated += labelled
            unannotated += len(semantic.annotations) - labelled

        logger.info(f"🏷️ Annotated {annotated} episodes, {unannotated} outside every region")
        return AnnotationSummary(
            objects=len(self.store.structured),
            annotated_episodes=annotated,
            unannotated_episodes=unannotated,
        )

    def export(
        self, kind: PresentationKind | str, object_id: str, params: SegmentationParams | None = None
    ) -> dict[str, Any]:
        """JSON-ready document of one presentation."""
        presentation = create_presentation(kind, object_id, PresentationContext(store=self.store, params=params))
        return presentation.model_dump(mode="json")

    # =========================================================================
    # 🔎 INDEX AND QUERIES
    # =========================================================================

    def build_index(self, cell_size: float | None = None, time_bucket: int | None = None) -> IndexSummary:
        index = build_index(
            cell_size if cell_size is not None else self.store.cell_size,
            time_bucket if time_bucket is not None else self.store.time_bucket,
            self.store,
        )
        return index.summary()

    def query(self, text: str) -> ResultTable:
        return evaluate(parse(text), self.store)

    # =========================================================================
    # 💾 PERSISTENCE
    # =========================================================================

    def save(self, path: Path | str) -> Path:
        return save_snapshot(path, self.store)

    def restore(self, path: Path | str) -> None:
        self.store = load_snapshot(path)

    def summary(self) -> dict[str, Any]:
        return {
            "revision": self.store.revision,
            "counts": self.store.counts(),
            "objects": self.store.object_ids(),
            "index_fresh": self.store.index_is_fresh,
        }
