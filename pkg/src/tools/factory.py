"""🏭 Trajectory presentation factory.

Callers ask for a presentation by kind and never touch the builders
directly. New kinds plug in through :func:`register_presentation`.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

from pydantic import BaseModel, ConfigDict

from src.errors import MissingPrerequisiteError, UnknownPresentationError
from src.models import (
    PresentationKind,
    RawTrajectory,
    RoiTrajectory,
    SegmentationParams,
    SemanticTrajectory,
    SpaceTimePath,
    StructuredTrajectory,
)
from src.tools.activity_path import build_path
from src.tools.regions import visits
from src.tools.segmentation import annotate, detect_stops
from src.tools.store import TrajectoryStore

logger = logging.getLogger(__name__)

Presentation = BaseModel


class PresentationContext(BaseModel):
    """Inputs a builder may draw on. Without ``params`` stored presentations are reused."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    store: TrajectoryStore
    params: SegmentationParams | None = None


Builder = Callable[[str, PresentationContext], Presentation]

_BUILDERS: dict[str, Builder] = {}


def register_presentation(kind: PresentationKind | str) -> Callable[[Builder], Builder]:
    """Decorator registering a builder; re-registering a kind replaces it."""
    key = kind.value if isinstance(kind, PresentationKind) else kind

    def decorator(builder: Builder) -> Builder:
        _BUILDERS[key] = builder
        return builder

    return decorator


def registered_kinds() -> list[str]:
    return sorted(_BUILDERS)


def create_presentation(kind: PresentationKind | str, object_id: str, context: PresentationContext) -> Presentation:
    """Build the requested presentation of one moving object.

    Raises:
        UnknownPresentationError: no builder for ``kind``
        MissingPrerequisiteError: the store lacks what the kind needs
    """
    key = kind.value if isinstance(kind, PresentationKind) else kind
    builder = _BUILDERS.get(key)
    if builder is None:
        raise UnknownPresentationError(f"unknown presentation kind {key!r}; known: {', '.join(registered_kinds())}")
    logger.debug(f"🏭 Building {key} presentation of {object_id!r}")
    return builder(object_id, context)


# =============================================================================
# 🧱 BUILT-IN BUILDERS
# =============================================================================


@register_presentation(PresentationKind.RAW)
def _raw(object_id: str, context: PresentationContext) -> RawTrajectory:
    raw = context.store.raw.get(object_id)
    if raw is None:
        raise MissingPrerequisiteError(f"no raw points loaded for {object_id!r}; run load-points first")
    return raw


@register_presentation(PresentationKind.STRUCTURED)
def _structured(object_id: str, context: PresentationContext) -> StructuredTrajectory:
    if context.params is not None:
        return detect_stops(_raw(object_id, context), context.params)
    stored = context.store.structured.get(object_id)
    if stored is None:
        _raw(object_id, context)
        raise MissingPrerequisiteError(
            f"{object_id!r} is not segmented; run segment --eps <m> --tau <s> or pass segmentation parameters"
        )
    return stored


@register_presentation(PresentationKind.SEMANTIC)
def _semantic(object_id: str, context: PresentationContext) -> SemanticTrajectory:
    forest = context.store.forest
    if not forest.regions:
        raise MissingPrerequisiteError("semantic presentation needs regions; run load-regions first")
    if context.params is None:
        stored = context.store.semantic.get(object_id)
        if stored is not None:
            return stored
    return annotate(_structured(object_id, context), forest)


@register_presentation(PresentationKind.ROI)
def _roi(object_id: str, context: PresentationContext) -> RoiTrajectory:
    semantic = _semantic(object_id, context)
    return RoiTrajectory(object_id=object_id, visits=tuple(visits(semantic, context.store.forest)))


@register_presentation(PresentationKind.SPACE_TIME_PATH)
def _stpath(object_id: str, context: PresentationContext) -> SpaceTimePath:
    return build_path(object_id, context.store)
