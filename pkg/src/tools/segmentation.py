"""✂️ Stop/move segmentation and place annotation.

Raw trajectory → structured trajectory (stops and moves) → semantic
trajectory (episodes labelled with regions of interest).

Stop rule: scanning left to right from anchor point i, extend j while every
point stays within ``eps`` of the anchor; the window is a stop when it
lasts at least ``tau`` seconds, and the scan resumes after it. Otherwise
the anchor advances by one.
"""

from __future__ import annotations

import logging

from src.models import (
    EpisodeAnnotation,
    Episode,
    EpisodeKind,
    Polyline,
    RawTrajectory,
    RegionForest,
    SegmentationParams,
    SemanticRole,
    SemanticTag,
    SemanticTrajectory,
    SpaceTimeEvent,
    SpatialObject,
    StructuredTrajectory,
    TimeInterval,
)
from src.tools.geometry import centroid, distance
from src.tools.regions import deepest_region

logger = logging.getLogger(__name__)


def find_stop_windows(raw: RawTrajectory, params: SegmentationParams) -> list[tuple[int, int]]:
    """Inclusive index ranges of the stops, in order."""
    points = raw.points
    n = len(points)
    windows: list[tuple[int, int]] = []
    i = 0
    while i < n:
        anchor = points[i].point
        j = i
        while j + 1 < n and distance(points[j + 1].point, anchor) <= params.eps:
            j += 1
        if points[j].t - points[i].t >= params.tau:
            windows.append((i, j))
            i = j + 1
        else:
            i += 1
    return windows


def _move(raw: RawTrajectory, start: int, end: int) -> Episode:
    vertices = [raw.points[k].point for k in range(start, end + 1)]
    if len(vertices) == 1:
        vertices.append(vertices[0])
    return Episode(
        kind=EpisodeKind.MOVE,
        start_index=start,
        end_index=end,
        time=TimeInterval(begin=raw.points[start].t, end=raw.points[end].t),
        geometry=SpatialObject(line=Polyline(vertices=tuple(vertices))),
    )


def _stop(raw: RawTrajectory, start: int, end: int) -> Episode:
    return Episode(
        kind=EpisodeKind.STOP,
        start_index=start,
        end_index=end,
        time=TimeInterval(begin=raw.points[start].t, end=raw.points[end].t),
        geometry=SpatialObject(point=centroid([raw.points[k].point for k in range(start, end + 1)])),
    )


def _terminal_event(raw: RawTrajectory, index: int, label: str) -> SpaceTimeEvent:
    point = raw.points[index]
    return SpaceTimeEvent(
        id=f"{raw.object_id}#{label}",
        object_id=raw.object_id,
        spatial=SpatialObject(point=point.point),
        time=TimeInterval.instant(point.t),
        device_id=point.device_id,
    )


def detect_stops(raw: RawTrajectory, params: SegmentationParams) -> StructuredTrajectory:
    """Split a raw trajectory into alternating stop and move episodes.

    Moves connect consecutive stops and share their boundary points, so two
    stops are always separated by a move.
    """
    last = len(raw.points) - 1
    windows = find_stop_windows(raw, params)

    episodes: list[Episode] = []
    cursor = 0
    for start, end in windows:
        if start > cursor:
            episodes.append(_move(raw, cursor, start))
        episodes.append(_stop(raw, start, end))
        cursor = end
    if not episodes:
        episodes.append(_move(raw, 0, last))
    elif cursor < last:
        episodes.append(_move(raw, cursor, last))

    logger.debug(f"✂️ {raw.object_id}: {len(windows)} stops over {last + 1} points")
    return StructuredTrajectory(
        object_id=raw.object_id,
        source=raw,
        begin=_terminal_event(raw, 0, "begin"),
        end=_terminal_event(raw, last, "end"),
        episodes=tuple(episodes),
    )


# =============================================================================
# 🏷️ ANNOTATION
# =============================================================================


def _tag(region_id: str, role: SemanticRole, forest: RegionForest) -> SemanticTag:
    region = forest.regions[region_id]
    return SemanticTag(place_name=region.name, category=region.category, role=role)


def _terminal_tag(st: StructuredTrajectory, index: int, role: SemanticRole, forest: RegionForest) -> SemanticTag | None:
    region_id = deepest_region(st.source.points[index].point, forest)
    return None if region_id is None else _tag(region_id, role, forest)


def annotate(st: StructuredTrajectory, forest: RegionForest) -> SemanticTrajectory:
    """Label episodes with regions of interest.

    Stops get the deepest region containing their centroid. Moves get, in
    vertex order, the distinct deepest region of each vertex, named after
    the first one. Enclosing regions are not repeated in a move's list;
    they follow from the hierarchy. Begin and End take the region of the
    first and last point.
    """
    annotations: list[EpisodeAnnotation | None] = []
    for episode in st.episodes:
        if episode.kind == EpisodeKind.STOP:
            region_id = deepest_region(episode.geometry.representative_point(), forest)
            crossed = [] if region_id is None else [region_id]
            role = SemanticRole.STOP
        else:
            crossed = []
            for vertex in episode.geometry.vertices():
                hit = deepest_region(vertex, forest)
                if hit is not None and hit not in crossed:
                    crossed.append(hit)
            role = SemanticRole.MOVE

        if not crossed:
            annotations.append(None)
            continue
        annotations.append(
            EpisodeAnnotation(tag=_tag(crossed[0], role, forest), region_id=crossed[0], region_ids=tuple(crossed))
        )

    return SemanticTrajectory(
        base=st,
        annotations=tuple(annotations),
        begin_tag=_terminal_tag(st, 0, SemanticRole.BEGIN, forest),
        end_tag=_terminal_tag(st, len(st.source.points) - 1, SemanticRole.END, forest),
    )
