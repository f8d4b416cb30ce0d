"""🧭 Core trajectory operations: raw validation, event ordering, event trees.

Orderings are total: events sort by (begin, end, id) and space-time paths
by their first event, then by object id.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from functools import cmp_to_key

from src.errors import EventTreeError, TrajectoryValidationError
from src.models import GeoPoint, RawPoint, RawTrajectory, SpaceTimeEvent, SpaceTimePath
from src.tools.store import TrajectoryStore

logger = logging.getLogger(__name__)

RawInput = RawPoint | tuple[GeoPoint, int] | tuple[GeoPoint, int, str | None]


def validate_raw(object_id: str, points: Sequence[RawInput]) -> RawTrajectory:
    """Build a raw trajectory, rejecting non-increasing timestamps.

    Raises:
        ValueError: if ``points`` is empty
        TrajectoryValidationError: at the first index whose timestamp does not increase
    """
    if not points:
        raise ValueError(f"raw trajectory of {object_id!r} needs at least one point")

    raw_points = [_as_raw_point(item) for item in points]
    for index in range(1, len(raw_points)):
        if raw_points[index].t <= raw_points[index - 1].t:
            raise TrajectoryValidationError(
                index,
                f"timestamp {raw_points[index].t} does not increase past {raw_points[index - 1].t}",
            )
    return RawTrajectory(object_id=object_id, points=tuple(raw_points))


def _as_raw_point(item: RawInput) -> RawPoint:
    if isinstance(item, RawPoint):
        return item
    if len(item) == 2:
        point, t = item  # type: ignore[misc]
        return RawPoint(point=point, t=t)
    point, t, device_id = item  # type: ignore[misc]
    return RawPoint(point=point, t=t, device_id=device_id)


# =============================================================================
# ⚖️ ORDERING
# =============================================================================


def event_key(event: SpaceTimeEvent) -> tuple[int, int, str]:
    return event.time.begin, event.time.end, event.id


def compare_events(a: SpaceTimeEvent, b: SpaceTimeEvent) -> int:
    """Negative if ``a`` sorts before ``b``, positive if after, zero if same key."""
    key_a, key_b = event_key(a), event_key(b)
    return (key_a > key_b) - (key_a < key_b)


def sort_events(events: Iterable[SpaceTimeEvent]) -> list[SpaceTimeEvent]:
    return sorted(events, key=event_key)


def path_key(path: SpaceTimePath) -> tuple[int, int, str, str]:
    if not path.entries:
        raise ValueError(f"space-time path of {path.object_id!r} is empty")
    first = path.entries[0]
    return first.time.begin, first.time.end, first.event_id, path.object_id


def compare_paths(p: SpaceTimePath, q: SpaceTimePath) -> int:
    """Order paths by first event, then object id.

    Raises:
        ValueError: if either path has no entries
    """
    key_p, key_q = path_key(p), path_key(q)
    return (key_p > key_q) - (key_p < key_q)


def sort_paths(paths: Iterable[SpaceTimePath]) -> list[SpaceTimePath]:
    return sorted(paths, key=cmp_to_key(compare_paths))


# =============================================================================
# 🌳 EVENT COMPOSITION
# =============================================================================


def add_child_event(parent_id: str, child_id: str, store: TrajectoryStore) -> SpaceTimeEvent:
    """Append ``child_id`` to the children of ``parent_id``.

    Returns the updated parent event.

    Raises:
        UnknownEntityError: if either event is missing
        EventTreeError: already-parented child, time not nested, or a cycle
    """
    with store.writing():
        parent = store.event(parent_id)
        child = store.event(child_id)
        if child_id in store.parents:
            raise EventTreeError(f"event {child_id!r} already has parent {store.parents[child_id]!r}")
        if not parent.time.contains(child.time):
            raise EventTreeError(
                f"child {child_id!r} [{child.time.begin}, {child.time.end}] is not within "
                f"parent {parent_id!r} [{parent.time.begin}, {parent.time.end}]"
            )
        ancestor: str | None = parent_id
        while ancestor is not None:
            if ancestor == child_id:
                raise EventTreeError(f"adding {child_id!r} under {parent_id!r} would create a cycle")
            ancestor = store.parents.get(ancestor)

        updated = parent.model_copy(update={"children": (*parent.children, child_id)})
        store.upsert(updated)
        logger.debug(f"🌳 Event {child_id!r} composed under {parent_id!r}")
        return updated
