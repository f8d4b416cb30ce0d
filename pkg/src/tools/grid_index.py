"""🗂️ Uniform spatio-temporal grid index.

Events are bucketed by (cell_x, cell_y, bucket_t). Point events fall in one
cell; line and area events go into every cell their bounding box touches,
and into every time bucket their interval spans. Window queries prune with
the grid, then filter exactly on the representative point and interval.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator, Mapping

from src.models import IndexSummary, SpaceTimeEvent, STWindow
from src.tools.geometry import interval_overlaps
from src.tools.store import TrajectoryStore

logger = logging.getLogger(__name__)

BucketKey = tuple[int, int, int]


class GridIndex:
    """Immutable once built; the store swaps in a whole new instance."""

    def __init__(
        self,
        cell_size: float,
        time_bucket: int,
        buckets: Mapping[BucketKey, tuple[str, ...]],
        built_at_revision: int,
    ) -> None:
        self.cell_size = cell_size
        self.time_bucket = time_bucket
        self.buckets: Mapping[BucketKey, tuple[str, ...]] = dict(buckets)
        self.built_at_revision = built_at_revision

    def _cells(self, low: float, high: float) -> range:
        return range(math.floor(low / self.cell_size), math.floor(high / self.cell_size) + 1)

    def _slots(self, begin: int, end: int) -> range:
        return range(begin // self.time_bucket, end // self.time_bucket + 1)

    def keys_for(self, event: SpaceTimeEvent) -> Iterator[BucketKey]:
        min_x, min_y, max_x, max_y = event.spatial.bounding_box()
        for cell_x in self._cells(min_x, max_x):
            for cell_y in self._cells(min_y, max_y):
                for slot in self._slots(event.time.begin, event.time.end):
                    yield cell_x, cell_y, slot

    def candidates(self, window: STWindow) -> set[str]:
        """Event ids in every bucket the window touches (a superset of the answer)."""
        xs = self._cells(window.x_min, window.x_max)
        ys = self._cells(window.y_min, window.y_max)
        ts = self._slots(window.time.begin, window.time.end)
        found: set[str] = set()

        if len(xs) * len(ys) * len(ts) > len(self.buckets):
            for (cell_x, cell_y, slot), event_ids in self.buckets.items():
                if cell_x in xs and cell_y in ys and slot in ts:
                    found.update(event_ids)
            return found

        for cell_x in xs:
            for cell_y in ys:
                for slot in ts:
                    found.update(self.buckets.get((cell_x, cell_y, slot), ()))
        return found

    def event_ids(self) -> set[str]:
        return {event_id for event_ids in self.buckets.values() for event_id in event_ids}

    def summary(self) -> IndexSummary:
        return IndexSummary(
            cell_size=self.cell_size,
            time_bucket=self.time_bucket,
            buckets=len(self.buckets),
            events=len(self.event_ids()),
            built_at_revision=self.built_at_revision,
        )


def index_events(
    cell_size: float, time_bucket: int, events: Mapping[str, SpaceTimeEvent], revision: int
) -> GridIndex:
    """Bucket ``events`` without touching any store."""
    layout = GridIndex(cell_size, time_bucket, {}, revision)
    buckets: dict[BucketKey, list[str]] = {}
    for event_id in sorted(events):
        for key in layout.keys_for(events[event_id]):
            buckets.setdefault(key, []).append(event_id)
    return GridIndex(cell_size, time_bucket, {key: tuple(ids) for key, ids in buckets.items()}, revision)


def build_index(cell_size: float, time_bucket: int, store: TrajectoryStore) -> GridIndex:
    """Index every current event and publish the index on the store.

    Raises:
        ValueError: non-positive cell size or time bucket
    """
    if cell_size <= 0 or not math.isfinite(cell_size):
        raise ValueError(f"cell size must be a positive number of meters, got {cell_size}")
    if time_bucket <= 0:
        raise ValueError(f"time bucket must be a positive number of seconds, got {time_bucket}")

    with store.writing():
        events = store.events
        revision = store.revision
        store.cell_size = cell_size
        store.time_bucket = time_bucket

    index = index_events(cell_size, time_bucket, events, revision)
    store.publish_index(index)
    logger.info(
        f"🗂️ Indexed {len(events)} events into {len(index.buckets)} buckets "
        f"(cell {cell_size} m, bucket {time_bucket} s, revision {revision})"
    )
    return index


def matches_window(event: SpaceTimeEvent, window: STWindow) -> bool:
    """Representative point inside the closed window and interval overlap."""
    return window.contains_point(event.spatial.representative_point()) and interval_overlaps(
        event.time, window.time
    )


def scan_window(window: STWindow, events: Iterable[SpaceTimeEvent]) -> set[str]:
    """Linear-scan answer to a window query."""
    return {event.id for event in events if matches_window(event, window)}


def window_query(window: STWindow, store: TrajectoryStore) -> set[str]:
    """Ids of events inside the window, pruned through the grid.

    A missing or stale index is replaced by a private one built with the
    store's parameters; the store itself is never written.
    """
    events = store.events
    index = store.index
    if index is None or index.built_at_revision != store.revision:
        logger.debug("🗂️ Index missing or stale; indexing privately for this window query")
        index = index_events(store.cell_size, store.time_bucket, events, store.revision)

    found: set[str] = set()
    for event_id in index.candidates(window):
        event = events.get(event_id)
        if event is not None and matches_window(event, window):
            found.add(event_id)
    return found
