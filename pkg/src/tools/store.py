"""🗄️ In-memory trajectory store.

Single source of truth for events, trajectory presentations, regions,
activities, devices and observations.

Concurrency:
- Single writer: every mutation runs under one lock and bumps ``revision``.
- Many readers: mutations build new collection dicts and swap them in,
  so a reader holding a reference never sees a half-applied change.
"""

from __future__ import annotations

import json
import logging
import threading
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from typing import TYPE_CHECKING, Any

from pydantic import BaseModel

from src.config import DEFAULT_CELL_SIZE, DEFAULT_TIME_BUCKET
from src.errors import (
    DanglingReferenceError,
    EventTreeError,
    ObjectMismatchError,
    UnknownEntityError,
)
from src.models import (
    Activity,
    ActivityAssociation,
    DeviceProxy,
    Observation,
    Process,
    RawTrajectory,
    RegionDefinition,
    RegionForest,
    SemanticTrajectory,
    SpaceTimeEvent,
    SpatialObject,
    StructuredTrajectory,
    TimeInterval,
)
from src.tools.regions import build_forest

if TYPE_CHECKING:
    from src.tools.grid_index import GridIndex

logger = logging.getLogger(__name__)

# Collection name -> attribute, in canonical export order
COLLECTIONS = (
    "activities",
    "associations",
    "devices",
    "events",
    "observations",
    "processes",
    "raw",
    "regions",
    "semantic",
    "structured",
)

COLLECTION_MODELS: dict[str, type[BaseModel]] = {
    "activities": Activity,
    "associations": ActivityAssociation,
    "devices": DeviceProxy,
    "events": SpaceTimeEvent,
    "observations": Observation,
    "processes": Process,
    "raw": RawTrajectory,
    "regions": RegionDefinition,
    "semantic": SemanticTrajectory,
    "structured": StructuredTrajectory,
}


class TrajectoryStore:
    """🗄️ Id-indexed collections of every domain entity plus a revision counter."""

    def __init__(self, cell_size: float = DEFAULT_CELL_SIZE, time_bucket: int = DEFAULT_TIME_BUCKET) -> None:
        self._lock = threading.RLock()
        self.revision = 0
        self.events: dict[str, SpaceTimeEvent] = {}
        self.raw: dict[str, RawTrajectory] = {}
        self.structured: dict[str, StructuredTrajectory] = {}
        self.semantic: dict[str, SemanticTrajectory] = {}
        self.regions: dict[str, RegionDefinition] = {}
        self.forest = RegionForest()
        self.activities: dict[str, Activity] = {}
        self.processes: dict[str, Process] = {}
        self.associations: dict[str, ActivityAssociation] = {}
        self.devices: dict[str, DeviceProxy] = {}
        self.observations: dict[str, Observation] = {}
        self.parents: dict[str, str] = {}
        self.cell_size = cell_size
        self.time_bucket = time_bucket
        self._index: GridIndex | None = None

        self._handlers: dict[type[BaseModel], Callable[[Any], bool]] = {
            SpaceTimeEvent: self._put_event,
            RawTrajectory: self._put_raw,
            StructuredTrajectory: self._put_structured,
            SemanticTrajectory: self._put_semantic,
            RegionDefinition: self._put_region,
            Activity: self._put_activity,
            Process: self._put_process,
            ActivityAssociation: self._put_association,
            DeviceProxy: self._put_device,
            Observation: self._put_observation,
        }

    # =========================================================================
    # ✍️ MUTATIONS
    # =========================================================================

    @contextmanager
    def writing(self) -> Iterator[None]:
        """Hold the writer lock across several reads and one mutation."""
        with self._lock:
            yield

    def upsert(self, entity: BaseModel) -> int:
        """Insert or replace an entity by id; returns the store revision.

        Validation failures propagate and leave the store unchanged.
        Re-inserting an identical association, raw trajectory or region
        is a no-op.
        """
        handler = self._handler_for(entity)
        with self._lock:
            if handler(entity):
                self.revision += 1
                logger.debug(f"🗄️ Upserted {type(entity).__name__} at revision {self.revision}")
            return self.revision

    def _handler_for(self, entity: BaseModel) -> Callable[[Any], bool]:
        for cls in type(entity).__mro__:
            handler = self._handlers.get(cls)
            if handler is not None:
                return handler
        raise TypeError(f"store cannot hold {type(entity).__name__}")

    def _check_device(self, device_id: str | None, owner: str) -> None:
        # Referential integrity is enforced once devices are loaded
        if device_id is not None and self.devices and device_id not in self.devices:
            raise DanglingReferenceError(f"{owner} references unregistered device {device_id!r}")

    def _put_event(self, event: SpaceTimeEvent) -> bool:
        self._check_device(event.device_id, f"event {event.id!r}")
        parents = dict(self.parents)
        for child_id in [child for child, parent in parents.items() if parent == event.id]:
            del parents[child_id]

        for child_id in event.children:
            child = self.events.get(child_id)
            if child is None:
                raise UnknownEntityError("event", child_id)
            if child_id == event.id:
                raise EventTreeError(f"event {event.id!r} cannot contain itself")
            if child_id in parents:
                raise EventTreeError(f"event {child_id!r} already has parent {parents[child_id]!r}")
            if not event.time.contains(child.time):
                raise EventTreeError(f"child {child_id!r} time is not contained in parent {event.id!r}")
            parents[child_id] = event.id

        parent_id = parents.get(event.id)
        if parent_id is not None and not self.events[parent_id].time.contains(event.time):
            raise EventTreeError(f"event {event.id!r} time is not contained in parent {parent_id!r}")
        ancestor = parent_id
        while ancestor is not None:
            if ancestor == event.id:
                raise EventTreeError(f"event {event.id!r} would become its own ancestor")
            ancestor = parents.get(ancestor)

        events = dict(self.events)
        events[event.id] = event
        self.events = events
        self.parents = parents
        return True

    def _put_raw(self, raw: RawTrajectory) -> bool:
        if self.raw.get(raw.object_id) == raw:
            return False
        for point in raw.points:
            self._check_device(point.device_id, f"point {raw.object_id}@{point.t}")

        previous = self.raw.get(raw.object_id)
        events = dict(self.events)
        kept_ids = {raw.event_id(index) for index in range(len(raw.points))}
        removed_ids: set[str] = set()
        if previous is not None:
            removed_ids = {previous.event_id(index) for index in range(len(previous.points))} - kept_ids
            for event_id in removed_ids:
                events.pop(event_id, None)

        for index, point in enumerate(raw.points):
            event_id = raw.event_id(index)
            existing = events.get(event_id)
            events[event_id] = SpaceTimeEvent(
                id=event_id,
                object_id=raw.object_id,
                spatial=SpatialObject(point=point.point),
                time=TimeInterval.instant(point.t),
                device_id=point.device_id,
                semantic=existing.semantic if existing is not None else None,
                children=existing.children if existing is not None else (),
            )

        # Surviving composites lose the removed children
        for event_id, event in list(events.items()):
            if removed_ids.intersection(event.children):
                events[event_id] = event.model_copy(
                    update={"children": tuple(child for child in event.children if child not in removed_ids)}
                )

        raws = dict(self.raw)
        raws[raw.object_id] = raw
        self.events = events
        self.raw = raws
        if removed_ids:
            self.associations = {
                key: link for key, link in self.associations.items() if link.event_id not in removed_ids
            }
            self.observations = {
                key: obs for key, obs in self.observations.items() if obs.event_id not in removed_ids
            }
            self.parents = {
                child: parent
                for child, parent in self.parents.items()
                if child not in removed_ids and parent not in removed_ids
            }
        self._drop_derived(raw.object_id)
        return True

    def _drop_derived(self, object_id: str) -> None:
        if object_id in self.structured or object_id in self.semantic:
            logger.info(f"♻️ Raw trajectory of {object_id!r} changed; dropping its derived presentations")
            self.structured = {key: value for key, value in self.structured.items() if key != object_id}
            self.semantic = {key: value for key, value in self.semantic.items() if key != object_id}

    def _put_structured(self, structured: StructuredTrajectory) -> bool:
        object_id = structured.object_id
        if self.structured.get(object_id) == structured:
            return False
        items = dict(self.structured)
        items[object_id] = structured
        self.structured = items
        semantic = self.semantic.get(object_id)
        if semantic is not None and semantic.base != structured:
            logger.info(f"♻️ Episodes of {object_id!r} changed; dropping its semantic presentation")
            self.semantic = {key: value for key, value in self.semantic.items() if key != object_id}
        return True

    def _put_semantic(self, semantic: SemanticTrajectory) -> bool:
        items = dict(self.semantic)
        items[semantic.object_id] = semantic
        self.semantic = items
        return True

    def _put_region(self, region: RegionDefinition) -> bool:
        definitions = dict(self.regions)
        # Store the plain definition; children are derived by the forest
        definitions[region.id] = RegionDefinition(
            id=region.id,
            name=region.name,
            category=region.category,
            parent=region.parent,
            area=region.area,
            site=region.site,
        )
        if self.regions.get(region.id) == definitions[region.id]:
            return False
        forest = build_forest(definitions.values())
        self.regions = definitions
        self.forest = forest
        if self.semantic:
            logger.info("♻️ Regions changed; dropping semantic presentations")
            self.semantic = {}
        return True

    def _put_activity(self, activity: Activity) -> bool:
        items = dict(self.activities)
        items[activity.id] = activity
        self.activities = items
        return True

    def _put_process(self, process: Process) -> bool:
        for activity_id in process.activities:
            activity = self.activities.get(activity_id)
            if activity is None:
                raise UnknownEntityError("activity", activity_id)
            if activity.object_id != process.object_id:
                raise ObjectMismatchError(
                    f"activity {activity_id!r} belongs to {activity.object_id!r}, not {process.object_id!r}"
                )
        items = dict(self.processes)
        items[process.id] = process
        self.processes = items
        return True

    def _put_association(self, association: ActivityAssociation) -> bool:
        event = self.events.get(association.event_id)
        if event is None:
            raise UnknownEntityError("event", association.event_id)
        activity = self.activities.get(association.activity_id)
        if activity is None:
            raise UnknownEntityError("activity", association.activity_id)
        if event.object_id != activity.object_id:
            raise ObjectMismatchError(
                f"activity {activity.id!r} of {activity.object_id!r} cannot attach to event of {event.object_id!r}"
            )
        if association.key in self.associations:
            return False
        items = dict(self.associations)
        items[association.key] = association
        self.associations = items
        return True

    def _put_device(self, device: DeviceProxy) -> bool:
        items = dict(self.devices)
        items[device.device_id] = device
        self.devices = items
        return True

    def _put_observation(self, observation: Observation) -> bool:
        if observation.event_id not in self.events:
            raise UnknownEntityError("event", observation.event_id)
        items = dict(self.observations)
        items[observation.id] = observation
        self.observations = items
        return True

    # =========================================================================
    # 🔍 READS
    # =========================================================================

    def event(self, event_id: str) -> SpaceTimeEvent:
        try:
            return self.events[event_id]
        except KeyError:
            raise UnknownEntityError("event", event_id) from None

    def activity(self, activity_id: str) -> Activity:
        try:
            return self.activities[activity_id]
        except KeyError:
            raise UnknownEntityError("activity", activity_id) from None

    def events_of(self, object_id: str) -> list[SpaceTimeEvent]:
        return [event for event in self.events.values() if event.object_id == object_id]

    def object_ids(self) -> list[str]:
        """Every moving object with a raw trajectory or an event."""
        return sorted(set(self.raw) | {event.object_id for event in self.events.values()})

    def counts(self) -> dict[str, int]:
        return {name: len(self.collection(name)) for name in COLLECTIONS}

    def collection(self, name: str) -> dict[str, Any]:
        return getattr(self, name)  # type: ignore[no-any-return]

    # =========================================================================
    # 🗂️ INDEX PUBLICATION
    # =========================================================================

    def publish_index(self, index: GridIndex) -> None:
        """Swap in a freshly built index; readers see the old or the new one."""
        self._index = index

    @property
    def index(self) -> GridIndex | None:
        return self._index

    @property
    def index_is_fresh(self) -> bool:
        return self._index is not None and self._index.built_at_revision == self.revision

    # =========================================================================
    # 📤 CANONICAL EXPORT
    # =========================================================================

    def canonical_export(self) -> str:
        """Deterministic text dump sorted by entity kind, then id."""
        lines: list[str] = []
        for name in COLLECTIONS:
            items = self.collection(name)
            for key in sorted(items):
                payload = json.dumps(items[key].model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
                lines.append(f"{name}\t{key}\t{payload}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_collections(
        cls,
        collections: dict[str, list[BaseModel]],
        revision: int = 0,
        cell_size: float = DEFAULT_CELL_SIZE,
        time_bucket: int = DEFAULT_TIME_BUCKET,
    ) -> TrajectoryStore:
        """Rebuild a store from already validated collections."""
        store = cls(cell_size=cell_size, time_bucket=time_bucket)
        keys: dict[str, Callable[[Any], str]] = {
            "activities": lambda item: item.id,
            "associations": lambda item: item.key,
            "devices": lambda item: item.device_id,
            "events": lambda item: item.id,
            "observations": lambda item: item.id,
            "processes": lambda item: item.id,
            "raw": lambda item: item.object_id,
            "regions": lambda item: item.id,
            "semantic": lambda item: item.object_id,
            "structured": lambda item: item.object_id,
        }
        for name, items in collections.items():
            setattr(store, name, {keys[name](item): item for item in items})
        store.forest = build_forest(store.regions.values())
        store.parents = {child: event.id for event in store.events.values() for child in event.children}
        store.revision = revision
        return store
