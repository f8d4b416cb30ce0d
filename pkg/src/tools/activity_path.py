"""🚶 Activities, processes and space-time paths.

Activities live on their own and link to events through begin/end
associations, so one activity may start at one event and finish at another.
A physical activity has a location; a virtual one (a call, an e-mail) may not.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

from src.errors import ObjectMismatchError, UnknownEntityError
from src.models import (
    Activity,
    ActivityAssociation,
    AssociationRole,
    PathEntry,
    Process,
    SpaceTimeEvent,
    SpaceTimePath,
)
from src.tools.store import TrajectoryStore
from src.tools.trajectory import sort_events

logger = logging.getLogger(__name__)


def attach_activity(
    event_id: str, activity_id: str, role: AssociationRole, store: TrajectoryStore
) -> ActivityAssociation:
    """Record that an activity begins or ends at an event; repeating it is a no-op.

    Raises:
        UnknownEntityError: unknown event or activity
        ObjectMismatchError: event and activity belong to different objects
    """
    association = ActivityAssociation(event_id=event_id, activity_id=activity_id, role=role)
    store.upsert(association)
    return association


def associations_of(event_id: str, store: TrajectoryStore) -> tuple[list[str], list[str]]:
    """Activity ids beginning and ending at an event, each sorted."""
    begins = sorted(
        link.activity_id
        for link in store.associations.values()
        if link.event_id == event_id and link.role == AssociationRole.BEGINS_AT
    )
    ends = sorted(
        link.activity_id
        for link in store.associations.values()
        if link.event_id == event_id and link.role == AssociationRole.ENDS_AT
    )
    return begins, ends


def build_path(object_id: str, store: TrajectoryStore) -> SpaceTimePath:
    """Time-ordered events of one object with the activities attached to each.

    Raises:
        UnknownEntityError: the object has no events
    """
    events = sort_events(store.events_of(object_id))
    if not events:
        raise UnknownEntityError("moving object", object_id)

    by_event: dict[str, tuple[list[str], list[str]]] = {event.id: ([], []) for event in events}
    for link in store.associations.values():
        slot = by_event.get(link.event_id)
        if slot is None:
            continue
        (slot[0] if link.role == AssociationRole.BEGINS_AT else slot[1]).append(link.activity_id)

    entries = tuple(
        PathEntry(
            event_id=event.id,
            time=event.time,
            begin_activities=tuple(sorted(by_event[event.id][0])),
            end_activities=tuple(sorted(by_event[event.id][1])),
        )
        for event in events
    )
    return SpaceTimePath(object_id=object_id, entries=entries)


def compose_process(
    name: str, activity_ids: Sequence[str], store: TrajectoryStore, process_id: str | None = None
) -> Process:
    """Group activities of one object into a process ordered by begin time.

    Raises:
        ValueError: empty activity list
        UnknownEntityError: unknown activity
        ObjectMismatchError: activities of different objects
    """
    if not activity_ids:
        raise ValueError(f"process {name!r} needs at least one activity")

    activities = [store.activity(activity_id) for activity_id in activity_ids]
    owners = {activity.object_id for activity in activities}
    if len(owners) > 1:
        raise ObjectMismatchError(f"process {name!r} mixes activities of {sorted(owners)}")

    ordered = sorted(activities, key=lambda activity: (activity.time.begin, activity.time.end, activity.id))
    process = Process(
        id=process_id or name,
        name=name,
        object_id=activities[0].object_id,
        activities=tuple(activity.id for activity in ordered),
    )
    store.upsert(process)
    return process


def _anchor_event(events: Sequence[SpaceTimeEvent], t: int) -> SpaceTimeEvent:
    anchor = events[0]
    for event in events:
        if event.time.begin > t:
            break
        anchor = event
    return anchor


def anchor_activities(object_id: str, store: TrajectoryStore) -> int:
    """Attach the object's unattached activities to its events by time.

    An activity begins at the latest event starting at or before its begin
    (the first event if none does) and ends at the latest event starting at
    or before its end. Returns the number of activities attached.
    """
    with store.writing():
        events = sort_events(store.events_of(object_id))
        if not events:
            return 0
        attached = {link.activity_id for link in store.associations.values()}
        pending = sorted(
            (activity for activity in store.activities.values() if activity.object_id == object_id),
            key=lambda activity: activity.id,
        )
        count = 0
        for activity in pending:
            if activity.id in attached:
                continue
            _attach_by_time(activity, events, store)
            count += 1

    if count:
        logger.info(f"🔗 Anchored {count} activities of {object_id!r} to its events")
    return count


def _attach_by_time(activity: Activity, events: Sequence[SpaceTimeEvent], store: TrajectoryStore) -> None:
    attach_activity(_anchor_event(events, activity.time.begin).id, activity.id, AssociationRole.BEGINS_AT, store)
    attach_activity(_anchor_event(events, activity.time.end).id, activity.id, AssociationRole.ENDS_AT, store)
