"""🚶 Tests for activities, processes and space-time paths."""

from __future__ import annotations

import random

import pytest

from src.errors import ObjectMismatchError, UnknownEntityError
from src.models import (
    Activity,
    ActivityKind,
    AssociationRole,
    IngestKind,
    SpaceTimeEvent,
    SpatialObject,
    TimeInterval,
)
from src.tools.activity_path import (
    anchor_activities,
    associations_of,
    attach_activity,
    build_path,
    compose_process,
)
from src.tools.engine import TrajectoryEngine
from src.tools.trajectory import event_key
from tests import TEST_DATA_DIR
from tests.builders import pt, raw


def _activity(activity_id: str, object_id: str, begin: int, end: int) -> Activity:
    return Activity(
        id=activity_id,
        object_id=object_id,
        kind=ActivityKind.VIRTUAL,
        label=activity_id,
        time=TimeInterval(begin=begin, end=end),
    )


class TestSpaceTimePath:
    """🧭 Tests for path building on the fixture day."""

    def test_fixture_path(self, loaded_engine):
        """✅ Walking to school spans two events; the e-mail sits on one."""
        path = build_path("MO", loaded_engine.store)
        assert len(path.entries) == 13
        by_event = {entry.event_id: entry for entry in path.entries}
        assert by_event["MO#30000"].begin_activities == ("a1",)
        assert by_event["MO#30600"].begin_activities == ("a2",)
        assert by_event["MO#30600"].end_activities == ("a1", "a2")
        assert by_event["MO#28800"].begin_activities == ()

    def test_entries_are_time_ordered(self, store):
        """🎲 Entry order equals sorting the events by (begin, end, id)."""
        rng = random.Random(4)
        events = []
        for k in range(50):
            begin = rng.randint(0, 30)
            event = SpaceTimeEvent(
                id=f"ev{k:02d}",
                object_id="A",
                spatial=SpatialObject.of(pt(0, 0)),
                time=TimeInterval(begin=begin, end=begin + rng.randint(0, 4)),
            )
            events.append(event)
            store.upsert(event)
        expected = [event.id for event in sorted(events, key=event_key)]
        assert [entry.event_id for entry in build_path("A", store).entries] == expected

    def test_building_twice_is_idempotent(self, loaded_engine):
        """✅ Building twice gives equal paths and leaves the store alone."""
        store = loaded_engine.store
        revision = store.revision
        first = build_path("MO", store)
        assert build_path("MO", store) == first
        assert store.revision == revision

    def test_unknown_object(self, store):
        """❌ An object without events has no path."""
        with pytest.raises(UnknownEntityError, match="unknown moving object: 'ghost'"):
            build_path("ghost", store)


class TestAssociations:
    """🔗 Tests for begin/end associations."""

    @pytest.fixture
    def two_objects(self, store):
        store.upsert(raw("A", (0, 0, 0), (10, 0, 100)))
        store.upsert(raw("B", (0, 0, 0)))
        store.upsert(_activity("call", "A", 10, 50))
        return store

    def test_attach_and_list(self, two_objects):
        """✅ Associations are listed per role."""
        attach_activity("A#0", "call", AssociationRole.BEGINS_AT, two_objects)
        attach_activity("A#100", "call", AssociationRole.ENDS_AT, two_objects)
        assert associations_of("A#0", two_objects) == (["call"], [])
        assert associations_of("A#100", two_objects) == ([], ["call"])

    def test_reattach_is_noop(self, two_objects):
        """✅ Repeating an association keeps the revision."""
        attach_activity("A#0", "call", AssociationRole.BEGINS_AT, two_objects)
        revision = two_objects.revision
        attach_activity("A#0", "call", AssociationRole.BEGINS_AT, two_objects)
        assert two_objects.revision == revision
        assert len(two_objects.associations) == 1

    def test_object_mismatch(self, two_objects):
        """❌ An activity of A cannot attach to an event of B."""
        with pytest.raises(ObjectMismatchError):
            attach_activity("B#0", "call", AssociationRole.BEGINS_AT, two_objects)

    def test_unknown_references(self, two_objects):
        """❌ Event and activity must exist."""
        with pytest.raises(UnknownEntityError, match="unknown event"):
            attach_activity("A#5", "call", AssociationRole.BEGINS_AT, two_objects)
        with pytest.raises(UnknownEntityError, match="unknown activity"):
            attach_activity("A#0", "nap", AssociationRole.BEGINS_AT, two_objects)


class TestAnchoring:
    """⚓ Tests for time-based activity anchoring."""

    def test_anchors_by_time(self, store):
        """✅ Latest event at or before each end; the first event when none precedes."""
        store.upsert(raw("A", (0, 0, 100), (0, 0, 200), (0, 0, 300)))
        store.upsert(_activity("early", "A", 10, 250))
        assert anchor_activities("A", store) == 1
        assert associations_of("A#100", store) == (["early"], [])
        assert associations_of("A#200", store) == ([], ["early"])

    def test_idempotent(self, loaded_engine):
        """✅ Already attached activities are left alone."""
        revision = loaded_engine.store.revision
        assert anchor_activities("MO", loaded_engine.store) == 0
        assert loaded_engine.store.revision == revision

    def test_no_events_yet(self, store):
        """✅ Activities wait until their object has events."""
        store.upsert(_activity("call", "A", 0, 10))
        assert anchor_activities("A", store) == 0

    def test_load_order_does_not_matter(self, loaded_engine):
        """✅ Activities loaded before points end up with the same associations."""
        engine = TrajectoryEngine()
        for kind, name in (
            (IngestKind.ACTIVITIES, "activities.csv"),
            (IngestKind.DEVICES, "devices.csv"),
            (IngestKind.POINTS, "points.csv"),
        ):
            engine.load(kind, TEST_DATA_DIR / name)
        assert engine.store.associations == loaded_engine.store.associations


class TestProcesses:
    """🧩 Tests for process composition."""

    def test_orders_by_begin(self, loaded_engine):
        """✅ Activities are ordered by begin time whatever the input order."""
        process = compose_process("school run", ["a2", "a1"], loaded_engine.store)
        assert process.id == "school run"
        assert process.object_id == "MO"
        assert process.activities == ("a1", "a2")
        assert loaded_engine.store.processes["school run"] == process

    def test_explicit_id(self, loaded_engine):
        """✅ A process id can differ from its name."""
        process = compose_process("match day", ["a3"], loaded_engine.store, process_id="p-1")
        assert loaded_engine.store.processes["p-1"].name == "match day"
        assert process.object_id == "P2"

    def test_mixed_objects(self, loaded_engine):
        """❌ A process belongs to one object."""
        with pytest.raises(ObjectMismatchError, match="mixes activities"):
            compose_process("mix", ["a1", "a3"], loaded_engine.store)

    def test_empty_and_unknown(self, loaded_engine):
        """❌ Empty lists and unknown activities."""
        with pytest.raises(ValueError, match="at least one activity"):
            compose_process("nothing", [], loaded_engine.store)
        with pytest.raises(UnknownEntityError, match="unknown activity"):
            compose_process("ghost", ["a9"], loaded_engine.store)
