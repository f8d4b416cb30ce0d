"""🗄️ Tests for the store, the grid index and snapshots.

Test Coverage:
- upsert semantics, revisions and derived-data invalidation
- canonical export determinism
- window queries against a linear scan
- snapshot round-trip, truncation and foreign files
"""

from __future__ import annotations

import hashlib
import random
import struct

import pytest

from src.config import SNAPSHOT_MAGIC
from src.errors import MissingPresentationError, SnapshotChecksumError, SnapshotReadError, SnapshotVersionError
from src.models import (
    EpisodeKind,
    IngestKind,
    SegmentationParams,
    SpaceTimeEvent,
    SpatialObject,
    STWindow,
    TimeInterval,
)
from src.tools.engine import TrajectoryEngine
from src.tools.grid_index import GridIndex, build_index, scan_window, window_query
from src.tools.snapshot import decode_snapshot, encode_snapshot, load_snapshot, save_snapshot
from src.tools.store import COLLECTIONS, TrajectoryStore
from src.tools.trajectory import add_child_event
from tests import TEST_DATA_DIR
from tests.builders import FIXTURE_PARAMS, area_region, box, random_world, raw


def _random_window(rng: random.Random) -> STWindow:
    x0, y0 = rng.uniform(-500, 2500), rng.uniform(-500, 2500)
    begin = rng.randint(0, 60_000)
    return STWindow(
        x_min=x0,
        x_max=x0 + rng.choice([0, rng.uniform(0, 300), rng.uniform(0, 3000)]),
        y_min=y0,
        y_max=y0 + rng.choice([0, rng.uniform(0, 300), rng.uniform(0, 3000)]),
        time=TimeInterval(begin=begin, end=begin + rng.choice([0, rng.randint(0, 3600), rng.randint(0, 80_000)])),
    )


def _reframe(body: bytes) -> bytes:
    """Seal a hand-made snapshot body with a valid checksum."""
    return body + hashlib.sha256(body).digest()


class TestUpsert:
    """✍️ Tests for store mutations."""

    def test_revision_bumps(self, store):
        """✅ Every effective change bumps the revision."""
        assert store.revision == 0
        assert store.upsert(raw("A", (0, 0, 0))) == 1
        assert store.upsert(area_region("r", (0, 0, 1, 1))) == 2

    def test_identical_inserts_are_noops(self, store):
        """✅ Re-inserting the same raw trajectory or region keeps the revision."""
        store.upsert(raw("A", (0, 0, 0), (1, 1, 10)))
        store.upsert(area_region("r", (0, 0, 1, 1)))
        revision = store.revision
        store.upsert(raw("A", (0, 0, 0), (1, 1, 10)))
        store.upsert(area_region("r", (0, 0, 1, 1)))
        assert store.revision == revision

    def test_raw_materializes_point_events(self, store):
        """✅ One instant event per point, named ``<object>#<t>``."""
        store.upsert(raw("A", (0, 0, 5), (1, 1, 9)))
        assert sorted(store.events) == ["A#5", "A#9"]
        assert store.events["A#9"].time == TimeInterval.instant(9)
        assert store.object_ids() == ["A"]

    def test_raw_replacement_drops_derived(self, pipeline_engine):
        """♻️ New points invalidate the object's episodes and annotations."""
        store = pipeline_engine.store
        updated = raw("P2", (0, 0, 1), (0, 0, 2))
        store.upsert(updated)
        assert "P2" not in store.structured and "P2" not in store.semantic
        assert "MO" in store.structured and "MO" in store.semantic
        assert not any(event_id.startswith("P2#3") for event_id in store.events)

    def test_raw_replacement_drops_orphans(self, pipeline_engine):
        """♻️ Observations and associations of removed events go with them."""
        store = pipeline_engine.store
        store.upsert(raw("MO", (0, 0, 1)))
        assert store.observations == {}
        assert not any(link.event_id.startswith("MO#3") for link in store.associations.values())

    def test_resegmenting_drops_stale_semantic(self, pipeline_engine):
        """♻️ New episodes invalidate the annotations built on the old ones."""
        store = pipeline_engine.store
        pipeline_engine.segment(SegmentationParams(eps=50, tau=100_000), object_id="MO")
        assert not any(episode.kind == EpisodeKind.STOP for episode in store.structured["MO"].episodes)
        assert "MO" not in store.semantic
        assert store.semantic["P2"].base == store.structured["P2"]
        with pytest.raises(MissingPresentationError, match="MO is not annotated; run annotate"):
            pipeline_engine.query('semantic where object = "MO"')
        with pytest.raises(MissingPresentationError):
            pipeline_engine.query("roi-visits")

    def test_resegmenting_with_same_params_keeps_semantic(self, pipeline_engine):
        """✅ Identical episodes are a no-op."""
        store = pipeline_engine.store
        revision = store.revision
        pipeline_engine.segment(FIXTURE_PARAMS)
        assert store.revision == revision
        assert set(store.semantic) == {"MO", "P2"}

    def test_annotations_sit_on_current_episodes(self, pipeline_engine):
        """✅ Every stored annotation is built on the stored segmentation."""
        store = pipeline_engine.store
        for object_id, semantic in store.semantic.items():
            assert semantic.base == store.structured[object_id]

    def test_raw_replacement_prunes_children(self, store):
        """♻️ Removed point events disappear from their parents' children."""
        store.upsert(raw("A", (0, 0, 5), (0, 0, 50)))
        store.upsert(raw("B", (0, 0, 5), (0, 0, 9)))
        add_child_event("A#5", "B#5", store)
        store.upsert(raw("B", (0, 0, 9)))
        assert "B#5" not in store.events
        assert store.events["A#5"].children == ()
        assert "B#5" not in store.parents
        for event in store.events.values():
            assert all(child in store.events for child in event.children)

    def test_raw_replacement_keeps_surviving_children(self, store):
        """✅ Children whose points survive stay attached."""
        store.upsert(raw("A", (0, 0, 5), (0, 0, 50)))
        store.upsert(raw("B", (0, 0, 5), (0, 0, 9)))
        add_child_event("A#5", "B#5", store)
        store.upsert(raw("B", (0, 0, 5), (0, 0, 12)))
        assert store.events["A#5"].children == ("B#5",)
        assert store.parents["B#5"] == "A#5"

    def test_region_change_drops_semantic(self, pipeline_engine):
        """♻️ New regions invalidate every annotation."""
        store = pipeline_engine.store
        store.upsert(area_region("r-park", (5000, 5000, 5100, 5100), category="leisure"))
        assert store.semantic == {}
        assert set(store.structured) == {"MO", "P2"}

    def test_failed_upsert_changes_nothing(self, store):
        """❌ A region with an unknown parent leaves the store as it was."""
        store.upsert(area_region("r", (0, 0, 1, 1)))
        before = store.canonical_export()
        with pytest.raises(ValueError, match="unknown parent"):
            store.upsert(area_region("child", (0, 0, 1, 1), parent="ghost"))
        assert store.canonical_export() == before
        assert store.revision == 1

    def test_unsupported_entity(self, store):
        """❌ Only domain entities are stored."""
        with pytest.raises(TypeError, match="cannot hold"):
            store.upsert(box(0, 0, 1, 1))


class TestCanonicalExport:
    """📤 Tests for the canonical text dump."""

    def test_sorted_by_kind_then_id(self, loaded_engine):
        """✅ Lines are grouped by collection in canonical order."""
        lines = loaded_engine.store.canonical_export().splitlines()
        names = [line.split("\t", 1)[0] for line in lines]
        assert names == sorted(names, key=COLLECTIONS.index)
        devices = [line.split("\t")[1] for line in lines if line.startswith("devices\t")]
        assert devices == ["cam-7", "gps-1"]

    def test_reloading_is_idempotent(self, loaded_engine):
        """✅ Loading the same files again gives the same export."""
        before = loaded_engine.store.canonical_export()
        revision = loaded_engine.store.revision
        for kind, name in ((IngestKind.POINTS, "points.csv"), (IngestKind.REGIONS, "regions.jsonl")):
            loaded_engine.load(kind, TEST_DATA_DIR / name)
        assert loaded_engine.store.canonical_export() == before
        assert loaded_engine.store.revision == revision

    def test_empty_store(self, store):
        """✅ Nothing to export."""
        assert store.canonical_export() == ""
        assert set(store.counts().values()) == {0}


class TestGridIndex:
    """🗂️ Tests for the spatio-temporal grid."""

    @pytest.fixture
    def world(self) -> TrajectoryStore:
        rng = random.Random(8)
        world = random_world(rng)
        # Areas spanning several cells and time buckets
        for k in range(5):
            x0, y0 = rng.uniform(0, 1500), rng.uniform(0, 1500)
            begin = rng.randint(0, 40_000)
            world.upsert(
                SpaceTimeEvent(
                    id=f"zone-{k}",
                    object_id="zones",
                    spatial=SpatialObject.of(box(x0, y0, x0 + 700, y0 + 400)),
                    time=TimeInterval(begin=begin, end=begin + 9000),
                )
            )
        return world

    def test_build_summary(self, world):
        """✅ Every event lands in at least one bucket."""
        summary = build_index(250, 1800, world).summary()
        assert summary.events == len(world.events)
        assert summary.built_at_revision == world.revision
        assert world.index_is_fresh

    def test_area_event_spans_cells(self, world):
        """✅ Areas are indexed in every cell and slot they touch."""
        index = build_index(250, 1800, world)
        keys = set(index.keys_for(world.events["zone-0"]))
        assert len({(x, y) for x, y, _ in keys}) > 1
        assert len({slot for _, _, slot in keys}) > 1

    @pytest.mark.slow
    def test_window_query_matches_scan(self, world):
        """🎲 200 random windows agree with a linear scan."""
        rng = random.Random(12)
        build_index(250, 1800, world)
        for _ in range(200):
            window = _random_window(rng)
            assert window_query(window, world) == scan_window(window, world.events.values())

    def test_huge_window_iterates_buckets(self, world):
        """✅ A window wider than the grid walks the buckets instead of the cells."""
        index = build_index(250, 1800, world)
        window = STWindow(x_min=-1e6, x_max=1e6, y_min=-1e6, y_max=1e6, time=TimeInterval(begin=0, end=10**6))
        assert index.candidates(window) == index.event_ids() == set(world.events)
        assert window_query(window, world) == scan_window(window, world.events.values())

    def test_stale_index_is_not_republished(self, world):
        """♻️ A write makes the index stale; window queries still see new events but leave the store alone."""
        published = build_index(250, 1800, world)
        world.upsert(raw("late", (100, 100, 50)))
        assert not world.index_is_fresh
        window = STWindow(x_min=90, x_max=110, y_min=90, y_max=110, time=TimeInterval(begin=0, end=100))
        assert "late#50" in window_query(window, world)
        assert world.index is published
        assert not world.index_is_fresh

    @pytest.mark.parametrize("cell_size,time_bucket", [(0, 10), (-5, 10), (10, 0), (float("inf"), 10)])
    def test_invalid_parameters(self, store, cell_size, time_bucket):
        """❌ Cells and buckets must be positive."""
        with pytest.raises(ValueError, match="must be a positive"):
            build_index(cell_size, time_bucket, store)

    def test_empty_index(self, store):
        """✅ An empty store gives an empty index."""
        index = build_index(100, 3600, store)
        assert isinstance(index, GridIndex)
        assert index.summary().buckets == 0


class TestSnapshots:
    """💾 Tests for snapshot persistence."""

    def test_round_trip(self, pipeline_engine, tmp_path):
        """✅ Save then load reproduces the canonical export byte for byte."""
        store = pipeline_engine.store
        pipeline_engine.compose_process("school run", ["a1", "a2"])
        build_index(50, 600, store)
        target = save_snapshot(tmp_path / "day.snap", store)

        restored = load_snapshot(target)
        assert restored.canonical_export() == store.canonical_export()
        assert restored.revision == store.revision
        assert (restored.cell_size, restored.time_bucket) == (50, 600)
        assert sorted(restored.forest.roots) == sorted(store.forest.roots)
        assert restored.forest.regions.keys() == store.forest.regions.keys()
        assert not (tmp_path / "day.snap.tmp").exists()

    def test_restored_store_answers_queries(self, pipeline_engine, tmp_path):
        """✅ A restored engine gives the same tables."""
        pipeline_engine.save(tmp_path / "day.snap")
        restored = TrajectoryEngine()
        restored.restore(tmp_path / "day.snap")
        query = 'roi-visits group by region select count'
        assert restored.query(query) == pipeline_engine.query(query)

    def test_encoding_is_deterministic(self, loaded_engine):
        """✅ Same store, same bytes."""
        assert encode_snapshot(loaded_engine.store) == encode_snapshot(loaded_engine.store)

    def test_truncated(self, loaded_engine):
        """❌ Missing bytes are a checksum error, not a crash."""
        data = encode_snapshot(loaded_engine.store)
        with pytest.raises(SnapshotChecksumError):
            decode_snapshot(data[:-1])
        with pytest.raises(SnapshotChecksumError, match="truncated"):
            decode_snapshot(data[:10])

    def test_corrupted(self, loaded_engine):
        """❌ A flipped byte breaks the checksum."""
        data = bytearray(encode_snapshot(loaded_engine.store))
        data[20] ^= 0xFF
        with pytest.raises(SnapshotChecksumError, match="does not match"):
            decode_snapshot(bytes(data))

    def test_unknown_version(self, loaded_engine):
        """❌ A future format version is refused."""
        data = encode_snapshot(loaded_engine.store)
        body = data[: -hashlib.sha256().digest_size]
        bumped = SNAPSHOT_MAGIC + struct.pack(">H", 99) + body[len(SNAPSHOT_MAGIC) + 2 :]
        with pytest.raises(SnapshotVersionError, match="version 99"):
            decode_snapshot(_reframe(bumped))

    def test_foreign_file(self):
        """❌ Wrong magic or an unreadable layout."""
        with pytest.raises(SnapshotVersionError, match="not a trajectory snapshot"):
            decode_snapshot(_reframe(b"PK\x03\x04 some zip file"))
        with pytest.raises(SnapshotVersionError, match="layout"):
            decode_snapshot(_reframe(SNAPSHOT_MAGIC + struct.pack(">H", 1) + b"\x00\x05junk"))

    def test_missing_file(self, tmp_path):
        """❌ Unreadable path."""
        with pytest.raises(SnapshotReadError, match="cannot read snapshot"):
            load_snapshot(tmp_path / "absent.snap")

    def test_segmentation_survives_restore(self, loaded_engine, tmp_path):
        """✅ Derived presentations are part of the snapshot."""
        loaded_engine.segment(FIXTURE_PARAMS)
        loaded_engine.save(tmp_path / "s.snap")
        restored = load_snapshot(tmp_path / "s.snap")
        assert restored.structured == loaded_engine.store.structured
