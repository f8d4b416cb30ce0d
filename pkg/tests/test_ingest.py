"""📥 Tests for file ingestion and load reports."""

from __future__ import annotations

from pathlib import Path

import pytest

from src.config import MAX_REPORTED_ERRORS
from src.errors import IngestFormatError
from src.models import IngestKind
from src.tools.ingest import load_file
from tests import TEST_DATA_DIR

POINTS_HEADER = "object_id,t,x,y,device_id"


def _write(tmp_path: Path, name: str, *lines: str) -> Path:
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestPoints:
    """📍 Tests for point files."""

    def test_three_valid_rows(self, store, tmp_path):
        """✅ Every row accepted, events named object#t."""
        path = _write(tmp_path, "p.csv", POINTS_HEADER, "A,0,0,0,", "A,60,1.5,2,", "A,120,3,4,")
        report = load_file(IngestKind.POINTS, path, store)
        assert (report.records_accepted, report.records_rejected) == (3, 0)
        assert report.first_errors == ()
        assert sorted(store.events) == ["A#0", "A#120", "A#60"]

    def test_regression_cites_line(self, store):
        """❌ A timestamp going back is rejected with its file line."""
        report = load_file(IngestKind.POINTS, TEST_DATA_DIR / "points_regress.csv", store)
        assert (report.records_accepted, report.records_rejected) == (6, 1)
        (error,) = report.first_errors
        assert error.line == 7
        assert "does not increase" in error.message
        assert [p.t for p in store.raw["A"].points] == [0, 10, 20, 30]

    def test_bad_header(self, store, tmp_path):
        """❌ The header must match exactly."""
        path = _write(tmp_path, "p.csv", "object,t,x,y,device", "A,0,0,0,")
        with pytest.raises(IngestFormatError, match="expected object_id,t,x,y,device_id"):
            load_file(IngestKind.POINTS, path, store)
        assert store.revision == 0

    def test_empty_and_missing_files(self, store, tmp_path):
        """❌ Nothing to read."""
        with pytest.raises(IngestFormatError, match="is empty"):
            load_file(IngestKind.POINTS, _write(tmp_path, "empty.csv", ""), store)
        with pytest.raises(IngestFormatError, match="cannot read"):
            load_file(IngestKind.POINTS, tmp_path / "absent.csv", store)

    def test_ragged_and_invalid_rows(self, store, tmp_path):
        """❌ Short rows and bad values are counted, the rest still loads."""
        path = _write(
            tmp_path,
            "p.csv",
            POINTS_HEADER,
            "A,0,0,0,",
            "A,10,1",
            "A,twenty,1,1,",
            "A,30,nan,1,",
            "",
            "A,40,2,2,",
        )
        report = load_file(IngestKind.POINTS, path, store)
        assert (report.records_accepted, report.records_rejected) == (2, 3)
        assert [error.line for error in report.first_errors] == [3, 4, 5]
        assert report.first_errors[0].message == "expected 5 columns, found 3"
        assert report.first_errors[1].message.startswith("t:")

    def test_unregistered_device(self, loaded_engine, tmp_path):
        """❌ Once devices exist, points must name one of them."""
        path = _write(tmp_path, "p.csv", POINTS_HEADER, "Z,0,0,0,gps-1", "Z,10,0,0,drone-9")
        report = loaded_engine.load(IngestKind.POINTS, path)
        assert (report.records_accepted, report.records_rejected) == (1, 1)
        assert "unregistered device 'drone-9'" in report.first_errors[0].message

    def test_error_cap(self, store, tmp_path):
        """✅ Every rejection is counted, only the first ones are listed."""
        rows = [f"A,{t},oops,0," for t in range(15)]
        report = load_file(IngestKind.POINTS, _write(tmp_path, "p.csv", POINTS_HEADER, *rows), store)
        assert report.records_rejected == 15
        assert len(report.first_errors) == MAX_REPORTED_ERRORS
        assert [error.line for error in report.first_errors] == list(range(2, 2 + MAX_REPORTED_ERRORS))

    def test_reload_merges(self, store, tmp_path):
        """✅ A second file extends the trajectory; repeating it changes nothing."""
        load_file(IngestKind.POINTS, _write(tmp_path, "a.csv", POINTS_HEADER, "A,0,0,0,", "A,10,1,1,"), store)
        extra = _write(tmp_path, "b.csv", POINTS_HEADER, "A,20,2,2,")
        load_file(IngestKind.POINTS, extra, store)
        revision = store.revision
        report = load_file(IngestKind.POINTS, extra, store)
        assert report.records_accepted == 1
        assert store.revision == revision
        assert [p.t for p in store.raw["A"].points] == [0, 10, 20]


class TestRegions:
    """🗺️ Tests for region files."""

    def test_fixture_regions(self, store):
        """✅ A child listed before its parent still loads."""
        report = load_file(IngestKind.REGIONS, TEST_DATA_DIR / "regions.jsonl", store)
        assert report.records_rejected == 0
        assert store.regions["r-bus"].parent == "r-centre"
        assert set(store.forest.regions["r-centre"].children) == {"r-bus", "r-stadium"}

    def test_hypermarket(self, store):
        """✅ Six regions, the cafe two levels down."""
        report = load_file(IngestKind.REGIONS, TEST_DATA_DIR / "hypermarket.jsonl", store)
        assert report.records_accepted == 6
        assert store.forest.roots == ("hm",)
        assert store.regions["hm-cafe"].parent == "hm-super"

    def test_broken_records(self, store):
        """❌ Bad JSON, cycles, unknown parents, duplicates and bad rings."""
        report = load_file(IngestKind.REGIONS, TEST_DATA_DIR / "regions_broken.jsonl", store)
        assert (report.records_accepted, report.records_rejected) == (1, 6)
        errors = {error.line: error.message for error in report.first_errors}
        assert sorted(errors) == [2, 3, 4, 5, 6, 8]
        assert errors[2].startswith("invalid record")
        assert errors[3] == "region 'b': cycle through parent 'c'"
        assert errors[4] == "region 'c': cycle through parent 'b'"
        assert errors[5] == "region 'd': unknown parent 'nowhere'"
        assert "duplicate region id 'a'" in errors[6]
        assert "self-intersects" in errors[8]
        assert list(store.regions) == ["a"]


    def test_error_cap_keeps_earliest_lines(self, store, tmp_path):
        """✅ Orphans found after the whole file is read still rank by line."""
        orphan = (
            '{"id": "lost", "name": "lost", "category": "", "parent": "nowhere", '
            '"geometry": {"type": "polygon", "ring": [[0, 0], [1, 0], [1, 1]]}}'
        )
        path = _write(tmp_path, "r.jsonl", orphan, *(["{not json"] * 11))
        report = load_file(IngestKind.REGIONS, path, store)
        assert report.records_rejected == 12
        assert [error.line for error in report.first_errors] == list(range(1, 1 + MAX_REPORTED_ERRORS))
        assert report.first_errors[0].message == "region 'lost': unknown parent 'nowhere'"


class TestOtherKinds:
    """📋 Tests for devices, activities and observations."""

    def test_devices(self, store, tmp_path):
        """✅ Known kinds load and a repeated id replaces; unknown kinds are rejected."""
        path = _write(
            tmp_path,
            "d.csv",
            "device_id,kind,reliability,description",
            "gps-1,GPS,0.95,phone",
            "x-1,Sonar,0.5,",
            "gps-1,GPS,0.9,again",
        )
        report = load_file(IngestKind.DEVICES, path, store)
        assert (report.records_accepted, report.records_rejected) == (2, 1)
        assert report.first_errors[0].line == 3
        assert report.first_errors[0].message.startswith("kind:")
        assert store.devices["gps-1"].reliability == 0.9

    def test_fixture_activities(self, loaded_engine):
        """✅ Virtual activities have no location."""
        activities = loaded_engine.store.activities
        assert activities["a2"].location is None
        assert (activities["a1"].location.x, activities["a1"].location.y) == (500, 160)

    def test_half_location(self, store, tmp_path):
        """❌ x and y are given together or not at all."""
        path = _write(
            tmp_path,
            "a.csv",
            "id,object_id,kind,label,t_begin,t_end,x,y",
            "a1,MO,Physical,run,0,10,5,",
            "a2,MO,Virtual,call,0,10,,",
            "a3,MO,Virtual,call,10,0,,",
        )
        report = load_file(IngestKind.ACTIVITIES, path, store)
        assert (report.records_accepted, report.records_rejected) == (1, 2)
        assert "x and y must both be given" in report.first_errors[0].message

    def test_observation_needs_event(self, loaded_engine, tmp_path):
        """❌ Observations refer to existing events."""
        path = _write(tmp_path, "o.csv", "id,event_id,feature,value,unit,t", "o9,MO#1,speed,3,m/s,1")
        report = loaded_engine.load(IngestKind.OBSERVATIONS, path)
        assert report.records_rejected == 1
        assert "unknown event" in report.first_errors[0].message

    def test_unknown_kind(self, store):
        """❌ The kind names one of the five loaders."""
        with pytest.raises(ValueError):
            load_file("trips", TEST_DATA_DIR / "points.csv", store)
