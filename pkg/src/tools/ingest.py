"""📥 File ingestion: points, regions, devices, activities, observations.

CSV files need their exact header; every data row is validated through a
pydantic row model and bad rows are counted, never fatal. Regions come as
one JSON record per line. Line numbers in reports are physical file lines,
so the first CSV data row is line 2.
"""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Callable, Iterator
from decimal import Decimal
from pathlib import Path
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.config import (
    ACTIVITIES_HEADER,
    DEVICES_HEADER,
    MAX_REPORTED_ERRORS,
    OBSERVATIONS_HEADER,
    POINTS_HEADER,
)
from src.errors import EngineError, IngestFormatError
from src.models import (
    Activity,
    ActivityKind,
    DeviceKind,
    DeviceProxy,
    GeoPoint,
    IngestError,
    IngestKind,
    IngestReport,
    Observation,
    Polygon,
    RawPoint,
    RegionDefinition,
    TimeInterval,
)
from src.tools.activity_path import anchor_activities
from src.tools.store import TrajectoryStore
from src.tools.trajectory import validate_raw

logger = logging.getLogger(__name__)


# =============================================================================
# 🧾 ROW MODELS
# =============================================================================


class _Row(BaseModel):
    model_config = ConfigDict(extra="forbid", str_strip_whitespace=True, allow_inf_nan=False)


def _blank_to_none(value: Any) -> Any:
    return None if isinstance(value, str) and value.strip() == "" else value


class PointRow(_Row):
    object_id: str = Field(min_length=1)
    t: int = Field(ge=0)
    x: float
    y: float
    device_id: str | None = None

    @field_validator("device_id", mode="before")
    @classmethod
    def blank_device(cls, value: Any) -> Any:
        return _blank_to_none(value)


class DeviceRow(_Row):
    device_id: str = Field(min_length=1)
    kind: DeviceKind
    reliability: float
    description: str = ""


class ActivityRow(_Row):
    id: str = Field(min_length=1)
    object_id: str = Field(min_length=1)
    kind: ActivityKind
    label: str
    t_begin: int = Field(ge=0)
    t_end: int = Field(ge=0)
    x: float | None = None
    y: float | None = None

    @field_validator("x", "y", mode="before")
    @classmethod
    def blank_coordinates(cls, value: Any) -> Any:
        return _blank_to_none(value)

    def to_activity(self) -> Activity:
        if (self.x is None) != (self.y is None):
            raise ValueError("x and y must both be given or both be empty")
        location = None if self.x is None or self.y is None else GeoPoint(x=self.x, y=self.y)
        return Activity(
            id=self.id,
            object_id=self.object_id,
            kind=self.kind,
            label=self.label,
            time=TimeInterval(begin=self.t_begin, end=self.t_end),
            location=location,
        )


class ObservationRow(_Row):
    id: str = Field(min_length=1)
    event_id: str = Field(min_length=1)
    feature: str = Field(min_length=1)
    value: Decimal
    unit: str = Field(min_length=1)
    t: int = Field(ge=0)


class PolygonGeometry(_Row):
    type: Literal["polygon"]
    ring: list[tuple[float, float]]


class SiteGeometry(_Row):
    type: Literal["site"]
    point: tuple[float, float]


class RegionRecord(_Row):
    id: str = Field(min_length=1)
    name: str = Field(min_length=1)
    category: str = ""
    parent: str | None = None
    geometry: Annotated[Union[PolygonGeometry, SiteGeometry], Field(discriminator="type")]

    def to_definition(self) -> RegionDefinition:
        geometry = self.geometry
        if isinstance(geometry, PolygonGeometry):
            area = Polygon(ring=tuple(GeoPoint(x=x, y=y) for x, y in geometry.ring))
            return RegionDefinition(
                id=self.id, name=self.name, category=self.category, parent=self.parent, area=area
            )
        x, y = geometry.point
        return RegionDefinition(
            id=self.id, name=self.name, category=self.category, parent=self.parent, site=GeoPoint(x=x, y=y)
        )


# =============================================================================
# 📊 REPORTING
# =============================================================================


class _Tally:
    def __init__(self, path: Path, kind: IngestKind) -> None:
        self.path = path
        self.kind = kind
        self.accepted = 0
        self.rejected = 0
        self.errors: list[IngestError] = []

    def accept(self, count: int = 1) -> None:
        self.accepted += count

    def reject(self, line: int, message: str) -> None:
        self.rejected += 1
        self.errors.append(IngestError(line=line, message=message))
        if len(self.errors) > MAX_REPORTED_ERRORS:
            # Keep the earliest lines; rejections may arrive out of file order
            self.errors.sort(key=lambda error: error.line)
            del self.errors[MAX_REPORTED_ERRORS:]

    def report(self) -> IngestReport:
        errors = tuple(sorted(self.errors, key=lambda error: error.line))
        return IngestReport(
            file=str(self.path),
            kind=self.kind,
            records_accepted=self.accepted,
            records_rejected=self.rejected,
            first_errors=errors,
        )


def describe_error(error: Exception) -> str:
    """One-line message for a rejected record."""
    if isinstance(error, ValidationError):
        first = error.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        message = str(first["msg"]).removeprefix("Value error, ")
        return f"{where}: {message}" if where else message
    return str(error)


_ROW_ERRORS = (ValidationError, EngineError, ValueError)


# =============================================================================
# 📄 FILE READING
# =============================================================================


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise IngestFormatError(f"cannot read {path}: {e}") from e


def _csv_rows(path: Path, header: tuple[str, ...]) -> Iterator[tuple[int, dict[str, str] | str]]:
    """Yield (line, row) pairs; a ragged row is yielded as an error message."""
    reader = csv.reader(_read_text(path).splitlines())
    found = next(reader, None)
    if found is None:
        raise IngestFormatError(f"{path} is empty; expected header {','.join(header)}")
    if tuple(cell.strip() for cell in found) != header:
        raise IngestFormatError(f"{path} has header {','.join(found)}; expected {','.join(header)}")
    for values in reader:
        line = reader.line_num
        if not any(value.strip() for value in values):
            continue
        if len(values) != len(header):
            yield line, f"expected {len(header)} columns, found {len(values)}"
            continue
        yield line, dict(zip(header, values, strict=True))


# =============================================================================
# 📥 LOADERS
# =============================================================================


def _load_points(path: Path, store: TrajectoryStore, tally: _Tally) -> None:
    last_t: dict[str, int] = {}
    batches: dict[str, list[tuple[int, PointRow]]] = {}
    for line, row in _csv_rows(path, POINTS_HEADER):
        if isinstance(row, str):
            tally.reject(line, row)
            continue
        try:
            point = PointRow.model_validate(row)
        except ValidationError as e:
            tally.reject(line, describe_error(e))
            continue
        previous = last_t.get(point.object_id)
        if previous is not None and point.t <= previous:
            tally.reject(line, f"timestamp {point.t} of {point.object_id!r} does not increase past {previous}")
            continue
        if point.device_id is not None and store.devices and point.device_id not in store.devices:
            tally.reject(line, f"unregistered device {point.device_id!r}")
            continue
        last_t[point.object_id] = point.t
        batches.setdefault(point.object_id, []).append((line, point))

    for object_id in sorted(batches):
        rows = batches[object_id]
        existing = store.raw.get(object_id)
        merged = {p.t: p for p in existing.points} if existing is not None else {}
        for _, row in rows:
            merged[row.t] = RawPoint(point=GeoPoint(x=row.x, y=row.y), t=row.t, device_id=row.device_id)
        try:
            store.upsert(validate_raw(object_id, [merged[t] for t in sorted(merged)]))
        except _ROW_ERRORS as e:
            for line, _ in rows:
                tally.reject(line, describe_error(e))
            continue
        tally.accept(len(rows))
        anchor_activities(object_id, store)


def _load_regions(path: Path, store: TrajectoryStore, tally: _Tally) -> None:
    pending: dict[str, tuple[int, RegionDefinition]] = {}
    for line, text in enumerate(_read_text(path).splitlines(), start=1):
        if not text.strip():
            continue
        try:
            definition = RegionRecord.model_validate(json.loads(text)).to_definition()
        except (json.JSONDecodeError, ValidationError, ValueError) as e:
            tally.reject(line, describe_error(e) if isinstance(e, ValidationError) else f"invalid record: {e}")
            continue
        if definition.id in pending:
            tally.reject(line, f"duplicate region id {definition.id!r} (first on line {pending[definition.id][0]})")
            continue
        pending[definition.id] = (line, definition)

    # Parents first, so every insertion sees a valid forest
    progress = True
    while pending and progress:
        progress = False
        for region_id in list(pending):
            line, definition = pending[region_id]
            if definition.parent is not None and definition.parent not in store.regions:
                continue
            del pending[region_id]
            progress = True
            try:
                store.upsert(definition)
            except _ROW_ERRORS as e:
                tally.reject(line, describe_error(e))
                continue
            tally.accept()

    for line, definition in sorted(pending.values(), key=lambda item: item[0]):
        parent = definition.parent
        reason = "cycle through parent" if parent in pending else "unknown parent"
        tally.reject(line, f"region {definition.id!r}: {reason} {parent!r}")


def _load_csv_entities(
    path: Path,
    header: tuple[str, ...],
    build: Callable[[dict[str, str]], BaseModel],
    store: TrajectoryStore,
    tally: _Tally,
) -> None:
    for line, row in _csv_rows(path, header):
        if isinstance(row, str):
            tally.reject(line, row)
            continue
        try:
            store.upsert(build(row))
        except _ROW_ERRORS as e:
            tally.reject(line, describe_error(e))
            continue
        tally.accept()


def _device(row: dict[str, str]) -> DeviceProxy:
    device = DeviceRow.model_validate(row)
    return DeviceProxy(**device.model_dump())


def _activity(row: dict[str, str]) -> Activity:
    return ActivityRow.model_validate(row).to_activity()


def _observation(row: dict[str, str]) -> Observation:
    record = ObservationRow.model_validate(row)
    return Observation(
        id=record.id,
        event_id=record.event_id,
        feature=record.feature,
        value=record.value,
        unit=record.unit,
        time=record.t,
    )


def load_file(kind: IngestKind | str, path: Path | str, store: TrajectoryStore) -> IngestReport:
    """Load one input file into the store and report accepted and rejected records.

    Raises:
        IngestFormatError: unreadable file or malformed header
    """
    kind = IngestKind(kind)
    source = Path(path)
    tally = _Tally(source, kind)
    logger.info(f"📥 Loading {kind.value} from {source}")

    if kind == IngestKind.POINTS:
        _load_points(source, store, tally)
    elif kind == IngestKind.REGIONS:
        _load_regions(source, store, tally)
    elif kind == IngestKind.DEVICES:
        _load_csv_entities(source, DEVICES_HEADER, _device, store, tally)
    elif kind == IngestKind.ACTIVITIES:
        _load_csv_entities(source, ACTIVITIES_HEADER, _activity, store, tally)
        for object_id in sorted({activity.object_id for activity in store.activities.values()}):
            anchor_activities(object_id, store)
    else:
        _load_csv_entities(source, OBSERVATIONS_HEADER, _observation, store, tally)

    report = tally.report()
    level = logging.WARNING if report.records_rejected else logging.INFO
    logger.log(
        level,
        f"{'⚠️' if report.records_rejected else '✅'} {source.name}: "
        f"{report.records_accepted} accepted, {report.records_rejected} rejected",
    )
    return report
