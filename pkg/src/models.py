"""📊 Pydantic models for the trajectory meta-model.

Spatial and temporal primitives, space-time events, the trajectory
presentations, regions of interest, activities, measure devices, query
syntax trees and the result/summary shapes returned by the engine.
All domain values are immutable after construction.
"""

from __future__ import annotations

import math
from decimal import Decimal
from enum import Enum
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config import DEFAULT_SPATIAL_REFERENCE, DEFAULT_TIME_REFERENCE

TimeInstant = Annotated[int, Field(ge=0)]


class FrozenModel(BaseModel):
    """Immutable base for every domain value."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False, extra="forbid")


# =============================================================================
# 🔢 ENUMS
# =============================================================================


class SpatialKind(str, Enum):
    POINT = "point"
    LINE = "line"
    AREA = "area"


class SemanticRole(str, Enum):
    BEGIN = "begin"
    END = "end"
    STOP = "stop"
    MOVE = "move"


class EpisodeKind(str, Enum):
    STOP = "stop"
    MOVE = "move"


class PresentationKind(str, Enum):
    RAW = "raw"
    STRUCTURED = "structured"
    SEMANTIC = "semantic"
    ROI = "roi"
    SPACE_TIME_PATH = "stpath"


class ActivityKind(str, Enum):
    PHYSICAL = "Physical"
    VIRTUAL = "Virtual"


class AssociationRole(str, Enum):
    BEGINS_AT = "begins_at"
    ENDS_AT = "ends_at"


class DeviceKind(str, Enum):
    GPS = "GPS"
    CAMERA = "Camera"
    CELL_LOCATION = "CellLocation"
    E_PAYMENT = "EPayment"
    RFID = "RFID"


class IngestKind(str, Enum):
    POINTS = "points"
    REGIONS = "regions"
    DEVICES = "devices"
    ACTIVITIES = "activities"
    OBSERVATIONS = "observations"


# =============================================================================
# 📐 SPATIAL PRIMITIVES
# =============================================================================


class SpatialReference(FrozenModel):
    name: str = Field(default=DEFAULT_SPATIAL_REFERENCE, min_length=1)


class TimeReference(FrozenModel):
    name: str = Field(default=DEFAULT_TIME_REFERENCE, min_length=1)


class GeoPoint(FrozenModel):
    """Planar position in meters."""

    x: float
    y: float


class Polyline(FrozenModel):
    vertices: tuple[GeoPoint, ...] = Field(min_length=2)


def _orientation(a: GeoPoint, b: GeoPoint, c: GeoPoint) -> float:
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def _on_segment(a: GeoPoint, b: GeoPoint, p: GeoPoint) -> bool:
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def _segments_touch(a: GeoPoint, b: GeoPoint, c: GeoPoint, d: GeoPoint) -> bool:
    d1 = _orientation(c, d, a)
    d2 = _orientation(c, d, b)
    d3 = _orientation(a, b, c)
    d4 = _orientation(a, b, d)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    if d1 == 0 and _on_segment(c, d, a):
        return True
    if d2 == 0 and _on_segment(c, d, b):
        return True
    if d3 == 0 and _on_segment(a, b, c):
        return True
    return d4 == 0 and _on_segment(a, b, d)


class Polygon(FrozenModel):
    """Simple polygon; the ring closes implicitly from last vertex to first."""

    ring: tuple[GeoPoint, ...] = Field(min_length=3)

    @field_validator("ring")
    @classmethod
    def validate_ring(cls, ring: tuple[GeoPoint, ...]) -> tuple[GeoPoint, ...]:
        n = len(ring)
        for i in range(n):
            if ring[i] == ring[(i + 1) % n]:
                raise ValueError(f"consecutive vertices {i} and {(i + 1) % n} are equal")

        for i in range(n):
            a, b, c = ring[i], ring[(i + 1) % n], ring[(i + 2) % n]
            if _orientation(a, b, c) == 0 and (_on_segment(a, b, c) or _on_segment(b, c, a)):
                raise ValueError(f"ring folds back on itself at vertex {(i + 1) % n}")

        # Non-adjacent edges must not touch at all
        edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_touch(*edges[i], *edges[j]):
                    raise ValueError(f"ring self-intersects between edges {i} and {j}")

        if n == 3 and _orientation(*ring) == 0:
            raise ValueError("ring is degenerate (collinear vertices)")
        return ring


class SpatialObject(FrozenModel):
    """Point, line or area geometry tagged with its spatial reference."""

    point: GeoPoint | None = None
    line: Polyline | None = None
    area: Polygon | None = None
    crs: SpatialReference = Field(default_factory=SpatialReference)

    @model_validator(mode="after")
    def check_single_variant(self) -> SpatialObject:
        populated = sum(value is not None for value in (self.point, self.line, self.area))
        if populated != 1:
            raise ValueError("exactly one of point, line, area must be set")
        return self

    @classmethod
    def of(cls, geometry: GeoPoint | Polyline | Polygon) -> SpatialObject:
        if isinstance(geometry, GeoPoint):
            return cls(point=geometry)
        if isinstance(geometry, Polyline):
            return cls(line=geometry)
        return cls(area=geometry)

    @property
    def kind(self) -> SpatialKind:
        if self.point is not None:
            return SpatialKind.POINT
        if self.line is not None:
            return SpatialKind.LINE
        return SpatialKind.AREA

    def vertices(self) -> tuple[GeoPoint, ...]:
        if self.point is not None:
            return (self.point,)
        if self.line is not None:
            return self.line.vertices
        assert self.area is not None
        return self.area.ring

    def representative_point(self) -> GeoPoint:
        """The point itself, or the vertex mean of a line or area."""
        if self.point is not None:
            return self.point
        vertices = self.vertices()
        return GeoPoint(
            x=math.fsum(v.x for v in vertices) / len(vertices),
            y=math.fsum(v.y for v in vertices) / len(vertices),
        )

    def bounding_box(self) -> tuple[float, float, float, float]:
        vertices = self.vertices()
        xs = [v.x for v in vertices]
        ys = [v.y for v in vertices]
        return min(xs), min(ys), max(xs), max(ys)


# =============================================================================
# ⏱️ TEMPORAL PRIMITIVES
# =============================================================================


class TimeInterval(FrozenModel):
    """Closed interval of epoch seconds; an instant has begin == end."""

    begin: TimeInstant
    end: TimeInstant
    tref: TimeReference = Field(default_factory=TimeReference)

    @model_validator(mode="after")
    def check_order(self) -> TimeInterval:
        if self.begin > self.end:
            raise ValueError(f"interval begin {self.begin} is after end {self.end}")
        return self

    @classmethod
    def instant(cls, t: int) -> TimeInterval:
        return cls(begin=t, end=t)

    @property
    def duration(self) -> int:
        return self.end - self.begin

    def contains(self, other: TimeInterval) -> bool:
        return self.begin <= other.begin and other.end <= self.end


# =============================================================================
# 🧭 EVENTS AND TRAJECTORIES
# =============================================================================


class SemanticTag(FrozenModel):
    place_name: str = ""
    category: str = ""
    role: SemanticRole

    @model_validator(mode="after")
    def check_place(self) -> SemanticTag:
        if self.role != SemanticRole.MOVE and not self.place_name:
            raise ValueError(f"role {self.role.value} requires a place name")
        return self


class SpaceTimeEvent(FrozenModel):
    """Occurrence with a location and a time span, possibly composed of child events."""

    id: str = Field(min_length=1)
    object_id: str = Field(min_length=1)
    spatial: SpatialObject
    time: TimeInterval
    device_id: str | None = None
    semantic: SemanticTag | None = None
    children: tuple[str, ...] = ()


class RawPoint(FrozenModel):
    point: GeoPoint
    t: TimeInstant
    device_id: str | None = None


class RawTrajectory(FrozenModel):
    object_id: str = Field(min_length=1)
    points: tuple[RawPoint, ...] = Field(min_length=1)

    @field_validator("points")
    @classmethod
    def check_increasing(cls, points: tuple[RawPoint, ...]) -> tuple[RawPoint, ...]:
        for index in range(1, len(points)):
            if points[index].t <= points[index - 1].t:
                raise ValueError(f"timestamp at index {index} does not increase")
        return points

    def event_id(self, index: int) -> str:
        return point_event_id(self.object_id, self.points[index].t)


def point_event_id(object_id: str, t: int) -> str:
    """Deterministic id of the event materialized for a raw point."""
    return f"{object_id}#{t}"


class Episode(FrozenModel):
    kind: EpisodeKind
    start_index: int = Field(ge=0)
    end_index: int = Field(ge=0)
    time: TimeInterval
    geometry: SpatialObject

    @model_validator(mode="after")
    def check_shape(self) -> Episode:
        if self.start_index > self.end_index:
            raise ValueError("episode start_index is after end_index")
        expected = SpatialKind.POINT if self.kind == EpisodeKind.STOP else SpatialKind.LINE
        if self.geometry.kind != expected:
            raise ValueError(f"{self.kind.value} episode needs {expected.value} geometry")
        return self


class StructuredTrajectory(FrozenModel):
    """Raw trajectory split into Begin/End plus alternating Stop and Move episodes."""

    object_id: str
    source: RawTrajectory
    begin: SpaceTimeEvent
    end: SpaceTimeEvent
    episodes: tuple[Episode, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def check_episodes(self) -> StructuredTrajectory:
        n = len(self.source.points)
        owned_next = 0
        for position, episode in enumerate(self.episodes):
            previous = self.episodes[position - 1] if position else None
            following = self.episodes[position + 1] if position + 1 < len(self.episodes) else None
            if episode.end_index >= n:
                raise ValueError(f"episode {position} ends past the last point")
            if previous is not None:
                if previous.kind == episode.kind:
                    raise ValueError(f"episodes {position - 1} and {position} are both {episode.kind.value}")
                if episode.start_index != previous.end_index:
                    raise ValueError(f"episode {position} does not continue from episode {position - 1}")

            # Stops own their endpoints; moves own the points strictly between stops
            own_start, own_end = episode.start_index, episode.end_index
            if episode.kind == EpisodeKind.MOVE:
                if previous is not None:
                    own_start += 1
                if following is not None:
                    own_end -= 1
            if own_start != owned_next:
                raise ValueError(f"episode {position} leaves a gap or overlaps at index {owned_next}")
            owned_next = own_end + 1

        if owned_next != n:
            raise ValueError("episodes do not cover every point")
        if self.begin.time.begin > self.episodes[0].time.begin:
            raise ValueError("begin event is after the first episode")
        if self.end.time.end < self.episodes[-1].time.end:
            raise ValueError("end event is before the last episode")
        return self


class EpisodeAnnotation(FrozenModel):
    """Place label of one episode; region_ids lists every region a move crossed."""

    tag: SemanticTag
    region_id: str | None = None
    region_ids: tuple[str, ...] = ()


class SemanticTrajectory(FrozenModel):
    base: StructuredTrajectory
    annotations: tuple[EpisodeAnnotation | None, ...]
    begin_tag: SemanticTag | None = None
    end_tag: SemanticTag | None = None

    @model_validator(mode="after")
    def check_lengths(self) -> SemanticTrajectory:
        if len(self.annotations) != len(self.base.episodes):
            raise ValueError("one annotation slot is required per episode")
        return self

    @property
    def object_id(self) -> str:
        return self.base.object_id


class SegmentationParams(FrozenModel):
    eps: float = Field(gt=0, description="Spatial neighbourhood radius in meters")
    tau: int = Field(gt=0, description="Minimum stop duration in seconds")


# =============================================================================
# 🗺️ REGIONS OF INTEREST
# =============================================================================


class RegionDefinition(FrozenModel):
    """Region as written in a definitions file: polygon area or Voronoi site."""

    id: str = Field(min_length=1)
    name: str = Field(min_length=1)
    category: str = ""
    parent: str | None = None
    area: Polygon | None = None
    site: GeoPoint | None = None

    @model_validator(mode="after")
    def check_geometry(self) -> RegionDefinition:
        if (self.area is None) == (self.site is None):
            raise ValueError(f"region {self.id!r} needs exactly one of area or site")
        return self


class ObjectOfInterest(RegionDefinition):
    children: tuple[str, ...] = ()


class RegionForest(FrozenModel):
    regions: dict[str, ObjectOfInterest] = Field(default_factory=dict)
    roots: tuple[str, ...] = ()
    sites: tuple[str, ...] = ()

    def site_points(self) -> dict[str, GeoPoint]:
        points: dict[str, GeoPoint] = {}
        for site_id in self.sites:
            site = self.regions[site_id].site
            if site is not None:
                points[site_id] = site
        return points


class Visit(FrozenModel):
    object_id: str
    region_id: str
    time: TimeInterval
    via_descendant: bool
    location: GeoPoint


class RoiTrajectory(FrozenModel):
    object_id: str
    visits: tuple[Visit, ...] = ()


# =============================================================================
# 🚶 ACTIVITIES AND SPACE-TIME PATHS
# =============================================================================


class Activity(FrozenModel):
    id: str = Field(min_length=1)
    object_id: str = Field(min_length=1)
    kind: ActivityKind
    label: str
    time: TimeInterval
    location: GeoPoint | None = None

    @model_validator(mode="after")
    def check_location(self) -> Activity:
        if self.kind == ActivityKind.PHYSICAL and self.location is None:
            raise ValueError(f"physical activity {self.id!r} needs a location")
        return self


class Process(FrozenModel):
    id: str = Field(min_length=1)
    name: str
    object_id: str
    activities: tuple[str, ...] = Field(min_length=1)


class ActivityAssociation(FrozenModel):
    event_id: str
    activity_id: str
    role: AssociationRole

    @property
    def key(self) -> str:
        return f"{self.event_id}|{self.activity_id}|{self.role.value}"


class PathEntry(FrozenModel):
    event_id: str
    time: TimeInterval
    begin_activities: tuple[str, ...] = ()
    end_activities: tuple[str, ...] = ()


class SpaceTimePath(FrozenModel):
    object_id: str
    entries: tuple[PathEntry, ...] = ()


# =============================================================================
# 📡 OBSERVATIONS AND MEASURE DEVICES
# =============================================================================


class DeviceProxy(FrozenModel):
    device_id: str = Field(min_length=1)
    kind: DeviceKind
    reliability: float = Field(ge=0.0, le=1.0)
    description: str = ""


class Observation(FrozenModel):
    id: str = Field(min_length=1)
    event_id: str = Field(min_length=1)
    feature: str = Field(min_length=1)
    value: Decimal
    unit: str = Field(min_length=1)
    time: TimeInstant


# =============================================================================
# 🗂️ STORE AND INDEX
# =============================================================================


class STWindow(FrozenModel):
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    time: TimeInterval

    @model_validator(mode="after")
    def check_bounds(self) -> STWindow:
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError("window minimum exceeds maximum")
        return self

    def contains_point(self, p: GeoPoint) -> bool:
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max


# =============================================================================
# 🔎 QUERY SYNTAX TREE
# =============================================================================


class QuerySource(str, Enum):
    RAW = "raw"
    STOPS = "stops"
    MOVES = "moves"
    SEMANTIC = "semantic"
    ROI_VISITS = "roi-visits"
    ST_PATH = "stpath"
    DEVICES = "devices"


class CompareOp(str, Enum):
    EQ = "="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="


class DurationUnit(str, Enum):
    SECONDS = "s"
    MINUTES = "min"
    HOURS = "h"


UNIT_SECONDS = {DurationUnit.SECONDS: 1, DurationUnit.MINUTES: 60, DurationUnit.HOURS: 3600}


class StringLiteral(FrozenModel):
    type: Literal["string"] = "string"
    value: str


class NumberLiteral(FrozenModel):
    type: Literal["number"] = "number"
    value: int | float


class DurationLiteral(FrozenModel):
    type: Literal["duration"] = "duration"
    amount: int = Field(ge=0)
    unit: DurationUnit

    @property
    def seconds(self) -> int:
        return self.amount * UNIT_SECONDS[self.unit]


class TimeLiteral(FrozenModel):
    type: Literal["time"] = "time"
    value: TimeInstant


QueryLiteral = Annotated[
    Union[StringLiteral, NumberLiteral, DurationLiteral, TimeLiteral],
    Field(discriminator="type"),
]


class ComparePredicate(FrozenModel):
    type: Literal["compare"] = "compare"
    field: str
    op: CompareOp
    literal: QueryLiteral


class LikePredicate(FrozenModel):
    type: Literal["like"] = "like"
    field: str
    pattern: str


class IntersectsLayerPredicate(FrozenModel):
    type: Literal["intersects"] = "intersects"
    category: str


class WithinRegionPredicate(FrozenModel):
    type: Literal["within"] = "within"
    region: str


class InWindowPredicate(FrozenModel):
    type: Literal["window"] = "window"
    window: STWindow


Predicate = Annotated[
    Union[ComparePredicate, LikePredicate, IntersectsLayerPredicate, WithinRegionPredicate, InWindowPredicate],
    Field(discriminator="type"),
]


class CountProjection(FrozenModel):
    type: Literal["count"] = "count"


class QueryAst(FrozenModel):
    """Parsed query; an empty projection selects every field of the source."""

    source: QuerySource
    predicates: tuple[Predicate, ...] = ()
    group_by: str | None = None
    projection: tuple[str, ...] | CountProjection = ()


# =============================================================================
# 📋 RESULTS AND REPORTS
# =============================================================================

CellValue = Union[str, int, float, None]

# Escaped text stays in one cell on one line
_TSV_ESCAPES = str.maketrans({"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"})


def format_cell(value: CellValue) -> str:
    """Render one table cell deterministically."""
    if value is None:
        return ""
    if isinstance(value, float):
        return str(int(value)) if value.is_integer() else repr(value)
    if isinstance(value, str):
        return value.translate(_TSV_ESCAPES)
    return str(value)


class ResultTable(FrozenModel):
    columns: tuple[str, ...]
    rows: tuple[tuple[CellValue, ...], ...] = ()

    @model_validator(mode="after")
    def check_arity(self) -> ResultTable:
        for index, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {index} has {len(row)} values for {len(self.columns)} columns")
        return self

    def to_tsv(self) -> str:
        lines = ["\t".join(self.columns)]
        lines.extend("\t".join(format_cell(value) for value in row) for row in self.rows)
        return "\n".join(lines) + "\n"


class IngestError(FrozenModel):
    line: int
    message: str


class IngestReport(FrozenModel):
    file: str
    kind: IngestKind
    records_accepted: int = Field(default=0, ge=0)
    records_rejected: int = Field(default=0, ge=0)
    first_errors: tuple[IngestError, ...] = ()

    @property
    def total(self) -> int:
        return self.records_accepted + self.records_rejected


class SegmentationSummary(BaseModel):
    """Result of a segmentation run."""
    objects: int = Field(ge=0)
    stops: int = Field(ge=0)
    moves: int = Field(ge=0)
    params: SegmentationParams


class AnnotationSummary(BaseModel):
    """Result of an annotation run."""
    objects: int = Field(ge=0)
    annotated_episodes: int = Field(ge=0)
    unannotated_episodes: int = Field(ge=0)


class IndexSummary(BaseModel):
    cell_size: float
    time_bucket: int
    buckets: int = Field(ge=0)
    events: int = Field(ge=0)
    built_at_revision: int = Field(ge=0)


class ServerInfo(BaseModel):
    """Server information for resources."""
    name: str
    version: str
    description: str
    capabilities: list[str]
    tools_count: int = Field(ge=0)
    uptime: float = Field(ge=0.0)
    status: str = "running"


class HealthCheck(BaseModel):
    """Health check status for resources."""
    status: str = "healthy"
    checks: dict[str, bool] = Field(default_factory=dict)
    counts: dict[str, int] = Field(default_factory=dict)
    revision: int = Field(default=0, ge=0)
    response_time: float = Field(ge=0.0)
