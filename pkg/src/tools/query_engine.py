"""⚙️ Query evaluation over the trajectory store.

Each source produces rows with named values plus an anchor point and
interval used by the spatial and temporal predicates. Predicates filter
conjunctively; results are sorted on every column so output is stable.
"""

from __future__ import annotations

import logging
import operator
import re
from collections import Counter
from collections.abc import Callable, Iterator
from typing import Any, NamedTuple

from src.errors import MissingPresentationError
from src.models import (
    CellValue,
    CompareOp,
    ComparePredicate,
    CountProjection,
    DurationLiteral,
    EpisodeKind,
    GeoPoint,
    InWindowPredicate,
    IntersectsLayerPredicate,
    LikePredicate,
    Predicate,
    QueryAst,
    QuerySource,
    RegionForest,
    ResultTable,
    SemanticTag,
    SemanticTrajectory,
    TimeInterval,
    WithinRegionPredicate,
    point_event_id,
)
from src.tools.activity_path import build_path
from src.tools.geometry import interval_overlaps
from src.tools.grid_index import window_query
from src.tools.observations import device_of
from src.tools.query_parser import JOIN_FIELD, fields_for, joins_layer, validate_ast
from src.tools.regions import deepest_region, member_regions, visits
from src.tools.store import TrajectoryStore

logger = logging.getLogger(__name__)


class QueryRow(NamedTuple):
    values: dict[str, CellValue]
    anchor: GeoPoint
    time: TimeInterval


_OPERATORS: dict[CompareOp, Callable[[Any, Any], bool]] = {
    CompareOp.EQ: operator.eq,
    CompareOp.NE: operator.ne,
    CompareOp.LT: operator.lt,
    CompareOp.LE: operator.le,
    CompareOp.GT: operator.gt,
    CompareOp.GE: operator.ge,
}


# =============================================================================
# 🚧 PREREQUISITES
# =============================================================================


def _require_presentations(source: QuerySource, store: TrajectoryStore) -> None:
    objects = sorted(store.raw)
    if source in (QuerySource.STOPS, QuerySource.MOVES):
        missing = [object_id for object_id in objects if object_id not in store.structured]
        if missing:
            raise MissingPresentationError(
                f"{source.value} needs stop/move episodes but {', '.join(missing)} "
                "is not segmented; run segment --eps <m> --tau <s>"
            )
    elif source in (QuerySource.SEMANTIC, QuerySource.ROI_VISITS):
        # A semantic presentation counts only while it sits on the current episodes
        missing = [
            object_id
            for object_id in objects
            if object_id not in store.semantic or store.semantic[object_id].base != store.structured.get(object_id)
        ]
        if missing:
            steps = []
            if not store.forest.regions:
                steps.append("load-regions")
            if any(object_id not in store.structured for object_id in missing):
                steps.append("segment --eps <m> --tau <s>")
            steps.append("annotate")
            raise MissingPresentationError(
                f"{source.value} needs annotated trajectories but {', '.join(missing)} "
                f"is not annotated; run {', then '.join(steps)}"
            )


# =============================================================================
# 🧾 SOURCE ROWS
# =============================================================================


def _raw_rows(store: TrajectoryStore, candidates: set[str] | None) -> Iterator[QueryRow]:
    for object_id in sorted(store.raw):
        for point in store.raw[object_id].points:
            if candidates is not None and point_event_id(object_id, point.t) not in candidates:
                continue
            yield QueryRow(
                {"object": object_id, "t": point.t, "x": point.point.x, "y": point.point.y},
                point.point,
                TimeInterval.instant(point.t),
            )


def _episode_rows(store: TrajectoryStore, kind: EpisodeKind) -> Iterator[QueryRow]:
    for object_id in sorted(store.structured):
        for episode in store.structured[object_id].episodes:
            if episode.kind != kind:
                continue
            anchor = episode.geometry.representative_point()
            yield QueryRow(
                {
                    "object": object_id,
                    "t_begin": episode.time.begin,
                    "t_end": episode.time.end,
                    "duration": episode.time.duration,
                    "x": anchor.x,
                    "y": anchor.y,
                },
                anchor,
                episode.time,
            )


def _semantic_row(object_id: str, tag: SemanticTag, anchor: GeoPoint, time: TimeInterval) -> QueryRow:
    return QueryRow(
        {
            "object": object_id,
            "t_begin": time.begin,
            "t_end": time.end,
            "duration": time.duration,
            "x": anchor.x,
            "y": anchor.y,
            "place": tag.place_name,
            "category": tag.category,
            "role": tag.role.value,
        },
        anchor,
        time,
    )


def _semantic_rows_of(semantic: SemanticTrajectory) -> Iterator[QueryRow]:
    base = semantic.base
    if semantic.begin_tag is not None:
        first = base.source.points[0]
        yield _semantic_row(semantic.object_id, semantic.begin_tag, first.point, TimeInterval.instant(first.t))
    for episode, annotation in zip(base.episodes, semantic.annotations, strict=True):
        if annotation is None:
            continue
        yield _semantic_row(
            semantic.object_id, annotation.tag, episode.geometry.representative_point(), episode.time
        )
    if semantic.end_tag is not None:
        last = base.source.points[-1]
        yield _semantic_row(semantic.object_id, semantic.end_tag, last.point, TimeInterval.instant(last.t))


def _semantic_rows(store: TrajectoryStore) -> Iterator[QueryRow]:
    for object_id in sorted(store.semantic):
        yield from _semantic_rows_of(store.semantic[object_id])


def _visit_rows(store: TrajectoryStore) -> Iterator[QueryRow]:
    forest = store.forest
    for object_id in sorted(store.semantic):
        for visit in visits(store.semantic[object_id], forest):
            region = forest.regions[visit.region_id]
            yield QueryRow(
                {
                    "object": object_id,
                    "region": region.name,
                    "category": region.category,
                    "t_begin": visit.time.begin,
                    "t_end": visit.time.end,
                    "via_descendant": "true" if visit.via_descendant else "false",
                },
                visit.location,
                visit.time,
            )


def _path_rows(store: TrajectoryStore) -> Iterator[QueryRow]:
    objects_with_events = sorted({event.object_id for event in store.events.values()})
    for object_id in objects_with_events:
        for entry in build_path(object_id, store).entries:
            event = store.events[entry.event_id]
            at = event.spatial.representative_point()
            for activity_id in sorted(set(entry.begin_activities) | set(entry.end_activities)):
                activity = store.activities[activity_id]
                location = activity.location or at
                yield QueryRow(
                    {
                        "object": object_id,
                        "t_begin": entry.time.begin,
                        "t_end": entry.time.end,
                        "activity_kind": activity.kind.value,
                        "label": activity.label,
                        "x": location.x,
                        "y": location.y,
                    },
                    at,
                    entry.time,
                )


def _device_rows(store: TrajectoryStore, candidates: set[str] | None) -> Iterator[QueryRow]:
    forest = store.forest
    for event_id in sorted(store.events):
        if candidates is not None and event_id not in candidates:
            continue
        device = device_of(event_id, store)
        if device is None:
            continue
        event = store.events[event_id]
        anchor = event.spatial.representative_point()
        region_id = deepest_region(anchor, forest)
        yield QueryRow(
            {
                "device": device.device_id,
                "kind": device.kind.value,
                "reliability": device.reliability,
                "t": event.time.begin,
                "region": None if region_id is None else forest.regions[region_id].name,
            },
            anchor,
            event.time,
        )


def source_rows(ast: QueryAst, store: TrajectoryStore) -> Iterator[QueryRow]:
    """Unfiltered rows of the query's source, index-pruned where the source allows."""
    windows = [predicate.window for predicate in ast.predicates if isinstance(predicate, InWindowPredicate)]
    candidates: set[str] | None = None
    if windows and ast.source in (QuerySource.RAW, QuerySource.DEVICES):
        candidates = window_query(windows[0], store)
        for window in windows[1:]:
            candidates &= window_query(window, store)

    if ast.source == QuerySource.RAW:
        return _raw_rows(store, candidates)
    if ast.source == QuerySource.STOPS:
        return _episode_rows(store, EpisodeKind.STOP)
    if ast.source == QuerySource.MOVES:
        return _episode_rows(store, EpisodeKind.MOVE)
    if ast.source == QuerySource.SEMANTIC:
        return _semantic_rows(store)
    if ast.source == QuerySource.ROI_VISITS:
        return _visit_rows(store)
    if ast.source == QuerySource.ST_PATH:
        return _path_rows(store)
    return _device_rows(store, candidates)


# =============================================================================
# 🧮 PREDICATES
# =============================================================================


def like_pattern(pattern: str) -> re.Pattern[str]:
    """Compile a ``%`` wildcard pattern; matching is case-sensitive."""
    return re.compile(".*".join(re.escape(part) for part in pattern.split("%")), re.DOTALL)


def _compare(predicate: ComparePredicate, value: CellValue) -> bool:
    if value is None:
        return False
    literal = predicate.literal
    expected = literal.seconds if isinstance(literal, DurationLiteral) else literal.value
    return _OPERATORS[predicate.op](value, expected)


def _layer_regions(category: str, members: set[str], forest: RegionForest) -> list[str]:
    return sorted(region_id for region_id in members if forest.regions[region_id].category == category)


def _row_matches(predicate: Predicate, row: QueryRow, members: set[str], forest: RegionForest) -> bool:
    if isinstance(predicate, ComparePredicate):
        return _compare(predicate, row.values.get(predicate.field))
    if isinstance(predicate, LikePredicate):
        value = row.values.get(predicate.field)
        return isinstance(value, str) and like_pattern(predicate.pattern).fullmatch(value) is not None
    if isinstance(predicate, IntersectsLayerPredicate):
        return bool(_layer_regions(predicate.category, members, forest))
    if isinstance(predicate, WithinRegionPredicate):
        return any(forest.regions[region_id].name == predicate.region for region_id in members)
    return predicate.window.contains_point(row.anchor) and interval_overlaps(row.time, predicate.window.time)


def _spatial(ast: QueryAst) -> bool:
    return any(isinstance(predicate, (IntersectsLayerPredicate, WithinRegionPredicate)) for predicate in ast.predicates)


def _joined(row: QueryRow, ast: QueryAst, members: set[str], forest: RegionForest) -> Iterator[QueryRow]:
    layers = [predicate.category for predicate in ast.predicates if isinstance(predicate, IntersectsLayerPredicate)]
    matched = sorted(
        {region_id for category in layers for region_id in _layer_regions(category, members, forest)}
    )
    for region_id in matched:
        yield row._replace(values={**row.values, JOIN_FIELD: forest.regions[region_id].name})


def matching_rows(ast: QueryAst, store: TrajectoryStore) -> Iterator[QueryRow]:
    """Rows of the source that satisfy every predicate, after any layer join."""
    forest = store.forest
    spatial = _spatial(ast)
    join = joins_layer(ast)
    for row in source_rows(ast, store):
        members = member_regions(row.anchor, forest) if spatial else set()
        if not all(_row_matches(predicate, row, members, forest) for predicate in ast.predicates):
            continue
        if join:
            yield from _joined(row, ast, members, forest)
        else:
            yield row


# =============================================================================
# 📋 PROJECTION
# =============================================================================


def _sort_key(row: tuple[CellValue, ...]) -> tuple[tuple[int, Any], ...]:
    return tuple((0, "") if value is None else (1, value) for value in row)


def tabulate(ast: QueryAst, rows: list[dict[str, CellValue]]) -> ResultTable:
    """Project, group and sort already filtered rows."""
    if ast.group_by is not None:
        counts = Counter(row.get(ast.group_by) for row in rows)
        table = [(value, count) for value, count in counts.items()]
        return ResultTable(columns=(ast.group_by, "count"), rows=tuple(sorted(table, key=_sort_key)))
    if isinstance(ast.projection, CountProjection):
        return ResultTable(columns=("count",), rows=((len(rows),),))

    columns = ast.projection or tuple(fields_for(ast))
    projected = [tuple(row.get(column) for column in columns) for row in rows]
    return ResultTable(columns=columns, rows=tuple(sorted(projected, key=_sort_key)))


def evaluate(ast: QueryAst, store: TrajectoryStore) -> ResultTable:
    """Run a query against the store.

    Raises:
        QuerySemanticError: fields or literals invalid for the source
        MissingPresentationError: segmentation or annotation has not been run
        DanglingReferenceError: a devices query meets an unregistered device
    """
    validate_ast(ast)
    _require_presentations(ast.source, store)
    rows = [row.values for row in matching_rows(ast, store)]
    table = tabulate(ast, rows)
    logger.info(f"⚙️ {ast.source.value} query matched {len(rows)} rows")
    return table
