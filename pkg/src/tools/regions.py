"""🗺️ Composite regions of interest.

Regions form a forest: polygon areas or Voronoi sites, each optionally
composed of child regions. Membership is hierarchical: a point inside a
child is a member of every ancestor, whether or not the ancestor's own
geometry encloses it.

References:
- Voronoi membership is computed as nearest-site argmin; no diagram is built.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping

from src.errors import RegionForestError, UnknownEntityError
from src.models import (
    EpisodeKind,
    GeoPoint,
    ObjectOfInterest,
    RegionDefinition,
    RegionForest,
    SemanticTrajectory,
    Visit,
)
from src.tools.geometry import point_in_polygon, squared_distance

logger = logging.getLogger(__name__)


# =============================================================================
# 🌳 FOREST CONSTRUCTION
# =============================================================================


def build_forest(defs: Iterable[RegionDefinition]) -> RegionForest:
    """Link region definitions into a validated forest.

    Children keep the order in which their definitions appear.

    Raises:
        RegionForestError: duplicate id, unknown parent, or a parent cycle
    """
    by_id: dict[str, RegionDefinition] = {}
    for definition in defs:
        if definition.id in by_id:
            raise RegionForestError(f"duplicate region id {definition.id!r}")
        by_id[definition.id] = definition

    children: dict[str, list[str]] = {region_id: [] for region_id in by_id}
    for definition in by_id.values():
        if definition.parent is None:
            continue
        if definition.parent not in by_id:
            raise RegionForestError(f"region {definition.id!r} has unknown parent {definition.parent!r}")
        children[definition.parent].append(definition.id)

    _reject_cycles(by_id)

    regions = {
        region_id: ObjectOfInterest(
            id=definition.id,
            name=definition.name,
            category=definition.category,
            parent=definition.parent,
            area=definition.area,
            site=definition.site,
            children=tuple(children[region_id]),
        )
        for region_id, definition in by_id.items()
    }
    roots = tuple(region_id for region_id, definition in by_id.items() if definition.parent is None)
    sites = tuple(sorted(region_id for region_id, definition in by_id.items() if definition.site is not None))
    return RegionForest(regions=regions, roots=roots, sites=sites)


def _reject_cycles(by_id: Mapping[str, RegionDefinition]) -> None:
    settled: set[str] = set()
    for start in by_id:
        chain: list[str] = []
        on_chain: set[str] = set()
        current: str | None = start
        while current is not None and current not in settled:
            if current in on_chain:
                cycle = chain[chain.index(current):] + [current]
                raise RegionForestError(f"region parent cycle: {' -> '.join(cycle)}")
            chain.append(current)
            on_chain.add(current)
            current = by_id[current].parent
        settled.update(chain)


def _region(region_id: str, forest: RegionForest) -> ObjectOfInterest:
    try:
        return forest.regions[region_id]
    except KeyError:
        raise UnknownEntityError("region", region_id) from None


def depth(region_id: str, forest: RegionForest) -> int:
    """Number of ancestors; roots have depth 0."""
    return len(ancestors(region_id, forest))


def ancestors(region_id: str, forest: RegionForest) -> list[str]:
    """Ancestor ids, nearest first."""
    chain: list[str] = []
    parent = _region(region_id, forest).parent
    while parent is not None:
        chain.append(parent)
        parent = forest.regions[parent].parent
    return chain


def descendants(region_id: str, forest: RegionForest) -> list[str]:
    """Descendant ids in depth-first pre-order."""
    found: list[str] = []
    stack = list(reversed(_region(region_id, forest).children))
    while stack:
        current = stack.pop()
        found.append(current)
        stack.extend(reversed(forest.regions[current].children))
    return found


def regions_by_category(category: str, forest: RegionForest) -> list[str]:
    return sorted(region_id for region_id, region in forest.regions.items() if region.category == category)


def regions_by_name(name: str, forest: RegionForest) -> list[str]:
    return sorted(region_id for region_id, region in forest.regions.items() if region.name == name)


# =============================================================================
# 📍 MEMBERSHIP
# =============================================================================


def voronoi_member(p: GeoPoint, sites: Mapping[str, GeoPoint]) -> str:
    """Id of the nearest site; equidistant sites resolve to the smallest id.

    Raises:
        ValueError: if ``sites`` is empty
    """
    if not sites:
        raise ValueError("voronoi membership needs at least one site")
    return min(sites, key=lambda site_id: (squared_distance(p, sites[site_id]), site_id))


def _own_hits(p: GeoPoint, forest: RegionForest) -> set[str]:
    """Regions whose own geometry (ignoring children) contains the point."""
    hits = {
        region_id
        for region_id, region in forest.regions.items()
        if region.area is not None and point_in_polygon(p, region.area)
    }
    if forest.sites:
        hits.add(voronoi_member(p, forest.site_points()))
    return hits


def is_member(p: GeoPoint, region_id: str, forest: RegionForest) -> bool:
    """True when the region's own geometry or any descendant's contains the point.

    Raises:
        UnknownEntityError: if the region does not exist
    """
    _region(region_id, forest)
    hits = _own_hits(p, forest)
    if region_id in hits:
        return True
    return any(descendant in hits for descendant in descendants(region_id, forest))


def member_regions(p: GeoPoint, forest: RegionForest) -> set[str]:
    """Every region the point is a member of under the composite rule."""
    members: set[str] = set()
    for hit in _own_hits(p, forest):
        members.add(hit)
        members.update(ancestors(hit, forest))
    return members


def deepest_region(p: GeoPoint, forest: RegionForest) -> str | None:
    """Deepest member region, smallest id among equally deep ones."""
    hits = _own_hits(p, forest)
    if not hits:
        return None
    # The deepest member always contains the point with its own geometry
    return min(hits, key=lambda region_id: (-depth(region_id, forest), region_id))


# =============================================================================
# 🚪 VISITS
# =============================================================================


def visits(semantic: SemanticTrajectory, forest: RegionForest) -> list[Visit]:
    """Visits of annotated stops, rolled up to every ancestor region."""
    found: list[Visit] = []
    for episode, annotation in zip(semantic.base.episodes, semantic.annotations, strict=True):
        if episode.kind != EpisodeKind.STOP or annotation is None or annotation.region_id is None:
            continue
        if annotation.region_id not in forest.regions:
            logger.warning(f"⚠️ Stop annotated with unknown region {annotation.region_id!r}; skipped")
            continue
        location = episode.geometry.representative_point()
        found.append(
            Visit(
                object_id=semantic.object_id,
                region_id=annotation.region_id,
                time=episode.time,
                via_descendant=False,
                location=location,
            )
        )
        found.extend(
            Visit(
                object_id=semantic.object_id,
                region_id=ancestor,
                time=episode.time,
                via_descendant=True,
                location=location,
            )
            for ancestor in ancestors(annotation.region_id, forest)
        )
    found.sort(key=lambda visit: (visit.time.begin, visit.time.end, visit.via_descendant, visit.region_id))
    return found
