"""🔧 Trajectory engine tools.

Pure operations over the immutable models plus the stateful store:

- geometry / trajectory: planar primitives, raw validation, event ordering
- segmentation / regions: stops and moves, region forests, annotation, visits
- activity_path / observations: activities, processes, paths, devices
- store / grid_index / snapshot: storage, window queries, persistence
- factory: presentation registry
- query_parser / query_engine: the query language
- ingest: input files
- engine: the facade driven by the CLI and the MCP server
"""

from .engine import TrajectoryEngine
from .store import TrajectoryStore

__all__ = [
    "TrajectoryEngine",
    "TrajectoryStore",
]
