"""🚨 Engine error hierarchy.

Every user-facing failure raised by the engine derives from ``EngineError``.
Most also derive from the closest builtin so plain ``except ValueError``
handlers keep working.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for errors caused by user input or store state."""


# =============================================================================
# 🧭 MODEL ERRORS
# =============================================================================


class TrajectoryValidationError(EngineError, ValueError):
    """Raw trajectory timestamps are not strictly increasing."""

    def __init__(self, index: int, message: str) -> None:
        super().__init__(f"point {index}: {message}")
        self.index = index


class EventTreeError(EngineError, ValueError):
    """Composing events would break the acyclic, time-nested event tree."""


class RegionForestError(EngineError, ValueError):
    """Region definitions do not form a valid forest."""


class UnknownEntityError(EngineError, KeyError):
    """A referenced id does not exist in the store."""

    def __init__(self, kind: str, entity_id: str) -> None:
        super().__init__(f"unknown {kind}: {entity_id!r}")
        self.kind = kind
        self.entity_id = entity_id

    def __str__(self) -> str:
        return str(self.args[0])


class ObjectMismatchError(EngineError, ValueError):
    """Entities belonging to different moving objects were linked."""


class DuplicateEntityError(EngineError, ValueError):
    """Strict registration of an id that is already taken."""


class DanglingReferenceError(EngineError, LookupError):
    """An event references a device that was never registered."""


# =============================================================================
# 🏭 PRESENTATION ERRORS
# =============================================================================


class UnknownPresentationError(EngineError, ValueError):
    """No builder is registered for the requested presentation kind."""


class MissingPrerequisiteError(EngineError, LookupError):
    """The store lacks the inputs a presentation needs."""


# =============================================================================
# 🔎 QUERY ERRORS
# =============================================================================


class QueryParseError(EngineError, ValueError):
    """Query text does not match the grammar."""

    def __init__(self, text: str, offset: int, expected: str) -> None:
        line = text.count("\n", 0, offset) + 1
        column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"line {line}, column {column}: expected {expected}")
        self.offset = offset
        self.line = line
        self.column = column
        self.expected = expected


class QuerySemanticError(EngineError, ValueError):
    """Query is well-formed but refers to invalid fields or mismatched types."""


class MissingPresentationError(EngineError, LookupError):
    """A query source needs a presentation that has not been materialized yet."""


# =============================================================================
# 💾 PERSISTENCE AND INGESTION ERRORS
# =============================================================================


class SnapshotReadError(EngineError):
    """Snapshot file could not be read."""


class SnapshotVersionError(EngineError, ValueError):
    """Snapshot has an unknown format or version."""


class SnapshotChecksumError(EngineError, ValueError):
    """Snapshot content does not match its trailing checksum."""


class IngestFormatError(EngineError, ValueError):
    """Input file is unreadable or its header is malformed."""
