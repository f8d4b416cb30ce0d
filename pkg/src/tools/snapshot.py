"""💾 Snapshot persistence.

File layout (all integers big-endian):

    magic "TRJSNAP" | u16 version
    per section: u16 name length | name | u64 payload length | JSON payload
    sha256 of everything above (32 bytes)

One section per store collection in canonical order, then a ``meta``
section with the revision and index parameters.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
from pathlib import Path

from pydantic import BaseModel, ValidationError

from src.config import SNAPSHOT_MAGIC, SNAPSHOT_VERSION
from src.errors import SnapshotChecksumError, SnapshotReadError, SnapshotVersionError
from src.tools.store import COLLECTION_MODELS, COLLECTIONS, TrajectoryStore

logger = logging.getLogger(__name__)

_DIGEST_SIZE = hashlib.sha256().digest_size
_HEADER = struct.Struct(">H")
_NAME_LENGTH = struct.Struct(">H")
_PAYLOAD_LENGTH = struct.Struct(">Q")
META_SECTION = "meta"


def _section(name: str, payload: object) -> bytes:
    encoded_name = name.encode("utf-8")
    body = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _NAME_LENGTH.pack(len(encoded_name)) + encoded_name + _PAYLOAD_LENGTH.pack(len(body)) + body


def encode_snapshot(store: TrajectoryStore) -> bytes:
    with store.writing():
        parts = [SNAPSHOT_MAGIC, _HEADER.pack(SNAPSHOT_VERSION)]
        for name in COLLECTIONS:
            items = store.collection(name)
            parts.append(_section(name, [items[key].model_dump(mode="json") for key in sorted(items)]))
        parts.append(
            _section(
                META_SECTION,
                {"revision": store.revision, "cell_size": store.cell_size, "time_bucket": store.time_bucket},
            )
        )
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def save_snapshot(path: Path | str, store: TrajectoryStore) -> Path:
    """Write the store to ``path``, replacing any previous file atomically."""
    target = Path(path)
    data = encode_snapshot(store)
    target.parent.mkdir(parents=True, exist_ok=True)
    partial = target.with_name(target.name + ".tmp")
    partial.write_bytes(data)
    os.replace(partial, target)
    logger.info(f"💾 Saved snapshot of revision {store.revision} to {target} ({len(data)} bytes)")
    return target


def _read_sections(body: bytes) -> dict[str, bytes]:
    offset = len(SNAPSHOT_MAGIC) + _HEADER.size
    sections: dict[str, bytes] = {}
    while offset < len(body):
        (name_length,) = _NAME_LENGTH.unpack_from(body, offset)
        offset += _NAME_LENGTH.size
        name = body[offset : offset + name_length].decode("utf-8")
        offset += name_length
        (payload_length,) = _PAYLOAD_LENGTH.unpack_from(body, offset)
        offset += _PAYLOAD_LENGTH.size
        sections[name] = body[offset : offset + payload_length]
        offset += payload_length
    return sections


def decode_snapshot(data: bytes) -> TrajectoryStore:
    """Rebuild a store from snapshot bytes.

    Raises:
        SnapshotChecksumError: truncated or corrupted content
        SnapshotVersionError: foreign file or unsupported format version
    """
    if len(data) < _DIGEST_SIZE:
        raise SnapshotChecksumError(f"snapshot is truncated ({len(data)} bytes)")
    body, digest = data[:-_DIGEST_SIZE], data[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise SnapshotChecksumError("snapshot checksum does not match its content")

    if not body.startswith(SNAPSHOT_MAGIC) or len(body) < len(SNAPSHOT_MAGIC) + _HEADER.size:
        raise SnapshotVersionError("not a trajectory snapshot")
    (version,) = _HEADER.unpack_from(body, len(SNAPSHOT_MAGIC))
    if version != SNAPSHOT_VERSION:
        raise SnapshotVersionError(f"snapshot version {version} is not supported (expected {SNAPSHOT_VERSION})")

    try:
        sections = _read_sections(body)
        meta = json.loads(sections[META_SECTION])
        collections: dict[str, list[BaseModel]] = {
            name: [COLLECTION_MODELS[name].model_validate(item) for item in json.loads(sections[name])]
            for name in COLLECTIONS
        }
    except (KeyError, struct.error, UnicodeDecodeError, json.JSONDecodeError, ValidationError) as e:
        raise SnapshotVersionError(f"snapshot layout is not understood: {e}") from e

    return TrajectoryStore.from_collections(
        collections,
        revision=meta["revision"],
        cell_size=meta["cell_size"],
        time_bucket=meta["time_bucket"],
    )


def load_snapshot(path: Path | str) -> TrajectoryStore:
    """Read a store written by :func:`save_snapshot`.

    Raises:
        SnapshotReadError: the file cannot be read
        SnapshotChecksumError: truncated or corrupted content
        SnapshotVersionError: foreign file or unsupported format version
    """
    source = Path(path)
    try:
        data = source.read_bytes()
    except OSError as e:
        raise SnapshotReadError(f"cannot read snapshot {source}: {e.strerror or e}") from e
    store = decode_snapshot(data)
    logger.info(f"📂 Loaded snapshot revision {store.revision} from {source}")
    return store
