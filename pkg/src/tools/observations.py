"""📡 Observation and measure domain.

Device proxies describe how a position was captured (GPS, camera, cell
location, e-payment, RFID) together with a static reliability in [0, 1].
Observations are measured properties attached to events.
"""

from __future__ import annotations

import logging

from src.errors import DanglingReferenceError, DuplicateEntityError, UnknownEntityError
from src.models import DeviceProxy, Observation
from src.tools.store import TrajectoryStore

logger = logging.getLogger(__name__)


def register_device(device: DeviceProxy, store: TrajectoryStore) -> DeviceProxy:
    """Store a new device.

    Raises:
        DuplicateEntityError: if the device id is already registered
    """
    with store.writing():
        if device.device_id in store.devices:
            raise DuplicateEntityError(f"device {device.device_id!r} is already registered")
        store.upsert(device)
    logger.info(f"📡 Registered {device.kind.value} device {device.device_id!r} (reliability {device.reliability})")
    return device


def record_observation(observation: Observation, store: TrajectoryStore) -> Observation:
    """Attach an observation to its event; events may carry several.

    Raises:
        UnknownEntityError: if the event does not exist
    """
    store.upsert(observation)
    return observation


def device_of(event_id: str, store: TrajectoryStore) -> DeviceProxy | None:
    """Device that captured an event, or ``None`` when the event names none.

    Raises:
        UnknownEntityError: unknown event
        DanglingReferenceError: the event names a device that is not registered
    """
    event = store.event(event_id)
    if event.device_id is None:
        return None
    device = store.devices.get(event.device_id)
    if device is None:
        raise DanglingReferenceError(f"event {event_id!r} references unregistered device {event.device_id!r}")
    return device


def observations_of(event_id: str, store: TrajectoryStore) -> list[Observation]:
    """Observations of one event in (time, id) order."""
    if event_id not in store.events:
        raise UnknownEntityError("event", event_id)
    found = [observation for observation in store.observations.values() if observation.event_id == event_id]
    return sorted(found, key=lambda observation: (observation.time, observation.id))
