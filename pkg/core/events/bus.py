#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Event system for decoupled progress reporting."""

from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Optional
import logging
import threading
import time


class EventType(Enum):
    """Pipeline event types."""

    RUN_STARTED = "run_started"
    CURVE_POINT_DONE = "curve_point_done"
    WINDOW_EXTENDED = "window_extended"
    CURVE_DONE = "curve_done"
    FIT_DONE = "fit_done"
    SCAN_POINT_DONE = "scan_point_done"
    RUN_FINISHED = "run_finished"
    TASK_STARTED = "task_started"
    TASK_FINISHED = "task_finished"


class Event:
    """Pipeline event."""

    def __init__(self, event_type: EventType, data: Any = None):
        self.type = event_type
        self.data = data
        self.timestamp = time.time()


class EventBus:
    """Simple event bus; subscribers are called on the publishing thread."""

    def __init__(self):
        self._subscribers: Dict[EventType, List[Callable]] = {}
        self._lock = threading.Lock()

    def subscribe(self, event_type: EventType, callback: Callable) -> None:
        """Subscribe to an event type."""
        with self._lock:
            if event_type not in self._subscribers:
                self._subscribers[event_type] = []
            self._subscribers[event_type].append(callback)

    def unsubscribe(self, event_type: EventType, callback: Callable) -> None:
        """Unsubscribe from an event type."""
        with self._lock:
            if event_type in self._subscribers:
                try:
                    self._subscribers[event_type].remove(callback)
                except ValueError:
                    pass

    def publish(self, event: Event) -> None:
        """Publish an event to all subscribers."""
        with self._lock:
            subscribers = list(self._subscribers.get(event.type, []))

        for callback in subscribers:
            try:
                callback(event)
            except (RuntimeError, TypeError, ValueError) as e:
                logging.getLogger(__name__).warning(
                    "Event subscriber %s raised exception: %s",
                    getattr(callback, "__name__", repr(callback)),
                    e,
                )


class EventTally:
    """
    Counts pipeline events while attached to a bus.

    Optionally forwards each counted event to a callback, which is how run
    state learns about window doublings raised deep inside the engine.
    """

    def __init__(
        self,
        bus: EventBus,
        event_types: Iterable[EventType],
        forward: Optional[Callable[[Event], None]] = None,
    ):
        self.bus = bus
        self.event_types = tuple(event_types)
        self.forward = forward
        self._counts: Dict[EventType, int] = {t: 0 for t in self.event_types}
        self._lock = threading.Lock()

    def _record(self, event: Event) -> None:
        with self._lock:
            self._counts[event.type] += 1
        if self.forward is not None:
            self.forward(event)

    def __enter__(self) -> "EventTally":
        for event_type in self.event_types:
            self.bus.subscribe(event_type, self._record)
        return self

    def __exit__(self, *exc_info) -> None:
        for event_type in self.event_types:
            self.bus.unsubscribe(event_type, self._record)

    def counts(self) -> Dict[str, int]:
        """Counts keyed by event value, in declaration order."""
        with self._lock:
            return {t.value: self._counts[t] for t in self.event_types}


# Global event bus instance
event_bus = EventBus()
