#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Background task coordinator."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from core.events.bus import Event, EventBus, EventType, event_bus
from core.state.run_state import StateManager

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


class ParallelCoordinator:
    """
    Runs independent work items on a thread pool.

    Results always come back in input order, so the output does not depend
    on the number of workers.
    """

    def __init__(
        self,
        max_workers: int = 1,
        state_manager: Optional[StateManager] = None,
        bus: Optional[EventBus] = None,
    ):
        if max_workers < 1:
            raise ValueError(f"max_workers must be >= 1, got {max_workers}")
        self.max_workers = max_workers
        self.state_manager = state_manager
        self.event_bus = bus or event_bus

    def map_ordered(
        self,
        func: Callable[[T], R],
        items: Iterable[T],
        stage: str = "work",
        done_event: EventType = EventType.CURVE_POINT_DONE,
    ) -> List[R]:
        """
        Apply func to every item.

        Args:
            func: Work function, must not share mutable state between calls
            items: Work items
            stage: Label for progress reporting
            done_event: Event published after each finished item

        Returns:
            Results in the order of items; the first failing item re-raises
        """
        items = list(items)
        if self.state_manager:
            self.state_manager.start_stage(stage, len(items))
            self.state_manager.set_working(True)
        self.event_bus.publish(Event(EventType.TASK_STARTED, {"stage": stage, "total": len(items)}))

        def worker(indexed):
            index, item = indexed
            result = func(item)
            done = self.state_manager.advance() if self.state_manager else index + 1
            self.event_bus.publish(
                Event(done_event, {"stage": stage, "index": index, "done": done, "total": len(items)})
            )
            return result

        try:
            if self.max_workers == 1 or len(items) <= 1:
                results = [worker(pair) for pair in enumerate(items)]
            else:
                with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                    results = list(executor.map(worker, enumerate(items)))
        finally:
            if self.state_manager:
                self.state_manager.set_working(False)
            self.event_bus.publish(Event(EventType.TASK_FINISHED, {"stage": stage}))
        logger.debug("Stage %s finished %d items on %d worker(s)", stage, len(items), self.max_workers)
        return results
