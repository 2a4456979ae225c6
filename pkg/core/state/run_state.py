#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Run state management."""

import threading
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class ProgressState:
    """Progress of the current stage."""

    stage: str = "idle"
    done: int = 0
    total: int = 0


@dataclass
class RunState:
    """State of one pipeline run."""

    command: str = ""
    scenario_name: str = ""
    progress: ProgressState = field(default_factory=ProgressState)
    is_working: bool = False
    window_extensions: int = 0
    artifacts: List[str] = field(default_factory=list)
    failure: Optional[str] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    # Timing state
    started_at: float = 0.0
    finished_at: float = 0.0


class StateManager:
    """Manages run state with thread safety."""

    def __init__(self):
        self._state = RunState()

    @property
    def state(self) -> RunState:
        """Get current state (read-only)."""
        return self._state

    def begin(self, command: str, scenario_name: str, started_at: float) -> None:
        """Reset the state for a new run."""
        with self._state.lock:
            self._state.command = command
            self._state.scenario_name = scenario_name
            self._state.progress = ProgressState()
            self._state.window_extensions = 0
            self._state.artifacts = []
            self._state.failure = None
            self._state.started_at = started_at
            self._state.finished_at = 0.0

    def start_stage(self, stage: str, total: int) -> None:
        """Enter a stage with a known number of work items."""
        with self._state.lock:
            self._state.progress = ProgressState(stage=stage, total=total)

    def advance(self, count: int = 1) -> int:
        """Mark work items done; returns the new count."""
        with self._state.lock:
            self._state.progress.done += count
            return self._state.progress.done

    def note_window_extension(self) -> None:
        """Count an automatic time-window doubling."""
        with self._state.lock:
            self._state.window_extensions += 1

    def set_working(self, is_working: bool) -> None:
        """Set working state."""
        with self._state.lock:
            self._state.is_working = is_working

    def add_artifact(self, path: str) -> None:
        """Record a written output file."""
        with self._state.lock:
            self._state.artifacts.append(path)

    def finish(self, finished_at: float, failure: Optional[str] = None) -> None:
        """Close the run."""
        with self._state.lock:
            self._state.finished_at = finished_at
            self._state.failure = failure
            self._state.is_working = False

    def snapshot(self) -> Dict[str, Any]:
        """Thread-safe copy of the reportable fields."""
        with self._state.lock:
            return {
                "command": self._state.command,
                "scenario": self._state.scenario_name,
                "stage": self._state.progress.stage,
                "done": self._state.progress.done,
                "total": self._state.progress.total,
                "window_extensions": self._state.window_extensions,
                "artifacts": list(self._state.artifacts),
                "failure": self._state.failure,
            }
