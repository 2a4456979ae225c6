#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Pipeline service that orchestrates every CLI command."""

import logging
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from core.background.coordinator import ParallelCoordinator
from core.errors import ConfigurationError, FitError, OscDetectError
from core.events.bus import Event, EventTally, EventType, event_bus
from core.state.run_state import StateManager
from features.analysis.fitting import fit_oscillation
from features.analysis.threshold_scan import threshold_scan
from features.analysis.wavenumbers import (
    analytic_wavenumber,
    effective_detection_energy,
    effective_wavenumber,
    pinning_margin,
    standard_wavenumber,
    threshold_corrected_wavenumber,
)
from features.oscillation.oscillation_model import DetectionModel
from features.probability.baselines import (
    baseline_component_arrival,
    baseline_equal_time,
    baseline_time_averaged,
)
from features.probability.contour import SQuadrature
from features.probability.probability_engine import (
    CurveMethod,
    DensityRequest,
    DetectionCurve,
    WindowPolicy,
    detection_density,
)
from ui.rendering.writers import emit_plot_data, render_density_csv, render_summary, write_text
from utils.config import ScenarioFile
from utils.logger import pipeline_logger

logger = logging.getLogger(__name__)

COMMANDS = ("validate", "density", "baselines", "fit", "scan")
CSV_FILE = "density.csv"
PLOT_FILE = "plot_data.csv"
SUMMARY_FILE = "summary.json"
TALLIED_EVENTS = (
    EventType.WINDOW_EXTENDED,
    EventType.CURVE_DONE,
    EventType.FIT_DONE,
    EventType.SCAN_POINT_DONE,
)


class PipelineService:
    """Runs one command against a validated scenario file."""

    def __init__(
        self,
        config: ScenarioFile,
        out_dir: Optional[Path] = None,
        threads: int = 1,
        quadrature_tol: Optional[float] = None,
        state_manager: Optional[StateManager] = None,
        scenario_name: str = "",
    ):
        self.config = config
        self.scenario_name = scenario_name
        self.out_dir = Path(out_dir) if out_dir is not None else Path(config.output.directory)
        self.state_manager = state_manager or StateManager()
        self.coordinator = ParallelCoordinator(threads, self.state_manager)
        self.scenario = config.build_scenario()
        self.detection = config.build_detection()
        self.flavor = config.run.flavor
        self.distances = config.run.distances
        tol = quadrature_tol if quadrature_tol is not None else config.run.quadrature_tol
        self.quadrature = SQuadrature(tol=tol)
        self.window = WindowPolicy(t_final=config.run.window)
        self._tally: Optional[EventTally] = None

    # --- curves ---

    def density_request(self, detection: Optional[DetectionModel] = None) -> DensityRequest:
        """Request for the amplitude-sum density of this scenario."""
        return DensityRequest(
            scenario=self.scenario,
            detection=detection or self.detection,
            flavor=self.flavor,
            distances=self.distances,
            window=self.window,
            quadrature=self.quadrature,
            workers=self.coordinator.max_workers,
        )

    def amplitude_sum_curve(self, detection: Optional[DetectionModel] = None) -> DetectionCurve:
        return detection_density(self.density_request(detection), self.coordinator)

    def curve(self, method: CurveMethod) -> DetectionCurve:
        """One curve by method tag."""
        if method is CurveMethod.AMPLITUDE_SUM:
            return self.amplitude_sum_curve()
        if method is CurveMethod.EQUAL_TIME:
            return baseline_equal_time(self.scenario, self.flavor, self.distances)
        if method is CurveMethod.COMPONENT_ARRIVAL:
            return baseline_component_arrival(self.scenario, self.flavor, self.distances)
        return baseline_time_averaged(self.scenario, self.flavor, self.distances, self.window.t_final)

    def curves(self, methods: List[str]) -> List[DetectionCurve]:
        curves = []
        for tag in methods:
            curve = self.curve(CurveMethod(tag))
            logger.info("Computed %s curve over %d distances", tag, curve.distances.size)
            curves.append(curve)
        return curves

    # --- summary ---

    def kinematics(self) -> Dict[str, Any]:
        scenario = self.scenario
        return {
            "energies": scenario.energies,
            "velocities": scenario.velocities,
            "coefficients": scenario.coefficients(self.flavor),
            "coherence_lengths": {
                f"{i},{j}": scenario.coherence_length(i, j)
                for i in range(scenario.size)
                for j in range(i + 1, scenario.size)
            },
        }

    def wavenumbers(self) -> Dict[str, Any]:
        scenario, detection = self.scenario, self.detection
        table = {}
        for i in range(scenario.size):
            for j in range(i + 1, scenario.size):
                table[f"{i},{j}"] = {
                    "analytic": analytic_wavenumber(scenario, detection, i, j),
                    "standard": standard_wavenumber(scenario, i, j),
                    "threshold_corrected": threshold_corrected_wavenumber(scenario, detection, i, j),
                    "effective": effective_wavenumber(scenario, detection, i, j),
                }
        return table

    def base_summary(self, command: str) -> Dict[str, Any]:
        return {
            "command": command,
            "config": self.config.normalized(),
            "kinematics": self.kinematics(),
            "wavenumbers": self.wavenumbers(),
            "pinning_margin": pinning_margin(self.scenario, self.detection),
            "effective_detection_energy": effective_detection_energy(self.scenario, self.detection),
            "quadrature": {
                "tol": self.quadrature.tol,
                "nodes_per_panel": self.quadrature.nodes_per_panel,
                "tilt": self.quadrature.tilt,
                "decay_target": self.quadrature.decay_target,
                "window": self.window.describe(),
            },
        }

    def fit_curves(self, curves: List[DetectionCurve]) -> Dict[str, Any]:
        """Fit every curve; failures are recorded, not raised."""
        fits: Dict[str, Any] = {}
        for curve in curves:
            try:
                fit = fit_oscillation(curve, self.scenario, self.detection)
            except OscDetectError as e:
                logger.warning("fit of %s curve failed: %s", curve.method.value, e)
                fits[curve.method.value] = {"converged": False, "error": str(e)}
                continue
            fits[curve.method.value] = fit.summary()
            event_bus.publish(Event(EventType.FIT_DONE, {"method": curve.method.value, "k_fit": fit.k_fit}))
        return fits

    @staticmethod
    def _usable(fit: Optional[dict]) -> bool:
        return bool(fit) and bool(fit.get("converged")) and fit.get("k_fit") is not None

    def ratios(self, fits: Dict[str, Any]) -> Dict[str, Any]:
        """Ratios of fitted wavenumbers to each other and to the standard value."""
        ratios: Dict[str, Any] = {}
        reference = fits.get(CurveMethod.TIME_AVERAGED.value)
        for tag, fit in sorted(fits.items()):
            if not self._usable(fit):
                continue
            i, j = fit["pair"]
            standard = standard_wavenumber(self.scenario, i, j)
            if standard:
                ratios[f"{tag}/standard"] = fit["k_fit"] / standard
            if tag != CurveMethod.TIME_AVERAGED.value and self._usable(reference):
                ratios[f"{tag}/time_averaged"] = fit["k_fit"] / reference["k_fit"]
        return ratios

    # --- output ---

    def write_outputs(self, curves: List[DetectionCurve], summary: Dict[str, Any]) -> List[str]:
        formats = self.config.output.formats
        written = []
        if "csv" in formats and curves:
            written.append(write_text(self.out_dir / CSV_FILE, render_density_csv(curves)))
        if "plot" in formats and curves:
            written.append(write_text(self.out_dir / PLOT_FILE, emit_plot_data(curves)))
        summary["diagnostics"] = pipeline_logger.get_logs()
        if self._tally is not None:
            summary["events"] = self._tally.counts()
        summary["run"] = {"window_extensions": self.state_manager.snapshot()["window_extensions"]}
        if "summary" in formats:
            written.append(write_text(self.out_dir / SUMMARY_FILE, render_summary(summary)))
        for path in written:
            self.state_manager.add_artifact(str(path))
        return [str(path) for path in written]

    # --- commands ---

    def run(self, command: str) -> Dict[str, Any]:
        """Run a command; returns the summary record."""
        handlers: Dict[str, Callable[[], Dict[str, Any]]] = {
            "validate": self.run_validate,
            "density": self.run_density,
            "baselines": self.run_baselines,
            "fit": self.run_fit,
            "scan": self.run_scan,
        }
        if command not in handlers:
            raise ConfigurationError(f"unknown command {command!r}; expected one of {COMMANDS}")
        self.state_manager.begin(command, self.scenario_name, time.time())
        event_bus.publish(Event(EventType.RUN_STARTED, {"command": command}))
        failure = None
        self._tally = EventTally(event_bus, TALLIED_EVENTS, self._on_event)
        try:
            with self._tally:
                return handlers[command]()
        except OscDetectError as e:
            failure = str(e)
            raise
        finally:
            self.state_manager.finish(time.time(), failure)
            event_bus.publish(Event(EventType.RUN_FINISHED, {"command": command, "failure": failure}))

    def _on_event(self, event: Event) -> None:
        if event.type is EventType.WINDOW_EXTENDED:
            self.state_manager.note_window_extension()

    def run_validate(self) -> Dict[str, Any]:
        return self.config.normalized()

    def _curve_metadata(self, curves: List[DetectionCurve]) -> Dict[str, Any]:
        return {curve.method.value: curve.metadata for curve in curves}

    def run_density(self) -> Dict[str, Any]:
        curves = self.curves(self.config.run.methods)
        summary = self.base_summary("density")
        summary["curves"] = self._curve_metadata(curves)
        self.write_outputs(curves, summary)
        return summary

    def run_baselines(self) -> Dict[str, Any]:
        curves = self.curves([method.value for method in CurveMethod])
        fits = self.fit_curves(curves)
        summary = self.base_summary("baselines")
        summary["curves"] = self._curve_metadata(curves)
        summary["fits"] = fits
        summary["ratios"] = self.ratios(fits)
        self.write_outputs(curves, summary)
        self._raise_on_failed_fits(fits)
        return summary

    def run_fit(self) -> Dict[str, Any]:
        curves = self.curves(self.config.run.methods)
        fits = self.fit_curves(curves)
        summary = self.base_summary("fit")
        summary["curves"] = self._curve_metadata(curves)
        summary["fits"] = fits
        summary["ratios"] = self.ratios(fits)
        self.write_outputs(curves, summary)
        self._raise_on_failed_fits(fits)
        return summary

    def run_scan(self) -> Dict[str, Any]:
        thresholds = self.config.run.thresholds
        if not thresholds:
            raise ConfigurationError("scan needs run.thresholds")
        # Scan points run in parallel; each density stays sequential inside its point
        result = threshold_scan(
            self.scenario,
            self.detection,
            thresholds,
            pipeline=lambda detection: detection_density(
                self.density_request(detection), ParallelCoordinator(1)
            ),
            coordinator=self.coordinator,
        )
        summary = self.base_summary("scan")
        summary["scan"] = result.summary()
        self.write_outputs([], summary)
        if not any(point.ok for point in result.points):
            raise FitError("every threshold scan point failed")
        return summary

    def _raise_on_failed_fits(self, fits: Dict[str, Any]) -> None:
        failed = sorted(tag for tag, fit in fits.items() if not fit.get("converged"))
        if failed:
            raise FitError(f"fit failed for {', '.join(failed)}")

