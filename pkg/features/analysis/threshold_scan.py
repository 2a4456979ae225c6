#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Fitted wavenumber as a function of the detection threshold."""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from core.background.coordinator import ParallelCoordinator
from core.errors import ConfigurationError, OscDetectError
from core.events.bus import EventType
from features.analysis.fitting import OscillationFit, fit_oscillation
from features.analysis.wavenumbers import analytic_slope, analytic_wavenumber
from features.oscillation.oscillation_model import DetectionModel, OscillationScenario
from features.probability.contour import SQuadrature
from features.probability.probability_engine import (
    DensityRequest,
    DetectionCurve,
    WindowPolicy,
    detection_density,
)

logger = logging.getLogger(__name__)

CurvePipeline = Callable[[DetectionModel], DetectionCurve]


@dataclass
class ScanPoint:
    """One threshold of a scan."""

    threshold: float
    k_fit: Optional[float] = None
    k_uncertainty: Optional[float] = None
    analytic: Optional[float] = None
    residual: Optional[float] = None
    t_final: Optional[float] = None
    window_doublings: Optional[int] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.k_fit is not None


@dataclass
class ThresholdScanResult:
    """Fitted k per threshold, the fitted linear slope and the analytic slope."""

    points: List[ScanPoint] = field(default_factory=list)
    slope: Optional[float] = None
    intercept: Optional[float] = None
    analytic_slope: Optional[float] = None
    pair: Optional[tuple] = None

    @property
    def partial(self) -> bool:
        return any(not point.ok for point in self.points)

    @property
    def slope_relative_error(self) -> Optional[float]:
        if self.slope is None or not self.analytic_slope:
            return None
        return abs(self.slope - self.analytic_slope) / abs(self.analytic_slope)

    def summary(self) -> dict:
        return {
            "points": [
                {
                    "threshold": p.threshold,
                    "k_fit": p.k_fit,
                    "k_uncertainty": p.k_uncertainty,
                    "analytic": p.analytic,
                    "residual": p.residual,
                    "t_final": p.t_final,
                    "window_doublings": p.window_doublings,
                    "error": p.error,
                }
                for p in self.points
            ],
            "slope": self.slope,
            "intercept": self.intercept,
            "analytic_slope": self.analytic_slope,
            "slope_relative_error": self.slope_relative_error,
            "pair": list(self.pair) if self.pair else None,
            "partial": self.partial,
        }


def density_pipeline(
    scenario: OscillationScenario,
    flavor: int,
    distances: Sequence[float],
    window: Optional[WindowPolicy] = None,
    quadrature: Optional[SQuadrature] = None,
) -> CurvePipeline:
    """Curve producer for threshold_scan built on detection_density."""

    def produce(detection: DetectionModel) -> DetectionCurve:
        request = DensityRequest(
            scenario=scenario,
            detection=detection,
            flavor=flavor,
            distances=distances,
            window=window or WindowPolicy(),
            quadrature=quadrature or SQuadrature(),
        )
        return detection_density(request)

    return produce


def threshold_scan(
    scenario: OscillationScenario,
    detection: DetectionModel,
    thresholds: Sequence[float],
    pipeline: CurvePipeline,
    coordinator: Optional[ParallelCoordinator] = None,
) -> ThresholdScanResult:
    """
    Fit the wavenumber at every threshold and regress k on the threshold.

    Args:
        scenario: Oscillation scenario
        detection: Template detection model; only its threshold varies
        thresholds: Strictly increasing threshold energies
        pipeline: Maps a detection model to a detection curve
        coordinator: Thread pool for the scan points

    Returns:
        ThresholdScanResult; partial when any point failed
    """
    thresholds = [float(eps) for eps in thresholds]
    if not thresholds:
        raise ConfigurationError("threshold list is empty")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ConfigurationError("thresholds must be strictly increasing")
    coordinator = coordinator or ParallelCoordinator()

    def run_point(threshold: float):
        model = detection.with_threshold(threshold)
        point = ScanPoint(threshold=threshold)
        try:
            curve = pipeline(model)
            point.t_final = curve.metadata.get("t_final")
            point.window_doublings = curve.metadata.get("window_doublings")
            fit = fit_oscillation(curve, scenario, model)
        except OscDetectError as e:
            logger.warning("scan point at threshold %g failed: %s", threshold, e)
            point.error = str(e)
            return point, None
        point.residual = fit.residual
        if not fit.converged:
            logger.warning("scan point at threshold %g failed: %s", threshold, fit.message)
            point.error = fit.message
            return point, fit
        point.k_fit = fit.k_fit
        point.k_uncertainty = fit.k_uncertainty
        point.analytic = analytic_wavenumber(scenario, model, *fit.pair)
        return point, fit

    outcomes = coordinator.map_ordered(
        run_point, thresholds, stage="scan", done_event=EventType.SCAN_POINT_DONE
    )
    result = ThresholdScanResult(points=[point for point, _ in outcomes])
    fits: List[OscillationFit] = [fit for point, fit in outcomes if point.ok]
    if fits:
        result.pair = fits[0].pair
        result.analytic_slope = analytic_slope(scenario, *result.pair)

    good = [point for point in result.points if point.ok]
    if len(good) >= 2:
        slope, intercept = np.polyfit(
            [p.threshold for p in good], [p.k_fit for p in good], 1
        )
        result.slope, result.intercept = float(slope), float(intercept)
    if result.partial:
        logger.warning(
            "threshold scan is partial: %d of %d points failed",
            len(result.points) - len(good),
            len(result.points),
        )
    return result
