#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for the threshold scan."""

import numpy as np
import pytest

from core.background.coordinator import ParallelCoordinator
from core.errors import AccuracyError, ConfigurationError
from features.analysis.fitting import synthesize_fit_form_curve
from features.analysis.threshold_scan import density_pipeline, threshold_scan
from features.analysis.wavenumbers import analytic_slope, analytic_wavenumber
from features.probability.probability_engine import CurveMethod

THRESHOLDS = [0.0, 1.0, 2.0, 3.0, 4.0]


def fit_form_pipeline(scenario, distances, failing=()):
    """Curves that oscillate exactly at the analytic wavenumber of each threshold."""

    def produce(detection):
        if detection.threshold in failing:
            raise AccuracyError("s-quadrature did not reach the requested tolerance")
        k = analytic_wavenumber(scenario, detection, 0, 1)
        return synthesize_fit_form_curve(distances, [0.5, 0.5], {(0, 1): 0.25}, {(0, 1): k})

    return produce


def test_scan_slope_matches_the_analytic_slope(ur2f_pinned, pinned_detection, pinned_distances):
    result = threshold_scan(
        ur2f_pinned, pinned_detection, THRESHOLDS, fit_form_pipeline(ur2f_pinned, pinned_distances)
    )
    assert not result.partial
    assert [p.threshold for p in result.points] == THRESHOLDS
    assert result.pair == (0, 1)
    assert result.analytic_slope == pytest.approx(analytic_slope(ur2f_pinned, 0, 1))
    assert result.slope == pytest.approx(result.analytic_slope, rel=1e-6)
    assert result.slope_relative_error < 1e-6
    assert result.intercept == pytest.approx(-0.003, rel=1e-6)
    for point in result.points:
        assert point.k_fit == pytest.approx(point.analytic, rel=1e-6)


def test_single_threshold_has_no_slope(ur2f_pinned, pinned_detection, pinned_distances):
    result = threshold_scan(
        ur2f_pinned, pinned_detection, [1.0], fit_form_pipeline(ur2f_pinned, pinned_distances)
    )
    assert result.points[0].ok
    assert result.slope is None
    assert result.slope_relative_error is None
    assert result.analytic_slope is not None


def test_failed_point_makes_the_scan_partial(ur2f_pinned, pinned_detection, pinned_distances, caplog):
    pipeline = fit_form_pipeline(ur2f_pinned, pinned_distances, failing=(2.0,))
    result = threshold_scan(ur2f_pinned, pinned_detection, THRESHOLDS, pipeline)
    assert result.partial
    failed = result.points[2]
    assert not failed.ok
    assert "tolerance" in failed.error
    assert result.slope == pytest.approx(result.analytic_slope, rel=1e-6)
    assert "partial" in caplog.text
    summary = result.summary()
    assert summary["partial"] is True
    assert summary["points"][2]["k_fit"] is None


@pytest.mark.parametrize("thresholds", [[], [1.0, 0.5], [1.0, 1.0]])
def test_thresholds_must_increase(ur2f_pinned, pinned_detection, pinned_distances, thresholds):
    with pytest.raises(ConfigurationError):
        threshold_scan(
            ur2f_pinned, pinned_detection, thresholds, fit_form_pipeline(ur2f_pinned, pinned_distances)
        )


def test_parallel_scan_keeps_threshold_order(ur2f_pinned, pinned_detection, pinned_distances):
    pipeline = fit_form_pipeline(ur2f_pinned, pinned_distances)
    sequential = threshold_scan(ur2f_pinned, pinned_detection, THRESHOLDS, pipeline)
    parallel = threshold_scan(
        ur2f_pinned, pinned_detection, THRESHOLDS, pipeline, ParallelCoordinator(2)
    )
    assert [p.threshold for p in parallel.points] == THRESHOLDS
    assert [p.k_fit for p in parallel.points] == [p.k_fit for p in sequential.points]


def test_density_pipeline_produces_amplitude_sum_curves(ur2f, ur2f_detection):
    produce = density_pipeline(ur2f, 0, [300.0, 600.0, 900.0])
    curve = produce(ur2f_detection)
    assert curve.method is CurveMethod.AMPLITUDE_SUM
    assert curve.values.max() == 1.0
    assert np.all(curve.values >= 0)


def test_pinned_density_scan_follows_the_analytic_slope(ur2f_pinned, pinned_detection, pinned_distances):
    produce = density_pipeline(ur2f_pinned, 0, pinned_distances)
    thresholds = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
    result = threshold_scan(ur2f_pinned, pinned_detection, thresholds, produce, ParallelCoordinator(2))
    assert not result.partial
    assert [point.threshold for point in result.points] == thresholds
    assert result.slope == pytest.approx(result.analytic_slope, rel=0.02)
    assert result.intercept == pytest.approx(-0.003, rel=0.01)
    for point in result.points:
        assert point.k_fit == pytest.approx(point.analytic, rel=0.01)
        assert point.t_final > 0
        assert point.window_doublings >= 1
    summary = result.summary()
    assert summary["points"][0]["t_final"] == result.points[0].t_final
    assert summary["points"][0]["window_doublings"] == result.points[0].window_doublings
