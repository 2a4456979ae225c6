#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for the oscillation fit."""

import logging

import numpy as np
import pytest

from conftest import two_flavor
from core.errors import ConfigurationError, IndeterminateFrequencyError
from features.analysis.fitting import fit_oscillation, synthesize_fit_form_curve
from features.probability.baselines import baseline_component_arrival
from features.probability.probability_engine import CurveMethod, DetectionCurve

PAIR = (0, 1)


def synthetic(distances, k=0.003, interference=0.25, slopes=None):
    return synthesize_fit_form_curve(distances, [0.5, 0.5], {PAIR: interference}, {PAIR: k}, slopes)


def test_round_trip_recovers_the_wavenumber(ur2f_pinned, pinned_distances):
    fit = fit_oscillation(synthetic(pinned_distances), ur2f_pinned, initial_wavenumbers={PAIR: 0.003})
    assert fit.converged
    assert fit.k_fit == pytest.approx(0.003, rel=1e-6)
    assert fit.pair == PAIR
    assert np.allclose(fit.amplitudes, [0.5, 0.5], atol=1e-8)
    assert fit.interference[PAIR] == pytest.approx(0.25, abs=1e-8)
    assert fit.residual < 1e-10
    assert fit.initial_wavenumbers == {PAIR: 0.003}


@pytest.mark.parametrize("init_scale", [0.7, 1.3])
def test_round_trip_tolerates_a_poor_start(ur2f_pinned, pinned_distances, init_scale):
    fit = fit_oscillation(
        synthetic(pinned_distances), ur2f_pinned, initial_wavenumbers={PAIR: 0.003}, init_scale=init_scale
    )
    assert fit.k_fit == pytest.approx(0.003, rel=1e-6)


def test_fitted_interference_respects_cauchy_schwarz(ur2f_pinned, pinned_distances):
    fit = fit_oscillation(
        synthetic(pinned_distances, interference=0.2 - 0.1j), ur2f_pinned, initial_wavenumbers={PAIR: 0.003}
    )
    assert abs(fit.interference[PAIR]) <= np.sqrt(fit.amplitudes[0] * fit.amplitudes[1]) + 1e-9
    assert fit.interference[PAIR] == pytest.approx(0.2 - 0.1j, abs=1e-8)


def test_decaying_states_are_fitted_with_their_own_slopes(pinned_distances):
    scenario = two_flavor([0.1, 0.2], [10.0, 10.0], 10.0, widths=[1e-4, 2e-4])
    slopes = scenario.decay_rates / scenario.velocities
    curve = synthetic(pinned_distances, interference=0.2 + 0.1j, slopes=slopes)
    fit = fit_oscillation(curve, scenario, initial_wavenumbers={PAIR: 0.003})
    assert fit.k_fit == pytest.approx(0.003, rel=1e-6)
    assert np.allclose(fit.amplitudes, [0.5, 0.5], atol=1e-8)
    assert np.allclose(fit.decay_slopes, slopes)


def test_default_start_comes_from_the_threshold(ur2f, ur2f_detection, ur2f_distances):
    curve = baseline_component_arrival(ur2f, 0, ur2f_distances)
    fit = fit_oscillation(curve, ur2f, ur2f_detection)
    assert fit.initial_wavenumbers[PAIR] == pytest.approx(-0.003, rel=1e-12)
    assert fit.method is CurveMethod.COMPONENT_ARRIVAL


def test_noisy_curve_is_reported_as_not_converged(ur2f_pinned, pinned_distances, caplog):
    curve = synthetic(pinned_distances)
    curve.values = curve.values + np.random.default_rng(7).normal(scale=0.01, size=curve.values.size)
    with caplog.at_level(logging.WARNING):
        fit = fit_oscillation(curve, ur2f_pinned, initial_wavenumbers={PAIR: 0.003})
    assert not fit.converged
    assert "residual" in fit.message
    assert "did not converge" in caplog.text
    assert fit.k_fit == pytest.approx(0.003, rel=0.05)


def test_single_state_has_no_frequency(single_component):
    curve = baseline_component_arrival(single_component, 0, np.linspace(300.0, 3000.0, 50))
    with pytest.raises(IndeterminateFrequencyError):
        fit_oscillation(curve, single_component)


def test_flat_curve_has_no_frequency(equal_mass):
    curve = baseline_component_arrival(equal_mass, 0, np.linspace(300.0, 3000.0, 50))
    with pytest.raises(IndeterminateFrequencyError, match="noise floor"):
        fit_oscillation(curve, equal_mass)


def test_too_few_samples(ur2f):
    curve = DetectionCurve(np.array([300.0, 400.0]), np.array([1.0, 0.5]), CurveMethod.EQUAL_TIME)
    with pytest.raises(ConfigurationError):
        fit_oscillation(curve, ur2f)


def test_coarse_grid_warnings(ur2f_pinned, caplog):
    curve = synthetic(np.linspace(10.0, 500.0, 30))
    with caplog.at_level(logging.WARNING):
        fit_oscillation(curve, ur2f_pinned, initial_wavenumbers={PAIR: 0.003})
    assert "expected periods" in caplog.text
    assert "inside 6 sigma" in caplog.text


def test_summary_is_plain_data(ur2f_pinned, pinned_distances):
    fit = fit_oscillation(synthetic(pinned_distances), ur2f_pinned, initial_wavenumbers={PAIR: 0.003})
    summary = fit.summary()
    assert summary["method"] == "amplitude_sum"
    assert summary["pair"] == [0, 1]
    assert summary["converged"] is True
    assert summary["interference"]["0,1"] == pytest.approx([0.25, 0.0], abs=1e-8)
    assert summary["wavenumbers"]["0,1"] == pytest.approx(0.003, rel=1e-6)
    assert set(summary) >= {"k_fit", "k_uncertainty", "residual", "amplitudes", "message"}
