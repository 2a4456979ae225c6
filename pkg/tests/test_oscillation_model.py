#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for mass states, mixing and flavor amplitudes."""

import math

import numpy as np
import pytest

from conftest import two_flavor
from core.errors import ConfigurationError, DomainError
from features.oscillation.oscillation_model import (
    DetectionModel,
    MassEigenstate,
    MixingMatrix,
    OscillationScenario,
    gaussian_amplitude,
    gaussian_amplitude_components,
    momentum_integral_amplitude,
    plane_wave_amplitude,
)


def test_kinematics_are_consistent():
    for mass, momentum in [(0.1, 10.0), (1.0, 100.0), (0.0, 3.0), (5.0, 0.5)]:
        state = MassEigenstate(mass, momentum)
        assert state.energy**2 - momentum**2 - mass**2 == pytest.approx(0.0, abs=1e-12 * state.energy**2)
        assert state.velocity == pytest.approx(momentum / state.energy)
        assert state.energy >= max(mass, momentum)


@pytest.mark.parametrize("kwargs", [{"mass": -0.1, "momentum": 1.0}, {"mass": 0.1, "momentum": 0.0},
                                    {"mass": 0.1, "momentum": 1.0, "decay_rate": -1e-3}])
def test_mass_eigenstate_invariants(kwargs):
    with pytest.raises(ConfigurationError):
        MassEigenstate(**kwargs)


def test_mass_eigenstate_reports_every_violation():
    with pytest.raises(ConfigurationError) as info:
        MassEigenstate(-0.1, 0.0)
    assert "mass must be >= 0" in str(info.value)
    assert "momentum must be > 0" in str(info.value)


def test_mixing_matrix_must_be_unitary():
    with pytest.raises(ConfigurationError, match="unitary"):
        MixingMatrix(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_three_flavor_parametrization_is_unitary():
    mixing = MixingMatrix.from_angles(0.59, 0.15, 0.84, 1.2)
    assert mixing.dim == 3
    assert np.allclose(mixing.entries.conj().T @ mixing.entries, np.eye(3), atol=1e-14)


def test_scenario_requires_narrow_momentum_spread():
    with pytest.raises(ConfigurationError, match="sigma \\* min\\(momentum\\)"):
        two_flavor([0.1, 0.2], [10.0, 10.0], 0.5)


def test_scenario_rejects_mismatched_mixing():
    states = (MassEigenstate(0.1, 10.0),)
    with pytest.raises(ConfigurationError):
        OscillationScenario(states, MixingMatrix.identity(2), 50.0, 0)


def test_coefficients_sum_to_flavor_overlap(ur2f):
    assert np.allclose(ur2f.coefficients(0), [0.5, 0.5])
    assert np.allclose(ur2f.coefficients(1), [-0.5, 0.5])
    assert abs(np.sum(ur2f.coefficients(1))) < 1e-15
    with pytest.raises(DomainError):
        ur2f.coefficients(2)


def test_coherence_length(ur2f, equal_mass):
    dv = abs(ur2f.velocities[0] - ur2f.velocities[1])
    assert ur2f.coherence_length(0, 1) == pytest.approx(50.0 / dv)
    assert math.isinf(equal_mass.coherence_length(0, 1))


def test_detection_model_invariants():
    with pytest.raises(ConfigurationError, match="saddle-point"):
        DetectionModel(threshold=0.0, product_masses=(5.0,), localization=1.0)
    with pytest.raises(ConfigurationError):
        DetectionModel(threshold=0.0, product_masses=(100.0,), localization=0.0)
    with pytest.raises(ConfigurationError):
        DetectionModel(threshold=-1.0, product_masses=(100.0,), localization=1.0)
    loose = DetectionModel(threshold=0.0, product_masses=(2.0,), localization=1.0, strict=False)
    assert loose.saddle_offsets[0] == pytest.approx(1.0)
    assert loose.with_threshold(2.5).threshold == 2.5


# --- plane waves ---


def test_plane_wave_without_mixing():
    single = OscillationScenario((MassEigenstate(0.3, 10.0),), MixingMatrix.identity(1), 50.0, 0)
    t = np.linspace(0, 100, 7)
    assert np.allclose(np.abs(plane_wave_amplitude(single, 0, t, 2 * t)), 1.0)

    states = (MassEigenstate(0.1, 10.0), MassEigenstate(0.2, 10.0))
    unmixed = OscillationScenario(states, MixingMatrix.identity(2), 50.0, 0)
    assert np.all(plane_wave_amplitude(unmixed, 1, t, t) == 0)


def test_plane_wave_oscillation_wavenumber():
    scenario = two_flavor([1.0, 2.0], [100.0, 100.0], 1.0)
    L = np.linspace(0.0, 2000.0, 41)
    probability = np.abs(plane_wave_amplitude(scenario, 1, L, L)) ** 2
    k = scenario.energies[1] - scenario.energies[0]
    assert np.allclose(probability, 0.5 * (1 - np.cos(k * L)), atol=1e-9)
    assert k == pytest.approx(0.015, rel=1e-3)


def test_plane_wave_flavor_probabilities_sum_to_one(ur2f):
    t = np.linspace(0, 5000, 11)
    total = sum(np.abs(plane_wave_amplitude(ur2f, alpha, t, 0.9 * t)) ** 2 for alpha in range(2))
    assert np.allclose(total, 1.0, atol=1e-12)


# --- Gaussian packets ---


def test_gaussian_normalization(single_component):
    value = gaussian_amplitude(single_component, 0, 0.0, 0.0)
    assert abs(value) == pytest.approx((math.pi * 2500) ** -0.25, rel=1e-12)
    assert abs(value) == pytest.approx(0.1062, abs=1e-4)


def test_gaussian_flavor_sum_has_no_cross_terms(ur2f):
    t = np.linspace(0.0, 800.0, 9)
    x = 0.999 * t + 20
    total = sum(np.abs(gaussian_amplitude(ur2f, alpha, t, x)) ** 2 for alpha in range(2))
    envelopes = np.abs(gaussian_amplitude_components(ur2f, ur2f.initial_flavor, t, x)) ** 2
    # flavor beta weighs each envelope by |U_beta,i|^4 = 1/4 instead of |U_beta,i|^2 = 1/2
    expected = np.sum(envelopes, axis=-1) / 0.5
    assert np.allclose(total, expected, rtol=1e-12, atol=1e-15)


def test_gaussian_amplitude_needs_nonnegative_time(ur2f):
    with pytest.raises(DomainError):
        gaussian_amplitude(ur2f, 0, -1.0, 0.0)


def test_rephasing_leaves_probabilities_unchanged(ur2f):
    rephased = OscillationScenario(
        ur2f.states, ur2f.mixing.rephased([0.4, -1.1], [2.0, 0.3]), ur2f.sigma, ur2f.initial_flavor
    )
    t = np.linspace(0.0, 3000.0, 13)
    for alpha in range(2):
        before = np.abs(gaussian_amplitude(ur2f, alpha, t, t)) ** 2
        after = np.abs(gaussian_amplitude(rephased, alpha, t, t)) ** 2
        assert np.allclose(before, after, rtol=1e-12, atol=1e-18)


# --- exact momentum integral ---


def _scale(scenario, flavor, t, x) -> float:
    return float(np.sum(np.abs(gaussian_amplitude_components(scenario, flavor, t, x))))


def test_massless_dispersion_is_linear():
    scenario = OscillationScenario((MassEigenstate(0.0, 10.0),), MixingMatrix.identity(1), 50.0, 0)
    t, x = 100.0, 120.0
    exact = momentum_integral_amplitude(scenario, 0, t, x)
    linear = gaussian_amplitude(scenario, 0, t, x)
    assert abs(exact - linear) <= 1e-10 * abs(linear)


def test_momentum_integral_matches_at_time_zero(ur2f):
    exact = momentum_integral_amplitude(ur2f, 0, 0.0, 30.0)
    linear = gaussian_amplitude(ur2f, 0, 0.0, 30.0)
    assert abs(exact - linear) <= 1e-9 * _scale(ur2f, 0, 0.0, 30.0)


@pytest.mark.parametrize("x", [200.0, 500.0])
def test_momentum_integral_matches_linearized_packet(ur2f, x):
    t = x / ur2f.velocities[0]
    exact = momentum_integral_amplitude(ur2f, 0, t, x)
    linear = gaussian_amplitude(ur2f, 0, t, x)
    assert abs(exact - linear) <= 1e-3 * _scale(ur2f, 0, t, x)
