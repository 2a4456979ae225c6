#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Interference wavenumbers of mass-state pairs."""

import math

import numpy as np

from core.errors import DomainError
from features.oscillation.oscillation_model import DetectionModel, OscillationScenario


def _check_pair(scenario: OscillationScenario, i: int, j: int) -> None:
    for index in (i, j):
        if not 0 <= index < scenario.size:
            raise DomainError(f"mass-state index {index} out of range 0..{scenario.size - 1}")
    if i == j:
        raise DomainError("wavenumber needs two different mass states")


def _phase_slope(scenario: OscillationScenario, index: int, energy: float) -> float:
    # (E - energy)/v - p, using E/v = p + m^2/p to avoid cancellation
    state = scenario.states[index]
    return state.mass**2 / state.momentum - energy / state.velocity


def wavenumber_at_energy(scenario: OscillationScenario, energy: float, i: int, j: int) -> float:
    """k_ij = (E_i - Omega)/v_i - (E_j - Omega)/v_j - (p_i - p_j) for absorbed energy Omega."""
    _check_pair(scenario, i, j)
    return _phase_slope(scenario, i, energy) - _phase_slope(scenario, j, energy)


def analytic_wavenumber(
    scenario: OscillationScenario, detection: DetectionModel, i: int, j: int
) -> float:
    """
    Wavenumber of the amplitude-sum density with the absorbed energy pinned at the threshold.

    At zero threshold this is (m_i^2/p_i - m_j^2/p_j), twice the textbook value.
    Exactly antisymmetric in (i, j).
    """
    return wavenumber_at_energy(scenario, detection.threshold, i, j)


def analytic_slope(scenario: OscillationScenario, i: int, j: int) -> float:
    """d k_ij / d threshold = -(1/v_i - 1/v_j)."""
    _check_pair(scenario, i, j)
    return -(1.0 / scenario.states[i].velocity - 1.0 / scenario.states[j].velocity)


def standard_wavenumber(scenario: OscillationScenario, i: int, j: int) -> float:
    """(m_i^2 - m_j^2) / (2 p_mean) with p_mean the mean of p_i and p_j."""
    _check_pair(scenario, i, j)
    si, sj = scenario.states[i], scenario.states[j]
    mean_momentum = 0.5 * (si.momentum + sj.momentum)
    return (si.mass**2 - sj.mass**2) / (2 * mean_momentum)


def threshold_corrected_wavenumber(
    scenario: OscillationScenario, detection: DetectionModel, i: int, j: int
) -> float:
    """
    Ultra-relativistic form (1 - eps/2E)(m_i^2 - m_j^2)/E, E the mean of E_i and E_j.

    Approximates analytic_wavenumber; the relative gap shrinks like (m/p)^2.
    """
    _check_pair(scenario, i, j)
    si, sj = scenario.states[i], scenario.states[j]
    energy = 0.5 * (si.energy + sj.energy)
    return (1 - detection.threshold / (2 * energy)) * (si.mass**2 - sj.mass**2) / energy


def _kernel_scale(scenario: OscillationScenario, detection: DetectionModel) -> float:
    """a v^2 / (2 sigma^2): how far the kernel pulls the absorbed energy below the packet energy."""
    offsets = detection.saddle_offsets
    if offsets.size == 0:
        return math.inf
    mean_v2 = float(np.mean(scenario.velocities**2))
    return float(np.min(offsets)) * mean_v2 / (2 * scenario.sigma**2)


def effective_detection_energy(scenario: OscillationScenario, detection: DetectionModel) -> float:
    """Dominant absorbed energy max(eps, E_mean - a v^2 / (2 sigma^2))."""
    mean_energy = float(np.mean(scenario.energies))
    return max(detection.threshold, mean_energy - _kernel_scale(scenario, detection))


def effective_wavenumber(
    scenario: OscillationScenario, detection: DetectionModel, i: int, j: int
) -> float:
    """Interference wavenumber at the dominant absorbed energy."""
    return wavenumber_at_energy(scenario, effective_detection_energy(scenario, detection), i, j)


def pinning_margin(scenario: OscillationScenario, detection: DetectionModel) -> float:
    """
    a v^2 / (2 sigma^2) - (E_mean - eps).

    Positive when the kernel pins the absorbed energy at the threshold, where
    analytic_wavenumber applies; negative when energy is conserved and the
    interference follows the textbook wavenumber.
    """
    mean_energy = float(np.mean(scenario.energies))
    return _kernel_scale(scenario, detection) - (mean_energy - detection.threshold)
