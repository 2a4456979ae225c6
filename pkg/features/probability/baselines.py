#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Detection curves of the standard treatments, for comparison with the amplitude sum."""

from typing import Optional, Sequence

import numpy as np

from core.errors import ConfigurationError
from features.oscillation.oscillation_model import (
    OscillationScenario,
    gaussian_amplitude,
    log_gaussian_components,
)
from features.probability.pair_overlap import log_pair_overlap
from features.probability.probability_engine import (
    CurveMethod,
    DetectionCurve,
    auto_window,
    normalize_to_unit_max,
)


def _grid(distances: Sequence[float]) -> np.ndarray:
    grid = np.array(distances, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ConfigurationError("distance grid is empty")
    if np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise ConfigurationError("distances must be >= 0 and strictly increasing")
    return grid


def baseline_equal_time(
    scenario: OscillationScenario, flavor: int, distances: Sequence[float]
) -> DetectionCurve:
    """|A(t = L, L)|^2: detection at the classical arrival time of a light-speed particle."""
    grid = _grid(distances)
    raw = np.abs(gaussian_amplitude(scenario, flavor, grid, grid)) ** 2
    return DetectionCurve(
        distances=grid,
        values=normalize_to_unit_max(raw),
        method=CurveMethod.EQUAL_TIME,
        metadata={"method": CurveMethod.EQUAL_TIME.value, "flavor": flavor},
    )


def baseline_component_arrival(
    scenario: OscillationScenario, flavor: int, distances: Sequence[float]
) -> DetectionCurve:
    """|sum_i c_i psi_i(L / v_i, L)|^2: every mass component taken at its own arrival time."""
    grid = _grid(distances)
    c = scenario.coefficients(flavor)
    amplitude = np.zeros(grid.shape, dtype=complex)
    for i, velocity in enumerate(scenario.velocities):
        if c[i] == 0:
            continue
        logs = log_gaussian_components(scenario, grid / velocity, grid)[:, i]
        amplitude += c[i] * np.exp(logs)
    return DetectionCurve(
        distances=grid,
        values=normalize_to_unit_max(np.abs(amplitude) ** 2),
        method=CurveMethod.COMPONENT_ARRIVAL,
        metadata={"method": CurveMethod.COMPONENT_ARRIVAL.value, "flavor": flavor},
    )


def baseline_time_averaged(
    scenario: OscillationScenario,
    flavor: int,
    distances: Sequence[float],
    t_final: Optional[float] = None,
) -> DetectionCurve:
    """
    int_0^T |A(t, L)|^2 dt, the probability averaged over detection time.

    The t-integral of every pair of Gaussian components is the pair overlap
    at zero lag, so no t-quadrature is needed.
    """
    grid = _grid(distances)
    t_final = auto_window(scenario, grid) if t_final is None else float(t_final)
    if not t_final > 0:
        raise ConfigurationError(f"window T must be > 0, got {t_final}")
    c = scenario.coefficients(flavor)
    raw = np.zeros(grid.shape)
    for i in range(c.size):
        for j in range(c.size):
            coefficient = c[i] * np.conj(c[j])
            if coefficient == 0:
                continue
            for index, distance in enumerate(grid):
                overlap = log_pair_overlap(
                    scenario, i, j, float(distance), 0.0, lower=0.0, upper=t_final, symmetric=False
                )
                raw[index] += (coefficient * np.exp(complex(overlap))).real
    raw = np.maximum(raw, 0.0)
    return DetectionCurve(
        distances=grid,
        values=normalize_to_unit_max(raw),
        method=CurveMethod.TIME_AVERAGED,
        metadata={
            "method": CurveMethod.TIME_AVERAGED.value,
            "flavor": flavor,
            "t_final": t_final,
        },
    )
