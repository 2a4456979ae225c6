#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Damped-sinusoid fits of detection curves."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from core.errors import ConfigurationError, FitError, IndeterminateFrequencyError
from features.analysis.wavenumbers import wavenumber_at_energy
from features.oscillation.oscillation_model import DetectionModel, OscillationScenario
from features.probability.probability_engine import CurveMethod, DetectionCurve

logger = logging.getLogger(__name__)

RESIDUAL_LIMIT = 1e-3
NOISE_FLOOR_MIN = 1e-9
SCAN_LOW, SCAN_HIGH, SCAN_POINTS = 0.25, 4.0, 281
MIN_PERIODS = 2.0
MIN_SAMPLES_PER_PERIOD = 20.0
SLOPE_TOL = 1e-12

Pair = Tuple[int, int]


@dataclass
class OscillationFit:
    """Parameters of sum_i S_i exp(-2 d_i L) + sum_{i<j} 2 exp(-(d_i + d_j) L) Re(T_ij exp(i k_ij L))."""

    amplitudes: np.ndarray
    interference: Dict[Pair, complex]
    wavenumbers: Dict[Pair, float]
    k_fit: float
    k_uncertainty: float
    pair: Pair
    decay_slopes: np.ndarray
    residual: float
    covariance: np.ndarray
    converged: bool
    message: str = ""
    initial_wavenumbers: Dict[Pair, float] = field(default_factory=dict)
    method: Optional[CurveMethod] = None

    def summary(self) -> dict:
        """Plain values for the summary record."""
        return {
            "method": self.method.value if self.method else None,
            "k_fit": self.k_fit,
            "k_uncertainty": self.k_uncertainty,
            "pair": list(self.pair),
            "residual": self.residual,
            "converged": self.converged,
            "message": self.message,
            "amplitudes": [float(a) for a in self.amplitudes],
            "interference": {
                f"{i},{j}": [value.real, value.imag] for (i, j), value in self.interference.items()
            },
            "wavenumbers": {f"{i},{j}": k for (i, j), k in self.wavenumbers.items()},
        }


class _Model:
    """Design of the fit form for fixed slopes, groups and pairs."""

    def __init__(self, distances, slopes, groups, pairs):
        self.L = np.asarray(distances, dtype=float)
        self.slopes = np.asarray(slopes, dtype=float)
        self.groups = groups
        self.pairs = pairs
        self.group_columns = np.array(
            [np.exp(-2 * self.slopes[g[0]] * self.L) for g in groups]
        ).T.reshape(self.L.size, len(groups))
        self.pair_envelopes = [
            2 * np.exp(-(self.slopes[i] + self.slopes[j]) * self.L) for i, j in pairs
        ]

    @property
    def n_linear(self) -> int:
        return len(self.groups) + 2 * len(self.pairs)

    def design(self, wavenumbers) -> np.ndarray:
        """Columns for S_g, then (Re T, Im T) per pair."""
        columns = [self.group_columns]
        for envelope, k in zip(self.pair_envelopes, wavenumbers):
            phase = k * self.L
            columns.append(np.stack([envelope * np.cos(phase), -envelope * np.sin(phase)], axis=1))
        return np.hstack(columns)

    def linear_solve(self, y, wavenumbers) -> Tuple[np.ndarray, float]:
        design = self.design(wavenumbers)
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        residual = design @ coef - y
        return coef, float(residual @ residual)

    def predict(self, params) -> np.ndarray:
        linear, wavenumbers = params[: self.n_linear], params[self.n_linear:]
        return self.design(wavenumbers) @ linear

    def jacobian(self, params) -> np.ndarray:
        linear, wavenumbers = params[: self.n_linear], params[self.n_linear:]
        design = self.design(wavenumbers)
        extra = np.zeros((self.L.size, len(self.pairs)))
        offset = len(self.groups)
        for p, (envelope, k) in enumerate(zip(self.pair_envelopes, wavenumbers)):
            re, im = linear[offset + 2 * p], linear[offset + 2 * p + 1]
            phase = k * self.L
            extra[:, p] = envelope * self.L * (-re * np.sin(phase) - im * np.cos(phase))
        return np.hstack([design, extra])


def _slope_groups(slopes: np.ndarray) -> List[List[int]]:
    groups: List[List[int]] = []
    for index, slope in enumerate(slopes):
        for group in groups:
            reference = slopes[group[0]]
            if abs(slope - reference) <= SLOPE_TOL * max(1.0, abs(reference)):
                group.append(index)
                break
        else:
            groups.append([index])
    return groups


def _split_amplitudes(groups, fitted, weights) -> np.ndarray:
    out = np.zeros(sum(len(g) for g in groups))
    for group, value in zip(groups, fitted):
        share = weights[group]
        total = float(np.sum(share))
        share = share / total if total > 0 else np.full(len(group), 1.0 / len(group))
        out[group] = value * share
    return out


def _initial_wavenumber(scenario, detection, pair, span) -> float:
    energy = detection.threshold if detection is not None else 0.0
    k = wavenumber_at_energy(scenario, energy, *pair)
    if k == 0:
        # Degenerate pair: start four periods across the grid
        k = 8 * math.pi / span
    return k


def _check_sampling(distances: np.ndarray, wavenumbers: Sequence[float], sigma: float) -> None:
    span = float(distances[-1] - distances[0])
    k_max = max(abs(k) for k in wavenumbers)
    periods = span * k_max / (2 * math.pi)
    if periods < MIN_PERIODS:
        logger.warning("L-grid spans %.3g expected periods, fewer than %g", periods, MIN_PERIODS)
    if periods > 0 and (distances.size - 1) / periods < MIN_SAMPLES_PER_PERIOD:
        logger.warning(
            "L-grid has %.3g samples per expected period, fewer than %g",
            (distances.size - 1) / periods,
            MIN_SAMPLES_PER_PERIOD,
        )
    if distances[0] < 6 * sigma:
        logger.warning(
            "L-grid starts at %g, inside 6 sigma = %g where the fit form is approximate",
            distances[0],
            6 * sigma,
        )


def fit_oscillation(
    curve: DetectionCurve,
    scenario: OscillationScenario,
    detection: Optional[DetectionModel] = None,
    initial_wavenumbers: Optional[Dict[Pair, float]] = None,
    init_scale: float = 1.0,
) -> OscillationFit:
    """
    Fit damped exponentials plus damped cosines to a detection curve.

    Args:
        curve: Normalized detection curve
        scenario: Scenario the curve was computed for (decay slopes, coefficients)
        detection: Detection model; its threshold seeds the starting wavenumbers
        initial_wavenumbers: Explicit starting wavenumbers per pair (i, j), i < j
        init_scale: Factor applied to every starting wavenumber

    Returns:
        OscillationFit, with converged False when the residual stays above 1e-3

    Raises:
        IndeterminateFrequencyError: No interference pair, or no oscillation above the noise floor
        FitError: The optimizer failed outright
    """
    L = np.asarray(curve.distances, dtype=float)
    y = np.asarray(curve.values, dtype=float)
    if L.size != y.size or L.size < 3:
        raise ConfigurationError("curve needs at least 3 samples")
    flavor = curve.metadata.get("flavor", scenario.initial_flavor)
    c = scenario.coefficients(flavor)
    slopes = scenario.decay_rates / scenario.velocities
    groups = _slope_groups(slopes)
    pairs = [
        (i, j)
        for i in range(scenario.size)
        for j in range(i + 1, scenario.size)
        if c[i] * np.conj(c[j]) != 0
    ]
    if not pairs:
        raise IndeterminateFrequencyError("curve has no interfering mass-state pair")

    model = _Model(L, slopes, groups, pairs)
    baseline = _Model(L, slopes, groups, [])
    _, baseline_rss = baseline.linear_solve(y, [])
    oscillation = math.sqrt(2 * baseline_rss / L.size)
    noise_floor = max(NOISE_FLOOR_MIN, float(curve.metadata.get("quadrature_tol", 0.0))) * float(
        np.max(np.abs(y))
    )
    if oscillation < 10 * noise_floor:
        raise IndeterminateFrequencyError(
            f"oscillation amplitude {oscillation:.3g} is below 10x the noise floor {noise_floor:.3g}"
        )

    span = float(L[-1] - L[0])
    start = {}
    for pair in pairs:
        if initial_wavenumbers and pair in initial_wavenumbers:
            start[pair] = float(initial_wavenumbers[pair])
        else:
            start[pair] = _initial_wavenumber(scenario, detection, pair, span)
    _check_sampling(L, list(start.values()), scenario.sigma)
    k0 = np.array([start[pair] for pair in pairs]) * init_scale

    best_rho, best_rss = 1.0, math.inf
    for rho in np.geomspace(SCAN_LOW, SCAN_HIGH, SCAN_POINTS):
        _, rss = model.linear_solve(y, k0 * rho)
        if rss < best_rss:
            best_rho, best_rss = float(rho), rss
    linear, _ = model.linear_solve(y, k0 * best_rho)
    x0 = np.concatenate([linear, k0 * best_rho])

    try:
        result = least_squares(
            lambda params: model.predict(params) - y,
            x0,
            jac=model.jacobian,
            method="trf",
            x_scale="jac",
            ftol=1e-15,
            xtol=1e-15,
            gtol=1e-15,
            max_nfev=2000,
        )
    except (ValueError, np.linalg.LinAlgError) as e:
        raise FitError(f"least-squares fit failed: {e}") from e

    params = result.x
    residuals = result.fun
    rss = float(residuals @ residuals)
    rms = math.sqrt(rss / L.size)
    dof = L.size - params.size
    jac = result.jac
    covariance = np.linalg.pinv(jac.T @ jac) * (rss / dof if dof > 0 else 0.0)

    n_groups = len(groups)
    amplitudes = _split_amplitudes(groups, params[:n_groups], np.abs(c) ** 2)
    interference, wavenumbers = {}, {}
    for p, pair in enumerate(pairs):
        re, im = params[n_groups + 2 * p], params[n_groups + 2 * p + 1]
        interference[pair] = complex(re, im)
        wavenumbers[pair] = float(params[model.n_linear + p])
    dominant = max(range(len(pairs)), key=lambda p: abs(interference[pairs[p]]))
    k_index = model.n_linear + dominant
    converged = bool(result.success) and rms <= RESIDUAL_LIMIT
    message = result.message if converged else f"residual {rms:.3g} above {RESIDUAL_LIMIT:g}: {result.message}"
    if not converged:
        logger.warning("oscillation fit did not converge: %s", message)

    return OscillationFit(
        amplitudes=amplitudes,
        interference=interference,
        wavenumbers=wavenumbers,
        k_fit=wavenumbers[pairs[dominant]],
        k_uncertainty=math.sqrt(max(float(covariance[k_index, k_index]), 0.0)),
        pair=pairs[dominant],
        decay_slopes=slopes,
        residual=rms,
        covariance=covariance,
        converged=converged,
        message=str(message),
        initial_wavenumbers=dict(start),
        method=curve.method,
    )


def synthesize_fit_form_curve(
    distances: Sequence[float],
    amplitudes: Sequence[float],
    interference: Dict[Pair, complex],
    wavenumbers: Dict[Pair, float],
    decay_slopes: Optional[Sequence[float]] = None,
    flavor: int = 0,
) -> DetectionCurve:
    """Exact samples of the fit form, not renormalized, for round-trip checks."""
    L = np.asarray(distances, dtype=float)
    amplitudes = np.asarray(amplitudes, dtype=float)
    slopes = np.zeros(amplitudes.size) if decay_slopes is None else np.asarray(decay_slopes, float)
    values = np.zeros(L.shape)
    for amplitude, slope in zip(amplitudes, slopes):
        values += amplitude * np.exp(-2 * slope * L)
    for (i, j), coefficient in interference.items():
        envelope = 2 * np.exp(-(slopes[i] + slopes[j]) * L)
        values += envelope * (coefficient * np.exp(1j * wavenumbers[(i, j)] * L)).real
    return DetectionCurve(
        distances=L,
        values=values,
        method=CurveMethod.AMPLITUDE_SUM,
        metadata={"method": CurveMethod.AMPLITUDE_SUM.value, "flavor": flavor, "synthetic": True},
    )
