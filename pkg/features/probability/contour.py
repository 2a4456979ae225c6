#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Deformed integration contour for the lag variable s."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigurationError
from features.oscillation.oscillation_model import DetectionModel, OscillationScenario
from utils.quadrature import composite_rule


@dataclass(frozen=True)
class SQuadrature:
    """Step and range controls for the s-integral."""

    nodes_per_panel: int = 16
    tol: float = 1e-6
    max_refinements: int = 8
    tilt: float = 0.5
    decay_target: float = 40.0
    max_extensions: int = 4

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise ConfigurationError("quadrature tolerance must lie in (0, 1)")
        if not 0 <= self.tilt < 1:
            raise ConfigurationError("contour tilt must lie in [0, 1)")
        if self.nodes_per_panel < 2:
            raise ConfigurationError("nodes_per_panel must be >= 2")


@dataclass(frozen=True, eq=False)
class ContourPlan:
    """
    The path s(u) = branch * u + i (height + tilt * u), u in [0, extent], on both branches.

    Shifting the lag into the upper half-plane leaves the integral unchanged
    as long as the kernel singularities at s = i M delta^2 / 2 stay above the path.
    """

    height: float
    tilt: float
    extent: float
    breakpoints: np.ndarray
    singularity_gap: float
    reference_frequency: float
    panel_limit: float

    def nodes(
        self, breakpoints: Optional[Sequence[float]] = None, order: int = 16
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes in u."""
        return composite_rule(self.breakpoints if breakpoints is None else breakpoints, order)

    def points(self, u: np.ndarray, branch: int) -> Tuple[np.ndarray, complex]:
        """s(u) on the right (+1) or left (-1) branch and the constant ds/du orientation factor."""
        s = branch * u + 1j * (self.height + self.tilt * u)
        return s, complex(1.0, self.tilt * branch)

    def extended(self, factor: float = 2.0) -> "ContourPlan":
        """Same plan reaching factor times further out."""
        extent = self.extent * factor
        edges = list(self.breakpoints)
        while edges[-1] < extent:
            edges.append(min(extent, edges[-1] + self.panel_limit))
        return ContourPlan(
            self.height,
            self.tilt,
            extent,
            np.array(edges),
            self.singularity_gap,
            self.reference_frequency,
            self.panel_limit,
        )

    def describe(self) -> dict:
        """Plain values for the summary record."""
        return {
            "contour_height": self.height,
            "contour_tilt": self.tilt,
            "contour_extent": self.extent,
            "contour_panels": int(len(self.breakpoints) - 1),
            "singularity_gap": self.singularity_gap,
            "reference_frequency": self.reference_frequency,
        }


def contour_plan(
    scenario: OscillationScenario,
    detection: DetectionModel,
    distances: Sequence[float],
    quadrature: SQuadrature,
) -> ContourPlan:
    """
    Choose height, reach and panels of the s-contour.

    The height sits at the Gaussian saddle 2 sigma^2 omega / v^2, capped just
    below the nearest kernel singularity; the reach solves q U^2 + r U = decay_target
    for the Gaussian and threshold-phase decay along the tilted branches.
    """
    energies = scenario.energies
    velocities = scenario.velocities
    sigma2 = scenario.sigma**2
    omega = float(np.max(energies) - detection.threshold)
    if omega <= 0:
        raise ConfigurationError(
            "threshold energy must lie below the particle energies "
            f"(max E = {np.max(energies):g}, threshold = {detection.threshold:g})"
        )
    v_max, v_min = float(np.max(velocities)), float(np.min(velocities))
    offsets = detection.saddle_offsets
    nearest = float(np.min(offsets)) if offsets.size else math.inf
    products = len(detection.product_masses)

    gaussian_height = 2 * sigma2 * omega / v_max**2
    singular_height = nearest - 1.5 * products / omega if products else math.inf
    height = max(0.0, min(gaussian_height, singular_height))
    gap = nearest - height

    residual_frequency = omega - v_max**2 * height / (2 * sigma2)
    spread = float(np.max(energies) - np.min(energies))
    effective_frequency = abs(residual_frequency) + spread + (1.0 / gap if math.isfinite(gap) else 0.0)
    effective_frequency = max(effective_frequency, 1e-12)

    tilt = quadrature.tilt
    linear = tilt * max(residual_frequency, 0.0) - float(np.max(scenario.decay_rates))
    quadratic = (1 - tilt**2) * v_min**2 / (4 * sigma2)
    if quadratic > 0:
        reach = (-linear + math.sqrt(linear**2 + 4 * quadratic * quadrature.decay_target)) / (
            2 * quadratic
        )
    else:
        reach = quadrature.decay_target / max(linear, 1e-12)
    reach += max(distances) * (1 / v_min - 1 / v_max)

    panel_limit = min(math.pi / effective_frequency, reach / 8)
    edges = [0.0]
    step = gap / 4 if gap < 4 * panel_limit else panel_limit
    while edges[-1] < reach:
        edges.append(min(reach, edges[-1] + step))
        step = min(2 * step, panel_limit)

    return ContourPlan(
        height=height,
        tilt=tilt,
        extent=reach,
        breakpoints=np.array(edges),
        singularity_gap=gap,
        reference_frequency=omega,
        panel_limit=panel_limit,
    )
