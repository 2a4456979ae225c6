#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Time-unresolved detection density along a distance grid."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.background.coordinator import ParallelCoordinator
from core.errors import AccuracyError, ConfigurationError, OracleBudgetError
from core.events.bus import Event, EventType, event_bus
from features.oscillation.kernel import log_kernel_saddle
from features.oscillation.oscillation_model import (
    DetectionModel,
    OscillationScenario,
    log_gaussian_components,
)
from features.probability.contour import ContourPlan, SQuadrature, contour_plan
from features.probability.pair_overlap import default_lower_limit, log_pair_overlap
from utils.quadrature import halve_panels, uniform_rule

logger = logging.getLogger(__name__)

WINDOW_SIGMAS = 8.0
IMAGINARY_TOL = 1e-9
NEGATIVE_TOL = 1e-9
# A pair whose node sum cancels below this fraction of its absolute mass has lost all digits
CANCELLATION_LIMIT = 1e-10
ORACLE_BUDGET = 100_000_000
ORACLE_CHUNK = 2_000_000


class CurveMethod(str, Enum):
    """How a detection curve was produced."""

    AMPLITUDE_SUM = "amplitude_sum"
    EQUAL_TIME = "equal_time"
    COMPONENT_ARRIVAL = "component_arrival"
    TIME_AVERAGED = "time_averaged"


@dataclass(frozen=True)
class WindowPolicy:
    """Upper detection-time limit: automatic (t_final None) or an explicit T."""

    t_final: Optional[float] = None
    stability_tol: float = 1e-3
    max_doublings: int = 6

    def __post_init__(self):
        if self.t_final is not None and not self.t_final > 0:
            raise ConfigurationError(f"window T must be > 0, got {self.t_final}")

    @property
    def is_auto(self) -> bool:
        return self.t_final is None

    @classmethod
    def auto(cls) -> "WindowPolicy":
        return cls()

    @classmethod
    def explicit(cls, t_final: float) -> "WindowPolicy":
        return cls(t_final=float(t_final))

    def describe(self) -> str:
        return "auto" if self.is_auto else format(self.t_final, ".17g")


def auto_window(scenario: OscillationScenario, distances: Sequence[float]) -> float:
    """Starting T for the automatic window: the slowest packet has passed the farthest detector."""
    return (float(np.max(distances)) + WINDOW_SIGMAS * scenario.sigma) / float(
        np.min(scenario.velocities)
    )


@dataclass(frozen=True, eq=False)
class DensityRequest:
    """Everything one detection-density evaluation depends on."""

    scenario: OscillationScenario
    detection: DetectionModel
    flavor: int
    distances: np.ndarray
    window: WindowPolicy = field(default_factory=WindowPolicy)
    quadrature: SQuadrature = field(default_factory=SQuadrature)
    workers: int = 1

    def __post_init__(self):
        distances = np.array(self.distances, dtype=float).reshape(-1)
        if distances.size == 0:
            raise ConfigurationError("distance grid is empty")
        if not np.all(np.isfinite(distances)) or np.any(distances < 0):
            raise ConfigurationError("distances must be finite and >= 0")
        if np.any(np.diff(distances) <= 0):
            raise ConfigurationError("distances must be strictly increasing")
        distances.setflags(write=False)
        object.__setattr__(self, "distances", distances)

        self.scenario.check_flavor(self.flavor)
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        min_energy = float(np.min(self.scenario.energies))
        if not self.detection.threshold < min_energy:
            raise ConfigurationError(
                f"threshold {self.detection.threshold:g} must lie below every particle energy "
                f"(min E = {min_energy:g})"
            )
        if not self.window.is_auto:
            latest = float(np.max(distances) / np.min(self.scenario.velocities))
            if not self.window.t_final > latest:
                raise ConfigurationError(
                    f"window T = {self.window.t_final:g} must exceed max(L)/min(v) = {latest:g}"
                )
        if self.detection.localization > self.scenario.sigma / 10:
            logger.warning(
                "localization delta = %g exceeds sigma/10 = %g; the envelope is not resolved",
                self.detection.localization,
                self.scenario.sigma / 10,
            )


@dataclass(eq=False)
class DetectionCurve:
    """
    A sampled density over distance, normalized to unit maximum.

    raw_mantissa * exp(raw_log_scale) is the unnormalized density when the
    producer kept it; the split form survives magnitudes like exp(-10^4).
    """

    distances: np.ndarray
    values: np.ndarray
    method: CurveMethod
    metadata: Dict[str, Any] = field(default_factory=dict)
    raw_mantissa: Optional[np.ndarray] = None
    raw_log_scale: Optional[np.ndarray] = None

    def raw_log_values(self) -> np.ndarray:
        """log of the unnormalized density, -inf where it vanishes."""
        if self.raw_mantissa is None or self.raw_log_scale is None:
            raise ConfigurationError(f"{self.method.value} curve carries no raw density")
        out = np.full(self.raw_mantissa.shape, -np.inf)
        positive = self.raw_mantissa > 0
        out[positive] = np.log(self.raw_mantissa[positive]) + self.raw_log_scale[positive]
        return out

    def to_rows(self) -> List[Tuple[float, float]]:
        return [(float(x), float(y)) for x, y in zip(self.distances, self.values)]


def normalize_to_unit_max(values) -> np.ndarray:
    """Scale to max 1; an all-zero curve stays zero."""
    values = np.asarray(values, dtype=float)
    peak = float(np.max(values)) if values.size else 0.0
    if not peak > 0:
        return np.zeros(values.shape)
    return values / peak


def normalize_log_curve(mantissa, log_scale) -> np.ndarray:
    """Normalize mantissa * exp(log_scale) without leaving log space."""
    mantissa = np.asarray(mantissa, dtype=float)
    logs = np.full(mantissa.shape, -np.inf)
    positive = mantissa > 0
    if not np.any(positive):
        return np.zeros(mantissa.shape)
    logs[positive] = np.log(mantissa[positive]) + np.asarray(log_scale, dtype=float)[positive]
    return np.exp(logs - np.max(logs))


@dataclass
class _PointResult:
    mantissa: float
    log_scale: float
    imaginary_residual: float
    refinements: int
    panels: int
    clamped: bool


def _coefficient_pairs(request: DensityRequest) -> List[Tuple[int, int, complex]]:
    """Ordered pairs (i, j) with log(c_i conj(c_j)) for nonzero coefficients."""
    c = request.scenario.coefficients(request.flavor)
    pairs = []
    for i in range(c.size):
        for j in range(c.size):
            product = c[i] * np.conj(c[j])
            if product != 0:
                pairs.append((i, j, complex(np.log(complex(product)))))
    return pairs


def _log_integrand(request, pairs, distance, lower, upper, s, orientation) -> np.ndarray:
    """Per-pair log of c_i conj(c_j) G_ij(s) F(s) exp(-i eps s) ds/du, shape (pairs, nodes)."""
    common = (
        log_kernel_saddle(request.detection, s)
        - 1j * request.detection.threshold * s
        + np.log(orientation)
    )
    return np.array(
        [
            log_c + log_pair_overlap(request.scenario, i, j, distance, s, lower, upper) + common
            for i, j, log_c in pairs
        ]
    )


def _integrate(request, pairs, plan, distance, lower, upper, breakpoints, scale=None):
    """Sum both contour branches; returns (scale, per-pair sums, per-pair absolute mass, tail)."""
    u, w = plan.nodes(breakpoints, request.quadrature.nodes_per_panel)
    logs = []
    for branch in (1, -1):
        s, orientation = plan.points(u, branch)
        logs.append(_log_integrand(request, pairs, distance, lower, upper, s, orientation))
    logs = np.stack(logs)
    peak = float(np.max(logs.real))
    if scale is None:
        scale = peak
    terms = np.exp(logs - scale) * w
    sums = terms.sum(axis=(0, 2))
    mass = np.abs(terms).sum(axis=(0, 2))
    tail = float(np.max(logs.real[..., -1])) - peak
    return scale, sums, mass, tail


def _density_at(request, pairs, plan: ContourPlan, distance: float, upper: Optional[float]):
    """Contour integral at one distance, refined until stable."""
    quad = request.quadrature
    log_constant = math.log(request.detection.overall_constant)
    if not pairs:
        return _PointResult(0.0, 0.0, 0.0, 0, 0, False)
    lower = default_lower_limit(request.scenario, distance)

    for _ in range(quad.max_extensions + 1):
        scale, sums, mass, tail = _integrate(
            request, pairs, plan, distance, lower, upper, plan.breakpoints
        )
        if tail < -0.5 * quad.decay_target:
            break
        plan = plan.extended()
    else:
        raise AccuracyError(
            "s-contour integrand did not decay within the contour reach",
            diagnostics={"L": distance, "extent": plan.extent, "tail": tail},
        )

    edges = plan.breakpoints
    total = complex(np.sum(sums))
    for refinement in range(1, quad.max_refinements + 1):
        edges = halve_panels(edges)
        _, refined_sums, mass, _ = _integrate(
            request, pairs, plan, distance, lower, upper, edges, scale
        )
        refined = complex(np.sum(refined_sums))
        magnitude = float(np.sum(np.abs(refined_sums)))
        change = abs(refined - total)
        previous, total, sums = total, refined, refined_sums
        if change <= quad.tol * magnitude:
            break
    else:
        raise AccuracyError(
            "s-quadrature did not reach the requested tolerance",
            previous=previous,
            current=total,
            diagnostics={"L": distance, "panels": len(edges) - 1, "tol": quad.tol},
        )

    ratio = np.abs(sums) / np.where(mass > 0, mass, 1.0)
    if np.any(mass > 0) and np.all(ratio[mass > 0] < CANCELLATION_LIMIT):
        raise AccuracyError(
            "s-integral lost its precision to cancellation; widen the time window",
            diagnostics={"L": distance, "cancellation": float(np.max(ratio))},
        )

    residual = abs(total.imag) / magnitude if magnitude > 0 else 0.0
    if residual > IMAGINARY_TOL:
        logger.warning(
            "imaginary residual %.3g of the density at L = %g exceeds %g",
            residual,
            distance,
            IMAGINARY_TOL,
        )
    value = total.real
    clamped = False
    if value < -NEGATIVE_TOL * magnitude:
        logger.warning("negative density %.3g at L = %g clamped to 0", value / magnitude, distance)
        clamped = True
    if value <= NEGATIVE_TOL * magnitude:
        value = 0.0
    return _PointResult(
        mantissa=value,
        log_scale=scale + log_constant,
        imaginary_residual=residual,
        refinements=refinement,
        panels=len(edges) - 1,
        clamped=clamped,
    )


def _evaluate(request, pairs, plan, upper, coordinator) -> List[_PointResult]:
    return coordinator.map_ordered(
        lambda distance: _density_at(request, pairs, plan, float(distance), upper),
        request.distances,
        stage="density",
    )


def _resolve_window(request, pairs, plan, coordinator):
    """Evaluate at the explicit T, or double the automatic T until the curve is stable."""
    window = request.window
    if not window.is_auto:
        return _evaluate(request, pairs, plan, window.t_final, coordinator), window.t_final, 0

    t_final = auto_window(request.scenario, request.distances)
    try:
        points = _evaluate(request, pairs, plan, t_final, coordinator)
        values = normalize_log_curve(
            [p.mantissa for p in points], [p.log_scale for p in points]
        )
    except AccuracyError as e:
        logger.debug("window T = %g too short: %s", t_final, e)
        points, values = None, None

    for doubling in range(1, window.max_doublings + 1):
        t_final *= 2
        event_bus.publish(Event(EventType.WINDOW_EXTENDED, {"t_final": t_final}))
        try:
            refined = _evaluate(request, pairs, plan, t_final, coordinator)
        except AccuracyError as e:
            logger.debug("window T = %g too short: %s", t_final, e)
            points, values = None, None
            continue
        refined_values = normalize_log_curve(
            [p.mantissa for p in refined], [p.log_scale for p in refined]
        )
        stable = values is not None and bool(
            np.all(
                np.abs(refined_values - values)
                <= window.stability_tol * np.maximum(np.abs(refined_values), 1e-3)
            )
        )
        points, values = refined, refined_values
        if stable:
            return points, t_final, doubling
    raise AccuracyError(
        "detection density did not stabilize under window doubling",
        diagnostics={"t_final": t_final, "doublings": window.max_doublings},
    )


def detection_density(
    request: DensityRequest, coordinator: Optional[ParallelCoordinator] = None
) -> DetectionCurve:
    """
    Detection density summed over unobserved detection times.

    p(L) = K int ds F(s) exp(-i eps s) sum_ij c_i conj(c_j) G_ij(s), evaluated on
    the deformed contour in log space and normalized to unit maximum.

    Args:
        request: Scenario, detection model, flavor, distances, window and quadrature
        coordinator: Thread pool for the distance grid (sequential by default)

    Returns:
        Normalized curve with raw mantissa/log-scale and quadrature metadata
    """
    coordinator = coordinator or ParallelCoordinator(request.workers)
    pairs = _coefficient_pairs(request)
    plan = contour_plan(request.scenario, request.detection, request.distances, request.quadrature)
    points, t_final, doublings = _resolve_window(request, pairs, plan, coordinator)

    mantissa = np.array([p.mantissa for p in points])
    log_scale = np.array([p.log_scale for p in points])
    metadata = {
        "method": CurveMethod.AMPLITUDE_SUM.value,
        "flavor": request.flavor,
        "kernel": "saddle",
        "quadrature_tol": request.quadrature.tol,
        "nodes_per_panel": request.quadrature.nodes_per_panel,
        "window": request.window.describe(),
        "t_final": t_final,
        "window_doublings": doublings,
        "lower_limit": f"0 below {6 * request.scenario.sigma:g}, -inf beyond",
        "max_imaginary_residual": max(p.imaginary_residual for p in points),
        "max_refinements": max(p.refinements for p in points),
        "max_panels": max(p.panels for p in points),
        "clamped_points": sum(1 for p in points if p.clamped),
        "overall_constant": request.detection.overall_constant,
    }
    metadata.update(plan.describe())
    curve = DetectionCurve(
        distances=request.distances.copy(),
        values=normalize_log_curve(mantissa, log_scale),
        method=CurveMethod.AMPLITUDE_SUM,
        metadata=metadata,
        raw_mantissa=mantissa,
        raw_log_scale=log_scale,
    )
    event_bus.publish(Event(EventType.CURVE_DONE, {"method": curve.method.value}))
    return curve


def detection_density_2d_oracle(
    request: DensityRequest, budget: int = ORACLE_BUDGET
) -> DetectionCurve:
    """
    Brute-force density on the real axis.

    Gauss-Legendre in both detection times t, t' over [0, T]:
    K sum_{t,t'} A(t) conj(A(t')) F(t' - t) exp(-i eps (t' - t)).
    Shares no closed form and no contour with detection_density, so it only
    agrees where the real-axis sum keeps its digits (threshold close to the
    energies, small M delta^2). The window must be explicit; grids over budget
    (t, t') node pairs are refused with a shorter T suggested.
    """
    if request.window.is_auto:
        raise ConfigurationError("the 2D oracle needs an explicit window T")
    scenario = request.scenario
    detection = request.detection
    t_final = request.window.t_final
    order = request.quadrature.nodes_per_panel

    # The carrier exp(-i E0 t) is moved from the amplitudes onto the kernel
    reference = float(np.mean(scenario.energies))
    frequency = (
        reference
        - detection.threshold
        + float(np.max(scenario.energies) - np.min(scenario.energies))
        + float(np.max(scenario.decay_rates))
    )
    offsets = detection.saddle_offsets
    nearest = float(np.min(offsets)) if offsets.size else math.inf
    panel = min(
        scenario.sigma / (2 * float(np.max(scenario.velocities))),
        math.pi / frequency,
        nearest / 2,
    )
    t_panels = int(math.ceil(t_final / panel))
    n_t = t_panels * order
    if n_t**2 > budget:
        raise OracleBudgetError(
            f"2D oracle needs {n_t**2} node pairs (budget {budget})",
            suggested_T=t_final * math.sqrt(budget / n_t**2),
            nodes=n_t**2,
        )
    t, wt = uniform_rule(0.0, t_final, t_panels, order)

    coefficients = scenario.coefficients(request.flavor)
    active = [i for i in range(coefficients.size) if coefficients[i] != 0]
    n_distances = len(request.distances)
    amplitudes = np.zeros((n_t, n_distances), dtype=complex)
    log_scale = np.zeros(n_distances)
    for column, distance in enumerate(request.distances):
        if not active:
            continue
        logs = log_gaussian_components(scenario, t, float(distance))[:, active] + 1j * reference * t[:, None]
        peak = float(np.max(logs.real))
        amplitudes[:, column] = np.exp(logs - peak) @ coefficients[active]
        log_scale[column] = 2 * peak

    # |F| on the real axis peaks at s = 0
    kernel_peak = float(log_kernel_saddle(detection, 0.0).real)
    weighted = wt[:, None] * amplitudes
    partners = weighted.conj()
    totals = np.zeros(n_distances, dtype=complex)
    rows = max(1, ORACLE_CHUNK // n_t)
    for start in range(0, n_t, rows):
        lag = t[None, :] - t[start:start + rows, None]
        kernel = np.exp(
            log_kernel_saddle(detection, lag) + 1j * (reference - detection.threshold) * lag - kernel_peak
        )
        totals += np.sum(weighted[start:start + rows] * (kernel @ partners), axis=0)

    mantissa = np.maximum(totals.real, 0.0)
    log_scale = log_scale + kernel_peak + math.log(detection.overall_constant)
    return DetectionCurve(
        distances=request.distances.copy(),
        values=normalize_log_curve(mantissa, log_scale),
        method=CurveMethod.AMPLITUDE_SUM,
        metadata={
            "method": CurveMethod.AMPLITUDE_SUM.value,
            "flavor": request.flavor,
            "oracle": "2d",
            "t_final": t_final,
            "t_nodes": n_t,
            "node_pairs": n_t**2,
        },
        raw_mantissa=mantissa,
        raw_log_scale=log_scale,
    )
