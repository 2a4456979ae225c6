#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Closed-form inner time integrals of Gaussian amplitude pairs."""

import math
from typing import Optional

import numpy as np
from scipy.special import erfcx

from features.oscillation.oscillation_model import OscillationScenario

# Below this source-detector distance (in units of sigma) the t = 0 edge is kept
LOWER_LIMIT_SIGMAS = 6.0


def log_erfc(z) -> np.ndarray:
    """Log of the complementary error function for complex z, stable in both half-planes."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.reshape(-1)
    out = np.empty(z.shape, dtype=complex)
    right = z.real >= 0
    zr = z[right]
    out[right] = np.log(erfcx(zr)) - zr**2

    zl = z[~right]
    # erfc(z) = 2 - erfc(-z) and q = log erfc(-z) is safe to evaluate
    q = np.log(erfcx(-zl)) - zl**2
    left = np.empty(zl.shape, dtype=complex)
    small = q.real < 0
    left[small] = np.log(2.0 - np.exp(q[small]))
    big = ~small
    left[big] = q[big] + np.log(2.0 * np.exp(-q[big]) - 1.0)
    out[~right] = left
    return out.reshape(shape)


def log_erfc_difference(z0, z1) -> np.ndarray:
    """log(erfc(z0) - erfc(z1))."""
    z0, z1 = np.broadcast_arrays(np.asarray(z0, dtype=complex), np.asarray(z1, dtype=complex))
    shape = z0.shape
    l0 = log_erfc(z0).reshape(-1)
    l1 = log_erfc(z1).reshape(-1)
    d = l1 - l0
    forward = d.real <= 0
    out = np.empty(d.shape, dtype=complex)
    out[forward] = l0[forward] + np.log1p(-np.exp(d[forward]))
    out[~forward] = l1[~forward] + np.log(np.expm1(-d[~forward]))
    return out.reshape(shape)


def log_add(x, y) -> np.ndarray:
    """log(exp(x) + exp(y)) for complex logs."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    m = np.maximum(x.real, y.real)
    return m + np.log(np.exp(x - m) + np.exp(y - m))


def default_lower_limit(scenario: OscillationScenario, distance: float) -> Optional[float]:
    """t = 0 edge near the source, -infinity once the packet starts >= 6 sigma away."""
    return None if distance >= LOWER_LIMIT_SIGMAS * scenario.sigma else 0.0


def _log_interval(a, b, c, lower, upper) -> np.ndarray:
    """log int_lower^upper exp(-a t^2 + b t + c) dt; None limits are infinite."""
    centre = b / (2 * a)
    root = math.sqrt(a)
    base = b**2 / (4 * a) + c + 0.5 * math.log(math.pi / a) - math.log(2.0)
    if lower is None and upper is None:
        return base + math.log(2.0)
    if lower is None:
        return base + log_erfc(-root * (upper - centre))
    if upper is None:
        return base + log_erfc(root * (lower - centre))
    return base + log_erfc_difference(root * (lower - centre), root * (upper - centre))


def log_pair_overlap(
    scenario: OscillationScenario,
    i: int,
    j: int,
    distance: float,
    s,
    lower: Optional[float] = None,
    upper: Optional[float] = None,
    symmetric: bool = True,
) -> np.ndarray:
    """
    log of the envelope overlap int psi_i(t, L) conj(psi_j)(t + s, L) dt without mixing factors.

    The conjugate is continued analytically, so s may be complex. With
    symmetric=True the window is averaged with its copy shifted by -s, which
    keeps G_ji(-s) = conj(G_ij(s)) exact for finite limits.
    """
    sigma2 = scenario.sigma**2
    si, sj = scenario.states[i], scenario.states[j]
    vi, vj = si.velocity, sj.velocity
    s = np.asarray(s, dtype=complex)

    shifted = distance - vj * s
    a = (vi**2 + vj**2) / (2 * sigma2)
    b = (
        (vi * distance + vj * shifted) / sigma2
        - 1j * (si.energy - sj.energy)
        - (si.decay_rate + sj.decay_rate)
    )
    c = (
        -(distance**2) / (2 * sigma2)
        - shifted**2 / (2 * sigma2)
        + 1j * (si.momentum - sj.momentum) * distance
        + (1j * sj.energy - sj.decay_rate) * s
    )
    log_norm = -0.5 * math.log(math.pi * sigma2)

    direct = _log_interval(a, b, c, lower, upper)
    if not symmetric or (lower is None and upper is None):
        return log_norm + direct
    shifted_lower = None if lower is None else lower - s
    shifted_upper = None if upper is None else upper - s
    mirrored = _log_interval(a, b, c, shifted_lower, shifted_upper)
    return log_norm + log_add(direct, mirrored) - math.log(2.0)


def pair_overlap_G(
    scenario: OscillationScenario,
    flavor: int,
    i: int,
    j: int,
    distance: float,
    s,
    lower: Optional[float] = None,
    upper: Optional[float] = None,
    symmetric: bool = True,
):
    """
    Inner time integral of the (i, j) term of the detection density.

    Args:
        scenario: Oscillation scenario
        flavor: Detected flavor alpha
        i, j: Mass-state indices
        distance: Source-detector distance L
        s: Time lag t' - t (scalar or array)
        lower: Lower time limit (None for -infinity)
        upper: Upper time limit (None for +infinity)
        symmetric: Average the window with its lag-shifted copy

    Returns:
        c_i conj(c_j) int A_i(t, L) conj(A_j)(t + s, L) dt
    """
    c = scenario.coefficients(flavor)
    coefficient = c[i] * np.conj(c[j])
    s_array = np.asarray(s, dtype=complex)
    if coefficient == 0:
        value = np.zeros(s_array.shape, dtype=complex)
    else:
        value = coefficient * np.exp(
            log_pair_overlap(scenario, i, j, distance, s_array, lower, upper, symmetric)
        )
    return complex(value) if value.ndim == 0 else value
