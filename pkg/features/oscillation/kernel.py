#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Detection kernel F(s) of the product particles."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import AccuracyError, ConfigurationError
from features.oscillation.oscillation_model import DetectionModel
from utils.quadrature import uniform_rule


def log_kernel_saddle(model: DetectionModel, s) -> np.ndarray:
    """
    Principal-branch log of the saddle-point kernel.

    log F(s) = sum_n 3/2 Log(M_n / (2 pi i (s - i a_n))), a_n = M_n delta^2 / 2.
    Valid for complex s off the cuts s = i(a_n + r), r >= 0.
    """
    s = np.asarray(s, dtype=complex)
    total = np.zeros(s.shape, dtype=complex)
    for mass, offset in zip(model.product_masses, model.saddle_offsets):
        total += 1.5 * np.log(mass / (2j * math.pi * (s - 1j * offset)))
    return total


def kernel_F_saddle(model: DetectionModel, s):
    """Saddle-point kernel prod_n (M_n / (2 pi i (s - i M_n delta^2 / 2)))^(3/2)."""
    value = np.exp(log_kernel_saddle(model, s))
    return complex(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class KernelQuadrature:
    """Radial momentum quadrature controls for the numeric kernel."""

    decay_target: float = 45.0
    nodes_per_panel: int = 16
    min_panels: int = 8
    tol: float = 1e-10
    max_doublings: int = 14


def _radial_integral(mass: float, delta: float, s: float, quad: KernelQuadrature) -> complex:
    # exp(-delta^2 p^2 / 4) drops below exp(-decay_target) at p_max
    p_max = 2.0 * math.sqrt(quad.decay_target) / delta
    kinetic_max = p_max**2 / (math.hypot(mass, p_max) + mass)
    panels = max(quad.min_panels, int(math.ceil(kinetic_max * abs(s) / math.pi)))

    def integrate(n_panels: int) -> complex:
        p, w = uniform_rule(0.0, p_max, n_panels, quad.nodes_per_panel)
        kinetic = p**2 / (np.sqrt(mass**2 + p**2) + mass)
        integrand = p**2 * np.exp(-1j * kinetic * s - 0.25 * delta**2 * p**2)
        return 4 * math.pi * complex(np.sum(w * integrand))

    value = integrate(panels)
    for _ in range(quad.max_doublings):
        panels *= 2
        refined = integrate(panels)
        previous, value = value, refined
        if abs(refined - previous) <= quad.tol * abs(refined):
            return refined
    raise AccuracyError(
        "numeric kernel quadrature did not converge",
        previous=previous,
        current=value,
        diagnostics={"mass": mass, "s": s, "panels": panels},
    )


def kernel_F_numeric(model: DetectionModel, s, quadrature: Optional[KernelQuadrature] = None):
    """
    Kernel from the free product-particle propagator, for real s.

    F(s) = prod_n 4 pi int_0^inf p^2 exp(-i (sqrt(M_n^2 + p^2) - M_n) s - delta^2 p^2 / 4) dp.
    The Gaussian localization enters twice, hence delta^2 p^2 / 4; in the
    nonrelativistic limit this equals (2 pi)^3 times kernel_F_saddle.
    """
    quad = quadrature or KernelQuadrature()
    s_array = np.asarray(s)
    if np.iscomplexobj(s_array) and np.any(np.imag(s_array) != 0):
        raise ConfigurationError("numeric kernel is evaluated on real s only")
    s_real = np.real(s_array).astype(float)
    out = np.ones(s_real.shape, dtype=complex)
    for index in np.ndindex(s_real.shape):
        for mass in model.product_masses:
            out[index] *= _radial_integral(mass, model.localization, float(s_real[index]), quad)
    return complex(out) if out.ndim == 0 else out
