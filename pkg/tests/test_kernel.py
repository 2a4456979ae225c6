#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for the detection kernels."""

import math

import numpy as np
import pytest

from core.errors import ConfigurationError
from features.oscillation.kernel import kernel_F_numeric, kernel_F_saddle, log_kernel_saddle
from features.oscillation.oscillation_model import DetectionModel


def model(mass: float = 100.0, delta: float = 1.0, strict: bool = True) -> DetectionModel:
    return DetectionModel(threshold=0.0, product_masses=(mass,), localization=delta, strict=strict)


def test_saddle_kernel_at_zero_lag():
    value = kernel_F_saddle(model(), 0.0)
    assert value.real == pytest.approx(math.pi**-1.5, rel=1e-12)
    assert value.real == pytest.approx(0.1796, abs=1e-4)
    assert abs(value.imag) < 1e-15


def test_numeric_kernel_at_zero_lag():
    # (2 pi)^3 times the saddle value: (4 pi / delta^2)^(3/2)
    assert kernel_F_numeric(model(1000.0), 0.0).real == pytest.approx(8 * math.pi**1.5, rel=1e-8)
    assert kernel_F_numeric(model(1000.0, 0.5), 0.0).real == pytest.approx(
        (4 * math.pi / 0.25) ** 1.5, rel=1e-8
    )


@pytest.mark.parametrize("s", [0.1, 1.0, 10.0])
def test_conjugate_symmetry(s):
    m = model()
    assert kernel_F_saddle(m, -s) == pytest.approx(np.conj(kernel_F_saddle(m, s)), rel=1e-14)
    assert kernel_F_numeric(m, -s) == pytest.approx(np.conj(kernel_F_numeric(m, s)), rel=1e-12)


def test_saddle_modulus_decreases_with_lag():
    m = model()
    s = np.linspace(0.0, 5000.0, 201)
    modulus = np.abs(kernel_F_saddle(m, s))
    assert np.all(np.diff(modulus) < 0)
    # |F| ~ |s|^(-3/2) far beyond M delta^2 / 2 = 50
    ratio = modulus[-1] / np.abs(kernel_F_saddle(m, 2500.0))
    assert ratio == pytest.approx(2**-1.5, rel=1e-3)


def test_principal_branch_is_continuous_along_the_real_axis():
    m = DetectionModel(threshold=0.0, product_masses=(100.0, 40.0), localization=1.0)
    s = np.linspace(-1e3, 1e3, 20001)
    values = kernel_F_saddle(m, s)
    assert np.max(np.abs(values[1:] / values[:-1] - 1)) < 0.05
    logs = log_kernel_saddle(m, s)
    assert np.max(np.abs(np.diff(logs.imag))) < 0.05


@pytest.mark.parametrize("scale", [0.5, 1.0, 2.0])
def test_saddle_and_numeric_shapes_agree_in_the_valid_regime(scale):
    m = model(100.0)
    s = scale * m.saddle_offsets[0]
    saddle = kernel_F_saddle(m, s) / kernel_F_saddle(m, 0.0)
    numeric = kernel_F_numeric(m, s) / kernel_F_numeric(m, 0.0)
    assert abs(numeric - saddle) <= 0.01 * abs(saddle)


def test_shapes_disagree_when_the_product_is_not_localized():
    m = model(2.0, strict=False)
    deviations = []
    for scale in (0.5, 1.0, 2.0):
        s = scale * m.saddle_offsets[0]
        saddle = kernel_F_saddle(m, s) / kernel_F_saddle(m, 0.0)
        numeric = kernel_F_numeric(m, s) / kernel_F_numeric(m, 0.0)
        deviations.append(abs(numeric - saddle) / abs(saddle))
    assert max(deviations) > 0.01


def test_numeric_kernel_needs_real_lags():
    with pytest.raises(ConfigurationError):
        kernel_F_numeric(model(), 1.0 + 0.5j)
