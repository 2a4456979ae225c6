#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for the interference wavenumber formulas."""

import pytest

from conftest import two_flavor
from core.errors import DomainError
from features.analysis.wavenumbers import (
    analytic_slope,
    analytic_wavenumber,
    effective_detection_energy,
    effective_wavenumber,
    pinning_margin,
    standard_wavenumber,
    threshold_corrected_wavenumber,
    wavenumber_at_energy,
)


def test_zero_threshold_wavenumber_is_twice_the_standard_one(ur2f, ur2f_detection):
    k = analytic_wavenumber(ur2f, ur2f_detection, 0, 1)
    assert k == pytest.approx(-0.003, rel=1e-12)
    assert standard_wavenumber(ur2f, 0, 1) == pytest.approx(-0.0015, rel=1e-12)
    assert k / standard_wavenumber(ur2f, 0, 1) == pytest.approx(2.0, rel=1e-12)


def test_threshold_lowers_the_wavenumber(ur2f, ur2f_detection):
    k = analytic_wavenumber(ur2f, ur2f_detection.with_threshold(2.0), 0, 1)
    assert k == pytest.approx(-0.0027, rel=1e-4)


def test_wavenumbers_are_antisymmetric(ur2f, ur2f_detection):
    detection = ur2f_detection.with_threshold(1.3)
    assert analytic_wavenumber(ur2f, detection, 1, 0) == -analytic_wavenumber(ur2f, detection, 0, 1)
    assert standard_wavenumber(ur2f, 1, 0) == -standard_wavenumber(ur2f, 0, 1)
    assert analytic_slope(ur2f, 1, 0) == -analytic_slope(ur2f, 0, 1)


def test_slope_matches_a_finite_difference(ur2f):
    h = 0.5
    difference = (wavenumber_at_energy(ur2f, 3.0 + h, 0, 1) - wavenumber_at_energy(ur2f, 3.0 - h, 0, 1)) / (2 * h)
    assert analytic_slope(ur2f, 0, 1) == pytest.approx(difference, rel=1e-8)
    assert analytic_slope(ur2f, 0, 1) == pytest.approx(1.5e-4, rel=1e-3)


def test_threshold_corrected_form(ur2f, ur2f_detection):
    assert threshold_corrected_wavenumber(ur2f, ur2f_detection, 0, 1) == pytest.approx(-0.0029996, rel=1e-5)
    corrected = threshold_corrected_wavenumber(ur2f, ur2f_detection.with_threshold(2.0), 0, 1)
    assert corrected == pytest.approx(-0.0026997, rel=1e-5)


def test_threshold_corrected_gap_shrinks_like_mass_over_momentum_squared(ur2f_detection):
    def gap(momentum):
        scenario = two_flavor([0.1, 0.2], [momentum, momentum], 50.0)
        exact = analytic_wavenumber(scenario, ur2f_detection, 0, 1)
        return abs(threshold_corrected_wavenumber(scenario, ur2f_detection, 0, 1) / exact - 1)

    assert 50 < gap(10.0) / gap(100.0) < 200


@pytest.mark.parametrize("pair", [(0, 0), (0, 2), (-1, 1)])
def test_pair_domain(ur2f, ur2f_detection, pair):
    with pytest.raises(DomainError):
        analytic_wavenumber(ur2f, ur2f_detection, *pair)
    with pytest.raises(DomainError):
        standard_wavenumber(ur2f, *pair)


def test_unpinned_kernel_conserves_energy(ur2f, ur2f_detection):
    assert pinning_margin(ur2f, ur2f_detection) == pytest.approx(-9.99, abs=0.01)
    assert effective_detection_energy(ur2f, ur2f_detection) == pytest.approx(9.9913, abs=1e-3)
    k = effective_wavenumber(ur2f, ur2f_detection, 0, 1)
    assert k == pytest.approx(standard_wavenumber(ur2f, 0, 1), rel=2e-3)


def test_pinned_kernel_absorbs_at_the_threshold(ur2f_pinned, pinned_detection):
    assert pinning_margin(ur2f_pinned, pinned_detection) == pytest.approx(239.9, abs=0.1)
    assert effective_detection_energy(ur2f_pinned, pinned_detection) == 0.0
    assert effective_wavenumber(ur2f_pinned, pinned_detection, 0, 1) == analytic_wavenumber(
        ur2f_pinned, pinned_detection, 0, 1
    )
