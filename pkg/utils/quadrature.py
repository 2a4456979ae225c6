#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Composite Gauss-Legendre rules."""

from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss


@lru_cache(maxsize=32)
def _reference_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_rule(
    breakpoints: Sequence[float], order: int = 16
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights on consecutive panels.

    Args:
        breakpoints: Increasing panel edges
        order: Nodes per panel

    Returns:
        (nodes, weights) flattened panel by panel
    """
    edges = np.asarray(breakpoints, dtype=float)
    if edges.size < 2:
        return np.zeros(0), np.zeros(0)
    x, w = _reference_rule(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def uniform_rule(
    lower: float, upper: float, panels: int, order: int = 16
) -> Tuple[np.ndarray, np.ndarray]:
    """Composite rule with equal panels on [lower, upper]."""
    return composite_rule(np.linspace(lower, upper, panels + 1), order)


def halve_panels(breakpoints: Sequence[float]) -> np.ndarray:
    """Split every panel in two."""
    edges = np.asarray(breakpoints, dtype=float)
    mids = 0.5 * (edges[1:] + edges[:-1])
    out = np.empty(2 * edges.size - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out
