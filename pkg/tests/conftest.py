#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Shared fixtures: canonical scenarios, detection models and random finite systems."""

import math
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

import numpy as np
import pytest

from features.measure.measure_core import FiniteSystem, SplitSystem
from features.oscillation.oscillation_model import (
    DetectionModel,
    MassEigenstate,
    MixingMatrix,
    OscillationScenario,
)

ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = ROOT / "scenarios"

# Last L of the UR-2F grid: six periods of 2 pi / 0.003 after L = 300
UR2F_L_STOP = 12866.370614359172


class RandomSystemFactory:
    """Random weak-coupling systems H = H0 + g H_I with [H0, Q] = 0."""

    def __init__(self, seed: int = 20240601):
        self.rng = np.random.default_rng(seed)

    def _complex(self, *shape) -> np.ndarray:
        return self.rng.normal(size=shape) + 1j * self.rng.normal(size=shape)

    def hermitian(self, dim: int, norm: float = 1.0) -> np.ndarray:
        """Random Hermitian matrix with the given spectral norm."""
        a = self._complex(dim, dim)
        h = 0.5 * (a + a.conj().T)
        return h * (norm / np.linalg.norm(h, 2))

    def unit_vector(self, basis: np.ndarray) -> np.ndarray:
        """Random unit vector in the span of the basis columns."""
        v = self._complex(basis.shape[1])
        return basis @ (v / np.linalg.norm(v))

    def split_system(
        self, dim: int = 4, detected: int = 2, outcomes: int = 2, coupling: float = 0.09
    ) -> SplitSystem:
        """||H0|| = 0.9, ||g H_I|| = coupling, outcomes splitting the detected subspace."""
        frame, _ = np.linalg.qr(self._complex(dim, dim))
        q_basis = frame[:, : dim - detected]
        p_basis = frame[:, dim - detected :]
        h0 = (
            q_basis @ self.hermitian(dim - detected, 0.9) @ q_basis.conj().T
            + p_basis @ self.hermitian(detected, 0.9) @ p_basis.conj().T
        )
        groups = np.array_split(np.arange(detected), outcomes)
        projectors = [p_basis[:, g] @ p_basis[:, g].conj().T for g in groups]
        return SplitSystem.build(
            h0,
            self.hermitian(dim, 1.0),
            coupling,
            sum(projectors),
            projectors,
            self.unit_vector(q_basis),
        )

    def system(self) -> FiniteSystem:
        """Random dimension (2..8), detected subspace and outcome split."""
        dim = int(self.rng.integers(2, 9))
        detected = int(self.rng.integers(1, dim))
        outcomes = int(self.rng.integers(1, detected + 1))
        return self.split_system(dim, detected, outcomes).base

    def q_state(self, system: FiniteSystem) -> np.ndarray:
        """Random unit vector in the no-detection subspace of a system."""
        values, vectors = np.linalg.eigh(system.no_detection_projector)
        return self.unit_vector(vectors[:, values > 0.5])


def two_level(g: float, delta: float = 1.0) -> SplitSystem:
    """H0 = diag(0, delta), H_I = sigma_x, Q = diag(1, 0), psi0 = |0>."""
    projector = np.diag([0.0, 1.0])
    return SplitSystem.build(
        np.diag([0.0, delta]),
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        g,
        projector,
        [projector],
        np.array([1.0, 0.0]),
    )


def two_flavor(
    masses: Sequence[float],
    momenta: Sequence[float],
    sigma: float,
    angle: float = math.pi / 4,
    widths: Optional[Sequence[float]] = None,
    initial_flavor: int = 0,
) -> OscillationScenario:
    widths = widths or [0.0] * len(masses)
    states = tuple(MassEigenstate(m, p, w) for m, p, w in zip(masses, momenta, widths))
    return OscillationScenario(states, MixingMatrix.from_angle(angle), sigma, initial_flavor)


BASE_SCENARIO: Dict[str, str] = {
    "schema_version": "1",
    "scenario.masses": "0.1, 0.2",
    "scenario.momenta": "10, 10",
    "scenario.mixing_angle": "pi/4",
    "scenario.sigma": "50",
    "scenario.initial_flavor": "0",
    "detection.threshold": "0",
    "detection.product_masses": "100",
    "detection.localization": "1",
    "run.flavor": "0",
    "run.L_start": "300",
    "run.L_stop": "3000",
    "run.L_count": "28",
    "run.methods": "equal_time, component_arrival, time_averaged",
}


def scenario_text(drop: Iterable[str] = (), **overrides: str) -> str:
    """Scenario file text; dotted keys are passed with '__' in place of '.'."""
    entries = dict(BASE_SCENARIO)
    for key, value in overrides.items():
        entries[key.replace("__", ".")] = value
    for key in drop:
        entries.pop(key, None)
    return "\n".join(f"{key} = {value}" for key, value in entries.items()) + "\n"


@pytest.fixture
def random_systems() -> RandomSystemFactory:
    return RandomSystemFactory()


@pytest.fixture
def ur2f() -> OscillationScenario:
    return two_flavor([0.1, 0.2], [10.0, 10.0], 50.0)


@pytest.fixture
def ur2f_pinned() -> OscillationScenario:
    return two_flavor([0.1, 0.2], [10.0, 10.0], 10.0)


@pytest.fixture
def ur2f_detection() -> DetectionModel:
    return DetectionModel(threshold=0.0, product_masses=(100.0,), localization=1.0)


@pytest.fixture
def pinned_detection() -> DetectionModel:
    return DetectionModel(threshold=0.0, product_masses=(1e5,), localization=1.0)


@pytest.fixture
def ur2f_distances() -> np.ndarray:
    return np.linspace(300.0, UR2F_L_STOP, 241)


@pytest.fixture
def pinned_distances() -> np.ndarray:
    return np.linspace(100.0, 6400.0, 181)


@pytest.fixture
def single_component() -> OscillationScenario:
    return OscillationScenario((MassEigenstate(0.1, 10.0),), MixingMatrix.identity(1), 50.0, 0)


@pytest.fixture
def identity_mixing() -> OscillationScenario:
    states = (MassEigenstate(0.1, 10.0), MassEigenstate(0.2, 10.0))
    return OscillationScenario(states, MixingMatrix.identity(2), 50.0, 0)


@pytest.fixture
def equal_mass() -> OscillationScenario:
    return two_flavor([0.1, 0.1], [10.0, 10.0], 50.0)
