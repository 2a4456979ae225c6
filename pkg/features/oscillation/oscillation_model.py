#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Mass eigenstates, mixing and flavor amplitudes of an oscillating particle."""

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import AccuracyError, ConfigurationError, DomainError
from utils.quadrature import uniform_rule

UNITARITY_TOL = 1e-12
MIN_SIGMA_MOMENTUM = 100.0


def _raise_problems(problems: List[str]) -> None:
    if problems:
        raise ConfigurationError("; ".join(problems))


@dataclass(frozen=True)
class MassEigenstate:
    """A mass eigenstate with definite momentum (natural units)."""

    mass: float
    momentum: float
    decay_rate: float = 0.0

    def __post_init__(self):
        _raise_problems(self.problems(self.mass, self.momentum, self.decay_rate))

    @staticmethod
    def problems(mass: float, momentum: float, decay_rate: float = 0.0) -> List[str]:
        """Every violated invariant, without raising."""
        found = []
        if not mass >= 0:
            found.append(f"mass must be >= 0, got {mass}")
        if not momentum > 0:
            found.append(f"momentum must be > 0, got {momentum}")
        if not decay_rate >= 0:
            found.append(f"decay rate must be >= 0, got {decay_rate}")
        return found

    @property
    def energy(self) -> float:
        """E = sqrt(m^2 + p^2)."""
        return math.hypot(self.mass, self.momentum)

    @property
    def velocity(self) -> float:
        """v = p / E."""
        return self.momentum / self.energy


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Unitary U[alpha, i]: rows are flavors, columns mass states."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.size == 0:
            raise ConfigurationError("mixing matrix must be square and non-empty")
        identity = np.eye(entries.shape[0])
        deviation = max(
            np.max(np.abs(entries.conj().T @ entries - identity)),
            np.max(np.abs(entries @ entries.conj().T - identity)),
        )
        if deviation > UNITARITY_TOL:
            raise ConfigurationError(
                f"mixing matrix must be unitary within {UNITARITY_TOL} (deviation {deviation:.3g})"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        """Number of flavors (= number of mass states)."""
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "MixingMatrix":
        """No mixing."""
        return cls(np.eye(dim))

    @classmethod
    def from_angle(cls, theta: float) -> "MixingMatrix":
        """Two-flavor rotation [[cos, sin], [-sin, cos]]."""
        c, s = math.cos(theta), math.sin(theta)
        return cls(np.array([[c, s], [-s, c]]))

    @classmethod
    def from_angles(
        cls, theta12: float, theta13: float, theta23: float, delta_cp: float = 0.0
    ) -> "MixingMatrix":
        """Standard three-flavor parametrization R23 * U13(delta) * R12."""
        c12, s12 = math.cos(theta12), math.sin(theta12)
        c13, s13 = math.cos(theta13), math.sin(theta13)
        c23, s23 = math.cos(theta23), math.sin(theta23)
        phase = np.exp(1j * delta_cp)
        r23 = np.array([[1, 0, 0], [0, c23, s23], [0, -s23, c23]], dtype=complex)
        u13 = np.array(
            [[c13, 0, s13 / phase], [0, 1, 0], [-s13 * phase, 0, c13]], dtype=complex
        )
        r12 = np.array([[c12, s12, 0], [-s12, c12, 0], [0, 0, 1]], dtype=complex)
        return cls(r23 @ u13 @ r12)

    def rephased(
        self, flavor_phases: Sequence[float], mass_phases: Sequence[float]
    ) -> "MixingMatrix":
        """U[alpha, i] -> exp(i phi_alpha) U[alpha, i] exp(i chi_i)."""
        left = np.exp(1j * np.asarray(flavor_phases, dtype=float))
        right = np.exp(1j * np.asarray(mass_phases, dtype=float))
        return MixingMatrix(left[:, None] * self.entries * right[None, :])


@dataclass(frozen=True, eq=False)
class OscillationScenario:
    """Gaussian flavor packet: mass states, mixing, spread sigma and source flavor beta."""

    states: Tuple[MassEigenstate, ...]
    mixing: MixingMatrix
    sigma: float
    initial_flavor: int

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        _raise_problems(
            self.problems(
                [state.momentum for state in states], self.sigma, self.initial_flavor, self.mixing.dim
            )
        )

    @staticmethod
    def problems(
        momenta: Sequence[float], sigma: float, initial_flavor: int, mixing_dim: Optional[int]
    ) -> List[str]:
        """
        Every violated scenario invariant, without raising.

        mixing_dim None skips the checks that need a valid mixing matrix.
        """
        found = []
        if not momenta:
            found.append("scenario needs at least one mass state")
        if not sigma > 0:
            found.append(f"sigma must be > 0, got {sigma}")
        elif momenta:
            product = sigma * min(momenta)
            if product < MIN_SIGMA_MOMENTUM:
                found.append(
                    f"sigma * min(momentum) must be >= {MIN_SIGMA_MOMENTUM:g} "
                    f"(narrow momentum spread), got {product:g}"
                )
        if mixing_dim is not None:
            if mixing_dim != len(momenta):
                found.append(
                    f"mixing matrix is {mixing_dim}x{mixing_dim} "
                    f"but there are {len(momenta)} mass states"
                )
            if not 0 <= int(initial_flavor) < mixing_dim:
                found.append(f"flavor index {initial_flavor} out of range 0..{mixing_dim - 1}")
        return found

    @property
    def size(self) -> int:
        """Number of mass states."""
        return len(self.states)

    @property
    def masses(self) -> np.ndarray:
        return np.array([s.mass for s in self.states])

    @property
    def momenta(self) -> np.ndarray:
        return np.array([s.momentum for s in self.states])

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.states])

    @property
    def velocities(self) -> np.ndarray:
        return np.array([s.velocity for s in self.states])

    @property
    def decay_rates(self) -> np.ndarray:
        return np.array([s.decay_rate for s in self.states])

    def check_flavor(self, flavor: int) -> None:
        """Raise DomainError for a flavor index outside the mixing matrix."""
        if not 0 <= int(flavor) < self.mixing.dim:
            raise DomainError(f"flavor index {flavor} out of range 0..{self.mixing.dim - 1}")

    def coefficients(self, flavor: int) -> np.ndarray:
        """c_i = conj(U[beta, i]) * U[alpha, i]."""
        self.check_flavor(flavor)
        u = self.mixing.entries
        return np.conj(u[self.initial_flavor]) * u[flavor]

    def coherence_length(self, i: int, j: int) -> float:
        """Distance sigma / |v_i - v_j| over which two envelopes still overlap."""
        dv = abs(self.states[i].velocity - self.states[j].velocity)
        return math.inf if dv == 0 else self.sigma / dv


@dataclass(frozen=True)
class DetectionModel:
    """Threshold, product masses and localization that shape the detection kernel."""

    threshold: float
    product_masses: Tuple[float, ...]
    localization: float
    overall_constant: float = 1.0
    # False only to study the kernel outside the saddle-point regime
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "product_masses", tuple(float(m) for m in self.product_masses))
        _raise_problems(
            self.problems(
                self.threshold, self.product_masses, self.localization, self.overall_constant, self.strict
            )
        )

    @staticmethod
    def problems(
        threshold: float,
        product_masses: Sequence[float],
        localization: float,
        overall_constant: float = 1.0,
        strict: bool = True,
    ) -> List[str]:
        """Every violated detection invariant, without raising."""
        found = []
        if not localization > 0:
            found.append(f"localization delta must be > 0, got {localization}")
        if not threshold >= 0:
            found.append(f"threshold must be >= 0, got {threshold}")
        if not overall_constant > 0:
            found.append("overall constant K must be > 0")
        for mass in product_masses:
            if strict and mass * localization < 10:
                found.append(
                    f"product mass * delta must be >= 10 (saddle-point validity), "
                    f"got {mass * localization:g}"
                )
        return found

    @property
    def saddle_offsets(self) -> np.ndarray:
        """a_n = M_n delta^2 / 2, the imaginary offsets of the kernel singularities."""
        return 0.5 * np.array(self.product_masses) * self.localization**2

    def with_threshold(self, threshold: float) -> "DetectionModel":
        """Copy with a different threshold energy."""
        return replace(self, threshold=threshold)


def plane_wave_amplitude(scenario: OscillationScenario, flavor: int, t, x):
    """A = sum_i c_i exp(i p_i x - i E_i t); broadcasts over t and x."""
    c = scenario.coefficients(flavor)
    t = np.asarray(t, dtype=float)[..., None]
    x = np.asarray(x, dtype=float)[..., None]
    phases = np.exp(1j * scenario.momenta * x - 1j * scenario.energies * t)
    return np.sum(c * phases, axis=-1)


def log_gaussian_components(scenario: OscillationScenario, t, x):
    """log of (pi sigma^2)^(-1/4) exp(-(x - v t)^2 / 2 sigma^2 + i p x - i E t - Gamma t)."""
    sigma = scenario.sigma
    norm = -0.25 * math.log(math.pi * sigma**2)
    t = np.asarray(t)[..., None]
    x = np.asarray(x)[..., None]
    envelope = -((x - scenario.velocities * t) ** 2) / (2 * sigma**2)
    phase = 1j * scenario.momenta * x - (1j * scenario.energies + scenario.decay_rates) * t
    return norm + envelope + phase


def gaussian_amplitude_components(scenario: OscillationScenario, flavor: int, t, x):
    """Per-mass-state terms c_i * psi_i(t, x) of the linearized amplitude (last axis = i)."""
    if np.any(np.asarray(t) < 0):
        raise DomainError("Gaussian amplitude needs t >= 0")
    c = scenario.coefficients(flavor)
    return c * np.exp(log_gaussian_components(scenario, t, x))


def gaussian_amplitude(scenario: OscillationScenario, flavor: int, t, x):
    """Linearized Gaussian flavor amplitude; broadcasts over t and x."""
    return np.sum(gaussian_amplitude_components(scenario, flavor, t, x), axis=-1)


@dataclass(frozen=True)
class MomentumQuadrature:
    """Controls for the momentum integral."""

    width_sigmas: float = 12.0
    nodes_per_panel: int = 16
    min_panels: int = 8
    tol: float = 1e-11
    max_doublings: int = 12

    def __post_init__(self):
        if self.width_sigmas < 8:
            raise ConfigurationError("momentum quadrature must cover at least 8 widths")


def momentum_integral_amplitude(
    scenario: OscillationScenario,
    flavor: int,
    t: float,
    x: float,
    quadrature: Optional[MomentumQuadrature] = None,
) -> complex:
    """
    Flavor amplitude from the exact one-dimensional momentum integral.

    Each mass state contributes
    int dq/(2 pi) (4 pi sigma^2)^(1/4) exp(-sigma^2 q^2 / 2 + i p x - i E_i(p) t - Gamma_i t)
    with p = p_i + q and E_i(p) = sqrt(m_i^2 + p^2).

    Args:
        scenario: Oscillation scenario
        flavor: Detected flavor alpha
        t: Time
        x: Position
        quadrature: Range and convergence controls

    Returns:
        Complex amplitude
    """
    quad = quadrature or MomentumQuadrature()
    sigma = scenario.sigma
    c = scenario.coefficients(flavor)
    prefactor = (4 * math.pi * sigma**2) ** 0.25 / (2 * math.pi)
    half_width = quad.width_sigmas / sigma
    scale = abs(prefactor) * math.sqrt(2 * math.pi) / sigma * float(np.sum(np.abs(c)))

    total = 0j
    for coefficient, state in zip(c, scenario.states):
        if coefficient == 0:
            continue
        mass, p0 = state.mass, state.momentum
        # Phase swept across the momentum range sets the starting resolution
        swing = abs(x - state.velocity * t) * 2 * half_width + abs(t) * half_width**2
        panels = max(quad.min_panels, int(math.ceil(swing / math.pi)))

        def integrate(n_panels: int) -> complex:
            q, w = uniform_rule(-half_width, half_width, n_panels, quad.nodes_per_panel)
            p = p0 + q
            energy = np.sqrt(mass**2 + p**2)
            exponent = (
                -0.5 * sigma**2 * q**2
                + 1j * p * x
                - 1j * energy * t
                - state.decay_rate * t
            )
            return complex(np.sum(w * np.exp(exponent))) * prefactor

        value = integrate(panels)
        for _ in range(quad.max_doublings):
            panels *= 2
            refined = integrate(panels)
            previous, change = value, abs(refined - value)
            value = refined
            if change <= quad.tol * max(abs(refined), 1e-6 * scale):
                break
        else:
            raise AccuracyError(
                "momentum integral did not converge",
                previous=previous,
                current=value,
                diagnostics={"panels": panels, "t": t, "x": x},
            )
        total += coefficient * value
    return total
