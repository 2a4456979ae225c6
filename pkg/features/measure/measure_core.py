#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Time-unresolved detection probabilities for small quantum systems."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from core.errors import AccuracyError, ConfigurationError, DomainError
from utils.quadrature import composite_rule

logger = logging.getLogger(__name__)

VALIDATION_TOL = 1e-12
CONVERGENCE_TOL = 1e-8
ACCURACY_LIMIT = 1e-6
MAX_NODES = 2**20
ABSOLUTE_FLOOR = 1e-20
PANEL_ORDER = 16
_CHUNK = 4096


def _max_entry(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


def _as_square(name: str, matrix) -> np.ndarray:
    array = np.array(matrix, dtype=complex)
    if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] == 0:
        raise ConfigurationError(f"{name} must be a non-empty square matrix")
    return array


def _check_hermitian(name: str, matrix: np.ndarray) -> None:
    if _max_entry(matrix - matrix.conj().T) > VALIDATION_TOL:
        raise ConfigurationError(f"{name} must be Hermitian within {VALIDATION_TOL}")


def _check_projector(name: str, matrix: np.ndarray) -> None:
    _check_hermitian(name, matrix)
    if _max_entry(matrix @ matrix - matrix) > VALIDATION_TOL:
        raise ConfigurationError(f"{name} must satisfy P^2 = P within {VALIDATION_TOL}")


def _evolution(hamiltonian: np.ndarray, t: float) -> np.ndarray:
    energies, vectors = np.linalg.eigh(hamiltonian)
    return (vectors * np.exp(-1j * energies * t)) @ vectors.conj().T


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    """Hamiltonian with a detection projector, its outcome split and an initial state."""

    hamiltonian: np.ndarray
    detection_projector: np.ndarray
    outcome_projectors: Tuple[np.ndarray, ...]
    initial_state: np.ndarray

    def __post_init__(self):
        hamiltonian = _as_square("hamiltonian", self.hamiltonian)
        dim = hamiltonian.shape[0]
        projector = _as_square("detection_projector", self.detection_projector)
        if projector.shape[0] != dim:
            raise ConfigurationError("detection_projector dimension differs from hamiltonian")
        outcomes = tuple(
            _as_square(f"outcome_projectors[{k}]", p)
            for k, p in enumerate(self.outcome_projectors)
        )
        state = np.array(self.initial_state, dtype=complex).reshape(-1)

        _check_hermitian("hamiltonian", hamiltonian)
        _check_projector("detection_projector", projector)
        total = np.zeros_like(projector)
        for k, outcome in enumerate(outcomes):
            if outcome.shape[0] != dim:
                raise ConfigurationError(f"outcome_projectors[{k}] has the wrong dimension")
            _check_projector(f"outcome_projectors[{k}]", outcome)
            for m in range(k):
                if _max_entry(outcome @ outcomes[m]) > VALIDATION_TOL:
                    raise ConfigurationError(
                        f"outcome projectors {m} and {k} are not mutually exclusive"
                    )
            total = total + outcome
        if _max_entry(total - projector) > VALIDATION_TOL:
            raise ConfigurationError(
                "outcome projectors must sum to the detection projector (exhaustive)"
            )

        if state.shape[0] != dim:
            raise ConfigurationError("initial_state dimension differs from hamiltonian")
        if abs(np.linalg.norm(state) - 1.0) > VALIDATION_TOL:
            raise ConfigurationError("initial_state must have unit norm")
        if _max_entry(np.eye(dim) - projector) <= VALIDATION_TOL:
            raise ConfigurationError(
                "detection projector is the identity: no no-detection subspace "
                "for the initial state"
            )
        if np.max(np.abs(projector @ state)) > VALIDATION_TOL:
            raise ConfigurationError("initial_state must lie in the no-detection subspace")

        object.__setattr__(self, "hamiltonian", hamiltonian)
        object.__setattr__(self, "detection_projector", projector)
        object.__setattr__(self, "outcome_projectors", outcomes)
        object.__setattr__(self, "initial_state", state)

    @property
    def dim(self) -> int:
        """Hilbert space dimension."""
        return self.hamiltonian.shape[0]

    @property
    def no_detection_projector(self) -> np.ndarray:
        """Q = 1 - P."""
        return np.eye(self.dim) - self.detection_projector

    def with_initial_state(self, state: np.ndarray) -> "FiniteSystem":
        """Same system, different initial state."""
        return FiniteSystem(
            self.hamiltonian, self.detection_projector, self.outcome_projectors, state
        )

    def _q_spectrum(self) -> Tuple[np.ndarray, np.ndarray]:
        """Eigenpairs of QHQ restricted to range(Q) as (mu, basis)."""
        q_values, q_vectors = np.linalg.eigh(self.no_detection_projector)
        basis = q_vectors[:, q_values > 0.5]
        if basis.shape[1] == 0:
            return np.zeros(0), basis
        restricted = basis.conj().T @ self.hamiltonian @ basis
        mu, vectors = np.linalg.eigh(0.5 * (restricted + restricted.conj().T))
        return mu, basis @ vectors


@dataclass(frozen=True, eq=False)
class SplitSystem:
    """A FiniteSystem whose Hamiltonian is H0 + g * h_interaction with [H0, Q] = 0."""

    base: FiniteSystem
    h0: np.ndarray
    h_interaction: np.ndarray
    coupling_scale: float = 1.0

    def __post_init__(self):
        h0 = _as_square("h0", self.h0)
        h_int = _as_square("h_interaction", self.h_interaction)
        _check_hermitian("h0", h0)
        _check_hermitian("h_interaction", h_int)
        q = self.base.no_detection_projector
        if _max_entry(h0 @ q - q @ h0) > VALIDATION_TOL:
            raise ConfigurationError("h0 must commute with Q within 1e-12")
        if _max_entry(h0 + self.coupling_scale * h_int - self.base.hamiltonian) > VALIDATION_TOL:
            raise ConfigurationError("h0 + g*h_interaction must reproduce the hamiltonian")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h_interaction", h_int)

    @classmethod
    def build(
        cls,
        h0,
        h_interaction,
        coupling_scale: float,
        detection_projector,
        outcome_projectors: Sequence,
        initial_state,
    ) -> "SplitSystem":
        """Assemble the base system from its parts."""
        h0 = np.array(h0, dtype=complex)
        h_int = np.array(h_interaction, dtype=complex)
        base = FiniteSystem(
            h0 + coupling_scale * h_int,
            detection_projector,
            tuple(outcome_projectors),
            initial_state,
        )
        return cls(base, h0, h_int, coupling_scale)

    @property
    def interaction(self) -> np.ndarray:
        """g * h_interaction."""
        return self.coupling_scale * self.h_interaction


@dataclass(frozen=True)
class TimeWindow:
    """Detection window [0, T] and its quadrature controls."""

    t_final: float
    node_count: int = 64
    zeno_slices: int = 1

    def __post_init__(self):
        if not self.t_final >= 0:
            raise ConfigurationError("t_final must be >= 0")
        if self.node_count < 2:
            raise ConfigurationError("node_count must be >= 2")
        if self.zeno_slices < 1:
            raise ConfigurationError("zeno_slices must be >= 1")


def _check_outcome(system: FiniteSystem, outcome: int) -> None:
    if not 0 <= outcome < len(system.outcome_projectors):
        raise DomainError(
            f"outcome index {outcome} out of range 0..{len(system.outcome_projectors) - 1}"
        )


def restricted_propagator(
    system: FiniteSystem,
    t: float,
    mode: str = "generator",
    zeno_slices: Optional[int] = None,
) -> np.ndarray:
    """
    Evolution confined to the no-detection subspace.

    Args:
        system: The finite system
        t: Elapsed time (>= 0)
        mode: "generator" for Q exp(-i QHQ t) Q, "product" for (Q e^{-iHt/N} Q)^N
        zeno_slices: N for product mode

    Returns:
        dim x dim complex matrix
    """
    if t < 0:
        raise DomainError("restricted propagator needs t >= 0")
    if mode == "generator":
        mu, basis = system._q_spectrum()
        return (basis * np.exp(-1j * mu * t)) @ basis.conj().T
    if mode == "product":
        if zeno_slices is None or zeno_slices < 1:
            raise ConfigurationError("product mode needs zeno_slices >= 1")
        q = system.no_detection_projector
        step = q @ _evolution(system.hamiltonian, t / zeno_slices) @ q
        return np.linalg.matrix_power(step, int(zeno_slices))
    raise ConfigurationError(f"unknown propagator mode {mode!r}")


def event_amplitude_density(
    system: FiniteSystem, t: float, outcome: int, t_final: float
) -> np.ndarray:
    """-i e^{-iH(T-t)} P_l H S_t psi0, the detection amplitude per unit time at t."""
    _check_outcome(system, outcome)
    if t < 0 or t > t_final:
        raise DomainError(f"event time must satisfy 0 <= t <= T, got t={t}, T={t_final}")
    s_t = restricted_propagator(system, t)
    vector = system.outcome_projectors[outcome] @ (
        system.hamiltonian @ (s_t @ system.initial_state)
    )
    return -1j * (_evolution(system.hamiltonian, t_final - t) @ vector)


def _phase_integrals(frequencies: np.ndarray, t_final: float, node_count: int) -> np.ndarray:
    """Gauss-Legendre approximation of int_0^T exp(i f t) dt for every entry f."""
    if node_count <= PANEL_ORDER:
        nodes, weights = composite_rule([0.0, t_final], node_count)
    else:
        panels = -(-node_count // PANEL_ORDER)
        nodes, weights = composite_rule(np.linspace(0.0, t_final, panels + 1), PANEL_ORDER)
    result = np.zeros(frequencies.shape, dtype=complex)
    for start in range(0, nodes.size, _CHUNK):
        t = nodes[start : start + _CHUNK]
        w = weights[start : start + _CHUNK]
        result += np.tensordot(w, np.exp(1j * t[:, None, None] * frequencies[None]), axes=1)
    return result


def _converge(
    build: Callable[[int], np.ndarray],
    score: Callable[[np.ndarray], float],
    node_count: int,
    label: str,
) -> Tuple[np.ndarray, float]:
    """Double the node count until the scored result is stable."""
    nodes = node_count
    operator = build(nodes)
    value = score(operator)
    previous, change = None, float("inf")
    while True:
        if 2 * nodes > MAX_NODES:
            break
        nodes *= 2
        refined = build(nodes)
        refined_value = score(refined)
        change = abs(refined_value - value)
        operator, previous, value = refined, value, refined_value
        if change <= CONVERGENCE_TOL * abs(value) + ABSOLUTE_FLOOR:
            return operator, value
    if change > ACCURACY_LIMIT * abs(value) + ABSOLUTE_FLOOR:
        raise AccuracyError(
            f"{label}: time quadrature did not converge at {nodes} nodes",
            previous=previous,
            current=value,
            diagnostics={"nodes": nodes},
        )
    logger.warning("%s: stopped at node cap %d with relative change %.3g", label, nodes, change)
    return operator, value


def _detection_operator_at(system: FiniteSystem, outcome: int, t_final: float, nodes: int):
    energies, vectors = np.linalg.eigh(system.hamiltonian)
    mu, basis = system._q_spectrum()
    coupling = vectors.conj().T @ system.outcome_projectors[outcome] @ system.hamiltonian @ basis
    frequencies = energies[:, None] - mu[None, :]
    phases = _phase_integrals(frequencies, t_final, nodes)
    return vectors @ (coupling * phases) @ basis.conj().T


def detection_operator(system: FiniteSystem, outcome: int, window: TimeWindow) -> np.ndarray:
    """C_l = int_0^T e^{iHt} P_l H S_t dt, so that p(l) = ||C_l psi0||^2."""
    _check_outcome(system, outcome)
    psi = system.initial_state
    operator, _ = _converge(
        lambda n: _detection_operator_at(system, outcome, window.t_final, n),
        lambda c: float(np.vdot(c @ psi, c @ psi).real),
        window.node_count,
        f"detection operator (outcome {outcome})",
    )
    return operator


def detection_probability(system: FiniteSystem, outcome: int, window: TimeWindow) -> float:
    """
    Probability of detection with outcome l inside [0, T].

    Args:
        system: The finite system
        outcome: Index into system.outcome_projectors
        window: Time window and quadrature controls

    Returns:
        p(l) = ||int_0^T e^{iHt} P_l H S_t psi0 dt||^2
    """
    _check_outcome(system, outcome)
    if window.t_final == 0:
        return 0.0
    psi = system.initial_state
    _, value = _converge(
        lambda n: _detection_operator_at(system, outcome, window.t_final, n),
        lambda c: float(np.vdot(c @ psi, c @ psi).real),
        window.node_count,
        f"detection probability (outcome {outcome})",
    )
    return value


def detection_probability_mixed(
    system: FiniteSystem, outcome: int, window: TimeWindow, rho: np.ndarray
) -> float:
    """p(l) = Tr(C_l rho C_l^dagger) for a density matrix supported on range(Q)."""
    _check_outcome(system, outcome)
    rho = _as_square("rho", rho)
    _check_hermitian("rho", rho)
    if abs(np.trace(rho).real - 1.0) > VALIDATION_TOL:
        raise ConfigurationError("rho must have unit trace")
    if _max_entry(system.detection_projector @ rho) > VALIDATION_TOL:
        raise ConfigurationError("rho must be supported in the no-detection subspace")
    if window.t_final == 0:
        return 0.0
    _, value = _converge(
        lambda n: _detection_operator_at(system, outcome, window.t_final, n),
        lambda c: float(np.trace(c @ rho @ c.conj().T).real),
        window.node_count,
        f"mixed-state detection probability (outcome {outcome})",
    )
    return value


def detection_probabilities(system: FiniteSystem, window: TimeWindow) -> np.ndarray:
    """Detection probability for every outcome, in outcome order."""
    return np.array(
        [detection_probability(system, k, window) for k in range(len(system.outcome_projectors))]
    )


def detection_probability_perturbative(
    system: SplitSystem, outcome: int, window: TimeWindow
) -> float:
    """
    Leading-order detection probability.

    Uses U_t = exp(-i H0 t): p = ||int_0^T U_t^dagger P_l H_I U_t psi0 dt||^2,
    which equals the double time integral of the kernel trace for rho0 = |psi0><psi0|.
    """
    base = system.base
    _check_outcome(base, outcome)
    if window.t_final == 0:
        return 0.0
    energies, vectors = np.linalg.eigh(system.h0)
    coupling = vectors.conj().T @ base.outcome_projectors[outcome] @ system.interaction @ vectors
    frequencies = energies[:, None] - energies[None, :]
    psi = vectors.conj().T @ base.initial_state

    def build(nodes: int) -> np.ndarray:
        return coupling * _phase_integrals(frequencies, window.t_final, nodes)

    _, value = _converge(
        build,
        lambda c: float(np.vdot(c @ psi, c @ psi).real),
        window.node_count,
        f"perturbative probability (outcome {outcome})",
    )
    return value


def no_detection_probability(system: FiniteSystem, window: TimeWindow) -> float:
    """1 - sum_l p(l)."""
    return float(1.0 - np.sum(detection_probabilities(system, window)))


def survival_probability(system: FiniteSystem, window: TimeWindow) -> float:
    """||S_T psi0||^2 for the never-projected branch."""
    survivor = restricted_propagator(system, window.t_final) @ system.initial_state
    return float(np.vdot(survivor, survivor).real)


