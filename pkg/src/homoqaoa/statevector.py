"""Exact QAOA statevector simulation, the ground-truth oracle.

One layer applies the diagonal cost phase e^(-i gamma c(x)) to every
amplitude and then the X-mixer as n sequential single-qubit rotations, so a
layer costs O(n 2^n) instead of a dense 2^n x 2^n product. That keeps n = 20
(16M complex values) comfortably in reach.

Index convention: qubit i is bit i of the integer basis index, least
significant first. The proxy's bitstring scatter uses the same convention,
which overlap comparisons rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, SpecError
from .problems import EXHAUSTIVE_LIMIT, ProblemInstance, cost_vector
from .proxy import Schedule


@dataclass(frozen=True)
class Statevector:
    """2^n complex amplitudes in the computational basis."""

    amplitudes: np.ndarray
    n: int


def uniform_state(n: int) -> np.ndarray:
    return np.full(1 << n, 2.0 ** (-n / 2.0), dtype=complex)


def apply_mixer_layer(psi: np.ndarray, beta: float, n: int) -> np.ndarray:
    """e^(-i beta X) on every qubit, in place on a contiguous array."""
    c = math.cos(beta)
    s = -1j * math.sin(beta)
    for q in range(n):
        view = psi.reshape(-1, 2, 1 << q)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = c * a + s * b
        view[:, 1, :] = s * a + c * b
    return psi


def qaoa_layer(
    psi: np.ndarray, gamma: float, beta: float, costs: np.ndarray, n: int
) -> np.ndarray:
    """One QAOA layer: cost phase, then mixer. Mutates and returns psi."""
    psi *= np.exp(-1j * gamma * costs)
    return apply_mixer_layer(psi, beta, n)


def qaoa_state(
    instance: ProblemInstance,
    schedule: Schedule,
    costs: np.ndarray | None = None,
    limit: int = EXHAUSTIVE_LIMIT,
) -> Statevector:
    """Simulate the full circuit from the uniform superposition.

    Pass a precomputed ``costs`` vector when evaluating many schedules on
    the same instance; building it is O(m 2^n) and dominates small runs.
    """
    n = instance.n
    if costs is None:
        costs = cost_vector(instance, limit=limit)
    psi = uniform_state(n)
    for gamma, beta in zip(schedule.gammas, schedule.betas):
        qaoa_layer(psi, float(gamma), float(beta), costs, n)
    return Statevector(amplitudes=psi, n=n)


def expectation(
    instance: ProblemInstance,
    state: Statevector,
    costs: np.ndarray | None = None,
) -> float:
    """Cost expectation sum over x of |q(x)|^2 c(x)."""
    if state.amplitudes.size != 1 << instance.n:
        raise SpecError("state size does not match the instance")
    if costs is None:
        costs = cost_vector(instance)
    probs = np.abs(state.amplitudes) ** 2
    return float(probs @ costs)


def squared_overlap(a, b) -> float:
    """|<a|b>|^2 normalized by both norms, so scale drops out.

    The proxy pseudostate is generally not unit-norm, hence the explicit
    normalization.
    """
    av = np.asarray(a, dtype=complex).ravel()
    bv = np.asarray(b, dtype=complex).ravel()
    if av.shape != bv.shape:
        raise SpecError(f"vector length mismatch: {av.size} vs {bv.size}")
    na = float(np.vdot(av, av).real)
    nb = float(np.vdot(bv, bv).real)
    if na == 0.0 or nb == 0.0:
        raise NumericalError("overlap undefined for a zero vector")
    return float(abs(np.vdot(av, bv)) ** 2 / (na * nb))


def approximation_ratio(
    instance: ProblemInstance,
    schedule: Schedule,
    costs: np.ndarray | None = None,
    limit: int = EXHAUSTIVE_LIMIT,
) -> float:
    """Exact-simulation quality measure against the brute-force optimum.

    Maximization classes report <C> / c_opt. Conflict-minimizing classes
    report (m - <C>) / (m - c_opt), the satisfied-clause reading, so 1 stays
    "optimal" in both conventions.
    """
    if costs is None:
        costs = cost_vector(instance, limit=limit)
    c_opt = int(costs.max() if instance.spec.maximize else costs.min())
    state = qaoa_state(instance, schedule, costs=costs, limit=limit)
    value = expectation(instance, state, costs=costs)
    if instance.spec.maximize:
        if c_opt == 0:
            raise NumericalError("optimum is 0; ratio undefined")
        return value / c_opt
    m = instance.m
    if m == c_opt:
        raise NumericalError("every clause is violated at the optimum; ratio undefined")
    return (m - value) / (m - c_opt)
