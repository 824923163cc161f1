"""Cost-indexed homogeneous evolution: the classical stand-in for QAOA.

Instead of 2^n amplitudes, the proxy tracks one complex value Q(c') per cost
value, asserting that equal-cost bitstrings share an amplitude. One layer
with angles (gamma, beta) maps

    Q(c')  <-  sum over d, c of
               cos^(n-d)(beta) * (-i sin(beta))^d * e^(-i gamma c)
               * Q(c) * N(c'; d, c)

where N is the class-level replacement table. The phase attaches to the
source cost c (sign conventions differ across QAOA codebases; this one
matches a cost layer e^(-i gamma C) followed by an X-mixer layer
e^(-i beta B)). The evolution is not unitary, so Q tracks an amplitude
analogue; no renormalization is applied between layers.

A layer costs O(n |C|^2): the table contraction dominates, and the mixer
elements are evaluated once per (d, layer) and reused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import DistributionTable
from .errors import CostUnreachableError, NumericalError, SizeLimitError, SpecError
from .problems import EXHAUSTIVE_LIMIT, ProblemInstance, cost_vector


@dataclass(frozen=True)
class Schedule:
    """Fixed QAOA angles: depth p with per-layer (gamma, beta) in radians."""

    gammas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        b = np.atleast_1d(np.asarray(self.betas, dtype=float))
        if g.ndim != 1 or b.shape != g.shape or g.size < 1:
            raise SpecError("gammas and betas must be equal-length 1-D vectors")
        if not (np.isfinite(g).all() and np.isfinite(b).all()):
            raise SpecError("schedule angles must be finite")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self) -> int:
        return int(self.gammas.size)


@dataclass(frozen=True)
class LinearRamp:
    """Four-parameter schedule family: straight-line angle interpolation."""

    gamma_start: float
    gamma_end: float
    beta_start: float
    beta_end: float

    def __post_init__(self):
        vals = (self.gamma_start, self.gamma_end, self.beta_start, self.beta_end)
        if not all(math.isfinite(v) for v in vals):
            raise SpecError("ramp endpoints must be finite")


@dataclass(frozen=True)
class HomogState:
    """Cost-indexed amplitude analogue Q(c') after ``layer`` proxy layers."""

    q: np.ndarray
    layer: int
    table_key: str


def mixer_element(n: int, d: int, beta: float) -> complex:
    """X-mixer matrix element cos^(n-d)(beta) * (-i sin(beta))^d.

    Evaluated as a log magnitude with an exactly tracked quadrant phase, so
    large n cannot underflow through repeated multiplication.
    """
    if d < 0 or d > n:
        raise SpecError(f"distance {d} outside [0, {n}]")
    c, s = math.cos(beta), math.sin(beta)
    log_mag = 0.0
    if n - d > 0:
        if c == 0.0:
            return 0j
        log_mag += (n - d) * math.log(abs(c))
    if d > 0:
        if s == 0.0:
            return 0j
        log_mag += d * math.log(abs(s))
    phase = (1 + 0j, -1j, -1 + 0j, 1j)[d % 4]
    if c < 0.0 and (n - d) % 2:
        phase = -phase
    if s < 0.0 and d % 2:
        phase = -phase
    return math.exp(log_mag) * phase


def _mixer_vectors(n: int, betas: np.ndarray) -> np.ndarray:
    """Mixer elements for all d in [0, n] per layer; shape (p, n+1)."""
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    d = np.arange(n + 1)
    c = np.cos(betas)[:, None]
    s = np.sin(betas)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mag = np.where(n - d > 0, (n - d) * np.log(np.abs(c)), 0.0) + np.where(
            d > 0, d * np.log(np.abs(s)), 0.0
        )
    mag = np.exp(log_mag)
    quad = np.array([1 + 0j, -1j, -1 + 0j, 1j])[d % 4]
    sign = np.where((c < 0) & ((n - d) % 2 == 1), -1.0, 1.0)
    sign = sign * np.where((s < 0) & (d % 2 == 1), -1.0, 1.0)
    return mag * sign * quad[None, :]


def initial_state(table: DistributionTable) -> HomogState:
    """Uniform-superposition analogue: 2^(-n/2) at every reachable cost."""
    amp = 2.0 ** (-table.spec.n / 2.0)
    q = np.where(table.reachable, amp, 0.0).astype(complex)
    return HomogState(q=q, layer=0, table_key=table.key)


def _check_table(state: HomogState, table: DistributionTable) -> None:
    if state.table_key != table.key or state.q.size != table.width:
        raise SpecError("state was produced with a different distribution table")


def evolve_step(
    state: HomogState, table: DistributionTable, gamma: float, beta: float
) -> HomogState:
    """Apply one proxy layer with angles (gamma, beta)."""
    _check_table(state, table)
    n = table.spec.n
    width = table.width
    phase = np.exp(-1j * gamma * np.arange(width))
    mix = _mixer_vectors(n, np.array([beta]))[0]
    folded = table.contraction_matrix() @ (phase * state.q)
    q_next = folded.reshape(width, n + 1) @ mix
    return HomogState(q=q_next, layer=state.layer + 1, table_key=state.table_key)


def evolve(table: DistributionTable, schedule: Schedule) -> HomogState:
    """Run all p proxy layers from the uniform analogue.

    Equivalent to repeated :func:`evolve_step`; phases and mixer vectors for
    the whole schedule are precomputed so the loop is three array products
    per layer.
    """
    n = table.spec.n
    width = table.width
    flat = table.contraction_matrix()
    phases = np.exp(-1j * np.outer(schedule.gammas, np.arange(width)))
    mixers = _mixer_vectors(n, schedule.betas)
    q = initial_state(table).q
    for layer in range(schedule.p):
        folded = flat @ (phases[layer] * q)
        q = folded.reshape(width, n + 1) @ mixers[layer]
    return HomogState(q=q, layer=schedule.p, table_key=table.key)


def evolve_trajectory(table: DistributionTable, schedule: Schedule) -> list[HomogState]:
    """States after 0, 1, ..., p layers (layer 0 is the initial analogue)."""
    states = [initial_state(table)]
    for gamma, beta in zip(schedule.gammas, schedule.betas):
        states.append(evolve_step(states[-1], table, float(gamma), float(beta)))
    return states


def evolve_many(
    table: DistributionTable, gammas: np.ndarray, betas: np.ndarray
) -> np.ndarray:
    """Final Q vectors for a batch of schedules; inputs shaped (batch, p).

    Grid sweeps and multi-start drivers evaluate hundreds of schedules
    against one table; batching turns the per-layer contraction into a
    single matrix product across the batch. The proxy state is |C| values
    per schedule, so even large batches stay small. Returns (batch, |C|).
    """
    gammas = np.atleast_2d(np.asarray(gammas, dtype=float))
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    if gammas.shape != betas.shape:
        raise SpecError("gamma and beta batches must have equal shapes")
    batch, p = gammas.shape
    n = table.spec.n
    width = table.width
    flat_t = table.contraction_matrix().T
    phases = np.exp(-1j * gammas[:, :, None] * np.arange(width))
    mixers = _mixer_vectors(n, betas.ravel()).reshape(batch, p, n + 1)
    q = np.broadcast_to(initial_state(table).q, (batch, width)).copy()
    for layer in range(p):
        folded = (phases[:, layer] * q) @ flat_t
        q = np.matmul(
            folded.reshape(batch, width, n + 1), mixers[:, layer, :, None]
        )[:, :, 0]
    return q


def expected_cost(
    state: HomogState, table: DistributionTable, normalize: bool = False
) -> float:
    """Class-level cost estimate sum over c' of 2^n P(c') |Q(c')|^2 c'.

    Unnormalized by default; the pseudo-norm drifts from 1 because the
    evolution is not unitary, but stays near 1 in the regimes the parameter
    search targets. ``normalize=True`` divides by the pseudo-norm.
    """
    _check_table(state, table)
    weights = 2.0 ** table.spec.n * table.p_of_c * np.abs(state.q) ** 2
    value = float(weights @ np.arange(table.width))
    if not normalize:
        return value
    norm = float(weights.sum())
    if norm <= 0.0:
        raise NumericalError("pseudo-norm is zero; cannot normalize")
    return value / norm


def pseudo_norm(state: HomogState, table: DistributionTable) -> float:
    """Sum over c' of 2^n P(c') |Q(c')|^2; equals 1 at layer 0."""
    _check_table(state, table)
    return float(2.0 ** table.spec.n * table.p_of_c @ (np.abs(state.q) ** 2))


def scatter_to_bitstrings(
    state: HomogState, table: DistributionTable, instance: ProblemInstance,
    costs: np.ndarray | None = None,
) -> np.ndarray:
    """Assign Q(c(x)) to each of the 2^n bitstrings of a concrete instance."""
    _check_table(state, table)
    if costs is None:
        costs = cost_vector(instance)
    c_max = table.cost_set.c_max
    top = int(costs.max())
    if top > c_max:
        raise CostUnreachableError(
            f"instance reaches cost {top} outside the class cost set "
            f"(c_max={c_max}); widen it with a margin"
        )
    return state.q[costs]


def proxy_pseudostate(
    instance: ProblemInstance,
    table: DistributionTable,
    schedule: Schedule,
    limit: int = EXHAUSTIVE_LIMIT,
) -> np.ndarray:
    """All 2^n amplitude analogues under homogeneous evolution.

    Every bitstring of cost c' evolves with the class table row N(c'; d, c),
    which is the same as evolving Q over costs and scattering onto
    bitstrings by their instance cost. The result is generally not norm-1.
    """
    costs = cost_vector(instance, limit=limit)
    final = evolve(table, schedule)
    return scatter_to_bitstrings(final, table, instance, costs=costs)


def sum_of_paths_state(
    instance: ProblemInstance, schedule: Schedule, limit: int = 12
) -> np.ndarray:
    """Exact amplitudes via the dense sum-of-paths layer, for cross-checks.

    Each layer applies the full 2^n x 2^n mixer kernel indexed by pairwise
    Hamming distance, after the cost phase. This is O(4^n) per layer and
    exists purely as an independent oracle against the gate-based simulator;
    it shares no layer code with it beyond :func:`mixer_element`.
    """
    n = instance.n
    if n > limit:
        raise SizeLimitError(f"dense sum-of-paths needs 4^{n} work; limit is {limit}")
    size = 1 << n
    idx = np.arange(size, dtype=np.uint64)
    dist = np.bitwise_count(idx[:, None] ^ idx[None, :]).astype(np.intp)
    costs = cost_vector(instance)
    psi = np.full(size, 2.0 ** (-n / 2.0), dtype=complex)
    for gamma, beta in zip(schedule.gammas, schedule.betas):
        mix = _mixer_vectors(n, np.array([beta]))[0]
        psi = mix[dist] @ (np.exp(-1j * gamma * costs) * psi)
    return psi
