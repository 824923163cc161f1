"""Parameter setting against the homogeneous proxy objective.

The outer loop is a box-constrained quasi-Newton search (SciPy's L-BFGS-B
with finite-difference gradients); each objective evaluation runs the proxy
and returns its unnormalized cost estimate. Two parameterizations are
supported: the full 2p angle vector, and a 4-parameter linear ramp that
interpolates (gamma, beta) endpoints across layers. Ramps keep the search
tractable at large depth and transfer across depths unchanged.

Angle boxes default to the fundamental domains for integer-valued costs:
gamma in [0, 2*pi] (cost-phase period) and beta in [0, pi] (mixer period up
to global phase).

For random k-SAT classes the proxy estimate counts conflicts, so the search
runs as a minimization there; ``OptimizerOptions.maximize`` carries the
direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .distributions import DistributionTable, precompute_all
from .errors import NumericalError, SpecError
from .problems import ClassSpec, rng_for_seed
from .proxy import LinearRamp, Schedule, evolve, evolve_many, expected_cost

TWO_PI = 2.0 * math.pi

# Annealing-style default seed: gamma grows, beta shrinks across layers.
DEFAULT_RAMP = LinearRamp(0.1, 0.6, 0.6, 0.1)


class Parameterization(str, Enum):
    FULL_2P = "full-2p"
    LINEAR_RAMP_4 = "linear-ramp-4"


def linear_ramp_expand(ramp: LinearRamp, p: int) -> Schedule:
    """Layer angles at fractions 1/p, 2/p, ..., 1 between the endpoints.

    The first layer sits at fraction 1/p, not 0, so only the depth-p layer
    hits the end value exactly and p = 1 collapses to the end point.
    """
    if p < 1:
        raise SpecError(f"depth must be >= 1, got {p}")
    frac = np.arange(1, p + 1) / p
    return Schedule(
        gammas=ramp.gamma_start + (ramp.gamma_end - ramp.gamma_start) * frac,
        betas=ramp.beta_start + (ramp.beta_end - ramp.beta_start) * frac,
    )


def params_to_schedule(
    params: np.ndarray, p: int, parameterization: Parameterization
) -> Schedule:
    params = np.asarray(params, dtype=float).ravel()
    if parameterization is Parameterization.FULL_2P:
        if params.size != 2 * p:
            raise SpecError(f"full-2p needs 2p={2 * p} parameters, got {params.size}")
        return Schedule(gammas=params[:p], betas=params[p:])
    if params.size != 4:
        raise SpecError(f"linear-ramp-4 needs 4 parameters, got {params.size}")
    return linear_ramp_expand(LinearRamp(*params), p)


def default_bounds(p: int, parameterization: Parameterization) -> list[tuple[float, float]]:
    if parameterization is Parameterization.FULL_2P:
        return [(0.0, TWO_PI)] * p + [(0.0, math.pi)] * p
    return [(0.0, TWO_PI)] * 2 + [(0.0, math.pi)] * 2


def homogeneous_objective(
    params,
    table: DistributionTable,
    p: int,
    parameterization: Parameterization = Parameterization.FULL_2P,
) -> float:
    """Proxy cost estimate for the schedule encoded by ``params``."""
    schedule = params_to_schedule(params, p, parameterization)
    return expected_cost(evolve(table, schedule), table)


def homogeneous_objective_many(
    gammas: np.ndarray, betas: np.ndarray, table: DistributionTable
) -> np.ndarray:
    """Proxy cost estimates for a batch of expanded schedules, shape (batch,).

    The batched evolution makes dense grid sweeps of the proxy objective
    cheap; see :func:`homoqaoa.proxy.evolve_many`.
    """
    q = evolve_many(table, gammas, betas)
    weights = 2.0 ** table.spec.n * table.p_of_c * np.abs(q) ** 2
    return weights @ np.arange(table.width)


@dataclass
class OptimizerOptions:
    """Knobs for one quasi-Newton run plus the multi-start driver.

    ``initial`` accepts a raw parameter vector, a Schedule, or a LinearRamp;
    None falls back to DEFAULT_RAMP expanded as the parameterization needs.
    ``restarts`` > 1 adds seeded annealing-style ramp initializations and
    keeps the best run.
    """

    parameterization: Parameterization = Parameterization.FULL_2P
    initial: object = None
    bounds: list[tuple[float, float]] | None = None
    tolerance: float = 1e-6
    max_iterations: int = 500
    fd_step: float = 1e-6
    maximize: bool = True
    restarts: int = 1
    restart_seed: int = 0
    prescan: int = 0

    def __post_init__(self):
        if not isinstance(self.parameterization, Parameterization):
            self.parameterization = Parameterization(str(self.parameterization))
        if self.tolerance <= 0 or self.fd_step <= 0:
            raise SpecError("tolerance and fd_step must be positive")
        if self.max_iterations < 1 or self.restarts < 1:
            raise SpecError("max_iterations and restarts must be >= 1")
        if self.prescan < 0:
            raise SpecError("prescan must be >= 0")


@dataclass
class OptimizationResult:
    """Best parameters found, with bookkeeping for reproducibility."""

    params: np.ndarray
    schedule: Schedule | None
    ramp: LinearRamp | None
    objective_value: float
    iterations: int
    evaluation_count: int
    trace: list[tuple[int, float]] = field(default_factory=list)


def _initial_vector(options: OptimizerOptions, p: int | None) -> np.ndarray:
    init = options.initial if options.initial is not None else DEFAULT_RAMP
    if isinstance(init, LinearRamp):
        if options.parameterization is Parameterization.LINEAR_RAMP_4:
            return np.array(
                [init.gamma_start, init.gamma_end, init.beta_start, init.beta_end]
            )
        if p is None:
            raise SpecError("expanding a ramp initial point requires a depth")
        sched = linear_ramp_expand(init, p)
        return np.concatenate([sched.gammas, sched.betas])
    if isinstance(init, Schedule):
        if options.parameterization is Parameterization.LINEAR_RAMP_4:
            raise SpecError("a full schedule cannot seed the ramp parameterization")
        return np.concatenate([init.gammas, init.betas])
    return np.asarray(init, dtype=float).ravel()


def maximize(objective, options: OptimizerOptions, p: int | None = None) -> OptimizationResult:
    """Quasi-Newton ascent (or descent) of a pure objective within a box.

    Gradients come from forward finite differences at ``fd_step``. The
    returned point is never worse than the initial one: the best evaluation
    seen anywhere during the run wins ties by earliest occurrence.
    """
    x0 = _initial_vector(options, p)
    bounds = options.bounds
    if bounds is None and p is not None:
        bounds = default_bounds(p, options.parameterization)
    if bounds is not None:
        if len(bounds) != x0.size:
            raise SpecError(f"{len(bounds)} bounds for {x0.size} parameters")
        x0 = np.clip(x0, [lo for lo, _ in bounds], [hi for _, hi in bounds])

    sign = -1.0 if options.maximize else 1.0
    state = {"evals": 0, "best_f": None, "best_x": None}

    def wrapped(x):
        value = float(objective(np.asarray(x, dtype=float)))
        if not math.isfinite(value):
            if state["evals"] == 0:
                raise NumericalError("objective not finite at the initial point")
            value = -math.inf if options.maximize else math.inf
        state["evals"] += 1
        better = state["best_f"] is None or (
            value > state["best_f"] if options.maximize else value < state["best_f"]
        )
        if better:
            state["best_f"] = value
            state["best_x"] = np.array(x, dtype=float)
        return sign * value

    trace: list[tuple[int, float]] = []

    def record(xk):
        trace.append((len(trace) + 1, float(objective(np.asarray(xk, dtype=float)))))

    first = wrapped(x0)  # validates the start and seeds best-seen
    trace.append((0, sign * first))
    res = minimize(
        wrapped,
        x0,
        method="L-BFGS-B",
        bounds=bounds,
        callback=record,
        options={
            "maxiter": options.max_iterations,
            "ftol": options.tolerance,
            "eps": options.fd_step,
        },
    )
    best_x = state["best_x"]
    best_f = state["best_f"]

    schedule = (
        params_to_schedule(best_x, p, options.parameterization) if p is not None else None
    )
    ramp = (
        LinearRamp(*best_x)
        if options.parameterization is Parameterization.LINEAR_RAMP_4
        else None
    )
    return OptimizationResult(
        params=best_x,
        schedule=schedule,
        ramp=ramp,
        objective_value=best_f,
        iterations=int(res.nit),
        evaluation_count=state["evals"],
        trace=trace,
    )


def _ramp_draws(seed: int, count: int) -> np.ndarray:
    """Seeded annealing-style ramp endpoints: gamma rising, beta falling."""
    rng = rng_for_seed(seed)
    g1 = rng.uniform(0.0, 0.5, count)
    gf = rng.uniform(g1, 1.0)
    b1 = rng.uniform(0.05, 1.4, count)
    bf = rng.uniform(0.0, b1)
    return np.column_stack([g1, gf, b1, bf])


def _prescan_starts(
    options: OptimizerOptions, table: DistributionTable, p: int
) -> list[np.ndarray]:
    """Cheap seeded sweep of candidate ramps; returns the top endpoints.

    Candidates are scored in one batched proxy evaluation, so scanning a
    couple thousand ramps costs about as much as a handful of quasi-Newton
    iterations. The best ``restarts`` candidates seed the polish runs.
    """
    cands = _ramp_draws(options.restart_seed, options.prescan)
    frac = np.arange(1, p + 1) / p
    gammas = cands[:, 0:1] + (cands[:, 1:2] - cands[:, 0:1]) * frac
    betas = cands[:, 2:3] + (cands[:, 3:4] - cands[:, 2:3]) * frac
    values = homogeneous_objective_many(gammas, betas, table)
    order = np.argsort(values)
    top = order[-options.restarts :] if options.maximize else order[: options.restarts]
    ramps = [LinearRamp(*cands[k]) for k in reversed(top)]
    if options.parameterization is Parameterization.LINEAR_RAMP_4:
        return [np.array([r.gamma_start, r.gamma_end, r.beta_start, r.beta_end]) for r in ramps]
    return [
        np.concatenate([s.gammas, s.betas])
        for s in (linear_ramp_expand(r, p) for r in ramps)
    ]


def heuristic(
    spec: ClassSpec,
    p: int,
    options: OptimizerOptions | None = None,
    table: DistributionTable | None = None,
    cache_dir: str | Path | None = None,
) -> OptimizationResult:
    """End-to-end class-level parameter setting.

    Precomputes (or loads from ``cache_dir``) the class distribution table,
    then searches the proxy objective from one or more initializations and
    returns the best run. The resulting angles are meant to be used directly
    as QAOA parameters for instances of the class.
    """
    if options is None:
        options = OptimizerOptions()
    if options.maximize != spec.maximize:
        options = OptimizerOptions(**{**options.__dict__, "maximize": spec.maximize})
    if table is None:
        if cache_dir is not None:
            from .serialize import load_or_precompute

            table = load_or_precompute(spec, cache_dir)
        else:
            table = precompute_all(spec)

    def objective(x):
        return homogeneous_objective(x, table, p, options.parameterization)

    starts: list[object] = [options.initial if options.initial is not None else DEFAULT_RAMP]
    if options.prescan > 0:
        starts.extend(_prescan_starts(options, table, p))
    else:
        draws = _ramp_draws(options.restart_seed, options.restarts - 1)
        starts.extend(LinearRamp(*row) for row in draws)

    best: OptimizationResult | None = None
    total_evals = 0
    for start in starts:
        run_opts = OptimizerOptions(**{**options.__dict__, "initial": start})
        result = maximize(objective, run_opts, p=p)
        total_evals += result.evaluation_count
        improved = best is None or (
            result.objective_value > best.objective_value
            if options.maximize
            else result.objective_value < best.objective_value
        )
        if improved:
            best = result
    best.evaluation_count = total_evals
    return best
