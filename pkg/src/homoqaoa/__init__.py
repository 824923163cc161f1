"""Classical QAOA parameter setting via a cost-indexed homogeneous proxy.

The package models random CSP classes whose cost spectrum grows polynomially
with the problem size, replaces the exponential QAOA state by a vector of
per-cost amplitude analogues, and optimizes schedule angles against that
proxy. An exact statevector simulator provides the ground truth for
validating both the proxy and the parameters it produces.
"""

from .errors import (
    CostUnreachableError,
    EmptyCohortError,
    NumericalError,
    SizeLimitError,
    SpecError,
)
from .problems import (
    EXHAUSTIVE_LIMIT,
    ClassSpec,
    Clause,
    CostSet,
    Direction,
    Kind,
    ProblemInstance,
    brute_force_optimum,
    cost_probability,
    cost_set,
    cost_vector,
    evaluate_cost,
    generate_instance,
    pair_probabilities,
)
from .distributions import (
    DistributionTable,
    EmpiricalDistribution,
    empirical_distribution,
    empirical_stats,
    joint_cost_probability,
    pearson_correlation,
    precompute_all,
    replacement_distribution,
    table_residuals,
)
from .proxy import (
    HomogState,
    LinearRamp,
    Schedule,
    evolve,
    evolve_step,
    evolve_trajectory,
    expected_cost,
    initial_state,
    mixer_element,
    proxy_pseudostate,
    pseudo_norm,
    sum_of_paths_state,
)
from .statevector import (
    Statevector,
    approximation_ratio,
    expectation,
    qaoa_state,
    squared_overlap,
)
from .optimize import (
    DEFAULT_RAMP,
    OptimizationResult,
    OptimizerOptions,
    Parameterization,
    heuristic,
    homogeneous_objective,
    linear_ramp_expand,
    maximize,
)

__version__ = "0.1.0"
