"""Random constraint-satisfaction problem classes.

A :class:`ClassSpec` names a random CSP class (not a single instance): MaxCut
on Erdos-Renyi graphs, random MaxE3Lin2, random Max-k-XOR, random k-SAT, or
the Hamming-weight ramp used as an exactness fixture. The module draws
concrete instances, evaluates costs, and supplies the class-level scalar
probabilities consumed by the replacement-distribution precomputation.

Cost conventions:

* XOR-style classes (MaxCut, MaxE3Lin2, Max-k-XOR) count satisfied clauses
  and are maximized. A clause contributes ``XOR(x[vars]) ^ parity``.
* Random k-SAT counts *violated* clauses and is minimized. This is forced by
  the class cost distribution, a binomial in the per-assignment violation
  probability 2^-k; there is no satisfied-count reading with that law.
* The Hamming-weight class scores ``popcount(x)`` via one unit clause per
  variable. Its distance/cost counts have an exact closed form, which makes
  it the reference class for which the homogeneous proxy is exact.

Bitstrings are integers; variable i is bit i (least significant first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .errors import SizeLimitError, SpecError

# Hard ceiling for 2^n enumerations (cost vectors, brute force, exact states).
EXHAUSTIVE_LIMIT = 24

_LOG2 = math.log(2.0)


class Kind(str, Enum):
    MAXCUT_ER = "maxcut-er"
    MAX_E3_LIN2 = "maxe3lin2"
    MAX_K_XOR = "max-k-xor"
    RAND_K_SAT = "rand-k-sat"
    HAMMING_WEIGHT = "hamming-weight"


class Direction(str, Enum):
    MAXIMIZE_SATISFIED = "maximize-satisfied"
    MINIMIZE_CONFLICTS = "minimize-conflicts"


def _comb(a: int, b: int) -> int:
    """Binomial coefficient with out-of-range arguments evaluating to 0."""
    if b < 0 or a < 0 or b > a:
        return 0
    return math.comb(a, b)


@dataclass(frozen=True)
class ClassSpec:
    """A random CSP class: kind, size, clause structure, and direction.

    ``m`` is the clause count used for all class-level computations. For
    MaxCut on G(n, p_e) it is fixed to ceil(p_e * n(n-1)/2), the expected
    edge count, even though drawn instances vary around it. ``margin``
    widens the cost set by that many binomial standard deviations of the
    edge count (MaxCut only) to accommodate instances drawn above the mean.
    """

    kind: Kind
    n: int
    m: int | None = None
    p_e: float | None = None
    k: int | None = None
    margin: int = 0
    direction: Direction | None = None

    def __post_init__(self):
        k = self.kind if isinstance(self.kind, Kind) else Kind(str(self.kind))
        object.__setattr__(self, "kind", k)
        if self.direction is not None and not isinstance(self.direction, Direction):
            object.__setattr__(self, "direction", Direction(str(self.direction)))
        if self.n < 1:
            raise SpecError(f"variable count must be positive, got n={self.n}")

        if k is Kind.MAXCUT_ER:
            if self.p_e is None or not 0.0 <= self.p_e <= 1.0:
                raise SpecError("maxcut-er requires edge probability p_e in [0, 1]")
            if self.k not in (None, 2):
                raise SpecError("maxcut-er clauses act on exactly 2 variables")
            object.__setattr__(self, "k", 2)
            expected = math.ceil(self.p_e * self.n * (self.n - 1) / 2)
            if self.m is None:
                object.__setattr__(self, "m", expected)
            elif self.m != expected:
                raise SpecError(
                    f"maxcut-er fixes m = ceil(p_e * n(n-1)/2) = {expected}, got m={self.m}"
                )
        else:
            if self.p_e is not None:
                raise SpecError(f"p_e only applies to maxcut-er, not {k.value}")
            if self.margin != 0:
                raise SpecError("margin only applies to maxcut-er")
            if k is Kind.MAX_E3_LIN2:
                if self.k not in (None, 3):
                    raise SpecError("maxe3lin2 clauses act on exactly 3 variables")
                object.__setattr__(self, "k", 3)
            elif k is Kind.HAMMING_WEIGHT:
                if self.k not in (None, 1):
                    raise SpecError("hamming-weight clauses act on 1 variable")
                object.__setattr__(self, "k", 1)
                if self.m not in (None, self.n):
                    raise SpecError("hamming-weight has one clause per variable")
                object.__setattr__(self, "m", self.n)
            elif self.k is None:
                raise SpecError(f"{k.value} requires a clause arity k")
            if self.m is None:
                raise SpecError(f"{k.value} requires a clause count m")

        if self.margin < 0:
            raise SpecError("margin must be a non-negative integer")
        if self.m < 1:
            raise SpecError(f"clause count must be positive, got m={self.m}")
        if not 1 <= self.k <= self.n:
            raise SpecError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")

        forced = (
            Direction.MINIMIZE_CONFLICTS
            if k is Kind.RAND_K_SAT
            else Direction.MAXIMIZE_SATISFIED
        )
        if self.direction is None:
            object.__setattr__(self, "direction", forced)
        elif self.direction is not forced:
            raise SpecError(f"{k.value} direction is fixed to {forced.value}")

    @property
    def maximize(self) -> bool:
        return self.direction is Direction.MAXIMIZE_SATISFIED


@dataclass(frozen=True)
class Clause:
    """One clause: variable tuple, parity target, and k-SAT literal signs."""

    variables: tuple[int, ...]
    parity: int = 0
    negations: tuple[int, ...] = ()

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise SpecError(f"clause variables must be distinct: {self.variables}")
        if self.negations and len(self.negations) != len(self.variables):
            raise SpecError("negations must align with the clause variables")


@dataclass(frozen=True)
class ProblemInstance:
    """A drawn instance: the clause list plus the class it came from."""

    spec: ClassSpec
    n: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        for cl in self.clauses:
            if any(v < 0 or v >= self.n for v in cl.variables):
                raise SpecError(f"clause variable out of range: {cl.variables}")

    @property
    def m(self) -> int:
        """Drawn clause count (may deviate from spec.m for MaxCut classes)."""
        return len(self.clauses)


@dataclass(frozen=True)
class CostSet:
    """Contiguous integer cost range {0, 1, ..., c_max}."""

    c_max: int

    def __post_init__(self):
        if self.c_max < 1:
            raise SpecError(f"cost set needs c_max >= 1, got {self.c_max}")

    def __len__(self) -> int:
        return self.c_max + 1

    def values(self) -> range:
        return range(self.c_max + 1)

    def __contains__(self, c) -> bool:
        return 0 <= int(c) <= self.c_max


def rng_for_seed(seed: int) -> np.random.Generator:
    """Portable seeded generator; PCG64 streams are stable across platforms."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def generate_instance(spec: ClassSpec, seed: int) -> ProblemInstance:
    """Draw one instance of the class, deterministically in (spec, seed).

    MaxCut scans all n(n-1)/2 vertex pairs in lexicographic order and keeps
    each edge with probability p_e. Clause classes draw m independent
    clauses, each on k distinct variables chosen uniformly, with fair parity
    bits (XOR classes) or fair literal signs (k-SAT). The Hamming-weight
    class is a fixed design, one unit clause per variable, for every seed.
    """
    rng = rng_for_seed(seed)
    n, k = spec.n, spec.k
    clauses: list[Clause] = []

    if spec.kind is Kind.MAXCUT_ER:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        draws = rng.random(len(pairs))
        for (i, j), u in zip(pairs, draws):
            if u < spec.p_e:
                clauses.append(Clause((i, j)))
    elif spec.kind is Kind.HAMMING_WEIGHT:
        clauses = [Clause((i,)) for i in range(n)]
    elif spec.kind is Kind.RAND_K_SAT:
        for _ in range(spec.m):
            vars_ = np.sort(rng.choice(n, size=k, replace=False))
            negs = rng.integers(0, 2, size=k)
            clauses.append(Clause(tuple(int(v) for v in vars_), 0, tuple(int(b) for b in negs)))
    else:  # XOR-style clause classes
        for _ in range(spec.m):
            vars_ = np.sort(rng.choice(n, size=k, replace=False))
            parity = int(rng.integers(0, 2))
            clauses.append(Clause(tuple(int(v) for v in vars_), parity))

    return ProblemInstance(spec=spec, n=n, clauses=tuple(clauses))


def _as_index(x, n: int) -> int:
    """Accept an integer index or a bit literal like '010' (char i = var i)."""
    if isinstance(x, str):
        if len(x) != n or set(x) - {"0", "1"}:
            raise SpecError(f"bitstring {x!r} does not have length {n}")
        return sum(1 << i for i, ch in enumerate(x) if ch == "1")
    xi = int(x)
    if xi < 0 or xi >> n:
        raise SpecError(f"bitstring index {xi} out of range for n={n}")
    return xi


def evaluate_cost(instance: ProblemInstance, x) -> int:
    """Cost of one assignment: satisfied clauses, or conflicts for k-SAT."""
    xi = _as_index(x, instance.n)
    kind = instance.spec.kind
    cost = 0
    if kind is Kind.RAND_K_SAT:
        for cl in instance.clauses:
            if all((xi >> v) & 1 == neg for v, neg in zip(cl.variables, cl.negations)):
                cost += 1  # every literal false: clause violated
    else:
        for cl in instance.clauses:
            acc = cl.parity
            for v in cl.variables:
                acc ^= (xi >> v) & 1
            cost += acc
    return cost


def cost_vector(instance: ProblemInstance, limit: int = EXHAUSTIVE_LIMIT) -> np.ndarray:
    """Costs of all 2^n assignments, indexed by bitstring integer."""
    n = instance.n
    if n > limit:
        raise SizeLimitError(f"cost vector over 2^{n} assignments exceeds limit {limit}")
    idx = np.arange(1 << n, dtype=np.int64)
    costs = np.zeros(1 << n, dtype=np.int64)
    kind = instance.spec.kind
    if kind is Kind.RAND_K_SAT:
        for cl in instance.clauses:
            violated = np.ones(1 << n, dtype=bool)
            for v, neg in zip(cl.variables, cl.negations):
                violated &= ((idx >> v) & 1) == neg
            costs += violated
    else:
        for cl in instance.clauses:
            acc = np.full(1 << n, cl.parity, dtype=np.int64)
            for v in cl.variables:
                acc ^= (idx >> v) & 1
            costs += acc
    return costs


def cost_set(spec: ClassSpec) -> CostSet:
    """Estimated set of achievable costs for the class, as {0..c_max}."""
    if spec.kind is Kind.MAXCUT_ER and spec.margin > 0:
        pairs = spec.n * (spec.n - 1) // 2
        sigma = math.sqrt(pairs * spec.p_e * (1.0 - spec.p_e))
        return CostSet(math.ceil(spec.p_e * pairs + spec.margin * sigma))
    return CostSet(spec.m)


def log_cost_probability(spec: ClassSpec, c: int) -> float:
    """log P(c): probability a uniform random bitstring has cost c.

    Returns -inf for costs in a margin-widened set beyond the class support.
    """
    if c not in cost_set(spec):
        raise SpecError(f"cost {c} outside the cost set of the class")
    m = spec.m
    if c > m:
        return -math.inf
    log_binom = float(gammaln(m + 1) - gammaln(c + 1) - gammaln(m - c + 1))
    if spec.kind is Kind.RAND_K_SAT:
        # per-assignment violation probability 2^-k, independent across clauses
        return log_binom - spec.k * m * _LOG2 + (m - c) * math.log(2.0**spec.k - 1.0)
    if spec.kind is Kind.HAMMING_WEIGHT:
        return float(gammaln(spec.n + 1) - gammaln(c + 1) - gammaln(spec.n - c + 1)) - spec.n * _LOG2
    return log_binom - m * _LOG2


def cost_probability(spec: ClassSpec, c: int) -> float:
    """P(c), assembled in log space and exponentiated on return."""
    return math.exp(log_cost_probability(spec, c))


def pair_probabilities(spec: ClassSpec, d: int) -> tuple[float, float, float]:
    """Per-clause (p_both, p_one, p_neither) for bitstrings at distance d.

    "Both/one/neither" refer to the event the clause cost counts: satisfied
    for the XOR classes, violated for random k-SAT. p_one is the probability
    of one *specific* bitstring scoring and the other not, so the three
    values satisfy p_both + 2*p_one + p_neither = 1.
    """
    n, k = spec.n, spec.k
    if d < 0 or d > n:
        raise SpecError(f"distance {d} outside [0, {n}]")
    if spec.kind is Kind.RAND_K_SAT:
        # both violate only when the clause avoids every flipped variable
        p_both = 2.0**-k * _comb(n - d, k) / _comb(n, k)
        p_one = 2.0**-k - p_both
        return p_both, p_one, 1.0 - 2.0 * p_one - p_both
    if spec.kind is Kind.HAMMING_WEIGHT:
        # unit clause on a shared bit: both or neither; on a flipped bit:
        # always exactly one
        p_same_half = (n - d) / (2.0 * n)
        return p_same_half, d / (2.0 * n), p_same_half
    # XOR classes: clause value preserved iff an even number of its k
    # variables fall among the d flipped bits
    p_same = sum(
        _comb(d, 2 * l) * _comb(n - d, k - 2 * l) for l in range(k // 2 + 1)
    ) / _comb(n, k)
    return 0.5 * p_same, 0.5 * (1.0 - p_same), 0.5 * p_same


def brute_force_optimum(
    instance: ProblemInstance, limit: int = EXHAUSTIVE_LIMIT
) -> tuple[int, int]:
    """Extremal cost over all 2^n assignments and the number attaining it."""
    costs = cost_vector(instance, limit=limit)
    c_opt = int(costs.max() if instance.spec.maximize else costs.min())
    return c_opt, int((costs == c_opt).sum())
