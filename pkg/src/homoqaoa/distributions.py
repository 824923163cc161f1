"""Class-level replacement distributions and their empirical counterparts.

The central object is N(c'; d, c), the expected number of bitstrings of cost
c at Hamming distance d from a bitstring of cost c', averaged over the whole
random class. For the clause classes it follows from a multinomial over the
per-clause pair probabilities:

    N(c'; d, c) = C(n, d) * P(c', c | d) / P(c')
    P(c', c | d) = sum_b  m! / (b! (c'-b)! (c-b)! (m+b-c'-c)!)
                   * p_both^b * p_one^(c'+c-2b) * p_neither^(m+b-c'-c)

with b, the number of clauses scored by both bitstrings, running from
max(0, c'+c-m) to min(c', c). Every term is assembled in log space (the
factorials overflow well before m = 100) and summed with log-sum-exp. A
probability factor raised to the power 0 contributes 1 even when the
probability itself is 0, which the degenerate d = 0 and d = n cases require.

The Hamming-weight class bypasses the multinomial: its counts depend only on
the anchor weight and have the exact closed form C(c', j) * C(n-c', d-j)
with j = (c' + d - c) / 2, making it an end-to-end exactness fixture.

Empirical n(x; d, c) tables (full enumeration per bitstring) support
validating the replacement: cohort means and deviations over all x with a
given cost, and Pearson correlation against the analytical table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import (
    CostUnreachableError,
    EmptyCohortError,
    NumericalError,
    SpecError,
)
from .problems import (
    EXHAUSTIVE_LIMIT,
    ClassSpec,
    CostSet,
    Kind,
    ProblemInstance,
    _as_index,
    cost_set,
    cost_vector,
    log_cost_probability,
    pair_probabilities,
)

# Costs with P(c') below this are treated as unreachable and their rows zeroed.
UNDERFLOW_THRESHOLD = 1e-300
_LOG_UNDERFLOW = math.log(UNDERFLOW_THRESHOLD)

# Chunk size bound for the (c', c, b) kernel, in elements.
_KERNEL_CHUNK = 1 << 22


def _log_binom_row(n: int) -> np.ndarray:
    d = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(d + 1) - gammaln(n - d + 1)


def _xlogy(e: np.ndarray, logp: float) -> np.ndarray:
    """e * logp with the 0 * log(0) = 0 convention."""
    return np.where(e == 0, 0.0, e * logp)


def _log_joint_block(
    spec: ClassSpec, d: int, cps: np.ndarray, log_pair: tuple[float, float, float]
) -> np.ndarray:
    """log P(c', c | d) for anchor costs ``cps``; shape (len(cps), |C|)."""
    m = spec.m
    width = len(cost_set(spec))
    lpb, lpo, lpn = log_pair

    cp = cps[:, None, None]
    c = np.arange(width)[None, :, None]
    b = np.arange(min(width, m + 1))[None, None, :]
    one_e = cp + c - 2 * b
    nei_e = m + b - cp - c
    valid = (b <= cp) & (b <= c) & (nei_e >= 0) & (cp <= m) & (c <= m)

    b_ = np.where(valid, b, 0)
    cpb = np.where(valid, cp - b, 0)
    cb = np.where(valid, c - b, 0)
    nei = np.where(valid, nei_e, 0)
    gl = gammaln(np.arange(m + 2) + 1.0)  # gl[i] = log(i!)
    with np.errstate(invalid="ignore"):
        terms = (
            gl[m]
            - gl[b_]
            - gl[cpb]
            - gl[cb]
            - gl[nei]
            + _xlogy(b_, lpb)
            + _xlogy(np.where(valid, one_e, 0), lpo)
            + _xlogy(nei, lpn)
        )
    terms = np.where(valid, terms, -np.inf)
    return logsumexp(terms, axis=2)


def _log_pair(spec: ClassSpec, d: int) -> tuple[float, float, float]:
    probs = pair_probabilities(spec, d)
    return tuple(math.log(p) if p > 0.0 else -math.inf for p in probs)


def _hamming_table(spec: ClassSpec) -> np.ndarray:
    """Exact counts for the Hamming-weight class; shape (n+1, n+1, n+1).

    A bitstring of weight c' reaches weight c at distance d by flipping
    j = (c' + d - c) / 2 ones and d - j zeros, when j is integral.
    """
    n = spec.n
    table = np.zeros((n + 1, n + 1, n + 1))
    for cp in range(n + 1):
        for d in range(n + 1):
            for c in range(n + 1):
                twoj = cp + d - c
                if twoj % 2:
                    continue
                j = twoj // 2
                if 0 <= j <= cp and 0 <= d - j <= n - cp:
                    table[cp, d, c] = math.comb(cp, j) * math.comb(n - cp, d - j)
    return table


@dataclass(frozen=True)
class DistributionTable:
    """Precomputed P(c') and N(c'; d, c) for a class.

    ``n_table`` is indexed (c', d, c). Rows for unreachable anchor costs
    (P(c') below the underflow threshold) are identically zero and flagged
    in ``reachable``.
    """

    spec: ClassSpec
    cost_set: CostSet
    p_of_c: np.ndarray
    n_table: np.ndarray
    reachable: np.ndarray

    @property
    def width(self) -> int:
        return len(self.cost_set)

    @property
    def key(self) -> str:
        from .serialize import spec_hash

        return spec_hash(self.spec)

    def contraction_matrix(self) -> np.ndarray:
        """The (|C|*(n+1), |C|) view used by the proxy's layer contraction."""
        return self.n_table.reshape(self.width * (self.spec.n + 1), self.width)


def joint_cost_probability(spec: ClassSpec, c_prime: int, c: int, d: int) -> float:
    """P(c', c | d): both costs for a random pair at Hamming distance d."""
    cs = cost_set(spec)
    if c_prime not in cs or c not in cs:
        raise SpecError(f"costs ({c_prime}, {c}) outside the cost set")
    if spec.kind is Kind.HAMMING_WEIGHT:
        # exact fixed-design route: joint = P(c') * N(c'; d, c) / C(n, d)
        count = _hamming_table(spec)[c_prime, d, c]
        log_p = log_cost_probability(spec, c_prime)
        if count == 0.0:
            return 0.0
        return math.exp(log_p + math.log(count) - _log_binom_row(spec.n)[d])
    block = _log_joint_block(spec, d, np.array([c_prime]), _log_pair(spec, d))
    return float(np.exp(block[0, c]))


def replacement_distribution(spec: ClassSpec, c_prime: int) -> np.ndarray:
    """N(c'; d, c) slice over (d, c) for one anchor cost; shape (n+1, |C|)."""
    cs = cost_set(spec)
    if c_prime not in cs:
        raise CostUnreachableError(f"cost {c_prime} outside the cost set")
    if spec.kind is Kind.HAMMING_WEIGHT:
        return _hamming_table(spec)[c_prime]
    log_p = log_cost_probability(spec, c_prime)
    if log_p <= _LOG_UNDERFLOW:
        raise CostUnreachableError(
            f"P({c_prime}) underflows; exclude this cost from evolution"
        )
    width = len(cs)
    out = np.empty((spec.n + 1, width))
    lb = _log_binom_row(spec.n)
    cps = np.array([c_prime])
    for d in range(spec.n + 1):
        block = _log_joint_block(spec, d, cps, _log_pair(spec, d))
        out[d] = np.exp(lb[d] + block[0] - log_p)
    return out


def precompute_all(spec: ClassSpec) -> DistributionTable:
    """Build the full table of P(c') and N(c'; d, c) for the class.

    Unreachable anchor costs get zero rows rather than raising, so callers
    can skip them during evolution.
    """
    cs = cost_set(spec)
    width = len(cs)
    n = spec.n

    if spec.kind is Kind.HAMMING_WEIGHT:
        log_p = np.array([log_cost_probability(spec, c) for c in cs.values()])
        return DistributionTable(
            spec=spec,
            cost_set=cs,
            p_of_c=np.exp(log_p),
            n_table=_hamming_table(spec),
            reachable=np.ones(width, dtype=bool),
        )

    log_p = np.array([log_cost_probability(spec, c) for c in cs.values()])
    reachable = log_p > _LOG_UNDERFLOW
    p_of_c = np.where(reachable, np.exp(log_p), 0.0)
    safe_log_p = np.where(reachable, log_p, 0.0)

    n_table = np.zeros((width, n + 1, width))
    lb = _log_binom_row(n)
    chunk = max(1, _KERNEL_CHUNK // (width * min(width, spec.m + 1)))
    for d in range(n + 1):
        log_pair = _log_pair(spec, d)
        for start in range(0, width, chunk):
            cps = np.arange(start, min(start + chunk, width))
            block = _log_joint_block(spec, d, cps, log_pair)
            rows = np.exp(lb[d] + block - safe_log_p[cps, None])
            rows[~reachable[cps]] = 0.0
            n_table[cps, d, :] = rows
    return DistributionTable(
        spec=spec, cost_set=cs, p_of_c=p_of_c, n_table=n_table, reachable=reachable
    )


def table_residuals(table: DistributionTable) -> dict[str, float]:
    """Worst-case relative residuals of the table's defining sum rules."""
    n = table.spec.n
    lb = np.exp(_log_binom_row(n))
    rows = table.n_table[table.reachable]
    row_sums = rows.sum(axis=2)
    rel_row = np.abs(row_sums - lb[None, :]) / lb[None, :]
    totals = rows.sum(axis=(1, 2))
    rel_total = np.abs(totals - 2.0**n) / 2.0**n

    weighted = table.p_of_c[:, None, None] * table.n_table
    sym_gap = np.abs(weighted - weighted.transpose(2, 1, 0))
    scale = np.maximum(np.abs(weighted), np.abs(weighted.transpose(2, 1, 0)))
    with np.errstate(invalid="ignore", divide="ignore"):
        rel_balance = np.where(scale > 0, sym_gap / scale, 0.0)

    return {
        "row_sum": float(rel_row.max()) if rel_row.size else 0.0,
        "total_sum": float(rel_total.max()) if rel_total.size else 0.0,
        "detailed_balance": float(rel_balance.max()),
        "prob_sum": float(abs(table.p_of_c.sum() - 1.0)),
    }


@dataclass(frozen=True)
class EmpiricalDistribution:
    """n(x; d, c) for one bitstring: exact counts by full enumeration."""

    counts: np.ndarray
    anchor_cost: int


def empirical_distribution(
    instance: ProblemInstance, x, limit: int = EXHAUSTIVE_LIMIT
) -> EmpiricalDistribution:
    """Count bitstrings by (distance from x, cost); shape (n+1, m_inst+1)."""
    n = instance.n
    xi = _as_index(x, n)
    costs = cost_vector(instance, limit=limit)
    width = instance.m + 1
    dist = np.bitwise_count(np.arange(1 << n, dtype=np.uint64) ^ np.uint64(xi))
    flat = np.bincount(
        dist.astype(np.int64) * width + costs, minlength=(n + 1) * width
    )
    return EmpiricalDistribution(
        counts=flat.reshape(n + 1, width), anchor_cost=int(costs[xi])
    )


def empirical_stats(
    instances: list[ProblemInstance], c_prime: int, limit: int = EXHAUSTIVE_LIMIT
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and population std of n(x; d, c) over the cost-c' cohort.

    The cohort pools every bitstring with cost c' across all instances.
    Count arrays are zero-padded on the cost axis to a common width, the
    largest drawn clause count plus one.
    """
    if not instances:
        raise EmptyCohortError("no instances supplied")
    n = instances[0].n
    if any(inst.n != n for inst in instances):
        raise SpecError("all instances must share the variable count")
    width = max(inst.m for inst in instances) + 1

    total = np.zeros((n + 1, width))
    total_sq = np.zeros((n + 1, width))
    members = 0
    for inst in instances:
        costs = cost_vector(inst, limit=limit)
        cohort = np.flatnonzero(costs == c_prime)
        if cohort.size == 0:
            continue
        idx = np.arange(1 << n, dtype=np.uint64)
        w = inst.m + 1
        for xi in cohort:
            dist = np.bitwise_count(idx ^ np.uint64(int(xi))).astype(np.int64)
            flat = np.bincount(dist * w + costs, minlength=(n + 1) * w)
            counts = np.zeros((n + 1, width))
            counts[:, :w] = flat.reshape(n + 1, w)
            total += counts
            total_sq += counts * counts
        members += cohort.size
    if members == 0:
        raise EmptyCohortError(f"no bitstring with cost {c_prime} in any instance")
    mean = total / members
    var = np.maximum(total_sq / members - mean * mean, 0.0)
    return mean, np.sqrt(var)


def pearson_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson r over flattened entries of two equal-shape arrays."""
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    if av.shape != bv.shape:
        raise SpecError(f"shape mismatch: {av.shape} vs {bv.shape}")
    av = av.ravel()
    bv = bv.ravel()
    da = av - av.mean()
    db = bv - bv.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0.0:
        raise NumericalError("correlation undefined for constant input")
    return float(da @ db) / denom
