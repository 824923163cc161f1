"""File formats: JSON for specs, instances, and results; NPZ table caches.

Table caches are keyed by a hash of the class spec so repeated runs share
the precomputation. Delimited dumps for proxy states and statevectors feed
external plotting.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .distributions import DistributionTable, precompute_all
from .errors import SizeLimitError, SpecError
from .problems import ClassSpec, Clause, CostSet, ProblemInstance
from .proxy import HomogState, Schedule
from .optimize import OptimizationResult, Parameterization


def spec_to_dict(spec: ClassSpec) -> dict:
    return {
        "kind": spec.kind.value,
        "n": spec.n,
        "m": spec.m,
        "p_e": spec.p_e,
        "k": spec.k,
        "margin": spec.margin,
        "direction": spec.direction.value,
    }


def spec_from_dict(data: dict) -> ClassSpec:
    known = {"kind", "n", "m", "p_e", "k", "margin", "direction"}
    unknown = set(data) - known
    if unknown:
        raise SpecError(f"unknown class spec fields: {sorted(unknown)}")
    if "kind" not in data or "n" not in data:
        raise SpecError("class spec requires at least 'kind' and 'n'")
    return ClassSpec(
        kind=data["kind"],
        n=int(data["n"]),
        m=None if data.get("m") is None else int(data["m"]),
        p_e=None if data.get("p_e") is None else float(data["p_e"]),
        k=None if data.get("k") is None else int(data["k"]),
        margin=int(data.get("margin", 0)),
        direction=data.get("direction"),
    )


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(data) -> str:
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()[:16]


def spec_hash(spec: ClassSpec) -> str:
    return config_hash(spec_to_dict(spec))


def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "spec": spec_to_dict(instance.spec),
        "n": instance.n,
        "clauses": [
            {
                "variables": list(cl.variables),
                "parity": cl.parity,
                "negations": list(cl.negations),
            }
            for cl in instance.clauses
        ],
    }


def instance_from_dict(data: dict) -> ProblemInstance:
    spec = spec_from_dict(data["spec"])
    clauses = tuple(
        Clause(
            variables=tuple(cl["variables"]),
            parity=int(cl.get("parity", 0)),
            negations=tuple(cl.get("negations", ())),
        )
        for cl in data["clauses"]
    )
    return ProblemInstance(spec=spec, n=int(data["n"]), clauses=clauses)


def save_json(data, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def load_json(path: str | Path):
    return json.loads(Path(path).read_text())


def save_table(table: DistributionTable, path: str | Path) -> Path:
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(path.suffix + ".npz")
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        spec=canonical_json(spec_to_dict(table.spec)),
        c_max=table.cost_set.c_max,
        p_of_c=table.p_of_c,
        n_table=table.n_table,
        reachable=table.reachable,
    )
    return path


def load_table(path: str | Path) -> DistributionTable:
    with np.load(path, allow_pickle=False) as data:
        spec = spec_from_dict(json.loads(str(data["spec"])))
        return DistributionTable(
            spec=spec,
            cost_set=CostSet(int(data["c_max"])),
            p_of_c=data["p_of_c"],
            n_table=data["n_table"],
            reachable=data["reachable"],
        )


def table_cache_path(spec: ClassSpec, cache_dir: str | Path) -> Path:
    return Path(cache_dir) / f"table-{spec_hash(spec)}.npz"


def load_or_precompute(spec: ClassSpec, cache_dir: str | Path) -> DistributionTable:
    """Read the cached table for this spec, computing and caching on a miss."""
    path = table_cache_path(spec, cache_dir)
    if path.exists():
        table = load_table(path)
        if spec_hash(table.spec) == spec_hash(spec):
            return table
    table = precompute_all(spec)
    save_table(table, path)
    return table


def result_to_dict(result: OptimizationResult, spec: ClassSpec, p: int) -> dict:
    sched = result.schedule
    return {
        "class_hash": spec_hash(spec),
        "spec": spec_to_dict(spec),
        "p": p,
        "parameterization": (
            Parameterization.LINEAR_RAMP_4.value
            if result.ramp is not None
            else Parameterization.FULL_2P.value
        ),
        "params": [float(v) for v in result.params],
        "gammas": [float(g) for g in sched.gammas] if sched is not None else None,
        "betas": [float(b) for b in sched.betas] if sched is not None else None,
        "objective": result.objective_value,
        "iterations": result.iterations,
        "evaluations": result.evaluation_count,
        "trace": [[int(i), float(v)] for i, v in result.trace],
    }


def schedule_from_result(data: dict) -> Schedule:
    if data.get("gammas") is None:
        raise SpecError("result file carries no expanded schedule")
    return Schedule(gammas=np.array(data["gammas"]), betas=np.array(data["betas"]))


def write_csv(path: str | Path, header: list[str], rows, hash_comment: str) -> Path:
    """Delimited output with a config-hash comment line above the header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# config {hash_comment}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_homog_state_csv(
    state: HomogState, table: DistributionTable, path: str | Path, hash_comment: str = ""
) -> Path:
    rows = [
        (c, state.q[c].real, state.q[c].imag, table.p_of_c[c])
        for c in range(table.width)
    ]
    return write_csv(path, ["cost", "re_q", "im_q", "p_of_c"], rows, hash_comment)


def write_statevector_csv(
    amplitudes: np.ndarray, path: str | Path, hash_comment: str = "", limit: int = 12
) -> Path:
    n = int(np.log2(amplitudes.size))
    if n > limit:
        raise SizeLimitError(f"statevector dump limited to n <= {limit}")
    rows = [(i, a.real, a.imag) for i, a in enumerate(amplitudes)]
    return write_csv(path, ["index", "re", "im"], rows, hash_comment)
