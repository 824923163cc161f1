"""Experiment runner: every validation and benchmark pipeline as a command.

Each command resolves its configuration from flags plus an optional JSON
config file (explicit flags win), writes a manifest echoing the resolved
config next to its outputs, and stamps delimited outputs with the config
hash. Rerunning a command from its manifest reproduces the delimited
outputs byte for byte.

Report commands render a companion PNG next to the delimited output unless
--no-figures is passed.

Exit codes: 0 success, 2 invalid configuration, 3 size-limit refusal,
4 numerical failure.
"""

from __future__ import annotations

import functools
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np
from click.core import ParameterSource

from . import __version__
from .distributions import empirical_stats, pearson_correlation, precompute_all, table_residuals
from .errors import (
    CostUnreachableError,
    EmptyCohortError,
    NumericalError,
    SizeLimitError,
    SpecError,
)
from .optimize import (
    OptimizerOptions,
    Parameterization,
    heuristic,
    homogeneous_objective_many,
    linear_ramp_expand,
)
from .problems import ClassSpec, cost_vector, generate_instance
from .proxy import LinearRamp, Schedule, evolve_trajectory, scatter_to_bitstrings
from .serialize import (
    config_hash,
    load_json,
    load_or_precompute,
    result_to_dict,
    save_json,
    save_table,
    schedule_from_result,
    spec_from_dict,
    spec_hash,
    spec_to_dict,
    table_cache_path,
    write_csv,
)
from .statevector import expectation, qaoa_layer, qaoa_state, squared_overlap, uniform_state


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SpecError as exc:
            _fail(2, str(exc))
        except SizeLimitError as exc:
            _fail(3, str(exc))
        except (NumericalError, CostUnreachableError, EmptyCohortError) as exc:
            _fail(4, str(exc))

    return wrapper


def class_options(fn):
    fn = click.option("--class", "kind", default="maxcut-er", show_default=True,
                      help="Problem class kind.")(fn)
    fn = click.option("--n", type=int, default=8, show_default=True,
                      help="Variable count.")(fn)
    fn = click.option("--pe", type=float, default=None, help="Edge probability (maxcut-er).")(fn)
    fn = click.option("--m", type=int, default=None, help="Clause count (clause classes).")(fn)
    fn = click.option("--k", type=int, default=None, help="Clause arity.")(fn)
    fn = click.option("--margin", type=int, default=0, show_default=True,
                      help="Cost-set widening in edge-count std deviations (maxcut-er).")(fn)
    return fn


def common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None,
                      help="JSON config or manifest; explicit flags override it.")(fn)
    fn = click.option("--out", type=click.Path(), required=False, default=None,
                      help="Output path (or stem for multi-file commands).")(fn)
    fn = click.option("--cache-dir", type=click.Path(), default=None,
                      help="Distribution-table cache directory.")(fn)
    fn = click.option("--workers", type=int, default=1, show_default=True,
                      help="Worker processes for grid cells and seeds.")(fn)
    fn = click.option("--figures/--no-figures", default=True, show_default=True,
                      help="Render companion PNG figures.")(fn)
    return fn


# Execution knobs that locate or parallelize a run without changing its data.
_HASH_EXCLUDE = {"out", "figures", "workers", "cache_dir"}


def resolve_config(ctx, params: dict) -> dict:
    """Merge file config under explicit flags and return the resolved dict."""
    cfg = dict(params)
    path = cfg.pop("config_path", None)
    if path:
        data = load_json(path)
        if isinstance(data, dict) and "config" in data and "command" in data:
            data = data["config"]  # accept a manifest of a previous run
        unknown = set(data) - set(cfg)
        if unknown:
            raise SpecError(f"unknown config fields: {sorted(unknown)}")
        for key, value in data.items():
            if ctx.get_parameter_source(key) != ParameterSource.COMMANDLINE:
                cfg[key] = value
    return cfg


def run_hash(cfg: dict) -> str:
    """Hash of the scientific parameters only, stamped into the outputs."""
    return config_hash({k: v for k, v in cfg.items() if k not in _HASH_EXCLUDE})


def build_spec(cfg: dict) -> ClassSpec:
    kind = str(cfg["kind"])
    p_e = cfg.get("pe")
    if kind == "maxcut-er" and p_e is None:
        p_e = 0.5
    return ClassSpec(
        kind=kind,
        n=int(cfg["n"]),
        m=cfg.get("m"),
        p_e=p_e,
        k=cfg.get("k"),
        margin=int(cfg.get("margin", 0)),
    )


def get_table(spec: ClassSpec, cache_dir):
    if cache_dir:
        return load_or_precompute(spec, cache_dir)
    return precompute_all(spec)


def write_manifest(out_stem: Path, command: str, cfg: dict, outputs: list[Path]) -> str:
    h = run_hash(cfg)
    manifest = {
        "command": command,
        "config": cfg,
        "config_hash": h,
        "outputs": [str(p) for p in outputs],
        "version": __version__,
    }
    save_json(manifest, Path(str(out_stem) + ".manifest.json"))
    return h


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v != ""]
    except ValueError as exc:
        raise SpecError(f"cannot parse float list {text!r}") from exc


def _resolve_schedule(cfg: dict) -> Schedule:
    """Schedule from --gammas/--betas, --ramp + --p, or an optimize result."""
    if cfg.get("gammas") or cfg.get("betas"):
        if not (cfg.get("gammas") and cfg.get("betas")):
            raise SpecError("provide both --gammas and --betas")
        return Schedule(
            gammas=np.array(_parse_floats(cfg["gammas"])),
            betas=np.array(_parse_floats(cfg["betas"])),
        )
    if cfg.get("ramp"):
        vals = _parse_floats(cfg["ramp"])
        if len(vals) != 4:
            raise SpecError("--ramp needs gamma_start,gamma_end,beta_start,beta_end")
        return linear_ramp_expand(LinearRamp(*vals), int(cfg["p"]))
    if cfg.get("result"):
        return schedule_from_result(load_json(cfg["result"]))
    raise SpecError("no schedule given: use --gammas/--betas, --ramp, or --result")


def _pool_map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@click.group()
@click.version_option(version=__version__)
def main():
    """Homogeneous-proxy QAOA parameter setting toolkit."""


# -- precompute ---------------------------------------------------------------


@main.command("precompute")
@class_options
@common_options
@click.pass_context
@guarded
def cmd_precompute(ctx, **params):
    """Build and cache the class distribution table, with a residual summary."""
    cfg = resolve_config(ctx, params)
    spec = build_spec(cfg)
    table = precompute_all(spec)
    out = Path(cfg["out"]) if cfg.get("out") else table_cache_path(
        spec, cfg.get("cache_dir") or "."
    )
    path = save_table(table, out)
    summary = {
        "spec": spec_to_dict(spec),
        "spec_hash": spec_hash(spec),
        "cost_set_size": table.width,
        "c_max": table.cost_set.c_max,
        "reachable_costs": int(table.reachable.sum()),
        "residuals": table_residuals(table),
    }
    summary_path = save_json(summary, Path(str(path) + ".summary.json"))
    h = write_manifest(path, "precompute", cfg, [path, summary_path])
    click.echo(f"table {path} |C|={table.width} config {h}")


# -- optimize -----------------------------------------------------------------


@main.command("optimize")
@class_options
@common_options
@click.option("--p", type=int, default=1, show_default=True, help="Circuit depth.")
@click.option("--parameterization", default="full-2p", show_default=True,
              type=click.Choice([v.value for v in Parameterization]))
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--max-iter", type=int, default=500, show_default=True)
@click.option("--fd-step", type=float, default=1e-6, show_default=True)
@click.option("--restarts", type=int, default=5, show_default=True)
@click.option("--prescan", type=int, default=1024, show_default=True,
              help="Seeded ramp candidates screened before quasi-Newton polish.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for restart and prescan draws.")
@click.pass_context
@guarded
def cmd_optimize(ctx, **params):
    """Run the class-level parameter-setting heuristic; write the result JSON."""
    cfg = resolve_config(ctx, params)
    spec = build_spec(cfg)
    table = get_table(spec, cfg.get("cache_dir"))
    options = OptimizerOptions(
        parameterization=cfg["parameterization"],
        tolerance=float(cfg["tol"]),
        max_iterations=int(cfg["max_iter"]),
        fd_step=float(cfg["fd_step"]),
        maximize=spec.maximize,
        restarts=int(cfg["restarts"]),
        prescan=int(cfg["prescan"]),
        restart_seed=int(cfg["seed"]),
    )
    p = int(cfg["p"])
    result = heuristic(spec, p, options, table=table)
    out = Path(cfg["out"]) if cfg.get("out") else Path(f"optimize-{spec_hash(spec)}-p{p}.json")
    path = save_json(result_to_dict(result, spec, p), out)
    outputs = [path]
    if cfg.get("figures", True):
        from .figures import save_trace

        outputs.append(save_trace(result.trace, Path(str(out) + ".trace.png")))
    h = write_manifest(out, "optimize", cfg, outputs)
    click.echo(
        f"objective {result.objective_value:.6f} after {result.evaluation_count} "
        f"evaluations -> {path} config {h}"
    )


# -- evaluate -----------------------------------------------------------------


def _evaluate_one(args):
    spec_data, seed, gammas, betas = args
    spec = spec_from_dict(spec_data)
    inst = generate_instance(spec, seed)
    costs = cost_vector(inst)
    c_opt = int(costs.max() if spec.maximize else costs.min())
    sched = Schedule(gammas=np.array(gammas), betas=np.array(betas))
    value = expectation(inst, qaoa_state(inst, sched, costs=costs), costs=costs)
    if spec.maximize:
        ratio = value / c_opt if c_opt else float("nan")
    else:
        ratio = (inst.m - value) / (inst.m - c_opt) if inst.m != c_opt else float("nan")
    return {"seed": seed, "m": inst.m, "c_opt": c_opt, "expectation": value, "ratio": ratio}


@main.command("evaluate")
@class_options
@common_options
@click.option("--seeds", default="0,1,2,3,4,5,6,7,8,9", show_default=True,
              help="Comma-separated instance seeds.")
@click.option("--p", type=int, default=1, show_default=True)
@click.option("--gammas", default=None, help="Comma-separated gamma angles.")
@click.option("--betas", default=None, help="Comma-separated beta angles.")
@click.option("--ramp", default=None, help="gamma_start,gamma_end,beta_start,beta_end")
@click.option("--result", type=click.Path(), default=None,
              help="Optimize result JSON supplying the schedule.")
@click.pass_context
@guarded
def cmd_evaluate(ctx, **params):
    """Exact per-instance cost expectation and approximation ratio for a schedule."""
    cfg = resolve_config(ctx, params)
    spec = build_spec(cfg)
    sched = _resolve_schedule(cfg)
    seeds = [int(s) for s in str(cfg["seeds"]).split(",") if s != ""]
    jobs = [
        (spec_to_dict(spec), seed, list(sched.gammas), list(sched.betas)) for seed in seeds
    ]
    rows = _pool_map(_evaluate_one, jobs, int(cfg.get("workers", 1)))
    out = Path(cfg["out"]) if cfg.get("out") else Path("evaluate.csv")
    h = run_hash(cfg)
    path = write_csv(
        out,
        ["seed", "m", "c_opt", "expectation", "ratio"],
        [(r["seed"], r["m"], r["c_opt"], r["expectation"], r["ratio"]) for r in rows],
        h,
    )
    ratios = np.array([r["ratio"] for r in rows], dtype=float)
    outputs = [path]
    if cfg.get("figures", True):
        from .figures import save_ratio_points

        outputs.append(
            save_ratio_points(seeds, list(ratios), Path(str(out) + ".png"),
                              title=f"p={sched.p}")
        )
    write_manifest(out, "evaluate", cfg, outputs)
    click.echo(
        f"{len(rows)} instances: ratio mean {np.nanmean(ratios):.4f} "
        f"std {np.nanstd(ratios):.4f} -> {path} config {h}"
    )


# -- overlap-sweep ------------------------------------------------------------


@main.command("overlap-sweep")
@class_options
@common_options
@click.option("--seed", type=int, default=0, show_default=True, help="Instance seed.")
@click.option("--p", type=int, default=20, show_default=True, help="Ramp depth.")
@click.option("--ramp", "ramps", multiple=True,
              help="gamma_start,gamma_end,beta_start,beta_end (repeatable).")
@click.pass_context
@guarded
def cmd_overlap_sweep(ctx, **params):
    """Layerwise squared overlap between the proxy pseudostate and exact QAOA."""
    cfg = resolve_config(ctx, params)
    spec = build_spec(cfg)
    ramp_specs = list(cfg.get("ramps") or ())
    if not ramp_specs:
        ramp_specs = ["0.1,0.4,0.8,0.1", "0.25,1.0,0.8,0.1", "0.5,2.0,0.8,0.1"]
    table = get_table(spec, cfg.get("cache_dir"))
    inst = generate_instance(spec, int(cfg["seed"]))
    costs = cost_vector(inst)
    p = int(cfg["p"])

    rows = []
    curves = {}
    for text in ramp_specs:
        vals = _parse_floats(text)
        if len(vals) != 4:
            raise SpecError("--ramp needs 4 comma-separated endpoints")
        ramp = LinearRamp(*vals)
        sched = linear_ramp_expand(ramp, p)
        states = evolve_trajectory(table, sched)
        psi = uniform_state(spec.n)
        overlaps = [1.0]
        for layer in range(1, p + 1):
            qaoa_layer(psi, float(sched.gammas[layer - 1]), float(sched.betas[layer - 1]),
                       costs, spec.n)
            pseudo = scatter_to_bitstrings(states[layer], table, inst, costs=costs)
            overlaps.append(squared_overlap(pseudo, psi))
        label = f"g {vals[0]:g}->{vals[1]:g}"
        curves[label] = (np.arange(p + 1), np.array(overlaps))
        for layer, ov in enumerate(overlaps):
            rows.append((*vals, p, layer, ov))

    out = Path(cfg["out"]) if cfg.get("out") else Path("overlap-sweep.csv")
    h = run_hash(cfg)
    path = write_csv(
        out,
        ["gamma_start", "gamma_end", "beta_start", "beta_end", "p", "layer",
         "squared_overlap"],
        rows,
        h,
    )
    outputs = [path]
    if cfg.get("figures", True):
        from .figures import save_overlap_curves

        outputs.append(save_overlap_curves(curves, Path(str(out) + ".png")))
    write_manifest(out, "overlap-sweep", cfg, outputs)
    click.echo(f"{len(ramp_specs)} ramps x {p} layers -> {path} config {h}")


# -- landscape ----------------------------------------------------------------


def _typical_rows(args):
    spec_data, seed, prefix_g, prefix_b, gamma_values, beta_values = args
    spec = spec_from_dict(spec_data)
    inst = generate_instance(spec, seed)
    costs = cost_vector(inst)
    out = np.empty((len(gamma_values), len(beta_values)))
    for i, g in enumerate(gamma_values):
        for j, b in enumerate(beta_values):
            sched = Schedule(
                gammas=np.append(prefix_g, g), betas=np.append(prefix_b, b)
            )
            state = qaoa_state(inst, sched, costs=costs)
            out[i, j] = expectation(inst, state, costs=costs)
    return out


@main.command("landscape")
@class_options
@common_options
@click.option("--seed", type=int, default=0, show_default=True, help="Instance seed.")
@click.option("--p", type=int, default=3, show_default=True, help="Total depth.")
@click.option("--grid", type=int, default=30, show_default=True, help="Grid cells per axis.")
@click.option("--gamma-max", type=float, default=2 * np.pi, show_default=True)
@click.option("--beta-max", type=float, default=np.pi, show_default=True)
@click.option("--prefix-gammas", default=None, help="Fixed angles for layers 1..p-1.")
@click.option("--prefix-betas", default=None, help="Fixed angles for layers 1..p-1.")
@click.pass_context
@guarded
def cmd_landscape(ctx, **params):
    """Final-layer objective grids: exact statevector next to the proxy.

    Without an explicit prefix the first p-1 layers come from a class-level
    heuristic run, mirroring how the proxy is meant to be used. The proxy
    grid is evaluated in one batch; the statevector grid simulates each cell
    and reports how much longer it took.
    """
    cfg = resolve_config(ctx, params)
    spec = build_spec(cfg)
    table = get_table(spec, cfg.get("cache_dir"))
    p = int(cfg["p"])
    grid = int(cfg["grid"])
    if p < 1 or grid < 2:
        raise SpecError("need p >= 1 and at least a 2x2 grid")

    if cfg.get("prefix_gammas") or cfg.get("prefix_betas"):
        prefix_g = np.array(_parse_floats(cfg["prefix_gammas"] or ""))
        prefix_b = np.array(_parse_floats(cfg["prefix_betas"] or ""))
        if len(prefix_g) != p - 1 or len(prefix_b) != p - 1:
            raise SpecError(f"prefix needs exactly p-1={p - 1} angles per vector")
    elif p > 1:
        options = OptimizerOptions(
            parameterization=Parameterization.FULL_2P, maximize=spec.maximize,
            restarts=6, prescan=512,
        )
        prefix = heuristic(spec, p - 1, options, table=table)
        prefix_g, prefix_b = prefix.schedule.gammas, prefix.schedule.betas
    else:
        prefix_g = np.array([])
        prefix_b = np.array([])

    gamma_values = np.linspace(0.0, float(cfg["gamma_max"]), grid, endpoint=False)
    beta_values = np.linspace(0.0, float(cfg["beta_max"]), grid, endpoint=False)

    t0 = time.perf_counter()
    workers = int(cfg.get("workers", 1))
    if workers > 1:
        chunks = np.array_split(gamma_values, workers)
        jobs = [
            (spec_to_dict(spec), int(cfg["seed"]), list(prefix_g), list(prefix_b),
             list(chunk), list(beta_values))
            for chunk in chunks if len(chunk)
        ]
        typical = np.vstack(_pool_map(_typical_rows, jobs, workers))
    else:
        typical = _typical_rows(
            (spec_to_dict(spec), int(cfg["seed"]), list(prefix_g), list(prefix_b),
             list(gamma_values), list(beta_values))
        )
    t_typical = time.perf_counter() - t0

    t0 = time.perf_counter()
    gg, bb = np.meshgrid(gamma_values, beta_values, indexing="ij")
    batch = grid * grid
    gammas = np.column_stack([np.broadcast_to(prefix_g, (batch, p - 1)), gg.ravel()])
    betas = np.column_stack([np.broadcast_to(prefix_b, (batch, p - 1)), bb.ravel()])
    homogeneous = homogeneous_objective_many(gammas, betas, table).reshape(grid, grid)
    t_homog = time.perf_counter() - t0

    out = Path(cfg["out"]) if cfg.get("out") else Path("landscape")
    h = run_hash(cfg)
    header = ["gamma"] + [repr(float(b)) for b in beta_values]
    outputs = []
    for name, data in (("typical", typical), ("homogeneous", homogeneous)):
        rows = [
            [float(g)] + [float(v) for v in data[i]] for i, g in enumerate(gamma_values)
        ]
        outputs.append(write_csv(Path(f"{out}.{name}.csv"), header, rows, h))
    summary = {
        "typical_seconds": t_typical,
        "homogeneous_seconds": t_homog,
        "speedup": t_typical / t_homog if t_homog > 0 else float("inf"),
        "prefix_gammas": [float(g) for g in prefix_g],
        "prefix_betas": [float(b) for b in prefix_b],
    }
    outputs.append(save_json(summary, Path(f"{out}.summary.json")))
    if cfg.get("figures", True):
        from .figures import save_landscape_pair

        outputs.append(
            save_landscape_pair(typical, homogeneous, gamma_values, beta_values,
                                Path(f"{out}.png"))
        )
    write_manifest(out, "landscape", cfg, outputs)
    click.echo(
        f"{grid}x{grid} grids: statevector {t_typical:.2f}s, proxy {t_homog:.3f}s "
        f"({summary['speedup']:.0f}x) -> {out}.* config {h}"
    )


# -- empirical-compare --------------------------------------------------------


@main.command("empirical-compare")
@class_options
@common_options
@click.option("--seeds", default="0,1,2,3,4,5,6,7,8,9", show_default=True,
              help="Comma-separated instance seeds for the cohort.")
@click.option("--costs", default=None,
              help="Anchor costs to compare (default: the modal cost).")
@click.pass_context
@guarded
def cmd_empirical_compare(ctx, **params):
    """Deviation heat map of enumerated counts and correlation with the table."""
    cfg = resolve_config(ctx, params)
    spec = build_spec(cfg)
    table = get_table(spec, cfg.get("cache_dir"))
    seeds = [int(s) for s in str(cfg["seeds"]).split(",") if s != ""]
    instances = [generate_instance(spec, s) for s in seeds]
    if cfg.get("costs"):
        anchors = [int(v) for v in _parse_floats(cfg["costs"])]
    else:
        anchors = [int(np.argmax(table.p_of_c))]

    out = Path(cfg["out"]) if cfg.get("out") else Path("empirical-compare")
    h = run_hash(cfg)
    corr_rows = []
    stdmean_outputs = []
    first_ratio = None
    for idx, anchor in enumerate(anchors):
        mean, std = empirical_stats(instances, anchor)
        width = min(mean.shape[1], table.width)
        r = pearson_correlation(table.n_table[anchor][:, :width], mean[:, :width])
        corr_rows.append((anchor, r, float(table.p_of_c[anchor])))
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(mean > 0, std / np.where(mean > 0, mean, 1.0), np.nan)
        if idx == 0:
            first_ratio = ratio
            header = ["d"] + [str(c) for c in range(ratio.shape[1])]
            rows = [[d] + [float(v) for v in ratio[d]] for d in range(ratio.shape[0])]
            stdmean_outputs.append(
                write_csv(Path(f"{out}.stdmean.csv"), header, rows, h)
            )

    path = write_csv(Path(f"{out}.csv"), ["cost", "pearson_r", "p_of_c"], corr_rows, h)
    outputs = [path] + stdmean_outputs
    if cfg.get("figures", True):
        from .figures import save_correlation_curve, save_heatmap

        costs_arr = np.array([r[0] for r in corr_rows])
        outputs.append(
            save_correlation_curve(
                costs_arr,
                np.array([r[1] for r in corr_rows]),
                np.array([r[2] for r in corr_rows]),
                Path(f"{out}.png"),
            )
        )
        outputs.append(
            save_heatmap(
                first_ratio, Path(f"{out}.stdmean.png"),
                title=f"std/mean of counts at cost {anchors[0]}", mask_zeros=True,
            )
        )
    write_manifest(out, "empirical-compare", cfg, outputs)
    click.echo(
        f"{len(anchors)} anchor costs over {len(seeds)} seeds -> {path} config {h}"
    )


if __name__ == "__main__":
    main()
