"""Figure rendering for the CLI report commands.

Every report command writes delimited data first; these helpers render the
companion PNG next to it. Uses the Agg backend so runs work headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_heatmap(
    matrix: np.ndarray,
    path: str | Path,
    title: str = "",
    xlabel: str = "cost c",
    ylabel: str = "distance d",
    mask_zeros: bool = False,
) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    data = np.array(matrix, dtype=float)
    if mask_zeros:
        data = np.where(data == 0.0, np.nan, data)
    im = ax.imshow(data, origin="lower", aspect="auto", cmap="viridis")
    fig.colorbar(im, ax=ax)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def save_overlap_curves(
    curves: dict[str, tuple[np.ndarray, np.ndarray]], path: str | Path
) -> Path:
    """One overlap-vs-layer line per ramp label."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, (layers, overlaps) in curves.items():
        ax.plot(layers, overlaps, marker="o", markersize=3, label=label)
    ax.set_xlabel("layer")
    ax.set_ylabel("squared overlap")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    return _finish(fig, path)


def save_landscape_pair(
    typical: np.ndarray,
    homogeneous: np.ndarray,
    gammas: np.ndarray,
    betas: np.ndarray,
    path: str | Path,
) -> Path:
    extent = [betas[0], betas[-1], gammas[0], gammas[-1]]
    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.2))
    for ax, data, title in (
        (axes[0], typical, "statevector objective"),
        (axes[1], homogeneous, "proxy objective"),
    ):
        im = ax.imshow(data, origin="lower", aspect="auto", extent=extent, cmap="viridis")
        fig.colorbar(im, ax=ax)
        ax.set_xlabel("beta (final layer)")
        ax.set_ylabel("gamma (final layer)")
        ax.set_title(title)
    return _finish(fig, path)


def save_ratio_points(
    seeds: list[int], ratios: list[float], path: str | Path, title: str = ""
) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(seeds, ratios, "o")
    ax.axhline(float(np.mean(ratios)), color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("instance seed")
    ax.set_ylabel("approximation ratio")
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def save_correlation_curve(
    costs: np.ndarray, pearson: np.ndarray, p_of_c: np.ndarray, path: str | Path
) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(costs, pearson, "o-", color="tab:blue", label="Pearson r")
    ax.set_xlabel("anchor cost")
    ax.set_ylabel("Pearson r", color="tab:blue")
    ax.set_ylim(-1.05, 1.05)
    twin = ax.twinx()
    twin.plot(costs, p_of_c, "s--", color="tab:orange", label="P(cost)")
    twin.set_ylabel("P(cost)", color="tab:orange")
    return _finish(fig, path)


def save_trace(trace: list[tuple[int, float]], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if trace:
        its, vals = zip(*trace)
        ax.plot(its, vals, "o-")
    ax.set_xlabel("iteration")
    ax.set_ylabel("proxy objective")
    return _finish(fig, path)
