"""Figures written next to benchmark and solver reports (Agg backend, files only)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bench import RunReport, format_p  # noqa: E402
from .model import IsingModel  # noqa: E402
from .partition import Partition  # noqa: E402
from .pfe import PfeResult  # noqa: E402

SIDE_COLORS = ("#1f77b4", "#d62728")


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_benchmark(reports: Sequence[RunReport], path) -> Path:
    """Success probability and relative F per method."""
    fig, (ax_p, ax_f) = plt.subplots(1, 2, figsize=(8, 3.2))
    names = [r.method for r in reports]
    x = np.arange(len(reports))
    p = [r.p_bayes for r in reports]
    ax_p.bar(x, p, color="0.45")
    for xi, pi in zip(x, p):
        ax_p.text(xi, pi, format_p(pi), ha="center", va="bottom", fontsize=8)
    ax_p.set_ylim(0, 1.1)
    ax_p.set_ylabel("p_bayes")
    ax_f.bar(x, [r.F_rel for r in reports], color="0.7", edgecolor="0.3")
    ax_f.axhline(1.0, color="k", lw=0.8, ls="--")
    ax_f.set_ylabel("F / F_baseline")
    for ax in (ax_p, ax_f):
        ax.set_xticks(x)
        ax.set_xticklabels(names, rotation=20)
    if reports:
        fig.suptitle(f"{reports[0].problem}  ({reports[0].trials} trials)", fontsize=10)
    return _save(fig, path)


def plot_local_energies(result: PfeResult, path) -> Path:
    """Histogram of each side's candidate energies above its local ground."""
    if result.local_sets is None:
        raise ValueError("result carries no local solution sets")
    fig, axes = plt.subplots(1, 2, figsize=(8, 3), sharey=True)
    for side, (ax, sset) in enumerate(zip(axes, result.local_sets)):
        gaps = sset.energies - sset.ground_energy
        ax.hist(gaps, bins=min(40, max(5, len(gaps) // 4)), color=SIDE_COLORS[side], alpha=0.8)
        ax.axvline(result.window, color="k", ls="--", lw=0.8, label="window")
        ax.set_xlabel("E - E_ground (local)")
        ax.set_title(f"side {side}: {len(sset)} entries", fontsize=9)
    axes[0].set_ylabel("count")
    axes[0].legend(frameon=False, fontsize=8)
    return _save(fig, path)


def plot_partition(model: IsingModel, partition: Partition, path) -> Path:
    """Variables on a circle, coloured by side; boundary couplings dashed."""
    n = model.n
    theta = 2 * np.pi * np.arange(n) / max(n, 1)
    # place each side on its own arc so the cut is visible
    order = np.argsort(np.asarray(partition.labels), kind="stable")
    xy = np.empty((n, 2))
    xy[order] = np.c_[np.cos(theta), np.sin(theta)]
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    wmax = max((abs(w) for w in model.quadratic.values()), default=1.0)
    cut = {(i, j) for i, j, _ in partition.boundary_edges}
    for (i, j), w in model.quadratic.items():
        style = "--" if (i, j) in cut else "-"
        color = "k" if (i, j) in cut else "0.6"
        ax.plot(*xy[[i, j]].T, style, color=color, lw=0.4 + 1.6 * abs(w) / wmax, zorder=1)
    colors = [SIDE_COLORS[lab % 2] for lab in partition.labels]
    ax.scatter(*xy.T, c=colors, s=40, zorder=2, edgecolors="k", linewidths=0.5)
    if n <= 40:
        for k in range(n):
            ax.annotate(str(k), 1.1 * xy[k], ha="center", va="center", fontsize=7)
    ax.set_title(f"bound a = {partition.bound_a:g}", fontsize=9)
    ax.set_aspect("equal")
    ax.axis("off")
    return _save(fig, path)


__all__ = ["plot_benchmark", "plot_local_energies", "plot_partition"]
