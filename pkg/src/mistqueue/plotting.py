"""Figures written next to the CSV output of ``run`` and ``sweep``."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import Row, summarize, sweep_means  # noqa: E402

AXIS_LABELS = {
    "i_star": "selected work-class i*",
    "j_star": "selected profit-class j*",
    "alpha": "fraction of unknown packets (alpha)",
    "r": "admittance probability r",
}

_STYLE = {
    "fifo": dict(color="0.45", marker="s", linestyle="--"),
    "sam": dict(color="tab:purple", marker="v"),
    "sam-ss": dict(color="tab:brown", marker="^"),
    "sao-fifo": dict(color="tab:orange", marker="o"),
    "sao-wtv": dict(color="tab:green", marker="D"),
    "sao-effect": dict(color="tab:blue", marker="*", markersize=9),
}


def plot_sweep(rows: Iterable[Row], param: str, path: Path, title: str = "") -> Path:
    """Mean performance ratio per algorithm against the swept value, with
    one-standard-deviation bars."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, points in sweep_means(rows).items():
        xs = [p[0] for p in points]
        ax.errorbar(xs, [p[1] for p in points], yerr=[p[2] for p in points], label=name, capsize=3,
                    linewidth=1.4, **_STYLE.get(name, {}))
    ax.set_xlabel(AXIS_LABELS.get(param, param))
    ax.set_ylabel("performance ratio")
    ax.set_ylim(bottom=0)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_summary(rows: Sequence[Row], path: Path, title: str = "") -> Path:
    """Bar chart of the mean performance ratio per algorithm."""
    summary = summarize(rows)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    names = [s.algorithm for s in summary]
    colors = [_STYLE.get(n, {}).get("color", "tab:gray") for n in names]
    ax.bar(names, [s.mean_ratio for s in summary], yerr=[s.std_ratio for s in summary], capsize=3, color=colors)
    ax.set_ylabel("mean performance ratio")
    ax.set_ylim(0, 1)
    ax.grid(axis="y", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
