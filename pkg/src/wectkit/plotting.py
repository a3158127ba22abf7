"""Figure rendering for the CLI report paths (PNG next to the CSV outputs)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams.update({
    "figure.dpi": 110,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
})


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_step_curves(curves: Mapping[str, object], t_min: float, t_max: float, path,
                     title: str = "", samples: int = 2001) -> Path:
    """Draw step functions (anything callable on an array of thresholds)."""
    t = np.linspace(t_min, t_max, samples)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for label, f in curves.items():
        ax.step(t, f(t), where="post", label=label, lw=1.4)
    ax.set_xlabel("height threshold t")
    ax.set_ylabel("weighted EC")
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def plot_mean_curve(thresholds, mean, std, path, expected=None, label: str = "empirical mean",
                    title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(thresholds, mean, lw=1.5, label=label)
    ax.fill_between(thresholds, mean - std, mean + std, alpha=0.25, lw=0)
    if expected is not None:
        ax.plot(thresholds, expected, ":", color="k", lw=1.5, label="expected")
    ax.set_xlabel("height threshold t")
    ax.set_ylabel("WECF")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def plot_wect_matrix(values: np.ndarray, t_min: float, t_max: float, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.2))
    im = ax.imshow(values, aspect="auto", cmap="viridis", extent=(t_min, t_max, values.shape[0] - 0.5, -0.5))
    ax.set_xlabel("height threshold t")
    ax.set_ylabel("direction index")
    ax.grid(False)
    fig.colorbar(im, ax=ax, shrink=0.85)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_accuracy_bars(table: Mapping[str, Mapping[str, float]], path, title: str = "") -> Path:
    """Grouped bars: outer key on the x axis, inner key as colour."""
    groups = list(table)
    series = list(dict.fromkeys(k for v in table.values() for k in v))
    width = 0.8 / max(len(series), 1)
    fig, ax = plt.subplots(figsize=(7, 3.8))
    x = np.arange(len(groups))
    for i, s in enumerate(series):
        ax.bar(x + i * width - 0.4 + width / 2, [table[g].get(s, np.nan) for g in groups], width, label=s)
    ax.set_xticks(x, groups, fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.axhline(0.5, color="k", lw=0.8, ls="--")
    ax.set_ylabel("test accuracy")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=7, ncol=2)
    return _save(fig, path)


def plot_sweep(results: Mapping[str, Mapping[int, float]], path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.8))
    for shape, acc in results.items():
        ns: Sequence[int] = sorted(acc)
        ax.plot(ns, [acc[k] for k in ns], "o-", label=shape, ms=4)
    ax.set_xscale("log")
    ax.set_xlabel("number of directions")
    ax.set_ylabel("test accuracy")
    ax.set_ylim(0.4, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)
