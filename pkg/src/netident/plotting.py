"""Matplotlib renderings written straight to image files (Agg backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .covering import TreeCover  # noqa: E402
from .export import PALETTE  # noqa: E402
from .graph import topo_layers  # noqa: E402
from .model import ModelSet  # noqa: E402


def layered_positions(ms: ModelSet) -> dict[int, tuple[float, float]]:
    """Vertices placed left to right by longest-path layer."""
    pos = {}
    for x, layer in enumerate(topo_layers(ms.dag)):
        members = sorted(layer)
        for k, v in enumerate(members):
            pos[v] = (float(x), (len(members) - 1) / 2.0 - k)
    return pos


def plot_network(ms: ModelSet, path: str | Path, cover: Optional[TreeCover] = None,
                 title: str = "", names: Optional[Sequence[str]] = None) -> Path:
    """Draw the network with excited vertices marked by red arrows and measured ones filled."""
    pos = layered_positions(ms)
    colors = {}
    if cover is not None:
        for k, t in enumerate(cover.trees):
            for e in t.edges:
                colors[e] = PALETTE[k % len(PALETTE)]
    width = max(4.0, 1.6 * (max((p[0] for p in pos.values()), default=0) + 1))
    height = max(3.0, 1.2 * max((abs(p[1]) * 2 + 1 for p in pos.values()), default=1))
    fig, ax = plt.subplots(figsize=(width, height))
    for i, j in ms.dag.sorted_edges():
        (x0, y0), (x1, y1) = pos[i], pos[j]
        ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                    arrowprops=dict(arrowstyle="-|>", color=colors.get((i, j), "0.3"),
                                    shrinkA=12, shrinkB=12, lw=1.6,
                                    ls="--" if (i, j) in ms.known else "-",
                                    connectionstyle="arc3,rad=0.08"))
    for v, (x, y) in pos.items():
        face = "palegreen" if v in ms.measured else "white"
        ax.scatter([x], [y], s=520, facecolor=face, edgecolor="black", zorder=3)
        ax.text(x, y, names[v - 1] if names else str(v), ha="center", va="center", zorder=4)
        if v in ms.excited:
            ax.annotate("", xy=(x, y + 0.12), xytext=(x - 0.25, y + 0.45),
                        arrowprops=dict(arrowstyle="-|>", color="red", lw=1.4))
    ax.set_title(title)
    ax.set_axis_off()
    ax.margins(0.15)
    path = Path(path)
    fig.savefig(path, bbox_inches="tight", dpi=120)
    plt.close(fig)
    return path


def plot_oracle(path: str | Path, jacobian_spectra: dict[int, np.ndarray],
                residuals: dict[int, float] | None = None, title: str = "") -> Path:
    """Normalized Jacobian singular values per seed, plus reconstruction residuals."""
    panels = 2 if residuals else 1
    fig, axes = plt.subplots(1, panels, figsize=(5.5 * panels, 3.8), squeeze=False)
    ax = axes[0][0]
    for seed, s in sorted(jacobian_spectra.items()):
        if s.size and s[0] > 0:
            ax.semilogy(np.arange(1, s.size + 1), np.maximum(s / s[0], 1e-18), marker=".",
                        label=f"seed {seed}")
    ax.set_xlabel("index")
    ax.set_ylabel("relative singular value")
    ax.set_title("Jacobian spectrum")
    if jacobian_spectra:
        ax.legend(fontsize="small")
    if residuals:
        ax = axes[0][1]
        seeds = sorted(residuals)
        ax.semilogy(seeds, [max(residuals[s], 1e-18) for s in seeds], "o")
        ax.axhline(1e-6, color="red", lw=0.8)
        ax.set_xlabel("seed")
        ax.set_ylabel("max relative error")
        ax.set_title("Reconstruction")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
