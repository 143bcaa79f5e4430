"""Static figures for the command-line reports (matplotlib, Agg backend)."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# no timestamps in the files, so reruns give identical bytes
_PNG_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_error_grid(results: Sequence, path) -> Path:
    """log10 coefficient error against N, one panel per index-set shape and one
    line per ``M - N`` offset."""
    shapes = sorted({r.shape.value for r in results})
    fig, axes = plt.subplots(1, max(len(shapes), 1), figsize=(4.2 * max(len(shapes), 1), 3.6),
                             squeeze=False, sharey=True)
    for ax, shape in zip(axes[0], shapes):
        rows = [r for r in results if r.shape.value == shape]
        for dm in sorted({r.M - r.N for r in rows}):
            sel = sorted((r for r in rows if r.M - r.N == dm), key=lambda r: r.N)
            err = [max(r.l2_error, 1e-18) for r in sel]
            ax.semilogy([r.N for r in sel], err, marker="o", label=f"M = N{dm:+d}" if dm else "M = N")
        ax.set_title(f"{shape}_N")
        ax.set_xlabel("N")
        ax.grid(True, which="both", alpha=0.3)
    axes[0][0].set_ylabel("l2 coefficient error")
    if shapes:
        axes[0][-1].legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_classification(reports: Sequence, path) -> Path:
    """Identified and categorized ratios against noise level."""
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for kind in sorted({r.kind.value for r in reports}):
        sel = sorted((r for r in reports if r.kind.value == kind), key=lambda r: r.sigma)
        s = [r.sigma for r in sel]
        ax.plot(s, [r.identified_ratio for r in sel], marker="o", label=f"{kind} identified")
        ax.plot(s, [r.categorized_ratio for r in sel], marker="s", ls="--", label=f"{kind} categorized")
    ax.set_xlabel("sigma")
    ax.set_ylabel("ratio")
    ax.set_ylim(0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_distance_matrix(distances: np.ndarray, labels: Sequence[int], path) -> Path:
    """Heat map of pairwise l1 invariant distances (log scale)."""
    d = np.asarray(distances, dtype=float)
    fig, ax = plt.subplots(figsize=(4.6, 4))
    im = ax.imshow(np.log10(np.maximum(d, 1e-18)), cmap="viridis")
    ax.set_xticks(range(len(labels)), [str(v) for v in labels])
    ax.set_yticks(range(len(labels)), [str(v) for v in labels])
    ax.set_xlabel("training image")
    ax.set_ylabel("rotated image")
    fig.colorbar(im, ax=ax, label="log10 distance")
    fig.tight_layout()
    return _save(fig, path)


def plot_images(images: Sequence[np.ndarray], labels: Sequence[int], path) -> Path:
    k = len(images)
    cols = min(k, 7)
    rows = max(1, math.ceil(k / cols))
    fig, axes = plt.subplots(rows, cols, figsize=(1.6 * cols, 1.7 * rows), squeeze=False)
    for ax in axes.ravel():
        ax.axis("off")
    for ax, image, label in zip(axes.ravel(), images, labels):
        ax.imshow(image, cmap="gray_r", vmin=0, vmax=1)
        ax.set_title(str(label), fontsize=9)
    fig.tight_layout()
    return _save(fig, path)
