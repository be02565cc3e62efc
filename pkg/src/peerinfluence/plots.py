"""Static SVG maps of the estimated latent spaces."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def respondent_map(zhat, clusters=None, ax=None):
    """Scatter of respondent positions, colored by cluster when known."""
    if ax is None:
        _, ax = plt.subplots(figsize=(6, 6))
    if clusters is None:
        ax.scatter(zhat[:, 0], zhat[:, 1], s=14, color="steelblue", alpha=0.7)
    else:
        ax.scatter(zhat[:, 0], zhat[:, 1], s=14, c=clusters, cmap="tab10", alpha=0.8)
    ax.set_xlabel("dimension 1")
    ax.set_ylabel("dimension 2")
    ax.set_title("respondent latent space")
    ax.set_aspect("equal", "datalim")
    return ax


def joint_map(zhat, w_mean, clusters=None, ax=None):
    """Respondent dots with item positions drawn as numbered labels."""
    if ax is None:
        _, ax = plt.subplots(figsize=(6, 6))
    respondent_map(zhat, clusters=clusters, ax=ax)
    for i, (x, y) in enumerate(w_mean, start=1):
        ax.text(x, y, str(i), color="crimson", fontsize=11, fontweight="bold",
                ha="center", va="center")
    ax.set_title("joint latent space (items numbered)")
    return ax


def save_maps(out_dir, zhat, w_mean, clusters=None) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    ax = respondent_map(zhat, clusters=clusters)
    path = out_dir / "step1_respondents.svg"
    ax.figure.savefig(path, format="svg")
    plt.close(ax.figure)
    paths.append(path)

    ax = joint_map(zhat, w_mean, clusters=clusters)
    path = out_dir / "step2_joint_map.svg"
    ax.figure.savefig(path, format="svg")
    plt.close(ax.figure)
    paths.append(path)
    return paths
