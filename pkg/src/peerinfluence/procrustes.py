"""Rigid-motion alignment of latent configurations.

Latent positions are only identified up to translation, rotation, and
reflection; distances are what the models see. Retained draws are
therefore matched to a common reference configuration before averaging
or plotting. Matching allows reflections and translations but no
scaling (the latent scale is pinned by the priors).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DataError, check_coords


@dataclass(frozen=True)
class ProcrustesTransform:
    """A rigid motion: x -> x @ rotation + translation (rotation det +-1)."""

    rotation: np.ndarray
    translation: np.ndarray

    def apply(self, coords):
        return np.asarray(coords, dtype=float) @ self.rotation + self.translation


def _best_orthogonal(m):
    # Maximize tr(Q^T M) over 2x2 orthogonal Q. Closed form: the optimal
    # rotation scores hypot(m00+m11, m10-m01), the optimal reflection
    # scores hypot(m00-m11, m10+m01); take the larger.
    rot_score = np.hypot(m[0, 0] + m[1, 1], m[1, 0] - m[0, 1])
    ref_score = np.hypot(m[0, 0] - m[1, 1], m[1, 0] + m[0, 1])
    if rot_score == 0.0 and ref_score == 0.0:
        return np.eye(2)
    if rot_score >= ref_score:
        c = (m[0, 0] + m[1, 1]) / rot_score
        s = (m[1, 0] - m[0, 1]) / rot_score
        return np.array([[c, -s], [s, c]])
    c = (m[0, 0] - m[1, 1]) / ref_score
    s = (m[1, 0] + m[0, 1]) / ref_score
    return np.array([[c, s], [s, -c]])


def procrustes_align(target, reference):
    """Rigidly move ``target`` onto ``reference`` in least squares.

    Returns the aligned copy and the transform that produced it. The
    motion minimizes the Frobenius distance over rotations, reflections,
    and translations; all pairwise distances of ``target`` are preserved.
    """
    target = check_coords(target, name="target")
    reference = check_coords(reference, n_rows=target.shape[0], name="reference")
    ref_center = reference.mean(axis=0)
    ref_c = reference - ref_center
    if not ref_c.any():
        raise DataError("reference configuration is degenerate (all points coincide)")
    tgt_center = target.mean(axis=0)
    tgt_c = target - tgt_center
    q = _best_orthogonal(tgt_c.T @ ref_c)
    translation = ref_center - tgt_center @ q
    transform = ProcrustesTransform(rotation=q, translation=translation)
    return tgt_c @ q + ref_center, transform


def align_draw_sequence(draws, reference=None, log_posterior=None):
    """Align every configuration in ``draws`` to one shared reference.

    ``draws`` is an (S, m, 2) array or a list of (m, 2) arrays. The
    reference is either given explicitly or chosen as the draw with the
    highest ``log_posterior`` (a stable, mode-like anchor). Returns the
    aligned (S, m, 2) array and the list of transforms.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim != 3 or draws.shape[0] == 0:
        raise DataError("draws must be a non-empty (S, m, 2) array")
    if reference is None:
        if log_posterior is None:
            raise DataError("need either an explicit reference or log_posterior")
        reference = draws[int(np.argmax(log_posterior))]
    aligned = np.empty_like(draws)
    transforms = []
    for s in range(draws.shape[0]):
        aligned[s], tr = procrustes_align(draws[s], reference)
        transforms.append(tr)
    return aligned, transforms


def align_joint_draws(zhat, w_draws, log_posterior):
    """Align item-position draws jointly with the fixed respondent positions.

    Each draw is stacked with the (shared) respondent configuration and
    the whole stack is moved rigidly, so respondent-item distances are
    untouched. Returns the aligned item draws only; the respondent block
    of the reference stack is ``zhat`` itself.
    """
    zhat = check_coords(zhat, name="zhat")
    w_draws = np.asarray(w_draws, dtype=float)
    if w_draws.ndim != 3 or w_draws.shape[0] == 0:
        raise DataError("w_draws must be a non-empty (S, p, 2) array")
    n = zhat.shape[0]
    stacked = np.concatenate(
        [np.broadcast_to(zhat, (w_draws.shape[0], n, 2)), w_draws], axis=1)
    reference = stacked[int(np.argmax(log_posterior))]
    aligned, transforms = align_draw_sequence(stacked, reference=reference)
    return aligned[:, n:, :], transforms
