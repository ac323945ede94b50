"""Agreement, error-dispersion counts and the d = 1 empty-block segment count."""

from __future__ import annotations

import numpy as np

from .generator import GeometricGraph
from .geometry import BlockGrid


def agreement(sigma, truth) -> float:
    """Fraction of vertices matching ``truth`` up to a global sign; label 0 never matches."""
    sigma = np.asarray(sigma)
    truth = np.asarray(truth)
    if sigma.shape != truth.shape:
        raise ValueError("labelings have different domains")
    if np.any(truth == 0):
        raise ValueError("ground truth must not contain zeros")
    if len(truth) == 0:
        return 1.0
    same = np.count_nonzero(sigma == truth)
    flipped = np.count_nonzero(sigma == -truth)
    return max(same, flipped) / len(truth)


def neighborhood_mistakes(g: GeometricGraph, sigma, truth, relative_sign: int = 1) -> np.ndarray:
    """Per vertex ``u``: vertices ``v`` within the radius of ``u`` (``u`` included) with
    ``sigma(v) != relative_sign * truth(v)``."""
    sigma = np.asarray(sigma)
    wrong = sigma != relative_sign * np.asarray(truth)
    cats = np.where(wrong, 0, -1)
    return g.visible_counts(cats, 1, include_self=True)[:, 0]


def count_empty_block_segments(grid: BlockGrid) -> int:
    """Maximal circular runs of nonempty blocks separated by empty ones (d = 1 only)."""
    if grid.d != 1:
        raise ValueError("segment count is defined for d = 1 only")
    empty = grid.counts == 0
    if not empty.any():
        return 1
    if empty.all():
        return 0
    # each run of empties starts where the previous block (circularly) is nonempty
    return int(np.count_nonzero(empty & ~np.roll(empty, 1)))
