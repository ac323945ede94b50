"""Degree profiles, the Poisson-test statistic tau, Refine and the genie estimator."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from . import _kernels
from .generator import GeometricGraph

PROB_CLAMP = 1e-12


@dataclass(frozen=True)
class DegreeProfile:
    d1_plus: int
    d1_minus: int
    dm1_plus: int
    dm1_minus: int

    def __iter__(self):
        return iter(astuple(self))


def clamp_prob(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability outside [0, 1]: {p}")
    return min(max(float(p), PROB_CLAMP), 1.0 - PROB_CLAMP)


def log_weights(a: float, b: float) -> tuple[float, float]:
    """``(log(a/b), log((1-a)/(1-b)))`` on clamped a, b."""
    a, b = clamp_prob(a), clamp_prob(b)
    return math.log(a / b), math.log((1 - a) / (1 - b))


def degree_profile(g: GeometricGraph, u: int, sigma, S=None) -> DegreeProfile:
    """Edge and visible non-edge counts from ``u`` into ``S`` split by label.

    ``S`` defaults to all vertices. Vertices with label 0 and ``u`` itself
    are not counted.
    """
    sigma = np.asarray(sigma)
    if S is None:
        cand = g.visible_from(u)
    else:
        cand = np.unique(np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64))
        cand = cand[cand != u]
        cand = np.intersect1d(cand, g.visible_from(u), assume_unique=True)
    nb = g.neighbors(u)
    is_edge = np.isin(cand, nb, assume_unique=True)
    lab = sigma[cand]
    return DegreeProfile(
        int(np.sum(is_edge & (lab == 1))),
        int(np.sum(~is_edge & (lab == 1))),
        int(np.sum(is_edge & (lab == -1))),
        int(np.sum(~is_edge & (lab == -1))),
    )


def degree_profiles(g: GeometricGraph, sigma) -> np.ndarray:
    """``(N, 4)`` degree profiles of every vertex against all of V."""
    sigma = np.asarray(sigma, dtype=np.int8)
    cats = np.where(sigma == 1, 0, np.where(sigma == -1, 1, -1))
    visible = g.visible_counts(cats, 2)
    edges = _kernels.neighbor_label_counts(g.indptr, g.indices, sigma)
    return np.stack(
        [edges[:, 0], visible[:, 0] - edges[:, 0], edges[:, 1], visible[:, 1] - edges[:, 1]],
        axis=1,
    )


def tau(profile, a: float, b: float) -> float:
    """Log-likelihood ratio of label +1 versus -1 given a degree profile."""
    wa, wb = log_weights(a, b)
    p1, m1, p2, m2 = profile
    return wa * (p1 - p2) + wb * (m1 - m2)


def tau_all(profiles: np.ndarray, a: float, b: float) -> np.ndarray:
    wa, wb = log_weights(a, b)
    p = np.asarray(profiles, dtype=float)
    return wa * (p[:, 0] - p[:, 2]) + wb * (p[:, 1] - p[:, 3])


def sign_tie_plus(x):
    """Sign with ``sign(0) = +1``."""
    return np.where(np.asarray(x) >= 0, 1, -1).astype(np.int8)


def _require_distinct(a, b):
    if a == b:
        raise ValueError("a and b must differ")


def refine(g: GeometricGraph, u: int, sigma_hat, a: float, b: float) -> int:
    _require_distinct(a, b)
    return int(sign_tie_plus(tau(degree_profile(g, u, sigma_hat), a, b)))


def refine_all(g: GeometricGraph, sigma_hat, a: float, b: float) -> np.ndarray:
    """Refined label of every vertex against the labeling ``sigma_hat``."""
    _require_distinct(a, b)
    return sign_tie_plus(tau_all(degree_profiles(g, sigma_hat), a, b))


def genie_estimate(g: GeometricGraph, u: int, sigma0, a: float, b: float) -> int:
    """Most likely label of ``u`` given every other true label."""
    sigma0 = np.asarray(sigma0)
    if np.any(sigma0 == 0):
        raise ValueError("ground truth must not contain zeros")
    return int(sign_tie_plus(tau(degree_profile(g, u, sigma0), a, b)))


def genie_all(g: GeometricGraph, sigma0, a: float, b: float) -> np.ndarray:
    sigma0 = np.asarray(sigma0)
    if np.any(sigma0 == 0):
        raise ValueError("ground truth must not contain zeros")
    return sign_tie_plus(tau_all(degree_profiles(g, sigma0), a, b))
