"""Shared fixtures and brute-force oracles written independently of the library code."""

import itertools
import math

import numpy as np
import pytest

from gsbm_lab.generator import ModelParams, sample_gsbm


def brute_torus_dist(u, v, side):
    total = 0.0
    for x, y in zip(u, v):
        t = abs(x - y)
        t = min(t, side - t)
        total += t * t
    return math.sqrt(total)


def brute_visible_pairs(positions, n, d):
    """All pairs ``(u, v)``, ``u < v``, within the visibility radius: O(N^2) double loop."""
    side = n ** (1 / d)
    r = math.log(n) ** (1 / d)
    out = set()
    for u, v in itertools.combinations(range(len(positions)), 2):
        if brute_torus_dist(positions[u], positions[v], side) <= r:
            out.add((u, v))
    return out


def brute_degree_profile(g, u, sigma, S=None):
    side = g.n ** (1 / g.d)
    r = math.log(g.n) ** (1 / g.d)
    nbrs = set(g.neighbors(u).tolist())
    pool = range(g.num_vertices) if S is None else S
    p1 = m1 = p2 = m2 = 0
    for v in pool:
        if v == u or sigma[v] == 0:
            continue
        if brute_torus_dist(g.positions[u], g.positions[v], side) > r:
            continue
        edge = v in nbrs
        if sigma[v] == 1:
            p1 += edge
            m1 += not edge
        else:
            p2 += edge
            m2 += not edge
    return (p1, m1, p2, m2)


def brute_neighborhood_mistakes(g, sigma, truth, relative_sign):
    side = g.n ** (1 / g.d)
    r = math.log(g.n) ** (1 / g.d)
    out = []
    for u in range(g.num_vertices):
        c = 0
        for v in range(g.num_vertices):
            if brute_torus_dist(g.positions[u], g.positions[v], side) <= r and sigma[v] != relative_sign * truth[v]:
                c += 1
        out.append(c)
    return out


def tiny_instance(seed, d=None, lam=1.0, n=None, a=None, b=None):
    """Instance with roughly 10-30 vertices and parameters drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4)) if d is None else d
    n = float(rng.uniform(8, 25)) if n is None else n
    a = float(rng.uniform(0, 1)) if a is None else a
    b = float(rng.uniform(0, 1)) if b is None else b
    return sample_gsbm(ModelParams(lam, n, a, b, d), seed)


@pytest.fixture
def small_graph():
    return sample_gsbm(ModelParams(3.0, 500.0, 0.8, 0.2, 1), 7)
