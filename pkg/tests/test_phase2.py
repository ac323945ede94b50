import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsbm_lab.generator import ModelParams, sample_gsbm, with_edges
from gsbm_lab.phase2 import (
    DegreeProfile,
    clamp_prob,
    degree_profile,
    degree_profiles,
    genie_all,
    genie_estimate,
    refine,
    refine_all,
    sign_tie_plus,
    tau,
    tau_all,
)

from conftest import brute_degree_profile, tiny_instance


def test_tau_example():
    assert tau(DegreeProfile(5, 2, 3, 4), 0.9, 0.1) == pytest.approx(4 * math.log(9))


@settings(max_examples=100, deadline=None)
@given(prof=st.tuples(*[st.integers(0, 50)] * 4), a=st.floats(0, 1), b=st.floats(0, 1))
def test_tau_antisymmetric_and_degenerate(prof, a, b):
    p1, m1, p2, m2 = prof
    assert tau((p2, m2, p1, m1), a, b) == pytest.approx(-tau(prof, a, b), abs=1e-9)
    assert tau(prof, a, a) == 0.0
    assert tau_all(np.array([prof]), a, b)[0] == pytest.approx(tau(prof, a, b))


def test_clamp():
    assert clamp_prob(0.0) == 1e-12 and clamp_prob(1.0) == 1 - 1e-12
    with pytest.raises(ValueError):
        tau((1, 0, 0, 0), 1.5, 0.1)


def test_sign_tie():
    assert sign_tie_plus([-2.0, 0.0, 3.0]).tolist() == [-1, 1, 1]


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_degree_profile_brute(seed):
    g = tiny_instance(seed, lam=float(np.random.default_rng(seed).uniform(0.5, 3)))
    rng = np.random.default_rng(seed + 1)
    sigma = rng.choice([-1, 0, 1], size=g.num_vertices)
    S = [int(v) for v in np.flatnonzero(rng.random(g.num_vertices) < 0.6)]
    full = degree_profiles(g, sigma)
    for u in range(g.num_vertices):
        assert tuple(degree_profile(g, u, sigma)) == brute_degree_profile(g, u, sigma)
        assert tuple(full[u]) == brute_degree_profile(g, u, sigma)
        assert tuple(degree_profile(g, u, sigma, S)) == brute_degree_profile(g, u, sigma, S)


def test_complete_graph_has_no_non_edges():
    g = tiny_instance(3, lam=3.0, a=1.0, b=1.0)
    prof = degree_profiles(g, g.truth)
    assert np.all(prof[:, 1] == 0) and np.all(prof[:, 3] == 0)


def test_isolated_vertex_gets_plus():
    g = tiny_instance(0, d=1, lam=0.05, n=1e4)
    u = next(u for u in range(g.num_vertices) if len(g.visible_from(u)) == 0)
    assert tuple(degree_profile(g, u, g.truth)) == (0, 0, 0, 0)
    assert refine(g, u, g.truth, 0.7, 0.2) == 1


def test_refine_equals_genie(small_graph):
    g = small_graph
    r = refine_all(g, g.truth, 0.8, 0.2)
    assert np.array_equal(r, genie_all(g, g.truth, 0.8, 0.2))
    for u in range(0, g.num_vertices, 37):
        assert refine(g, u, g.truth, 0.8, 0.2) == genie_estimate(g, u, g.truth, 0.8, 0.2) == r[u]


def test_refine_sign_flip(small_graph):
    g = small_graph
    sigma = np.random.default_rng(0).choice([-1, 0, 1], size=g.num_vertices)
    t = tau_all(degree_profiles(g, sigma), 0.8, 0.2)
    pos, neg = refine_all(g, sigma, 0.8, 0.2), refine_all(g, -sigma, 0.8, 0.2)
    nz = t != 0
    assert np.array_equal(pos[nz], -neg[nz])


def test_zero_labels_are_invisible(small_graph):
    g = small_graph
    sigma = g.truth.copy()
    sigma[::5] = 0
    base = refine_all(g, sigma, 0.8, 0.2)
    # a zero-labelled vertex contributes nothing whatever its edges
    drop = {int(v) for v in np.flatnonzero(sigma == 0)}
    edges = [e for e in g.edge_list().tolist() if e[0] not in drop and e[1] not in drop]
    h = with_edges(g, np.array(edges))
    keep = sigma != 0
    assert np.array_equal(refine_all(h, sigma, 0.8, 0.2)[keep], base[keep])


def test_genie_requires_full_truth(small_graph):
    sigma = small_graph.truth.copy()
    sigma[0] = 0
    with pytest.raises(ValueError):
        genie_all(small_graph, sigma, 0.8, 0.2)
    with pytest.raises(ValueError):
        refine_all(small_graph, sigma, 0.3, 0.3)


def test_genie_dense_perfect_signal():
    for seed in range(30):
        g = tiny_instance(seed, lam=3.0, a=1.0, b=0.0)
        prof = degree_profiles(g, g.truth)
        same = np.where(g.truth == 1, prof[:, 0] + prof[:, 1], prof[:, 2] + prof[:, 3])
        ok = same >= 1
        out = genie_all(g, g.truth, 1.0, 0.0)
        assert np.array_equal(out[ok], g.truth[ok])


def test_profile_poisson_means():
    # one +1 vertex per independent instance, so the samples are i.i.d.
    p = ModelParams(3.0, 2000.0, 0.9, 0.1, 1)
    rows = []
    for seed in range(400):
        g = sample_gsbm(p, seed)
        u = int(np.argmax(g.truth == 1))
        rows.append(tuple(degree_profile(g, u, g.truth)))
    prof = np.array(rows, dtype=float)
    expected = p.lam * 2 * math.log(p.n) * np.array([p.a, 1 - p.a, p.b, 1 - p.b]) / 2
    se = np.sqrt(expected / len(prof))  # Poisson: variance equals mean
    assert np.all(np.abs(prof.mean(axis=0) - expected) < 3 * se)
