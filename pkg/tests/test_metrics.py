import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsbm_lab.geometry import build_block_grid
from gsbm_lab.metrics import agreement, count_empty_block_segments, neighborhood_mistakes

from conftest import brute_neighborhood_mistakes, tiny_instance

labels = st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=50)


class TestAgreement:
    def test_examples(self):
        t = np.array([1, -1, 1, 1])
        assert agreement(t, t) == 1.0
        assert agreement(-t, t) == 1.0
        assert agreement(np.zeros(4), t) == 0.0
        assert agreement(np.array([1, -1, 0, -1]), t) == 0.5

    def test_errors(self):
        with pytest.raises(ValueError):
            agreement([1, 1], [1, 1, 1])
        with pytest.raises(ValueError):
            agreement([1, 1], [1, 0])

    @settings(max_examples=100, deadline=None)
    @given(truth=labels, data=st.data())
    def test_flip_invariant(self, truth, data):
        sigma = data.draw(st.lists(st.sampled_from([-1, 0, 1]), min_size=len(truth), max_size=len(truth)))
        a = agreement(sigma, truth)
        assert a == agreement(-np.array(sigma), truth)
        assert 0.0 <= a <= 1.0
        assert (a == 1.0) == (list(sigma) == truth or [-s for s in sigma] == truth)


class TestNeighborhoodMistakes:
    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 10**9), sign=st.sampled_from([-1, 1]))
    def test_brute(self, seed, sign):
        g = tiny_instance(seed, lam=float(np.random.default_rng(seed).uniform(0.3, 3)))
        sigma = np.random.default_rng(seed).choice([-1, 0, 1], size=g.num_vertices)
        got = neighborhood_mistakes(g, sigma, g.truth, sign)
        assert got.tolist() == brute_neighborhood_mistakes(g, sigma, g.truth, sign)

    def test_perfect(self, small_graph):
        assert not neighborhood_mistakes(small_graph, small_graph.truth, small_graph.truth, 1).any()


class TestSegments:
    def test_counts(self):
        grid = build_block_grid(np.zeros((0, 1)), 1000, 1, 1.0)
        assert count_empty_block_segments(grid) == 0
        c = grid.num_blocks
        full = build_block_grid(np.array([[-500 + (i + 0.5) * grid.block_side] for i in range(c)]), 1000, 1, 1.0)
        assert count_empty_block_segments(full) == 1
        one_gap = build_block_grid(np.array([[-500 + (i + 0.5) * grid.block_side] for i in range(1, c)]), 1000, 1, 1.0)
        assert count_empty_block_segments(one_gap) == 1
        two_gaps = build_block_grid(
            np.array([[-500 + (i + 0.5) * grid.block_side] for i in range(c) if i not in (3, 40)]), 1000, 1, 1.0
        )
        assert count_empty_block_segments(two_gaps) == 2
        adjacent = build_block_grid(
            np.array([[-500 + (i + 0.5) * grid.block_side] for i in range(c) if i not in (3, 4)]), 1000, 1, 1.0
        )
        assert count_empty_block_segments(adjacent) == 1

    def test_rejects_d2(self):
        with pytest.raises(ValueError):
            count_empty_block_segments(build_block_grid(np.zeros((0, 2)), 100, 2, 1.0))
