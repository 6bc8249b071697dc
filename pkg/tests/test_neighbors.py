"""Neighborhood selection: exact kNN, weighted sampling, random batches."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cems import (
    DataError,
    NeighborIndex,
    ParameterError,
    knn_neighbors,
    knnp_neighbors,
    random_batch,
)


def brute_force_knn(points: np.ndarray, anchor: int, k: int) -> np.ndarray:
    """Oracle: indices of the k nearest rows to ``points[anchor]``, anchor
    excluded, ordered by (distance, index)."""
    dists = np.linalg.norm(points - points[anchor], axis=1)
    order = np.lexsort((np.arange(len(points)), dists))
    order = order[order != anchor]
    return order[:k]


def cloud(n=40, d=3, seed=0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((n, d))


class TestIndexValidation:
    def test_rejects_one_dimensional_and_tiny_input(self):
        with pytest.raises(DataError):
            NeighborIndex(np.array([1.0, 2.0, 3.0]))
        with pytest.raises(DataError):
            NeighborIndex(np.zeros((1, 3)))

    def test_rejects_non_finite(self):
        pts = np.zeros((4, 2))
        pts[2, 1] = np.inf
        with pytest.raises(DataError):
            NeighborIndex(pts)

    def test_neighbor_count_bounds(self):
        index = NeighborIndex(cloud(n=5))
        with pytest.raises(ParameterError):
            index.nearest(np.zeros(3), 5, exclude=0)  # only 4 others exist
        with pytest.raises(ParameterError):
            index.nearest(np.zeros(3), 0)

    def test_anchor_index_bounds(self):
        index = NeighborIndex(cloud(n=5))
        with pytest.raises(ParameterError):
            knn_neighbors(index, 5, 2)
        with pytest.raises(ParameterError):
            knn_neighbors(index, -1, 2)

    def test_k_bounds(self):
        index = NeighborIndex(cloud(n=5))
        with pytest.raises(ParameterError):
            knn_neighbors(index, 0, 1)
        with pytest.raises(ParameterError):
            knn_neighbors(index, 0, 5)  # only 4 rows besides the anchor
        with pytest.raises(ParameterError):
            knn_neighbors(index, 0, 6, include_anchor=True)


class TestKnn:
    @pytest.mark.parametrize("seed,n,d,k", [(0, 30, 2, 5), (1, 60, 4, 16), (2, 25, 8, 12)])
    def test_matches_brute_force(self, seed, n, d, k):
        pts = cloud(n=n, d=d, seed=seed)
        index = NeighborIndex(pts)
        for anchor in range(0, n, 7):
            nb = knn_neighbors(index, anchor, k)
            np.testing.assert_array_equal(
                nb.member_indices, brute_force_knn(pts, anchor, k)
            )

    def test_anchor_excluded_by_default(self):
        pts = cloud()
        index = NeighborIndex(pts)
        nb = knn_neighbors(index, 3, 8)
        assert nb.anchor_index == 3
        assert 3 not in nb.member_indices
        assert nb.members.shape == (8, pts.shape[1])
        assert not nb.include_anchor
        np.testing.assert_array_equal(nb.anchor, pts[3])

    def test_include_anchor_puts_anchor_first(self):
        pts = cloud()
        index = NeighborIndex(pts)
        nb = knn_neighbors(index, 3, 8, include_anchor=True)
        assert nb.member_indices[0] == 3
        assert nb.include_anchor
        # remaining members are the k-1 nearest others
        np.testing.assert_array_equal(
            nb.member_indices[1:], brute_force_knn(pts, 3, 7)
        )

    def test_members_sorted_by_distance(self):
        pts = cloud(seed=5)
        index = NeighborIndex(pts)
        nb = knn_neighbors(index, 0, 10)
        dists = np.linalg.norm(nb.members - pts[0], axis=1)
        assert np.all(np.diff(dists) >= 0)

    def test_exact_ties_break_toward_lower_index(self):
        # four points at exactly distance 1 from the anchor
        pts = np.array(
            [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [5.0, 5.0]]
        )
        index = NeighborIndex(pts)
        nb = knn_neighbors(index, 0, 2)
        np.testing.assert_array_equal(nb.member_indices, [1, 2])
        nb3 = knn_neighbors(index, 0, 4)
        np.testing.assert_array_equal(nb3.member_indices, [1, 2, 3, 4])

    def test_median_pairwise_distance_small_set_exact(self):
        pts = np.array([[0.0], [1.0], [3.0]])
        index = NeighborIndex(pts)
        # pairwise distances {1, 2, 3} -> median 2
        assert index.median_pairwise_distance() == pytest.approx(2.0)


class TestKnnp:
    def test_members_come_from_nearest_pool_without_duplicates(self):
        pts = cloud(n=100, seed=3)
        index = NeighborIndex(pts)
        rng = np.random.default_rng(0)
        k = 6
        pool = brute_force_knn(pts, 0, min(4 * k, len(pts) - 1))
        for _ in range(20):
            nb = knnp_neighbors(index, 0, k, rng)
            assert len(set(nb.member_indices.tolist())) == k
            assert 0 not in nb.member_indices
            assert set(nb.member_indices.tolist()) <= set(pool.tolist())

    def test_nearer_points_sampled_more_often(self):
        rng_pts = np.random.default_rng(11)
        pts = np.vstack([np.zeros((1, 2)), rng_pts.standard_normal((60, 2))])
        index = NeighborIndex(pts)
        dists = np.linalg.norm(pts - pts[0], axis=1)
        nearest = int(np.argsort(dists)[1])
        pool = brute_force_knn(pts, 0, 12)
        farthest_in_pool = int(pool[-1])
        rng = np.random.default_rng(42)
        counts = {nearest: 0, farthest_in_pool: 0}
        n_draws = 600
        for _ in range(n_draws):
            nb = knnp_neighbors(index, 0, 3, rng)
            for key in counts:
                counts[key] += int(key in nb.member_indices)
        assert counts[nearest] > counts[farthest_in_pool]

    def test_large_eps_flattens_selection_towards_uniform(self):
        pts = cloud(n=30, seed=7)
        index = NeighborIndex(pts)
        rng = np.random.default_rng(1)
        pool = brute_force_knn(pts, 0, 12)
        freq = np.zeros(len(pts))
        n_draws = 3000
        for _ in range(n_draws):
            nb = knnp_neighbors(index, 0, 3, rng, eps=1e12)
            freq[nb.member_indices] += 1
        observed = freq[pool] / (n_draws * 3 / len(pool))
        # with weights ~ 1/eps the pool is sampled almost uniformly
        assert observed.min() > 0.7
        assert observed.max() < 1.3

    def test_deterministic_given_rng_state(self):
        pts = cloud(n=50, seed=9)
        index = NeighborIndex(pts)
        nb1 = knnp_neighbors(index, 4, 6, np.random.default_rng(123))
        nb2 = knnp_neighbors(index, 4, 6, np.random.default_rng(123))
        np.testing.assert_array_equal(nb1.member_indices, nb2.member_indices)


class TestRandomBatch:
    def test_batch_shape_and_anchor_convention(self):
        pts = cloud(n=30, seed=2)
        index = NeighborIndex(pts)
        nb = random_batch(index, 8, np.random.default_rng(0))
        assert nb.members.shape == (8, pts.shape[1])
        assert nb.include_anchor
        assert nb.member_indices[0] == nb.anchor_index
        assert len(set(nb.member_indices.tolist())) == 8
        np.testing.assert_array_equal(nb.anchor, pts[nb.anchor_index])

    def test_deterministic_given_rng_state(self):
        index = NeighborIndex(cloud(n=30, seed=2))
        nb1 = random_batch(index, 8, np.random.default_rng(5))
        nb2 = random_batch(index, 8, np.random.default_rng(5))
        np.testing.assert_array_equal(nb1.member_indices, nb2.member_indices)

    def test_k_bounds(self):
        index = NeighborIndex(cloud(n=5))
        with pytest.raises(ParameterError):
            random_batch(index, 6, np.random.default_rng(0))


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    n=st.integers(10, 60),
    d=st.integers(1, 6),
    anchor=st.integers(0, 9),
    k=st.integers(2, 8),
)
def test_knn_matches_brute_force_property(seed, n, d, anchor, k):
    pts = np.random.default_rng(seed).standard_normal((n, d))
    index = NeighborIndex(pts)
    nb = knn_neighbors(index, anchor, k)
    np.testing.assert_array_equal(nb.member_indices, brute_force_knn(pts, anchor, k))
