"""Neighborhood selection over the joint sample space.

Three strategies are provided: exact k-nearest-neighbor selection, distance-
weighted probabilistic selection from a nearest pool, and uniform random
batches.  A k-d tree accelerates candidate lookup; the final ordering is
always recomputed with exact Euclidean distances so acceleration never
changes the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .errors import DataError, ParameterError

# Weight floor in probabilistic selection: eps = KNNP_EPS_SCALE * median
# pairwise distance, so that zero-distance duplicates get a finite weight.
KNNP_EPS_SCALE = 1e-8
# Pool for probabilistic selection = KNNP_POOL_FACTOR * k nearest candidates.
KNNP_POOL_FACTOR = 4
# Cap on the number of rows used for the median pairwise distance estimate.
_MEDIAN_SAMPLE_CAP = 512


@dataclass
class Neighborhood:
    """A selected set of dataset rows around one anchor sample."""

    anchor_index: int
    anchor: np.ndarray  # (D,) joint vector of the anchor row
    member_indices: np.ndarray  # (k,) dataset row indices
    members: np.ndarray  # (k, D) joint vectors of the members
    strategy: str  # "knn" | "knnp" | "random"
    include_anchor: bool  # True iff anchor_index is one of the members

    def __post_init__(self) -> None:
        self.member_indices = np.asarray(self.member_indices, dtype=np.intp)
        self.members = np.asarray(self.members, dtype=np.float64)
        if self.members.shape[0] != self.member_indices.shape[0]:
            raise ParameterError("member rows and indices disagree in length")
        contains = bool(np.any(self.member_indices == self.anchor_index))
        if self.include_anchor != contains:
            raise ParameterError(
                "include_anchor flag does not match the member list"
            )

    @property
    def k(self) -> int:
        return self.member_indices.shape[0]


class NeighborIndex:
    """Spatial index over the rows of a point matrix.

    The matrix is kept alongside a k-d tree; queries use the tree to prune
    candidates and then re-rank them with exact distances, breaking ties by
    lower row index.
    """

    def __init__(self, points: np.ndarray):
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise DataError("point matrix must be 2-D")
        if points.shape[0] < 2:
            raise DataError("need at least 2 points to build a neighbor index")
        if not np.all(np.isfinite(points)):
            raise DataError("point matrix contains non-finite values")
        self.points = points
        self.points.setflags(write=False)
        self._tree = cKDTree(points)
        self._median_pairwise: float | None = None

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def median_pairwise_distance(self) -> float:
        """Median Euclidean distance over (a deterministic subsample of) rows."""
        if self._median_pairwise is None:
            if self.n <= _MEDIAN_SAMPLE_CAP:
                rows = self.points
            else:
                take = np.linspace(0, self.n - 1, _MEDIAN_SAMPLE_CAP).astype(np.intp)
                rows = self.points[take]
            self._median_pairwise = float(np.median(pdist(rows)))
        return self._median_pairwise

    def nearest(
        self, query: np.ndarray, count: int, exclude: int | None = None
    ) -> tuple[np.ndarray, np.ndarray]:
        """Indices and distances of the ``count`` nearest rows to ``query``.

        Rows are ordered by (distance, row index); ``exclude`` drops one row
        (typically the query itself) from consideration.
        """
        limit = self.n - (1 if exclude is not None else 0)
        if not 1 <= count <= limit:
            raise ParameterError(
                f"requested {count} neighbors from {limit} available rows"
            )
        query = np.asarray(query, dtype=np.float64).ravel()
        k_query = count + (1 if exclude is not None else 0)
        dists, _ = self._tree.query(query, k=k_query)
        radius = float(np.max(dists))
        # Inflate to absorb last-ulp disagreements, then re-rank exactly.
        candidates = self._tree.query_ball_point(
            query, radius * (1.0 + 1e-12) + 1e-300
        )
        candidates = np.asarray(candidates, dtype=np.intp)
        if exclude is not None:
            candidates = candidates[candidates != exclude]
        exact = np.linalg.norm(self.points[candidates] - query, axis=1)
        order = np.lexsort((candidates, exact))[:count]
        return candidates[order], exact[order]


def _validate_k(index: NeighborIndex, k: int, include_anchor: bool) -> None:
    available = index.n if include_anchor else index.n - 1
    if not 2 <= k <= available:
        raise ParameterError(
            f"k={k} is outside the valid range [2, {available}] "
            f"(n={index.n}, include_anchor={include_anchor})"
        )


def _validate_anchor(index: NeighborIndex, anchor_index: int) -> int:
    anchor_index = int(anchor_index)
    if not 0 <= anchor_index < index.n:
        raise ParameterError(
            f"anchor index {anchor_index} out of range [0, {index.n})"
        )
    return anchor_index


def knn_neighbors(
    index: NeighborIndex,
    anchor_index: int,
    k: int,
    include_anchor: bool = False,
) -> Neighborhood:
    """Exact k-nearest neighborhood of one dataset row.

    With ``include_anchor`` the anchor itself occupies the first slot and the
    remaining k-1 slots hold its nearest other rows.
    """
    anchor_index = _validate_anchor(index, anchor_index)
    _validate_k(index, k, include_anchor)
    anchor = index.points[anchor_index]
    want = k - 1 if include_anchor else k
    ids, _ = index.nearest(anchor, want, exclude=anchor_index)
    if include_anchor:
        ids = np.concatenate([[anchor_index], ids])
    return Neighborhood(
        anchor_index=anchor_index,
        anchor=anchor.copy(),
        member_indices=ids,
        members=index.points[ids].copy(),
        strategy="knn",
        include_anchor=include_anchor,
    )


def knnp_neighbors(
    index: NeighborIndex,
    anchor_index: int,
    k: int,
    rng: np.random.Generator,
    include_anchor: bool = False,
    eps: float | None = None,
) -> Neighborhood:
    """Probabilistic neighborhood: k rows drawn without replacement from the
    4k nearest candidates with weights proportional to 1/(distance + eps).

    ``eps`` defaults to a small multiple of the median pairwise distance so
    duplicates at distance zero keep a finite weight.
    """
    anchor_index = _validate_anchor(index, anchor_index)
    _validate_k(index, k, include_anchor)
    anchor = index.points[anchor_index]
    draw = k - 1 if include_anchor else k
    pool_size = min(KNNP_POOL_FACTOR * k, index.n - 1)
    pool_ids, pool_dists = index.nearest(anchor, pool_size, exclude=anchor_index)
    if eps is None:
        eps = KNNP_EPS_SCALE * index.median_pairwise_distance()
    if eps <= 0 and np.any(pool_dists == 0):
        eps = np.finfo(np.float64).tiny
    weights = 1.0 / (pool_dists + eps)
    weights /= weights.sum()
    chosen = rng.choice(pool_ids, size=draw, replace=False, p=weights)
    ids = np.concatenate([[anchor_index], chosen]) if include_anchor else chosen
    return Neighborhood(
        anchor_index=anchor_index,
        anchor=anchor.copy(),
        member_indices=ids,
        members=index.points[ids].copy(),
        strategy="knnp",
        include_anchor=include_anchor,
    )


def random_batch(
    index: NeighborIndex, k: int, rng: np.random.Generator
) -> Neighborhood:
    """k distinct rows drawn uniformly; the first drawn row is the anchor."""
    if not 2 <= k <= index.n:
        raise ParameterError(f"k={k} is outside the valid range [2, {index.n}]")
    ids = rng.choice(index.n, size=k, replace=False).astype(np.intp)
    anchor_index = int(ids[0])
    return Neighborhood(
        anchor_index=anchor_index,
        anchor=index.points[anchor_index].copy(),
        member_indices=ids,
        members=index.points[ids].copy(),
        strategy="random",
        include_anchor=True,
    )
