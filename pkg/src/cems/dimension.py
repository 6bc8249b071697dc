"""Two-nearest-neighbor (TwoNN) intrinsic dimension estimation.

For each point the ratio mu = r2/r1 of its second to first nearest-neighbor
distance is Pareto-distributed with shape equal to the intrinsic dimension;
the maximum-likelihood estimate over n valid points is

    d = n / sum_i log(mu_i).

Points whose nearest neighbor coincides with them (r1 = 0) or whose two
distances tie (mu = 1) carry no information and are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError, EstimationError

# Minimum number of informative ratio samples required for an estimate.
MIN_VALID_POINTS = 10


@dataclass
class DimEstimate:
    """Result of a TwoNN run."""

    d_real: float  # raw maximum-likelihood estimate
    d_used: int  # rounded and clamped to [1, ambient_dim - 1]
    n_valid: int  # points that contributed to the sum
    ratios: np.ndarray  # (n_valid,) the mu_i values


def twonn_estimate(points: np.ndarray) -> DimEstimate:
    """Estimate the intrinsic dimension of a point cloud.

    Parameters
    ----------
    points : (N, D) array with N >= 10.

    Returns
    -------
    DimEstimate with the raw MLE ``d_real`` and the integer ``d_used`` =
    round(d_real) clamped to [1, D-1].
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise DataError("point matrix must be 2-D")
    n, D = points.shape
    if n < MIN_VALID_POINTS:
        raise EstimationError(
            f"need at least {MIN_VALID_POINTS} points, got {n}"
        )
    if not np.all(np.isfinite(points)):
        raise DataError("point matrix contains non-finite values")
    tree = cKDTree(points)
    # Nearest three rows include the point itself at distance 0.
    dists, _ = tree.query(points, k=min(3, n))
    r1 = dists[:, 1]
    r2 = dists[:, 2]
    valid = (r1 > 0.0) & (r2 > r1)
    ratios = r2[valid] / r1[valid]
    n_valid = int(valid.sum())
    if n_valid < MIN_VALID_POINTS:
        raise EstimationError(
            f"only {n_valid} points have informative neighbor ratios "
            f"(need {MIN_VALID_POINTS}); too many duplicates or ties"
        )
    d_real = n_valid / float(np.sum(np.log(ratios)))
    cap = max(1, D - 1)
    d_used = int(np.clip(np.floor(d_real + 0.5), 1, cap))
    return DimEstimate(d_real=d_real, d_used=d_used, n_valid=n_valid, ratios=ratios)
