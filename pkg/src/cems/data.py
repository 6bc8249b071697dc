"""Dataset container, joint-space views, and min-max target normalization.

A regression dataset is a pair of float64 matrices: ``features`` (N x k1) and
``targets`` (N x k2).  Samplers operate on the *joint* space obtained by
concatenating each feature row with its target row, so that new targets are
generated together with new features instead of being predicted afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, SchemaError

# Relative tolerance used to decide that a normalized round trip is exact.
ROUNDTRIP_RTOL = 1e-12


def _as_float_matrix(values, what: str) -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting ragged or >2-D input."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise SchemaError(f"{what} must be a 2-D array, got ndim={arr.ndim}")
    return arr


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise DataError(
            f"{what} contains a non-finite value at row {bad[0]}, column {bad[1]}"
        )


@dataclass
class Dataset:
    """Immutable-by-convention container for a regression dataset.

    Parameters
    ----------
    features : (N, k1) array
    targets : (N, k2) array
    feature_names, target_names : column names; defaults are x0.. / y0..
    """

    features: np.ndarray
    targets: np.ndarray
    feature_names: list[str] = field(default_factory=list)
    target_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.features = _as_float_matrix(self.features, "features")
        self.targets = _as_float_matrix(self.targets, "targets")
        n, k1 = self.features.shape
        n2, k2 = self.targets.shape
        if n != n2:
            raise SchemaError(f"features have {n} rows but targets have {n2}")
        if n < 2:
            raise DataError(f"need at least 2 rows, got {n}")
        if k1 < 1 or k2 < 1:
            raise SchemaError("need at least one feature and one target column")
        _check_finite(self.features, "features")
        _check_finite(self.targets, "targets")
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(k1)]
        if not self.target_names:
            self.target_names = [f"y{i}" for i in range(k2)]
        if len(self.feature_names) != k1:
            raise SchemaError(
                f"{len(self.feature_names)} feature names for {k1} columns"
            )
        if len(self.target_names) != k2:
            raise SchemaError(
                f"{len(self.target_names)} target names for {k2} columns"
            )
        self.features.setflags(write=False)
        self.targets.setflags(write=False)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_targets(self) -> int:
        return self.targets.shape[1]

    @property
    def ambient_dim(self) -> int:
        """Dimension of the joint feature+target space."""
        return self.n_features + self.n_targets

    def joint(self) -> np.ndarray:
        """Return the (N, k1+k2) joint matrix [features | targets]."""
        return np.hstack([self.features, self.targets])

    def row(self, i: int) -> np.ndarray:
        """Joint vector of sample ``i``."""
        return np.concatenate([self.features[i], self.targets[i]])


def concat_sample(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Concatenate one feature vector and one target vector into a joint vector."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size < 1 or y.size < 1:
        raise SchemaError("feature and target vectors must be non-empty")
    z = np.concatenate([x, y])
    _check_finite(z.reshape(1, -1), "joint sample")
    return z


def split_sample(z: np.ndarray, n_features: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a joint vector back into (features, targets)."""
    z = np.asarray(z, dtype=np.float64).ravel()
    if not 1 <= n_features < z.size:
        raise SchemaError(
            f"cannot split a {z.size}-vector at n_features={n_features}"
        )
    return z[:n_features].copy(), z[n_features:].copy()


def split_joint(Z: np.ndarray, n_features: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a joint matrix (n, k1+k2) into feature and target blocks."""
    Z = _as_float_matrix(Z, "joint matrix")
    if not 1 <= n_features < Z.shape[1]:
        raise SchemaError(
            f"cannot split {Z.shape[1]} columns at n_features={n_features}"
        )
    return Z[:, :n_features].copy(), Z[:, n_features:].copy()


@dataclass
class NormalizationState:
    """Per-column min/max statistics needed to undo min-max scaling.

    Constant columns cannot be min-max scaled; they are mapped to 0.5 and
    their original value is restored exactly on the inverse transform.
    """

    target_min: np.ndarray
    target_max: np.ndarray
    target_constant: np.ndarray  # boolean mask of constant target columns
    features_rescaled: bool = False
    feature_min: np.ndarray | None = None
    feature_max: np.ndarray | None = None
    feature_constant: np.ndarray | None = None

    @staticmethod
    def _forward(arr, lo, hi, const) -> np.ndarray:
        out = np.empty_like(arr)
        span = hi - lo
        safe = ~const
        out[:, safe] = (arr[:, safe] - lo[safe]) / span[safe]
        out[:, const] = 0.5
        return out

    @staticmethod
    def _inverse(arr, lo, hi, const) -> np.ndarray:
        out = np.empty_like(arr)
        span = hi - lo
        safe = ~const
        out[:, safe] = arr[:, safe] * span[safe] + lo[safe]
        out[:, const] = lo[const]
        return out

    def _check_width(self, arr: np.ndarray, width: int, what: str) -> np.ndarray:
        arr = _as_float_matrix(arr, what)
        if arr.shape[1] != width:
            raise SchemaError(
                f"{what} has {arr.shape[1]} columns, normalization state has {width}"
            )
        return arr

    def transform_targets(self, targets: np.ndarray) -> np.ndarray:
        targets = self._check_width(targets, self.target_min.size, "targets")
        return self._forward(
            targets, self.target_min, self.target_max, self.target_constant
        )

    def invert_targets(self, targets: np.ndarray) -> np.ndarray:
        targets = self._check_width(targets, self.target_min.size, "targets")
        return self._inverse(
            targets, self.target_min, self.target_max, self.target_constant
        )

    def transform_features(self, features: np.ndarray) -> np.ndarray:
        if not self.features_rescaled:
            return _as_float_matrix(features, "features").copy()
        features = self._check_width(features, self.feature_min.size, "features")
        return self._forward(
            features, self.feature_min, self.feature_max, self.feature_constant
        )

    def invert_features(self, features: np.ndarray) -> np.ndarray:
        if not self.features_rescaled:
            return _as_float_matrix(features, "features").copy()
        features = self._check_width(features, self.feature_min.size, "features")
        return self._inverse(
            features, self.feature_min, self.feature_max, self.feature_constant
        )


def _column_stats(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    const = hi == lo
    return lo, hi, const


def normalize_targets(
    dataset: Dataset, rescale_features: bool = False
) -> tuple[Dataset, NormalizationState]:
    """Min-max scale target columns (and optionally features) to [0, 1].

    The statistics are computed once from ``dataset`` and recorded in the
    returned :class:`NormalizationState`; apply that state to any derived
    rows so the whole run shares a single fixed scaling.
    """
    t_lo, t_hi, t_const = _column_stats(dataset.targets)
    state = NormalizationState(
        target_min=t_lo, target_max=t_hi, target_constant=t_const
    )
    if rescale_features:
        f_lo, f_hi, f_const = _column_stats(dataset.features)
        state.features_rescaled = True
        state.feature_min = f_lo
        state.feature_max = f_hi
        state.feature_constant = f_const
    scaled = Dataset(
        features=state.transform_features(dataset.features),
        targets=state.transform_targets(dataset.targets),
        feature_names=list(dataset.feature_names),
        target_names=list(dataset.target_names),
    )
    return scaled, state


def denormalize_targets(dataset: Dataset, state: NormalizationState) -> Dataset:
    """Invert :func:`normalize_targets`, restoring original units exactly."""
    return Dataset(
        features=state.invert_features(dataset.features),
        targets=state.invert_targets(dataset.targets),
        feature_names=list(dataset.feature_names),
        target_names=list(dataset.target_names),
    )
