"""Synthetic regression benchmarks with known geometry.

Two generators: a one-dimensional sine curve and a hypersphere of prescribed
scalar curvature isometrically embedded in a higher-dimensional ambient
space.  Exact point-to-manifold distance oracles for these shapes live here
too, so experiments can measure how far generated samples stray.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .data import Dataset, NormalizationState, normalize_targets
from .errors import ParameterError

SINE_DOMAIN = (0.0, 2.0 * np.pi)


def gen_sine(n: int, noise_sd: float = 0.0, seed: int = 0) -> Dataset:
    """n points (x, sin x + noise) with x uniform on [0, 2*pi].

    The output is left in raw units; with ``noise_sd=0`` every row satisfies
    y = sin(x) exactly.
    """
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if noise_sd < 0:
        raise ParameterError(f"noise_sd must be >= 0, got {noise_sd}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(*SINE_DOMAIN, size=n)
    y = np.sin(x)
    if noise_sd > 0:
        y = y + noise_sd * rng.standard_normal(n)
    return Dataset(
        features=x.reshape(-1, 1),
        targets=y.reshape(-1, 1),
        feature_names=["x"],
        target_names=["y"],
    )


def curvature_to_radius(curvature: float, intrinsic_d: int) -> float:
    """Radius of the d-sphere whose curvature equals ``curvature``.

    For d >= 2 the scalar curvature of a radius-R sphere is d(d-1)/R^2; for
    d = 1 (a circle, zero scalar curvature) the extrinsic curvature 1/R is
    used instead.
    """
    if curvature <= 0:
        raise ParameterError(f"curvature must be > 0, got {curvature}")
    if intrinsic_d < 1:
        raise ParameterError(f"intrinsic_d must be >= 1, got {intrinsic_d}")
    if intrinsic_d == 1:
        return 1.0 / np.sqrt(curvature)
    return float(np.sqrt(intrinsic_d * (intrinsic_d - 1) / curvature))


@dataclass
class HypersphereData:
    """A hypersphere regression sample plus everything needed to check it."""

    dataset: Dataset  # features/targets, normalized iff requested
    sphere_points: np.ndarray  # (n, d+1) raw coordinates on the sphere
    raw_features: np.ndarray  # (n, ambient_d) embedded, before normalization
    raw_targets: np.ndarray  # (n, 1) sin(sum of sphere coords), before scaling
    radius: float
    embedding: np.ndarray  # (ambient_d, d+1), orthonormal columns
    state: NormalizationState | None  # None when normalize=False

    def sphere_distance(self, features: np.ndarray) -> np.ndarray:
        """|norm(p) - R| for feature rows given in *raw* (embedded) units."""
        features = np.asarray(features, dtype=np.float64)
        return np.abs(np.linalg.norm(features, axis=-1) - self.radius)


def gen_hypersphere(
    n: int,
    intrinsic_d: int,
    curvature: float,
    ambient_d: int,
    seed: int = 0,
    noise_sd: float = 0.0,
    normalize: bool = True,
) -> HypersphereData:
    """Sample n points uniformly on a d-sphere of given curvature, embed them
    isometrically in ``ambient_d`` dimensions, and attach the regression
    target y = sin(sum of sphere coordinates).

    Directions are normalized Gaussian draws; the embedding is the Q factor
    of a seeded Gaussian matrix, so the whole construction is deterministic
    in ``seed``.  With ``normalize`` both features and targets are min-max
    scaled to [0, 1]; the raw coordinates stay available on the result.
    """
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if intrinsic_d + 1 > ambient_d:
        raise ParameterError(
            f"ambient_d must be at least intrinsic_d+1 = {intrinsic_d + 1}, "
            f"got {ambient_d}"
        )
    if noise_sd < 0:
        raise ParameterError(f"noise_sd must be >= 0, got {noise_sd}")
    radius = curvature_to_radius(curvature, intrinsic_d)
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((n, intrinsic_d + 1))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # A zero draw has probability zero; guard against it anyway.
    norms[norms == 0] = 1.0
    sphere = radius * directions / norms
    gauss = rng.standard_normal((ambient_d, intrinsic_d + 1))
    embedding, _ = np.linalg.qr(gauss)
    features = sphere @ embedding.T
    targets = np.sin(sphere.sum(axis=1)).reshape(-1, 1)
    if noise_sd > 0:
        features = features + noise_sd * rng.standard_normal(features.shape)
        targets = targets + noise_sd * rng.standard_normal(targets.shape)
    raw = Dataset(features=features, targets=targets)
    if normalize:
        dataset, state = normalize_targets(raw, rescale_features=True)
    else:
        dataset, state = raw, None
    return HypersphereData(
        dataset=dataset,
        sphere_points=sphere,
        raw_features=features,
        raw_targets=targets,
        radius=radius,
        embedding=embedding,
        state=state,
    )


# ---------------------------------------------------------------------------
# Point-to-manifold distance oracles
# ---------------------------------------------------------------------------


def _min_distance_to_graph(px: float, py: float, fn, window: float) -> float:
    """Distance from (px, py) to the plane curve (t, fn(t)).

    A dense grid over [px - window, px + window] brackets the global
    minimum, then Brent refinement polishes it.
    """
    grid = np.linspace(px - window, px + window, 801)
    d2 = (grid - px) ** 2 + (fn(grid) - py) ** 2
    i = int(np.argmin(d2))
    lo = grid[max(0, i - 1)]
    hi = grid[min(grid.size - 1, i + 1)]
    res = minimize_scalar(
        lambda t: (t - px) ** 2 + (fn(t) - py) ** 2,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(np.sqrt(min(res.fun, d2[i])))


def sine_distance(points: np.ndarray) -> np.ndarray:
    """Euclidean distance from 2-D points to the curve (t, sin t), t real."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return np.array(
        [_min_distance_to_graph(p[0], p[1], np.sin, np.pi) for p in points]
    )


def parabola_distance(points: np.ndarray, coeff: float = 0.5) -> np.ndarray:
    """Distance from 2-D points to the parabola (t, coeff * t^2)."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return np.array(
        [
            _min_distance_to_graph(p[0], p[1], lambda t: coeff * t**2, 2.0)
            for p in points
        ]
    )


def circle_distance(points: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Distance from 2-D points to the origin-centered circle of ``radius``."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    return np.abs(np.linalg.norm(points, axis=1) - radius)
