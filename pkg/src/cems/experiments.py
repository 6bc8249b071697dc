"""Geometric verification experiments.

Two desk-scale experiments check that the samplers behave like the truncated
Taylor expansions they are built from:

- the *order experiment* fits charts on exact, scale-matched curve
  neighborhoods and verifies that point-to-manifold error shrinks like h^2
  (first order) and h^3 (second order) as the sampling radius h shrinks;
- the *curvature sweep* generates hyperspheres of increasing curvature and
  tracks how much worse first-order sampling gets relative to second-order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .chart import evaluate_chart
from .errors import ParameterError
from .neighbors import NeighborIndex, knn_neighbors
from .samplers import SamplerConfig, fit_chart_rows, foma_sample, sample_point
from .synthetic import (
    SINE_DOMAIN,
    circle_distance,
    gen_hypersphere,
    parabola_distance,
    sine_distance,
)
from .tangent import CenteredNeighborhood, fit_basis, project, unproject

# Mean errors below this are treated as exactly reproduced (no slope fit).
EXACT_FLOOR = 1e-10

# Fit-neighborhood half-width as a multiple of the sampling radius h.  The
# nodes must shrink with h, otherwise window bias (not Taylor truncation)
# dominates and the error-vs-h slopes flatten.
NODE_SPAN_FACTOR = 2.0


def _patch_sine(param: float, offsets: np.ndarray):
    t = param + offsets
    nodes = np.stack([t, np.sin(t)], axis=-1)
    anchor = np.array([param, np.sin(param)])
    return anchor, nodes, sine_distance


def _patch_circle(param: float, offsets: np.ndarray):
    t = param + offsets
    nodes = np.stack([np.cos(t), np.sin(t)], axis=-1)
    anchor = np.array([np.cos(param), np.sin(param)])
    return anchor, nodes, circle_distance


def _patch_quadratic(param: float, offsets: np.ndarray):
    # The manifold is the graph y = c x^2 over its own tangent at the anchor
    # (the apex), the one configuration a second-order chart reproduces
    # exactly; ``param`` sets the coefficient instead of a position.
    coeff = 0.5 + 0.5 * param
    nodes = np.stack([offsets, coeff * offsets**2], axis=-1)
    anchor = np.zeros(2)
    return anchor, nodes, lambda pts: parabola_distance(pts, coeff)


# curve name -> (patch builder, anchor-parameter domain)
CURVES = {
    "sine": (_patch_sine, SINE_DOMAIN),
    "circle": (_patch_circle, (0.0, 2.0 * np.pi)),
    "quadratic": (_patch_quadratic, (0.0, 1.0)),
}


@dataclass
class OrderReport:
    """Outcome of the Taylor-order experiment."""

    curve: str
    scales: tuple[float, ...]
    orders: tuple[int, ...]
    mean_errors: dict[int, np.ndarray]  # order -> (n_scales,) mean distance
    slopes: dict[int, float]  # order -> mean fitted log-log slope (nan if exact)
    slope_ci: dict[int, float]  # order -> 95% half-width over seeds
    exact: dict[int, bool]  # order -> all errors at numerical floor
    per_seed_slopes: dict[int, np.ndarray] = field(default_factory=dict)
    n_seeds: int = 1
    runtime: float = 0.0
    config: dict = field(default_factory=dict)


def _child_seed(*parts: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(parts)))


def chart_error_at_scale(
    patch_fn,
    param: float,
    h: float,
    order: int,
    rng: np.random.Generator,
    nodes_per_side: int,
    ridge: float = 0.0,
) -> float:
    """Fit one chart on exact local curve nodes and measure the distance of a
    radius-h draw back to the curve.

    The nodes sit at offsets +-j * (span * h / nodes_per_side) along the
    curve, so the fit window scales with h and Taylor truncation (not window
    bias or k-NN irregularity) dominates the error.
    """
    steps = np.arange(1, nodes_per_side + 1) * (
        NODE_SPAN_FACTOR * h / nodes_per_side
    )
    offsets = np.concatenate([-steps[::-1], steps])
    anchor, nodes, distance_fn = patch_fn(param, offsets)
    centered = CenteredNeighborhood(origin=anchor, deltas=nodes - anchor)
    basis = fit_basis(centered, d=1)
    coords = project(basis, centered)
    chart = fit_chart_rows(
        coords.U,
        coords.G,
        order=order,
        ridge=ridge,
        base_point=np.zeros(1),
        base_value=np.zeros(basis.normal.shape[1]),
    )
    eta = np.array([h if rng.random() < 0.5 else -h])
    g_eta = evaluate_chart(chart, eta)
    z = unproject(basis, eta, g_eta, centered.origin)
    return float(distance_fn(z)[0])


def run_order_experiment(
    curve: str = "sine",
    scales: tuple[float, ...] = (0.02, 0.04, 0.08, 0.16),
    orders: tuple[int, ...] = (1, 2),
    seed: int = 0,
    n_seeds: int = 20,
    n_anchors: int = 40,
    nodes_per_side: int = 6,
) -> OrderReport:
    """Measure point-to-manifold error of chart draws versus sampling radius.

    For every seed, ``n_anchors`` anchors are placed uniformly on the curve;
    at each radius h a chart of each order is fitted on exact local nodes and
    evaluated at a draw of norm h.  Log-log slopes of mean error against h
    are fitted per seed and averaged.
    """
    if curve not in CURVES:
        raise ParameterError(f"curve must be one of {sorted(CURVES)}, got {curve!r}")
    if len(scales) < 2:
        raise ParameterError("need at least two scales to fit a slope")
    if any(h <= 0 for h in scales):
        raise ParameterError("scales must be positive")
    patch_fn, domain = CURVES[curve]
    start = time.perf_counter()
    scales = tuple(float(h) for h in scales)
    errors = {o: np.zeros((n_seeds, len(scales))) for o in orders}
    for si in range(n_seeds):
        rng = _child_seed(seed, si)
        anchors = rng.uniform(domain[0], domain[1], size=n_anchors)
        for hi, h in enumerate(scales):
            for order in orders:
                errs = [
                    chart_error_at_scale(
                        patch_fn, t0, h, order, rng, nodes_per_side
                    )
                    for t0 in anchors
                ]
                errors[order][si, hi] = float(np.mean(errs))
    log_h = np.log(np.asarray(scales))
    mean_errors: dict[int, np.ndarray] = {}
    slopes: dict[int, float] = {}
    slope_ci: dict[int, float] = {}
    exact: dict[int, bool] = {}
    per_seed: dict[int, np.ndarray] = {}
    for order in orders:
        mean_errors[order] = errors[order].mean(axis=0)
        is_exact = bool(np.all(mean_errors[order] < EXACT_FLOOR))
        exact[order] = is_exact
        if is_exact:
            slopes[order] = float("nan")
            slope_ci[order] = float("nan")
            per_seed[order] = np.full(n_seeds, np.nan)
        else:
            fits = np.array(
                [
                    np.polyfit(log_h, np.log(errors[order][si]), 1)[0]
                    for si in range(n_seeds)
                ]
            )
            per_seed[order] = fits
            slopes[order] = float(fits.mean())
            spread = float(fits.std(ddof=1)) if n_seeds > 1 else 0.0
            slope_ci[order] = 1.96 * spread / np.sqrt(n_seeds)
    return OrderReport(
        curve=curve,
        scales=scales,
        orders=tuple(orders),
        mean_errors=mean_errors,
        slopes=slopes,
        slope_ci=slope_ci,
        exact=exact,
        per_seed_slopes=per_seed,
        n_seeds=n_seeds,
        runtime=time.perf_counter() - start,
        config={
            "curve": curve,
            "scales": list(scales),
            "orders": list(orders),
            "seed": seed,
            "n_seeds": n_seeds,
            "n_anchors": n_anchors,
            "nodes_per_side": nodes_per_side,
        },
    )


@dataclass
class CurvatureReport:
    """Outcome of the curvature sweep."""

    curvatures: tuple[float, ...]
    mean_distances: dict[str, np.ndarray]  # method -> (n_curvatures,)
    ratios: np.ndarray  # (n_curvatures,) mean of per-seed first/second ratios
    per_seed_ratios: np.ndarray  # (n_seeds, n_curvatures)
    n_seeds: int = 1
    runtime: float = 0.0
    config: dict = field(default_factory=dict)


def run_curvature_sweep(
    curvatures: tuple[float, ...] = (1.0, 4.0, 16.0, 64.0),
    seed: int = 0,
    n_seeds: int = 5,
    n_points: int = 512,
    k: int = 16,
    sigma: float = 0.04,
    intrinsic_d: int = 2,
    ambient_d: int = 8,
    noise_sd: float = 1e-3,
    foma_lambda: float = 0.5,
    n_anchors: int = 64,
) -> CurvatureReport:
    """Compare sampler error across hyperspheres that differ only in curvature.

    Each sphere is generated in raw units (no min-max scaling) so the fixed
    sampling scale ``sigma`` probes progressively sharper curvature as the
    radius shrinks; ``noise_sd`` adds a small ambient noise floor shared by
    all methods.  Error is the sphere-distance |norm(p) - R| of the feature
    part of each generated sample.
    """
    if len(curvatures) == 0:
        raise ParameterError("need at least one curvature level")
    if any(c <= 0 for c in curvatures):
        raise ParameterError("curvatures must be positive")
    if n_anchors > n_points:
        raise ParameterError("n_anchors cannot exceed n_points")
    start = time.perf_counter()
    curvatures = tuple(float(c) for c in curvatures)
    methods = ("second", "first", "foma")
    dists = {m: np.zeros((n_seeds, len(curvatures))) for m in methods}
    for ci, curvature in enumerate(curvatures):
        for si in range(n_seeds):
            data_seed = int(
                np.random.SeedSequence([seed, ci, si]).generate_state(1)[0]
            )
            data = gen_hypersphere(
                n_points,
                intrinsic_d,
                curvature,
                ambient_d,
                seed=data_seed,
                noise_sd=noise_sd,
                normalize=False,
            )
            index = NeighborIndex(data.dataset.joint())
            rng = _child_seed(seed, ci, si, 1)
            anchors = rng.choice(n_points, size=n_anchors, replace=False)
            collected: dict[str, list] = {m: [] for m in methods}
            for a in anchors:
                for method, order in (("second", 2), ("first", 1)):
                    cfg = SamplerConfig(
                        sigma=sigma,
                        intrinsic_dim=intrinsic_d,
                        k=k,
                        mode="point",
                        order=order,
                    )
                    z, _ = sample_point(index, int(a), cfg, rng)
                    collected[method].append(z)
                nb = knn_neighbors(index, int(a), k, include_anchor=True)
                batch_cfg = SamplerConfig(
                    sigma=sigma, intrinsic_dim=intrinsic_d, k=k, mode="batch"
                )
                collected["foma"].append(
                    foma_sample(nb, foma_lambda, batch_cfg).samples
                )
            for method in methods:
                pts = np.vstack(
                    [np.atleast_2d(p) for p in collected[method]]
                )
                feats = pts[:, :ambient_d]
                dists[method][si, ci] = float(
                    np.mean(data.sphere_distance(feats))
                )
    per_seed_ratios = dists["first"] / dists["second"]
    report = CurvatureReport(
        curvatures=curvatures,
        mean_distances={m: dists[m].mean(axis=0) for m in methods},
        ratios=per_seed_ratios.mean(axis=0),
        per_seed_ratios=per_seed_ratios,
        n_seeds=n_seeds,
        runtime=time.perf_counter() - start,
        config={
            "curvatures": list(curvatures),
            "seed": seed,
            "n_seeds": n_seeds,
            "n_points": n_points,
            "k": k,
            "sigma": sigma,
            "intrinsic_d": intrinsic_d,
            "ambient_d": ambient_d,
            "noise_sd": noise_sd,
            "foma_lambda": foma_lambda,
            "n_anchors": n_anchors,
        },
    )
    return report
