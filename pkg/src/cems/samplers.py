"""Second-order manifold samplers and the dataset augmentation driver.

Two sampling modes share one pipeline (neighborhood -> local frame ->
quadratic chart -> Gaussian tangent draw -> un-projection):

- point mode: the chart is centered on one anchor sample and a single new
  sample is drawn near it;
- batch mode: one shared frame is centered on the neighborhood mean, a chart
  is re-fitted around every member, and one new sample is drawn per member.

A first-order variant (``order=1``) fits only the linear design columns and
forces every Hessian to zero.  The FOMA baseline re-uses the same frame but
simply scales the normal coordinates of existing members.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .chart import (
    QuadraticChart,
    assemble_design,
    evaluate_chart,
    extract_chart,
    n_quadratic_columns,
    quadratic_layout,
    resolve_ridge,
    solve_chart,
)
from .data import Dataset
from .dimension import twonn_estimate
from .errors import GeometryError, ParameterError
from .neighbors import (
    NeighborIndex,
    Neighborhood,
    knn_neighbors,
    knnp_neighbors,
)
from .tangent import OrthonormalBasis, center, fit_basis, project, unproject

MODES = ("point", "batch")
SELECTIONS = ("knn", "knnp", "random")
METHODS = ("cems", "foma")

# Fraction of generation tasks allowed to fail on degenerate neighborhoods
# before the whole run is aborted.
DEFAULT_FAILURE_BUDGET = 0.01


@dataclass
class SamplerConfig:
    """Knobs shared by every sampler."""

    sigma: float = 0.1  # std-dev of the tangent-space Gaussian draw
    intrinsic_dim: int | str = "auto"  # chart dimension d, or "auto" (TwoNN)
    k: int = 16  # neighborhood size
    mode: str = "batch"  # "point" | "batch"
    selection: str = "knn"  # "knn" | "knnp" | "random"
    ridge: float | str = "auto"  # >= 0, or "auto" (0 unless underdetermined)
    seed: int | None = None
    order: int = 2  # 1 = linear chart (H = 0), 2 = quadratic chart

    def validate(self, ambient_dim: int | None = None) -> None:
        if not self.sigma >= 0:
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.selection not in SELECTIONS:
            raise ParameterError(
                f"selection must be one of {SELECTIONS}, got {self.selection!r}"
            )
        if self.order not in (1, 2):
            raise ParameterError(f"order must be 1 or 2, got {self.order}")
        if self.k < 2:
            raise ParameterError(f"k must be >= 2, got {self.k}")
        if isinstance(self.ridge, str):
            if self.ridge != "auto":
                raise ParameterError(
                    f"ridge must be a float >= 0 or 'auto', got {self.ridge!r}"
                )
        elif not float(self.ridge) >= 0:
            raise ParameterError(f"ridge must be >= 0, got {self.ridge}")
        if isinstance(self.intrinsic_dim, str):
            if self.intrinsic_dim != "auto":
                raise ParameterError(
                    "intrinsic_dim must be a positive int or 'auto', "
                    f"got {self.intrinsic_dim!r}"
                )
        else:
            d = int(self.intrinsic_dim)
            if d < 1:
                raise ParameterError(f"intrinsic_dim must be >= 1, got {d}")
            if ambient_dim is not None and d > ambient_dim - 1:
                raise ParameterError(
                    f"intrinsic_dim {d} exceeds the cap ambient_dim-1 = "
                    f"{ambient_dim - 1}"
                )


@dataclass
class SampleRecord:
    """Provenance of one generated sample."""

    anchor_index: int
    mode: str
    eta: np.ndarray  # tangent coordinates the sample was drawn at
    residual: float  # Frobenius residual of the chart fit


@dataclass
class AugmentedSamples:
    """Generated joint-space samples plus per-sample provenance."""

    samples: np.ndarray  # (n, D)
    provenance: list[SampleRecord] = field(default_factory=list)
    stats: dict = field(default_factory=dict)  # run-level counters (augment only)

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise ParameterError("samples must form a 2-D array")

    @property
    def n(self) -> int:
        return self.samples.shape[0]


def draw_noise(
    rng: np.random.Generator,
    sigma: float,
    d: int,
    mean: np.ndarray | None = None,
) -> np.ndarray:
    """Draw eta ~ N(mean, sigma^2 I_d); mean defaults to the origin."""
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    if d < 1:
        raise ParameterError(f"need d >= 1, got {d}")
    eta = sigma * rng.standard_normal(d)
    if mean is not None:
        mean = np.asarray(mean, dtype=np.float64).ravel()
        if mean.size != d:
            raise ParameterError(f"mean has {mean.size} entries for d={d}")
        eta = mean + eta
    return eta


def fit_chart_rows(
    U_rows: np.ndarray,
    G_rows: np.ndarray,
    order: int,
    ridge: float | str,
    base_point: np.ndarray,
    base_value: np.ndarray,
) -> QuadraticChart:
    """Fit one chart from tangent/normal coordinate rows given *relative to
    the expansion point* (i.e. already shifted so the chart base maps to 0).

    ``order=1`` restricts the fit to the linear design columns and leaves
    every Hessian exactly zero.
    """
    if order not in (1, 2):
        raise ParameterError(f"order must be 1 or 2, got {order}")
    design = assemble_design(U_rows)
    d = design.d
    m = n_quadratic_columns(d)
    psi = design.psi if order == 2 else design.psi[:, :d]
    ridge_val = resolve_ridge(ridge, psi)
    X_fit, residual = solve_chart(psi, G_rows, ridge_val)
    if order == 2:
        X = X_fit
    else:
        X = np.zeros((m, X_fit.shape[1]), dtype=np.float64)
        X[:d] = X_fit
    return extract_chart(
        X,
        design.layout,
        base_value=base_value,
        base_point=base_point,
        ridge_used=ridge_val,
        residual_norm=residual,
    )


def _random_members(
    index: NeighborIndex,
    anchor_index: int,
    k: int,
    rng: np.random.Generator,
    include_anchor: bool,
) -> Neighborhood:
    """Uniform random members around a prescribed anchor."""
    draw = k - 1 if include_anchor else k
    others = np.delete(np.arange(index.n, dtype=np.intp), anchor_index)
    if draw > others.size:
        raise ParameterError(f"k={k} exceeds the {others.size} available rows")
    chosen = rng.choice(others, size=draw, replace=False)
    ids = np.concatenate([[anchor_index], chosen]) if include_anchor else chosen
    return Neighborhood(
        anchor_index=anchor_index,
        anchor=index.points[anchor_index].copy(),
        member_indices=ids,
        members=index.points[ids].copy(),
        strategy="random",
        include_anchor=include_anchor,
    )


def select_neighborhood(
    index: NeighborIndex,
    anchor_index: int,
    config: SamplerConfig,
    rng: np.random.Generator,
    include_anchor: bool,
) -> Neighborhood:
    """Dispatch on the configured selection strategy."""
    if config.selection == "knn":
        return knn_neighbors(index, anchor_index, config.k, include_anchor)
    if config.selection == "knnp":
        return knnp_neighbors(index, anchor_index, config.k, rng, include_anchor)
    if config.selection == "random":
        return _random_members(index, anchor_index, config.k, rng, include_anchor)
    raise ParameterError(f"unknown selection strategy {config.selection!r}")


def _require_int_dim(config: SamplerConfig) -> int:
    if isinstance(config.intrinsic_dim, str):
        raise ParameterError(
            "intrinsic_dim must be resolved to an integer before sampling; "
            "use resolve_intrinsic_dim() or augment_dataset()"
        )
    return int(config.intrinsic_dim)


def sample_point(
    index: NeighborIndex,
    anchor_index: int,
    config: SamplerConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, SampleRecord]:
    """Draw one new joint sample from a chart centered on one anchor row."""
    d = _require_int_dim(config)
    neighborhood = select_neighborhood(
        index, anchor_index, config, rng, include_anchor=False
    )
    centered = center(neighborhood, "point")
    basis = fit_basis(centered, d)
    coords = project(basis, centered)
    chart = fit_chart_rows(
        coords.U,
        coords.G,
        order=config.order,
        ridge=config.ridge,
        base_point=np.zeros(d),
        base_value=np.zeros(basis.normal.shape[1]),
    )
    eta = draw_noise(rng, config.sigma, d)
    g_eta = evaluate_chart(chart, eta)
    z = unproject(basis, eta, g_eta, centered.origin)
    record = SampleRecord(
        anchor_index=int(anchor_index),
        mode="point",
        eta=eta,
        residual=chart.residual_norm,
    )
    return z, record


def sample_batch(
    index: NeighborIndex,
    anchor_index: int,
    config: SamplerConfig,
    rng: np.random.Generator,
) -> AugmentedSamples:
    """Draw k new samples from one shared frame around a batch of rows.

    The neighborhood contains the anchor; the frame is centered on the
    member mean; each member gets its own chart (expanded at that member)
    and one Gaussian draw centered on its tangent coordinates.
    """
    d = _require_int_dim(config)
    neighborhood = select_neighborhood(
        index, anchor_index, config, rng, include_anchor=True
    )
    return _batch_from_neighborhood(neighborhood, config, rng, d)


def _batch_from_neighborhood(
    neighborhood: Neighborhood,
    config: SamplerConfig,
    rng: np.random.Generator,
    d: int,
) -> AugmentedSamples:
    centered = center(neighborhood, "batch")
    basis = fit_basis(centered, d)
    coords = project(basis, centered)
    k = neighborhood.k
    samples = np.empty((k, centered.dim), dtype=np.float64)
    records: list[SampleRecord] = []
    for l in range(k):
        keep = np.arange(k) != l
        chart = fit_chart_rows(
            coords.U[keep] - coords.U[l],
            coords.G[keep] - coords.G[l],
            order=config.order,
            ridge=config.ridge,
            base_point=coords.U[l],
            base_value=coords.G[l],
        )
        eta = draw_noise(rng, config.sigma, d, mean=coords.U[l])
        g_eta = evaluate_chart(chart, eta)
        samples[l] = unproject(basis, eta, g_eta, centered.origin)
        records.append(
            SampleRecord(
                anchor_index=int(neighborhood.member_indices[l]),
                mode="batch",
                eta=eta,
                residual=chart.residual_norm,
            )
        )
    return AugmentedSamples(samples=samples, provenance=records)


def foma_sample(
    neighborhood: Neighborhood,
    lam: float,
    config: SamplerConfig,
) -> AugmentedSamples:
    """First-order manifold baseline: rebuild every member with its normal
    coordinates scaled by ``lam`` in the shared local frame.

    No chart is fitted and no noise is drawn; ``lam=1`` reproduces the
    members up to the rank-truncation residual of the frame.
    """
    if not 0 < lam <= 1:
        raise ParameterError(f"lambda must lie in (0, 1], got {lam}")
    d = _require_int_dim(config)
    centered = center(neighborhood, config.mode)
    basis = fit_basis(centered, d)
    coords = project(basis, centered)
    scaled = coords.G * lam
    samples = (
        coords.U @ basis.tangent.T + scaled @ basis.normal.T + centered.origin
    )
    records = [
        SampleRecord(
            anchor_index=int(idx),
            mode=f"foma[{config.mode}]",
            eta=coords.U[j].copy(),
            residual=0.0,
        )
        for j, idx in enumerate(neighborhood.member_indices)
    ]
    return AugmentedSamples(samples=samples, provenance=records)


def resolve_intrinsic_dim(config: SamplerConfig, joint: np.ndarray) -> SamplerConfig:
    """Replace ``intrinsic_dim="auto"`` with a TwoNN estimate on the joint data."""
    if not isinstance(config.intrinsic_dim, str):
        return config
    estimate = twonn_estimate(joint)
    return replace(config, intrinsic_dim=estimate.d_used)


def _task_size(config: SamplerConfig, method: str) -> int:
    if method == "foma" or config.mode == "batch":
        return config.k
    return 1


def _run_task(
    index: NeighborIndex,
    anchor: int,
    config: SamplerConfig,
    method: str,
    foma_lambda: float,
    task_rng: np.random.Generator,
) -> AugmentedSamples:
    if method == "foma":
        neighborhood = select_neighborhood(
            index, anchor, config, task_rng, include_anchor=(config.mode == "batch")
        )
        return foma_sample(neighborhood, foma_lambda, config)
    if config.mode == "point":
        z, record = sample_point(index, anchor, config, task_rng)
        return AugmentedSamples(samples=z.reshape(1, -1), provenance=[record])
    return sample_batch(index, anchor, config, task_rng)


def augment_dataset(
    dataset: Dataset,
    config: SamplerConfig,
    n_gen: int,
    rng: np.random.Generator,
    method: str = "cems",
    foma_lambda: float = 0.5,
    workers: int = 1,
    failure_budget: float = DEFAULT_FAILURE_BUDGET,
) -> AugmentedSamples:
    """Generate ``n_gen`` new joint samples from ``dataset``.

    Anchors are drawn uniformly with ``rng``; every generation task then owns
    an independent child RNG stream, so results are identical for any number
    of ``workers``.  Tasks that hit degenerate neighborhoods are retried with
    fresh anchors; the run aborts once more than ``failure_budget`` of the
    attempted tasks have failed.
    """
    if n_gen < 1:
        raise ParameterError(f"n_gen must be >= 1, got {n_gen}")
    if method not in METHODS:
        raise ParameterError(f"method must be one of {METHODS}, got {method!r}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    config.validate(dataset.ambient_dim)
    Z = dataset.joint()
    config = resolve_intrinsic_dim(config, Z)
    d = _require_int_dim(config)
    if d > dataset.ambient_dim - 1:
        raise ParameterError(
            f"intrinsic_dim {d} exceeds the cap ambient_dim-1 = "
            f"{dataset.ambient_dim - 1}"
        )
    index = NeighborIndex(Z)

    per_task = _task_size(config, method)
    n_tasks = math.ceil(n_gen / per_task)
    chunks: list[AugmentedSamples | None] = []
    failures = 0
    attempts = 0
    produced = 0

    def run_round(anchors: np.ndarray, streams) -> list[AugmentedSamples | None]:
        def one(i: int) -> AugmentedSamples | None:
            try:
                return _run_task(
                    index, int(anchors[i]), config, method, foma_lambda, streams[i]
                )
            except GeometryError:
                return None

        if workers == 1 or len(anchors) == 1:
            return [one(i) for i in range(len(anchors))]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(len(anchors))))

    need = n_tasks
    while need > 0:
        anchors = rng.integers(0, dataset.n, size=need)
        streams = rng.spawn(need)
        results = run_round(anchors, streams)
        attempts += need
        done = [r for r in results if r is not None]
        failures += need - len(done)
        allowed = math.ceil(failure_budget * attempts)
        if failures > allowed:
            raise GeometryError(
                f"{failures} of {attempts} generation tasks failed on "
                f"degenerate neighborhoods (budget {failure_budget:.1%})"
            )
        chunks.extend(done)
        produced += sum(c.n for c in done)
        need = math.ceil(max(0, n_gen - produced) / per_task)

    samples = np.vstack([c.samples for c in chunks])[:n_gen]
    provenance = [rec for c in chunks for rec in c.provenance][:n_gen]
    stats = {
        "intrinsic_dim": d,
        "failures": failures,
        "attempts": attempts,
        "method": method,
    }
    return AugmentedSamples(samples=samples, provenance=provenance, stats=stats)
