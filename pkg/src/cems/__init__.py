"""Curvature-enhanced manifold sampling.

Data augmentation for regression: each sample (or batch of samples) of the
joint feature-target space gets a local second-order chart — an orthonormal
tangent/normal frame from neighborhood SVD plus a fitted gradient and
Hessian of the normal coordinates — and new samples are drawn by pushing
Gaussian tangent noise through that chart.  The package also ships a
first-order variant, the FOMA scaling baseline, a TwoNN intrinsic-dimension
estimator, synthetic benchmark generators, and geometric verification
experiments.
"""

from .chart import (
    DesignMatrix,
    QuadraticChart,
    assemble_design,
    evaluate_chart,
    extract_chart,
    n_quadratic_columns,
    quadratic_layout,
    resolve_ridge,
    solve_chart,
)
from .data import (
    Dataset,
    NormalizationState,
    concat_sample,
    denormalize_targets,
    normalize_targets,
    split_joint,
    split_sample,
)
from .dimension import DimEstimate, twonn_estimate
from .errors import (
    CemsError,
    ConfigError,
    DataError,
    EstimationError,
    GeometryError,
    IOFailure,
    NumericError,
    ParameterError,
    SchemaError,
)
from .experiments import (
    CurvatureReport,
    OrderReport,
    chart_error_at_scale,
    run_curvature_sweep,
    run_order_experiment,
)
from .io import load_csv, save_csv, write_report, write_sidecar_metadata
from .neighbors import (
    NeighborIndex,
    Neighborhood,
    knn_neighbors,
    knnp_neighbors,
    random_batch,
)
from .samplers import (
    AugmentedSamples,
    SampleRecord,
    SamplerConfig,
    augment_dataset,
    draw_noise,
    fit_chart_rows,
    foma_sample,
    resolve_intrinsic_dim,
    sample_batch,
    sample_point,
    select_neighborhood,
)
from .synthetic import (
    HypersphereData,
    circle_distance,
    curvature_to_radius,
    gen_hypersphere,
    gen_sine,
    parabola_distance,
    sine_distance,
)
from .tangent import (
    CenteredNeighborhood,
    OrthonormalBasis,
    ProjectedNeighborhood,
    center,
    fit_basis,
    project,
    unproject,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentedSamples",
    "CemsError",
    "CenteredNeighborhood",
    "ConfigError",
    "CurvatureReport",
    "DataError",
    "Dataset",
    "DesignMatrix",
    "DimEstimate",
    "EstimationError",
    "GeometryError",
    "HypersphereData",
    "IOFailure",
    "NeighborIndex",
    "Neighborhood",
    "NormalizationState",
    "NumericError",
    "OrderReport",
    "OrthonormalBasis",
    "ParameterError",
    "ProjectedNeighborhood",
    "QuadraticChart",
    "SampleRecord",
    "SamplerConfig",
    "SchemaError",
    "assemble_design",
    "augment_dataset",
    "center",
    "chart_error_at_scale",
    "circle_distance",
    "concat_sample",
    "curvature_to_radius",
    "denormalize_targets",
    "draw_noise",
    "evaluate_chart",
    "extract_chart",
    "fit_basis",
    "fit_chart_rows",
    "foma_sample",
    "gen_hypersphere",
    "gen_sine",
    "knn_neighbors",
    "knnp_neighbors",
    "load_csv",
    "n_quadratic_columns",
    "normalize_targets",
    "parabola_distance",
    "project",
    "quadratic_layout",
    "random_batch",
    "resolve_intrinsic_dim",
    "resolve_ridge",
    "run_curvature_sweep",
    "run_order_experiment",
    "sample_batch",
    "sample_point",
    "save_csv",
    "select_neighborhood",
    "sine_distance",
    "solve_chart",
    "split_joint",
    "split_sample",
    "twonn_estimate",
    "unproject",
    "write_report",
    "write_sidecar_metadata",
]
