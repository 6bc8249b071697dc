"""Command-line interface.

Subcommands:

- ``augment``          generate new samples from a CSV dataset
- ``estimate-dim``     TwoNN intrinsic-dimension estimate of a CSV dataset
- ``synth``            write a synthetic benchmark dataset
- ``bench-order``      Taylor-order experiment report
- ``bench-curvature``  curvature-sweep report

Every option can also be supplied through ``--config FILE`` containing flat
``key = value`` lines; explicit flags win over the config file, which wins
over built-in defaults.  All randomness flows from ``--seed``; when omitted,
a seed is drawn and printed so the run can be reproduced.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .data import Dataset, denormalize_targets, normalize_targets
from .dimension import twonn_estimate
from .errors import CemsError, ConfigError, IOFailure
from .experiments import run_curvature_sweep, run_order_experiment
from .io import (
    ExtraColumn,
    ensure_parent_dir,
    load_csv,
    save_csv,
    write_report,
    write_sidecar_metadata,
)
from .samplers import SamplerConfig, augment_dataset
from .synthetic import gen_hypersphere, gen_sine

EXIT_CODES = {"config": 2, "data": 3, "geometry": 4, "io": 5}


# ---------------------------------------------------------------------------
# Option parsing with config-file fallback
# ---------------------------------------------------------------------------


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def _parse_int(value) -> int:
    try:
        return int(str(value).strip())
    except ValueError:
        raise ConfigError(f"expected an integer, got {value!r}")


def _parse_float(value) -> float:
    try:
        return float(str(value).strip())
    except ValueError:
        raise ConfigError(f"expected a number, got {value!r}")


def _parse_dim(value):
    text = str(value).strip()
    if text == "auto":
        return "auto"
    return _parse_int(text)


def _parse_ridge(value):
    text = str(value).strip()
    if text == "auto":
        return "auto"
    ridge = _parse_float(text)
    if ridge < 0:
        raise ConfigError(f"ridge must be >= 0, got {ridge}")
    return ridge


def _parse_str(value) -> str:
    return str(value).strip()


def _choice(*allowed: str):
    def parse(value):
        text = str(value).strip()
        if text not in allowed:
            raise ConfigError(f"expected one of {allowed}, got {text!r}")
        return text

    return parse


def _parse_float_list(value) -> tuple[float, ...]:
    if isinstance(value, (tuple, list)):
        return tuple(float(v) for v in value)
    parts = [p for p in str(value).replace(",", " ").split() if p]
    if not parts:
        raise ConfigError("expected a comma-separated list of numbers")
    return tuple(_parse_float(p) for p in parts)


def _parse_name_list(value) -> list[str]:
    parts = [p.strip() for p in str(value).split(",") if p.strip()]
    if not parts:
        raise ConfigError("expected a comma-separated list of names")
    return parts


# Each option: key -> (default, parser, help text).  Boolean options are
# exposed as value-less flags but accept true/false in config files.
AUGMENT_OPTS: dict[str, tuple] = {
    "input": (None, _parse_str, "input CSV path"),
    "output": (None, _parse_str, "output CSV path"),
    "targets": (None, _parse_name_list, "comma-separated target column names"),
    "sigma": (0.1, _parse_float, "tangent noise scale (default 0.1)"),
    "k": (16, _parse_int, "neighborhood size (default 16)"),
    "dim": ("auto", _parse_dim, "chart dimension, integer or 'auto'"),
    "mode": ("batch", _choice("point", "batch"), "sampling mode"),
    "select": (
        "knn",
        _choice("knn", "knnp", "random"),
        "neighbor selection strategy",
    ),
    "order": (2, _parse_int, "chart order: 1 (linear) or 2 (quadratic)"),
    "ridge": ("auto", _parse_ridge, "ridge strength, float or 'auto'"),
    "method": ("cems", _choice("cems", "foma"), "sampler family"),
    "lambda": (0.5, _parse_float, "normal-coordinate scale for --method foma"),
    "n-gen": (None, _parse_int, "samples to generate (default: dataset size)"),
    "append": (False, _parse_bool, "append originals ahead of generated rows"),
    "denormalize": (False, _parse_bool, "write outputs in original units"),
    "provenance": (False, _parse_bool, "add anchor/mode/residual columns"),
    "normalize-features": (
        True,
        _parse_bool,
        "min-max scale features too (default true)",
    ),
    "seed": (None, _parse_int, "RNG seed; omitted = drawn and printed"),
    "workers": (1, _parse_int, "parallel generation workers"),
}

ESTIMATE_OPTS: dict[str, tuple] = {
    "input": (None, _parse_str, "input CSV path"),
    "targets": (None, _parse_name_list, "comma-separated target column names"),
    "output": (None, _parse_str, "optional report path"),
    "normalize-features": (True, _parse_bool, "min-max scale features too"),
}

SYNTH_OPTS: dict[str, tuple] = {
    "kind": (None, _choice("sine", "hypersphere"), "generator to run"),
    "output": (None, _parse_str, "output CSV path"),
    "n": (512, _parse_int, "number of rows"),
    "noise-sd": (0.0, _parse_float, "additive Gaussian noise scale"),
    "curvature": (1.0, _parse_float, "hypersphere scalar curvature"),
    "dim": (2, _parse_int, "hypersphere intrinsic dimension"),
    "ambient": (8, _parse_int, "hypersphere ambient feature dimension"),
    "raw": (False, _parse_bool, "skip min-max scaling (hypersphere only)"),
    "seed": (None, _parse_int, "RNG seed; omitted = drawn and printed"),
}

BENCH_ORDER_OPTS: dict[str, tuple] = {
    "output": (None, _parse_str, "report path"),
    "curve": (
        "sine",
        _choice("sine", "circle", "quadratic"),
        "manifold to test on",
    ),
    "scales": ((0.02, 0.04, 0.08, 0.16), _parse_float_list, "sampling radii"),
    "seeds": (20, _parse_int, "number of seeds to average"),
    "anchors": (40, _parse_int, "anchors per seed"),
    "seed": (None, _parse_int, "RNG seed; omitted = drawn and printed"),
}

BENCH_CURVATURE_OPTS: dict[str, tuple] = {
    "output": (None, _parse_str, "report path"),
    "curvatures": ((1.0, 4.0, 16.0, 64.0), _parse_float_list, "sweep values"),
    "seeds": (5, _parse_int, "number of seeds to average"),
    "points": (512, _parse_int, "points per sphere"),
    "k": (16, _parse_int, "neighborhood size"),
    "sigma": (0.04, _parse_float, "tangent noise scale"),
    "dim": (2, _parse_int, "sphere intrinsic dimension"),
    "ambient": (8, _parse_int, "ambient feature dimension"),
    "noise-sd": (1e-3, _parse_float, "ambient data noise"),
    "lambda": (0.5, _parse_float, "normal-coordinate scale for FOMA"),
    "anchors": (64, _parse_int, "anchors per sphere"),
    "seed": (None, _parse_int, "RNG seed; omitted = drawn and printed"),
}

_BOOL_KEYS = {
    "append",
    "denormalize",
    "provenance",
    "raw",
}


def _add_options(parser: argparse.ArgumentParser, spec: dict[str, tuple]) -> None:
    parser.add_argument("--config", default=None, help="key = value config file")
    for key, (_default, _parse, help_text) in spec.items():
        flag = f"--{key}"
        if key in _BOOL_KEYS:
            parser.add_argument(flag, action="store_true", default=None, help=help_text)
        else:
            parser.add_argument(flag, default=None, help=help_text)


def _load_config_file(path: str, spec: dict[str, tuple]) -> dict[str, str]:
    try:
        with open(path) as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise IOFailure(f"cannot read config file {path}: {exc}")
    values: dict[str, str] = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path} line {lineno}: expected 'key = value'")
        key, value = text.split("=", 1)
        key = key.strip().lower().replace("_", "-")
        if key not in spec:
            raise ConfigError(f"{path} line {lineno}: unknown option {key!r}")
        values[key] = value.strip()
    return values


def _effective_options(args: argparse.Namespace, spec: dict[str, tuple]) -> dict:
    config_values: dict[str, str] = {}
    if getattr(args, "config", None):
        config_values = _load_config_file(args.config, spec)
    options: dict = {}
    for key, (default, parse, _help) in spec.items():
        raw = getattr(args, key.replace("-", "_"))
        if raw is None and key in config_values:
            raw = config_values[key]
        options[key] = default if raw is None else parse(raw)
    return options


def _require(options: dict, *keys: str) -> None:
    missing = [key for key in keys if options.get(key) is None]
    if missing:
        raise ConfigError(
            "missing required option(s): " + ", ".join(f"--{k}" for k in missing)
        )


def _resolve_seed(options: dict) -> int:
    seed = options.get("seed")
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1)[0])
        print(f"seed = {seed} (auto-selected)")
    else:
        print(f"seed = {seed}")
    return int(seed)


def _check_input_path(path: str) -> None:
    if not os.path.isfile(path):
        raise IOFailure(f"input file {path} does not exist")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_augment(args: argparse.Namespace) -> int:
    options = _effective_options(args, AUGMENT_OPTS)
    _require(options, "input", "output", "targets")
    _check_input_path(options["input"])
    ensure_parent_dir(options["output"])
    seed = _resolve_seed(options)

    dataset = load_csv(options["input"], options["targets"])
    normalized, state = normalize_targets(
        dataset, rescale_features=options["normalize-features"]
    )
    config = SamplerConfig(
        sigma=options["sigma"],
        intrinsic_dim=options["dim"],
        k=options["k"],
        mode=options["mode"],
        selection=options["select"],
        ridge=options["ridge"],
        seed=seed,
        order=options["order"],
    )
    n_gen = options["n-gen"] if options["n-gen"] is not None else dataset.n
    rng = np.random.default_rng(seed)
    augmented = augment_dataset(
        normalized,
        config,
        n_gen,
        rng,
        method=options["method"],
        foma_lambda=options["lambda"],
        workers=options["workers"],
    )

    k1 = dataset.n_features
    generated = Dataset(
        features=augmented.samples[:, :k1],
        targets=augmented.samples[:, k1:],
        feature_names=list(dataset.feature_names),
        target_names=list(dataset.target_names),
    )
    if options["denormalize"]:
        generated = denormalize_targets(generated, state)
        originals = dataset
    else:
        originals = normalized

    anchor_col: list[int] = []
    mode_col: list[str] = []
    residual_col: list[float] = []
    if options["append"]:
        out_features = np.vstack([originals.features, generated.features])
        out_targets = np.vstack([originals.targets, generated.targets])
        anchor_col += list(range(dataset.n))
        mode_col += ["original"] * dataset.n
        residual_col += [0.0] * dataset.n
    else:
        out_features = generated.features
        out_targets = generated.targets
    anchor_col += [rec.anchor_index for rec in augmented.provenance]
    mode_col += [rec.mode for rec in augmented.provenance]
    residual_col += [rec.residual for rec in augmented.provenance]

    out = Dataset(
        features=out_features,
        targets=out_targets,
        feature_names=list(dataset.feature_names),
        target_names=list(dataset.target_names),
    )
    extras = []
    if options["provenance"]:
        extras = [
            ExtraColumn("anchor_index", anchor_col),
            ExtraColumn("mode", mode_col),
            ExtraColumn("chart_residual", residual_col),
        ]
    save_csv(options["output"], out, extras)

    stats = augmented.stats
    print(
        f"augment: wrote {out.n} rows to {options['output']} "
        f"({augmented.n} generated, mode={config.mode}, method={options['method']})"
    )
    print(
        f"  d_used = {stats.get('intrinsic_dim')}, sigma = {config.sigma}, "
        f"k = {config.k}, failures = {stats.get('failures', 0)}/"
        f"{stats.get('attempts', 0)} tasks"
    )
    return 0


def cmd_estimate_dim(args: argparse.Namespace) -> int:
    options = _effective_options(args, ESTIMATE_OPTS)
    _require(options, "input", "targets")
    _check_input_path(options["input"])
    if options["output"]:
        ensure_parent_dir(options["output"])
    dataset = load_csv(options["input"], options["targets"])
    normalized, _ = normalize_targets(
        dataset, rescale_features=options["normalize-features"]
    )
    estimate = twonn_estimate(normalized.joint())
    print(
        f"estimate-dim: d_real = {estimate.d_real:.6f}, "
        f"d_used = {estimate.d_used}, n_valid = {estimate.n_valid}/{dataset.n}"
    )
    if options["output"]:
        write_report(
            options["output"],
            metadata={
                "command": "estimate-dim",
                "input": options["input"],
                "targets": ",".join(options["targets"]),
            },
            columns=["d_real", "d_used", "n_valid", "n"],
            rows=[[estimate.d_real, estimate.d_used, estimate.n_valid, dataset.n]],
        )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    options = _effective_options(args, SYNTH_OPTS)
    _require(options, "kind", "output")
    ensure_parent_dir(options["output"])
    seed = _resolve_seed(options)
    metadata = {
        "command": "synth",
        "kind": options["kind"],
        "n": options["n"],
        "noise_sd": options["noise-sd"],
        "seed": seed,
    }
    if options["kind"] == "sine":
        dataset = gen_sine(options["n"], options["noise-sd"], seed)
    else:
        data = gen_hypersphere(
            options["n"],
            options["dim"],
            options["curvature"],
            options["ambient"],
            seed=seed,
            noise_sd=options["noise-sd"],
            normalize=not options["raw"],
        )
        dataset = data.dataset
        metadata.update(
            {
                "curvature": options["curvature"],
                "intrinsic_dim": options["dim"],
                "ambient_dim": options["ambient"],
                "radius": data.radius,
                "normalized": not options["raw"],
            }
        )
    save_csv(options["output"], dataset)
    sidecar = write_sidecar_metadata(options["output"], metadata)
    print(
        f"synth: wrote {dataset.n} rows to {options['output']} "
        f"(metadata in {sidecar})"
    )
    return 0


def cmd_bench_order(args: argparse.Namespace) -> int:
    options = _effective_options(args, BENCH_ORDER_OPTS)
    _require(options, "output")
    ensure_parent_dir(options["output"])
    seed = _resolve_seed(options)
    report = run_order_experiment(
        curve=options["curve"],
        scales=options["scales"],
        seed=seed,
        n_seeds=options["seeds"],
        n_anchors=options["anchors"],
    )
    metadata = {
        "command": "bench-order",
        "curve": report.curve,
        "seed": seed,
        "n_seeds": report.n_seeds,
        "n_anchors": options["anchors"],
    }
    for order in report.orders:
        if report.exact[order]:
            metadata[f"order{order}_slope"] = "exact"
        else:
            metadata[f"order{order}_slope"] = report.slopes[order]
            metadata[f"order{order}_slope_ci95"] = report.slope_ci[order]
    rows = [
        [h] + [report.mean_errors[o][i] for o in report.orders]
        for i, h in enumerate(report.scales)
    ]
    write_report(
        options["output"],
        metadata=metadata,
        columns=["scale"] + [f"order{o}_mean_error" for o in report.orders],
        rows=rows,
    )
    slope_text = ", ".join(
        f"order {o}: "
        + ("exact" if report.exact[o] else f"{report.slopes[o]:.3f}")
        for o in report.orders
    )
    print(
        f"bench-order[{report.curve}]: {slope_text} "
        f"({report.runtime:.1f}s, report in {options['output']})"
    )
    return 0


def cmd_bench_curvature(args: argparse.Namespace) -> int:
    options = _effective_options(args, BENCH_CURVATURE_OPTS)
    _require(options, "output")
    ensure_parent_dir(options["output"])
    seed = _resolve_seed(options)
    report = run_curvature_sweep(
        curvatures=options["curvatures"],
        seed=seed,
        n_seeds=options["seeds"],
        n_points=options["points"],
        k=options["k"],
        sigma=options["sigma"],
        intrinsic_d=options["dim"],
        ambient_d=options["ambient"],
        noise_sd=options["noise-sd"],
        foma_lambda=options["lambda"],
        n_anchors=options["anchors"],
    )
    metadata = {"command": "bench-curvature", "seed": seed}
    metadata.update(report.config)
    del metadata["curvatures"]
    rows = [
        [
            c,
            report.mean_distances["second"][i],
            report.mean_distances["first"][i],
            report.mean_distances["foma"][i],
            report.ratios[i],
        ]
        for i, c in enumerate(report.curvatures)
    ]
    write_report(
        options["output"],
        metadata=metadata,
        columns=[
            "curvature",
            "second_order_distance",
            "first_order_distance",
            "foma_distance",
            "ratio_first_over_second",
        ],
        rows=rows,
    )
    ratio_text = ", ".join(
        f"{c:g}: {r:.2f}" for c, r in zip(report.curvatures, report.ratios)
    )
    print(
        f"bench-curvature: first/second ratios {{{ratio_text}}} "
        f"({report.runtime:.1f}s, report in {options['output']})"
    )
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cems",
        description=(
            "Curvature-enhanced manifold sampling: data augmentation for "
            "regression via local second-order charts of the joint "
            "feature-target manifold."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    specs = [
        ("augment", AUGMENT_OPTS, cmd_augment, "generate new samples from a CSV"),
        (
            "estimate-dim",
            ESTIMATE_OPTS,
            cmd_estimate_dim,
            "TwoNN intrinsic-dimension estimate",
        ),
        ("synth", SYNTH_OPTS, cmd_synth, "write a synthetic benchmark dataset"),
        (
            "bench-order",
            BENCH_ORDER_OPTS,
            cmd_bench_order,
            "Taylor-order verification experiment",
        ),
        (
            "bench-curvature",
            BENCH_CURVATURE_OPTS,
            cmd_bench_curvature,
            "curvature-sweep experiment",
        ),
    ]
    for name, spec, handler, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        _add_options(p, spec)
        p.set_defaults(handler=handler)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except CemsError as exc:
        category = getattr(exc, "category", "data")
        print(f"error[{category}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(category, 1)


if __name__ == "__main__":
    sys.exit(main())
