"""CSV ingestion/export and tab-separated report files.

Data files are plain CSV: one header row of column names followed by numeric
rows.  Floating-point output uses 17 significant digits so written values
round-trip exactly.  Report files are tab-separated with '#'-prefixed
metadata lines (config echo) ahead of the column header.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DataError, IOFailure, SchemaError

FLOAT_FORMAT = "%.17g"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return str(value)


def load_csv(path: str, targets: list[str]) -> Dataset:
    """Read a CSV file and split its columns into features and targets.

    ``targets`` names the target columns (at least one); every remaining
    column becomes a feature.  Parse failures report the offending row and
    column.
    """
    if not targets:
        raise SchemaError("at least one target column must be named")
    try:
        handle = open(path, "r", newline="")
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}")
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty")
        header = [name.strip() for name in header]
        missing = [name for name in targets if name not in header]
        if missing:
            raise SchemaError(
                f"target column(s) {missing} not found in header {header}"
            )
        dupes = {name for name in header if header.count(name) > 1}
        if dupes:
            raise SchemaError(f"duplicate column name(s) {sorted(dupes)} in {path}")
        rows: list[list[float]] = []
        for r, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # skip blank lines
            if len(row) != len(header):
                raise DataError(
                    f"{path} row {r}: expected {len(header)} cells, got {len(row)}"
                )
            parsed = []
            for c, cell in enumerate(row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path} row {r}, column {header[c]!r}: "
                        f"non-numeric value {cell.strip()!r}"
                    )
            rows.append(parsed)
    if len(rows) < 2:
        raise DataError(f"{path} has {len(rows)} data rows; need at least 2")
    matrix = np.asarray(rows, dtype=np.float64)
    target_idx = [header.index(name) for name in targets]
    feature_idx = [i for i in range(len(header)) if i not in target_idx]
    if not feature_idx:
        raise SchemaError("no feature columns remain after removing targets")
    return Dataset(
        features=matrix[:, feature_idx],
        targets=matrix[:, target_idx],
        feature_names=[header[i] for i in feature_idx],
        target_names=[header[i] for i in target_idx],
    )


@dataclass
class ExtraColumn:
    """An additional (e.g. provenance) column appended after the targets."""

    name: str
    values: list


def save_csv(
    path: str,
    dataset: Dataset,
    extra_columns: list[ExtraColumn] | None = None,
) -> None:
    """Write a dataset as CSV: feature columns, target columns, extras."""
    extra_columns = extra_columns or []
    for col in extra_columns:
        if len(col.values) != dataset.n:
            raise SchemaError(
                f"extra column {col.name!r} has {len(col.values)} values "
                f"for {dataset.n} rows"
            )
    header = (
        list(dataset.feature_names)
        + list(dataset.target_names)
        + [col.name for col in extra_columns]
    )
    try:
        handle = open(path, "w", newline="")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}")
    with handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i in range(dataset.n):
            row = [_fmt(v) for v in dataset.features[i]]
            row += [_fmt(v) for v in dataset.targets[i]]
            row += [_fmt(col.values[i]) for col in extra_columns]
            writer.writerow(row)


def write_report(
    path: str,
    metadata: dict,
    columns: list[str],
    rows: list[list],
) -> None:
    """Write a tab-separated report with '#'-prefixed metadata lines."""
    try:
        handle = open(path, "w", newline="")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}")
    with handle:
        for key in metadata:
            handle.write(f"# {key} = {_fmt(metadata[key])}\n")
        handle.write("\t".join(columns) + "\n")
        for row in rows:
            if len(row) != len(columns):
                raise SchemaError(
                    f"report row has {len(row)} cells for {len(columns)} columns"
                )
            handle.write("\t".join(_fmt(v) for v in row) + "\n")


def write_sidecar_metadata(path: str, metadata: dict) -> str:
    """Write key=value metadata next to a data file; returns the sidecar path."""
    sidecar = path + ".meta"
    try:
        with open(sidecar, "w") as handle:
            for key in metadata:
                handle.write(f"{key} = {_fmt(metadata[key])}\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {sidecar}: {exc}")
    return sidecar


def ensure_parent_dir(path: str) -> None:
    """Fail early (as an io error) if the output directory is missing."""
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise IOFailure(f"output directory {parent} does not exist")
