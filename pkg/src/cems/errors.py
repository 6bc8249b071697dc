"""Exception taxonomy shared across the library and the CLI.

Every exception carries a ``category`` used by the command-line tool to map
failures onto exit codes and one-line diagnostics.  Categories:

- ``config``    : bad flag/config-file values, inconsistent options
- ``data``      : malformed input tables, schema mismatches, failed estimates
- ``geometry``  : degenerate neighborhoods, rank deficiency, numeric failures
- ``io``        : unreadable/unwritable paths
"""

from __future__ import annotations


class CemsError(Exception):
    """Base class for all library errors."""

    category = "data"


class ConfigError(CemsError):
    """Invalid run configuration (flags or config file)."""

    category = "config"


class ParameterError(ConfigError):
    """An operation was called with out-of-range parameters."""

    category = "config"


class SchemaError(CemsError):
    """Column names / shapes do not match what the operation expects."""

    category = "data"


class DataError(CemsError):
    """Input values are unusable (non-numeric, non-finite, too few rows)."""

    category = "data"


class EstimationError(CemsError):
    """An estimator could not produce a usable result."""

    category = "data"


class GeometryError(CemsError):
    """A neighborhood is too degenerate to support the requested fit."""

    category = "geometry"


class NumericError(GeometryError):
    """A numerical routine received or produced non-finite values."""

    category = "geometry"


class IOFailure(CemsError):
    """Reading or writing a file failed."""

    category = "io"
