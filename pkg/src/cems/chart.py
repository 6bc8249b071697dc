"""Local quadratic charts: design matrix, least-squares fit, evaluation.

Around a chart origin the normal coordinates are modeled per output as

    g(u) = g0 + (u - u0)^T grad + 1/2 (u - u0)^T H (u - u0)

with the gradient and Hessian recovered from a polynomial least-squares fit
on the neighborhood's tangent/normal coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NumericError, ParameterError

# Scale of the automatic ridge applied to underdetermined fits:
# ridge = AUTO_RIDGE_SCALE * trace(Psi^T Psi) / n_columns.
AUTO_RIDGE_SCALE = 1e-6


def quadratic_layout(d: int) -> list[tuple]:
    """Column descriptors of the quadratic design matrix for ``d`` inputs.

    Order: d linear terms, d squared terms, then cross terms (i, j) with
    i < j in lexicographic order.
    """
    if d < 1:
        raise ParameterError(f"need d >= 1, got {d}")
    layout: list[tuple] = [("lin", i) for i in range(d)]
    layout += [("sq", i) for i in range(d)]
    layout += [("cross", i, j) for i in range(d) for j in range(i + 1, d)]
    return layout


def n_quadratic_columns(d: int) -> int:
    """Number of design columns: d linear + d(d+1)/2 quadratic."""
    return d + d * (d + 1) // 2


@dataclass
class DesignMatrix:
    """Polynomial design matrix with its column layout."""

    psi: np.ndarray  # (k, m)
    layout: list[tuple]
    d: int


def assemble_design(U: np.ndarray) -> DesignMatrix:
    """Build the quadratic design matrix from tangent coordinates U (k, d)."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2:
        raise ParameterError("tangent coordinates must form a 2-D array")
    k, d = U.shape
    layout = quadratic_layout(d)
    psi = np.empty((k, len(layout)), dtype=np.float64)
    psi[:, :d] = U
    psi[:, d : 2 * d] = U**2
    col = 2 * d
    for i in range(d):
        for j in range(i + 1, d):
            psi[:, col] = U[:, i] * U[:, j]
            col += 1
    return DesignMatrix(psi=psi, layout=layout, d=d)


def resolve_ridge(ridge: float | str, psi: np.ndarray) -> float:
    """Turn a ridge specification into a number.

    ``"auto"`` keeps 0 for overdetermined systems and switches to a small
    trace-scaled ridge when there are fewer rows than columns.
    """
    if isinstance(ridge, str):
        if ridge != "auto":
            raise ParameterError(f"ridge must be a float >= 0 or 'auto', got {ridge!r}")
        rows, cols = psi.shape
        if rows >= cols:
            return 0.0
        return AUTO_RIDGE_SCALE * float(np.trace(psi.T @ psi)) / cols
    ridge = float(ridge)
    if ridge < 0:
        raise ParameterError(f"ridge must be >= 0, got {ridge}")
    return ridge


def solve_chart(
    psi: np.ndarray, G: np.ndarray, ridge: float = 0.0
) -> tuple[np.ndarray, float]:
    """Solve psi @ X = G for the coefficient matrix X.

    ridge = 0 returns the minimum-norm least-squares solution (SVD
    pseudoinverse); ridge > 0 solves the regularized normal equations with a
    Cholesky factorization.  Returns (X, Frobenius residual norm).
    """
    psi = np.asarray(psi, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    if G.ndim == 1:
        G = G.reshape(-1, 1)
    if psi.ndim != 2 or psi.shape[0] != G.shape[0]:
        raise ParameterError(
            f"design matrix rows {psi.shape} do not match targets {G.shape}"
        )
    if not np.all(np.isfinite(psi)) or not np.all(np.isfinite(G)):
        raise NumericError("non-finite values in the chart system")
    if ridge < 0:
        raise ParameterError(f"ridge must be >= 0, got {ridge}")
    if ridge == 0.0:
        X, *_ = np.linalg.lstsq(psi, G, rcond=None)
    else:
        m = psi.shape[1]
        A = psi.T @ psi + ridge * np.eye(m)
        try:
            factor = cho_factor(A, lower=True)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
            raise NumericError(f"ridge system is not positive definite: {exc}")
        X = cho_solve(factor, psi.T @ G)
    if not np.all(np.isfinite(X)):
        raise NumericError("chart solve produced non-finite coefficients")
    residual = float(np.linalg.norm(psi @ X - G))
    return X, residual


@dataclass
class QuadraticChart:
    """Fitted second-order chart for q = r - d normal outputs."""

    gradient: np.ndarray  # (d, q)
    hessians: np.ndarray  # (q, d, d), each exactly symmetric
    base_value: np.ndarray  # (q,) normal coordinates at the expansion point
    base_point: np.ndarray  # (d,) tangent coordinates of the expansion point
    ridge_used: float
    residual_norm: float

    @property
    def d(self) -> int:
        return self.gradient.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.gradient.shape[1]


def extract_chart(
    X: np.ndarray,
    layout: list[tuple],
    base_value: np.ndarray,
    base_point: np.ndarray,
    ridge_used: float = 0.0,
    residual_norm: float = 0.0,
) -> QuadraticChart:
    """Reshape solved coefficients into gradient and Hessian form.

    Squared-term coefficients are doubled (the model carries 1/2 H_ii u_i^2)
    and cross-term coefficients land symmetrically on H_ij and H_ji, so each
    Hessian is symmetric by construction.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[0] != len(layout):
        raise ParameterError(
            f"{X.shape[0]} coefficient rows for a {len(layout)}-column layout"
        )
    d = sum(1 for item in layout if item[0] == "lin")
    q = X.shape[1]
    gradient = X[:d].copy()
    hessians = np.zeros((q, d, d), dtype=np.float64)
    for row, item in enumerate(layout):
        if item[0] == "sq":
            i = item[1]
            hessians[:, i, i] = 2.0 * X[row]
        elif item[0] == "cross":
            i, j = item[1], item[2]
            hessians[:, i, j] = X[row]
            hessians[:, j, i] = X[row]
    base_value = np.asarray(base_value, dtype=np.float64).ravel()
    base_point = np.asarray(base_point, dtype=np.float64).ravel()
    if base_value.size != q:
        raise ParameterError(
            f"base value has {base_value.size} entries for {q} outputs"
        )
    if base_point.size != d:
        raise ParameterError(
            f"base point has {base_point.size} entries for d={d}"
        )
    return QuadraticChart(
        gradient=gradient,
        hessians=hessians,
        base_value=base_value,
        base_point=base_point,
        ridge_used=float(ridge_used),
        residual_norm=float(residual_norm),
    )


def evaluate_chart(chart: QuadraticChart, eta: np.ndarray) -> np.ndarray:
    """Evaluate all normal outputs of the chart at tangent coordinates eta."""
    eta = np.asarray(eta, dtype=np.float64).ravel()
    if eta.size != chart.d:
        raise ParameterError(
            f"evaluation point has {eta.size} coordinates, chart expects {chart.d}"
        )
    delta = eta - chart.base_point
    linear = delta @ chart.gradient
    quad = 0.5 * np.einsum("i,aij,j->a", delta, chart.hessians, delta)
    return chart.base_value + linear + quad
