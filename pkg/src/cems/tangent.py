"""Local orthonormal frames from neighborhood SVD.

Centering a neighborhood and taking the reduced SVD of the stacked deltas
splits the ambient space into a tangent block (top ``d`` left-singular
vectors) and a normal block (the remaining retained vectors).  Coordinates in
this frame are what the quadratic chart is fitted on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ParameterError
from .neighbors import Neighborhood


@dataclass
class CenteredNeighborhood:
    """Neighborhood deltas relative to a fixed origin."""

    origin: np.ndarray  # (D,)
    deltas: np.ndarray  # (k, D) rows are members minus origin

    @property
    def k(self) -> int:
        return self.deltas.shape[0]

    @property
    def dim(self) -> int:
        return self.deltas.shape[1]


@dataclass
class OrthonormalBasis:
    """Tangent/normal split of the ambient space around one origin."""

    tangent: np.ndarray  # (D, d)
    normal: np.ndarray  # (D, r - d), r = min(k, D) retained columns
    singular_values: np.ndarray  # (r,) non-increasing

    @property
    def d(self) -> int:
        return self.tangent.shape[1]

    @property
    def rank(self) -> int:
        """Number of retained columns r."""
        return self.tangent.shape[1] + self.normal.shape[1]

    @property
    def full(self) -> np.ndarray:
        """(D, r) matrix [tangent | normal]."""
        return np.hstack([self.tangent, self.normal])


@dataclass
class ProjectedNeighborhood:
    """Neighborhood deltas expressed in basis coordinates."""

    U: np.ndarray  # (k, d) tangent coordinates
    G: np.ndarray  # (k, r - d) normal coordinates


def center(neighborhood: Neighborhood, mode: str) -> CenteredNeighborhood:
    """Subtract the chart origin from every member.

    ``mode="point"`` centers at the anchor sample itself; ``mode="batch"``
    centers at the neighborhood mean.
    """
    if neighborhood.k < 2:
        raise ParameterError("centering needs at least 2 members")
    if mode == "point":
        origin = neighborhood.anchor.astype(np.float64, copy=True)
    elif mode == "batch":
        origin = neighborhood.members.mean(axis=0)
    else:
        raise ParameterError(f"unknown centering mode {mode!r}")
    deltas = neighborhood.members - origin
    return CenteredNeighborhood(origin=origin, deltas=deltas)


def fit_basis(centered: CenteredNeighborhood, d: int) -> OrthonormalBasis:
    """Reduced SVD of the delta matrix, split into tangent and normal blocks.

    Deltas are stacked as columns of a (D, k) matrix; the top ``d`` left-
    singular vectors form the tangent block and the remaining retained
    vectors the normal block.  Each column's sign is fixed so its largest-
    magnitude entry is positive (ties resolved toward the lowest row index),
    making the basis deterministic for a given input.
    """
    k, D = centered.deltas.shape
    r = min(k, D)
    if not 1 <= d < r:
        raise ParameterError(
            f"intrinsic dimension d={d} must satisfy 1 <= d < min(k, D)={r}"
        )
    U, s, _ = np.linalg.svd(centered.deltas.T, full_matrices=False)
    if s[0] == 0.0:
        raise GeometryError(
            "degenerate neighborhood: all members coincide with the origin"
        )
    tol = max(k, D) * np.finfo(np.float64).eps * s[0]
    if int(np.sum(s > tol)) < d:
        raise GeometryError(
            f"degenerate neighborhood: delta rank {int(np.sum(s > tol))} "
            f"is below the requested tangent dimension {d}"
        )
    # Sign convention: flip each column so its largest-|.| entry is positive.
    lead = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[lead, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    U = U * signs
    return OrthonormalBasis(
        tangent=U[:, :d].copy(),
        normal=U[:, d:r].copy(),
        singular_values=s[:r].copy(),
    )


def project(
    basis: OrthonormalBasis, centered: CenteredNeighborhood
) -> ProjectedNeighborhood:
    """Express the centered deltas in tangent (U) and normal (G) coordinates."""
    if centered.dim != basis.tangent.shape[0]:
        raise ParameterError(
            f"basis lives in dimension {basis.tangent.shape[0]}, "
            f"deltas in {centered.dim}"
        )
    return ProjectedNeighborhood(
        U=centered.deltas @ basis.tangent,
        G=centered.deltas @ basis.normal,
    )


def unproject(
    basis: OrthonormalBasis,
    u: np.ndarray,
    g: np.ndarray,
    origin: np.ndarray,
) -> np.ndarray:
    """Map basis coordinates (u, g) back to an ambient point."""
    u = np.asarray(u, dtype=np.float64).ravel()
    g = np.asarray(g, dtype=np.float64).ravel()
    if u.size != basis.tangent.shape[1] or g.size != basis.normal.shape[1]:
        raise ParameterError(
            f"coordinate sizes ({u.size}, {g.size}) do not match basis blocks "
            f"({basis.tangent.shape[1]}, {basis.normal.shape[1]})"
        )
    return basis.tangent @ u + basis.normal @ g + np.asarray(origin, dtype=np.float64)
