"""Dense symmetric eigendecomposition via cyclic Jacobi rotations.

This is the package's own eigensolver, used wherever a full, trusted
spectrum of a small symmetric matrix is needed (rigidity analysis, the
simulator's logged indices, test oracles are checked against it). It runs
on the selected kernel backend.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .backend import kernels

__all__ = ["SpectralResult", "symmetric_eig", "SYMMETRY_RTOL"]


class SpectralResult(NamedTuple):
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

# max |M - M^T| allowed, relative to max |M|
SYMMETRY_RTOL = 1.0e-10

_OFF_RTOL = 1.0e-12
_MAX_SWEEPS = 100


def symmetric_eig(M: np.ndarray) -> SpectralResult:
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric M.

    Returns a SpectralResult with vectors[:, k] the unit eigenvector for
    values[k]. The input is validated for symmetry and symmetrized exactly
    before the rotation sweeps, so callers get deterministic output for
    inputs that are symmetric up to roundoff.

    Raises:
        ValueError: if M is not square or not numerically symmetric.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    n = M.shape[0]
    scale = float(np.max(np.abs(M))) if n > 0 else 0.0
    asym = float(np.max(np.abs(M - M.T))) if n > 0 else 0.0
    if asym > SYMMETRY_RTOL * max(scale, 1.0):
        raise ValueError(f"matrix is not symmetric: max |M - M^T| = {asym:g}")
    A = 0.5 * (M + M.T)
    A = np.ascontiguousarray(A)
    V = np.eye(n)
    fro = float(np.sqrt(np.sum(A * A)))
    tol_off = _OFF_RTOL * fro
    kernels.jacobi_sweeps(A, V, tol_off, _MAX_SWEEPS)
    vals = np.diag(A).copy()
    order = np.argsort(vals, kind="stable")
    return SpectralResult(vals[order], np.ascontiguousarray(V[:, order]))
