"""Rigidity analysis of weighted frameworks.

A framework is a weighted graph embedded at node positions in d = 2 or 3.
Its rigidity matrix stacks one row per edge, the gradient of half the
squared edge length; the weighted rigidity Laplacian is the PSD form
R^T W R whose spectrum measures how far the formation is from losing
rigidity. The d(d+1)/2 trivial motions (translations and rotations) are
always in the kernel; the first eigenvalue above them is the rigidity
index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graphs import Graph, ProximityParams, WeightedGraph, incidence_matrix, laplacian, proximity_graph
from .spectral import symmetric_eig

__all__ = [
    "Framework",
    "RigidityModel",
    "RigidityPair",
    "trivial_dim",
    "check_positions",
    "rigidity_function",
    "rigidity_matrix",
    "rigidity_laplacian",
    "rigidity_model",
    "trivial_motion_basis",
    "matrix_rank",
    "rigidity_rank",
    "is_infinitesimally_rigid",
    "rigidity_spectrum",
    "rigidity_pair",
    "rigidity_index",
    "connectivity_value",
    "min_distance",
    "RANK_RTOL",
    "DEGENERATE_GAP",
]

# singular values below this fraction of the largest count as zero
RANK_RTOL = 1.0e-9
# |index - next eigenvalue| below this marks the eigenvector as non-unique
DEGENERATE_GAP = 1.0e-9


def trivial_dim(d: int) -> int:
    """Dimension of the trivial-motion space: 3 in the plane, 6 in space."""
    if d not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {d}")
    return d * (d + 1) // 2


def check_positions(positions: np.ndarray, n: int | None = None) -> np.ndarray:
    """Validate and return an (n, d) float position array, d in {2, 3}."""
    p = np.asarray(positions, dtype=float)
    if p.ndim != 2 or p.shape[1] not in (2, 3):
        raise ValueError(f"positions must be (n, 2) or (n, 3), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("positions must be finite")
    if n is not None and p.shape[0] != n:
        raise ValueError(f"expected {n} positions, got {p.shape[0]}")
    return p


@dataclass(frozen=True)
class Framework:
    """A weighted graph embedded at positions: the (graph, p) pair.

    Attributes:
        wg: weighted graph over n nodes.
        positions: (n, d) array, d in {2, 3}.
    """

    wg: WeightedGraph
    positions: np.ndarray

    def __post_init__(self):
        p = check_positions(self.positions, self.wg.n)
        object.__setattr__(self, "positions", p)

    @property
    def n(self) -> int:
        return self.wg.n

    @property
    def m(self) -> int:
        return self.wg.m

    @property
    def dim(self) -> int:
        return int(self.positions.shape[1])

    @property
    def graph(self) -> Graph:
        return self.wg.graph

    @property
    def weights(self) -> np.ndarray:
        return self.wg.weights

    @classmethod
    def from_proximity(cls, positions: np.ndarray, params: ProximityParams) -> "Framework":
        """Build the framework whose edges follow the proximity rule."""
        p = check_positions(positions)
        return cls(proximity_graph(p, params), p)

    @classmethod
    def with_unit_weights(cls, g: Graph, positions: np.ndarray) -> "Framework":
        return cls(WeightedGraph.unit(g), positions)


@dataclass(frozen=True)
class RigidityModel:
    """All matrix forms of one framework, assembled consistently.

    R equals Z^T Hbar exactly; E is assembled block-wise and matches
    R^T W R up to roundoff; L is the weighted graph Laplacian.
    """

    R: np.ndarray
    E: np.ndarray
    Z: np.ndarray
    Hbar: np.ndarray
    L: np.ndarray


class RigidityPair(NamedTuple):
    """Rigidity index with its unit eigenvector.

    degenerate is set when the next eigenvalue is within DEGENERATE_GAP,
    in which case the eigenvector is an arbitrary member of the eigenspace
    and gradients built from it are not uniquely defined.
    """

    value: float
    vector: np.ndarray
    degenerate: bool


def rigidity_function(f: Framework) -> np.ndarray:
    """Half squared length of every edge, in edge order."""
    p = f.positions
    out = np.empty(f.m)
    for k, (i, j) in enumerate(f.graph.edges):
        diff = p[i] - p[j]
        out[k] = 0.5 * float(diff @ diff)
    return out


def rigidity_matrix(f: Framework) -> np.ndarray:
    """Jacobian of the edge-length function: (m, d*n), one row per edge.

    Row k for edge (i, j) carries (p_i - p_j)^T in node i's coordinate
    block and its negation in node j's block.
    """
    p = f.positions
    d = f.dim
    R = np.zeros((f.m, d * f.n))
    for k, (i, j) in enumerate(f.graph.edges):
        z = p[i] - p[j]
        R[k, d * i : d * i + d] = z
        R[k, d * j : d * j + d] = -z
    return R


def rigidity_laplacian(f: Framework) -> np.ndarray:
    """Weighted rigidity Laplacian R^T W R, assembled block-wise in O(m).

    Symmetric PSD (d*n, d*n); the (i, j) off-diagonal block of an edge is
    -w z z^T with z the edge vector, diagonal blocks sum the neighbors'.
    """
    p = f.positions
    d = f.dim
    E = np.zeros((d * f.n, d * f.n))
    for k, (i, j) in enumerate(f.graph.edges):
        z = p[i] - p[j]
        B = f.weights[k] * np.outer(z, z)
        si, sj = d * i, d * j
        E[si : si + d, si : si + d] += B
        E[sj : sj + d, sj : sj + d] += B
        E[si : si + d, sj : sj + d] -= B
        E[sj : sj + d, si : si + d] -= B
    return E


def rigidity_model(f: Framework) -> RigidityModel:
    """Assemble every matrix form at once; see RigidityModel.

    The factored route (Z, Hbar, R = Z^T Hbar) is kept alongside the
    block-assembled E so the two constructions can be cross-checked.
    """
    p = f.positions
    d = f.dim
    H = incidence_matrix(f.graph)
    Hbar = np.kron(H, np.eye(d))
    # block-diagonal matrix of edge vectors z_k = p_j - p_i (sink - source)
    Z = np.zeros((d * f.m, f.m))
    for k, (i, j) in enumerate(f.graph.edges):
        Z[d * k : d * k + d, k] = p[j] - p[i]
    R = Z.T @ Hbar
    return RigidityModel(R=R, E=rigidity_laplacian(f), Z=Z, Hbar=Hbar, L=laplacian(f.wg))


def trivial_motion_basis(positions: np.ndarray) -> np.ndarray:
    """Basis of the always-present kernel motions, one column per motion.

    Columns are not normalized: d uniform translations, then the elementary
    rotations (one in the plane, three in space) evaluated at the given
    positions. Shape (d*n, d(d+1)/2).
    """
    p = check_positions(positions)
    n, d = p.shape
    nt = trivial_dim(d)
    V = np.zeros((d * n, nt))
    for a in range(d):
        V[a::d, a] = 1.0
    x, y = p[:, 0], p[:, 1]
    if d == 2:
        V[0::2, 2] = y
        V[1::2, 2] = -x
    else:
        z = p[:, 2]
        V[0::3, 3] = y
        V[1::3, 3] = -x
        V[0::3, 4] = z
        V[2::3, 4] = -x
        V[1::3, 5] = z
        V[2::3, 5] = -y
    return V


def matrix_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Rank as the number of singular values above rtol times the largest."""
    M = np.asarray(M, dtype=float)
    if min(M.shape) == 0:
        return 0
    svals = np.linalg.svd(M, compute_uv=False)
    if svals[0] == 0.0:
        return 0
    return int(np.sum(svals > rtol * svals[0]))


def rigidity_rank(f: Framework) -> int:
    """Rank of the rigidity matrix."""
    return matrix_rank(rigidity_matrix(f))


def is_infinitesimally_rigid(f: Framework) -> bool:
    """True when the rigidity matrix has full generic rank d*n - d(d+1)/2."""
    return rigidity_rank(f) == f.dim * f.n - trivial_dim(f.dim)


def rigidity_spectrum(f: Framework) -> np.ndarray:
    """All eigenvalues of the rigidity Laplacian, ascending."""
    return symmetric_eig(rigidity_laplacian(f)).values


def rigidity_pair(f: Framework) -> RigidityPair:
    """Rigidity index and its unit eigenvector.

    The index is the (d(d+1)/2 + 1)-th smallest eigenvalue of the rigidity
    Laplacian: the first one not claimed by a trivial motion.
    """
    vals, vecs = symmetric_eig(rigidity_laplacian(f))
    k = trivial_dim(f.dim)
    gap = float(vals[k + 1] - vals[k]) if k + 1 < vals.size else np.inf
    return RigidityPair(float(vals[k]), vecs[:, k].copy(), gap < DEGENERATE_GAP)


def rigidity_index(f: Framework) -> float:
    """Rigidity index alone; see rigidity_pair."""
    return float(rigidity_spectrum(f)[trivial_dim(f.dim)])


def connectivity_value(wg: WeightedGraph) -> float:
    """Second-smallest eigenvalue of the weighted graph Laplacian."""
    if wg.n < 2:
        return 0.0
    return float(symmetric_eig(laplacian(wg)).values[1])


def min_distance(positions: np.ndarray) -> float:
    """Smallest pairwise distance over all node pairs (inf for n < 2)."""
    p = check_positions(positions)
    n = p.shape[0]
    best = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            diff = p[i] - p[j]
            dist = float(np.sqrt(diff @ diff))
            if dist < best:
                best = dist
    return best
