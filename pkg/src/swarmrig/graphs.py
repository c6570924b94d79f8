"""Undirected graphs, their matrix forms, and distance-weighted proximity graphs.

Nodes are indexed 0..n-1 internally; the on-disk framework format uses
1-based indices (see :mod:`swarmrig.files`). Every edge carries a fixed
(source, sink) orientation used only for incidence construction; the
Laplacian-type matrices built here are orientation-independent, so the
canonical convention is source < sink.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CollisionWarning",
    "Graph",
    "WeightedGraph",
    "ProximityParams",
    "incidence_matrix",
    "adjacency_matrix",
    "laplacian",
    "proximity_graph",
    "reweight",
    "neighbor_lists",
    "neighbor_csr",
]


class CollisionWarning(UserWarning):
    """Two nodes coincide; the edge between them has weight exp(0) = 1."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with explicitly oriented edges.

    Attributes:
        n: number of nodes.
        edges: (source, sink) pairs; no self-loops, no parallel edges.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"graph needs at least one node, got n={self.n}")
        object.__setattr__(self, "edges", tuple((int(i), int(j)) for i, j in self.edges))
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            key = (i, j) if i < j else (j, i)
            if key in seen:
                raise ValueError(f"duplicate edge {{{i},{j}}}")
            seen.add(key)

    @property
    def m(self) -> int:
        return len(self.edges)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build a graph with the canonical source < sink orientation."""
        canon = tuple((i, j) if i < j else (j, i) for i, j in edges)
        return cls(n, canon)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def flip_edge(self, k: int) -> "Graph":
        """Return a copy with the orientation of edge k reversed."""
        edges = list(self.edges)
        i, j = edges[k]
        edges[k] = (j, i)
        return Graph(self.n, tuple(edges))


@dataclass(frozen=True)
class WeightedGraph:
    """Graph plus one positive weight per edge (aligned with edge order)."""

    graph: Graph
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.shape != (self.graph.m,):
            raise ValueError(f"expected {self.graph.m} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w <= 0.0):
            raise ValueError("weights must be positive; drop zero-weight edges instead")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    @classmethod
    def unit(cls, graph: Graph) -> "WeightedGraph":
        return cls(graph, np.ones(graph.m))


@dataclass(frozen=True)
class ProximityParams:
    """Communication radius and the Gaussian weight profile tied to it.

    The Gaussian scale sigma is derived so the weight at distance kappa
    equals sigma_prime: sigma^2 = kappa^2 / (2 ln(1/sigma_prime)).
    """

    kappa: float = 10.0
    sigma_prime: float = 0.01

    def __post_init__(self):
        if not self.kappa > 0.0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not 0.0 < self.sigma_prime < 1.0:
            raise ValueError(f"sigma_prime must be in (0,1), got {self.sigma_prime}")

    @property
    def sigma_sq(self) -> float:
        return self.kappa**2 / (2.0 * math.log(1.0 / self.sigma_prime))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma_sq)

    def weight(self, dist_sq: float) -> float:
        """Edge weight for a squared inter-node distance within range."""
        return math.exp(-dist_sq / (2.0 * self.sigma_sq))


def incidence_matrix(g: Graph) -> np.ndarray:
    """m-by-n incidence matrix: row k has -1 at the source, +1 at the sink."""
    H = np.zeros((g.m, g.n))
    for k, (i, j) in enumerate(g.edges):
        H[k, i] = -1.0
        H[k, j] = 1.0
    return H


def adjacency_matrix(wg: WeightedGraph) -> np.ndarray:
    """Symmetric weighted adjacency matrix."""
    A = np.zeros((wg.n, wg.n))
    for k, (i, j) in enumerate(wg.graph.edges):
        A[i, j] = wg.weights[k]
        A[j, i] = wg.weights[k]
    return A


def laplacian(wg: WeightedGraph) -> np.ndarray:
    """Weighted graph Laplacian H^T W H (symmetric PSD, zero row sums)."""
    L = np.zeros((wg.n, wg.n))
    for k, (i, j) in enumerate(wg.graph.edges):
        w = wg.weights[k]
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    return L


def proximity_graph(positions: np.ndarray, params: ProximityParams) -> WeightedGraph:
    """Connect every node pair within the communication radius.

    The edge weight decays as exp(-dist^2 / (2 sigma^2)); at the radius it
    equals sigma_prime, beyond it the edge is absent. Coincident nodes get
    a weight-1 edge and a CollisionWarning (collision is a modelling
    violation, not an input error).

    Args:
        positions: (n, d) array, d in {2, 3}, finite coordinates.
        params: radius and weight profile.
    """
    p = np.asarray(positions, dtype=float)
    if p.ndim != 2 or p.shape[1] not in (2, 3):
        raise ValueError(f"positions must be (n, 2) or (n, 3), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("positions must be finite")
    n = p.shape[0]
    # squared distances avoid sqrt rounding at the radius boundary
    kappa_sq = params.kappa * params.kappa
    edges = []
    weights = []
    collisions = []
    for i in range(n):
        for j in range(i + 1, n):
            diff = p[j] - p[i]
            dist_sq = float(diff @ diff)
            if dist_sq <= kappa_sq:
                edges.append((i, j))
                weights.append(params.weight(dist_sq))
                if dist_sq == 0.0:
                    collisions.append((i, j))
    if collisions:
        warnings.warn(
            f"coincident node pairs {collisions}: rigidity is lost on collision",
            CollisionWarning,
            stacklevel=2,
        )
    return WeightedGraph(Graph(n, tuple(edges)), np.asarray(weights))


def reweight(g: Graph, positions: np.ndarray, params: ProximityParams) -> WeightedGraph:
    """Gaussian weights for a fixed edge set, without range filtering.

    Used where the topology must stay put while positions move, e.g.
    finite-difference checks of weight-dependent gradients.
    """
    p = np.asarray(positions, dtype=float)
    weights = np.empty(g.m)
    for k, (i, j) in enumerate(g.edges):
        diff = p[i] - p[j]
        weights[k] = params.weight(float(diff @ diff))
    return WeightedGraph(g, weights)


def neighbor_lists(g: Graph) -> list[np.ndarray]:
    """Sorted neighbor ids per node."""
    nbrs: list[list[int]] = [[] for _ in range(g.n)]
    for i, j in g.edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    return [np.array(sorted(v), dtype=np.int32) for v in nbrs]


def neighbor_csr(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """CSR layout (ptr, idx) of the sorted neighbor lists, for the kernels."""
    lists = neighbor_lists(g)
    ptr = np.zeros(g.n + 1, dtype=np.int32)
    for i, v in enumerate(lists):
        ptr[i + 1] = ptr[i] + len(v)
    idx = np.concatenate(lists) if g.m > 0 else np.zeros(0, dtype=np.int32)
    return ptr, idx.astype(np.int32)
