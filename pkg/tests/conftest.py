"""Shared fixtures: framework factories and independent numeric oracles.

Oracle computations here deliberately avoid the package's own linear
algebra (they use numpy.linalg directly) so tests compare two separate
routes to the same numbers.
"""

from __future__ import annotations

import numpy as np
import pytest

from swarmrig.graphs import Graph, ProximityParams, WeightedGraph, proximity_graph
from swarmrig.rigidity import Framework


# ---------------------------------------------------------------- oracles


def oracle_eigh(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """LAPACK eigendecomposition, ascending."""
    vals, vecs = np.linalg.eigh(np.asarray(M, dtype=float))
    return vals, vecs


def oracle_laplacian(wg: WeightedGraph) -> np.ndarray:
    """Graph Laplacian assembled independently (incidence product)."""
    n, m = wg.n, wg.m
    H = np.zeros((m, n))
    for k, (i, j) in enumerate(wg.graph.edges):
        H[k, i] = -1.0
        H[k, j] = 1.0
    return H.T @ np.diag(wg.weights) @ H


def oracle_rigidity_laplacian(f: Framework) -> np.ndarray:
    """Rigidity Laplacian assembled independently as R^T W R."""
    p = f.positions
    n, d = p.shape
    R = np.zeros((f.m, d * n))
    for k, (i, j) in enumerate(f.graph.edges):
        z = p[i] - p[j]
        R[k, d * i : d * i + d] = z
        R[k, d * j : d * j + d] = -z
    return R.T @ np.diag(f.weights) @ R


def oracle_rigidity_index(f: Framework) -> float:
    """(d(d+1)/2 + 1)-th smallest eigenvalue of the rigidity Laplacian."""
    d = f.dim
    vals = np.linalg.eigvalsh(oracle_rigidity_laplacian(f))
    return float(vals[d * (d + 1) // 2])


def oracle_rigidity_pair(f: Framework) -> tuple[float, np.ndarray]:
    d = f.dim
    vals, vecs = np.linalg.eigh(oracle_rigidity_laplacian(f))
    k = d * (d + 1) // 2
    return float(vals[k]), vecs[:, k].copy()


def oracle_rank(g: Graph, p: np.ndarray) -> int:
    p = np.asarray(p, dtype=float)
    n, d = p.shape
    R = np.zeros((g.m, d * n))
    for k, (i, j) in enumerate(g.edges):
        z = p[i] - p[j]
        R[k, d * i : d * i + d] = z
        R[k, d * j : d * j + d] = -z
    return int(np.linalg.matrix_rank(R))


# ---------------------------------------------------------------- factories


def square_framework(side: float = 5.0, diagonal: bool = True):
    """Unit-square-shaped 4-node framework; rigid iff a diagonal is added.

    Returns (graph, positions); weights are left to the caller.
    """
    p = side * np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
    if diagonal:
        edges.append((0, 2))
    return Graph.from_edges(4, edges), p


def random_positions(rng: np.random.Generator, n: int, d: int, spread: float = 3.5) -> np.ndarray:
    """Cluster of n points, comfortably inside a kappa=10 sensing radius."""
    return spread * rng.standard_normal((n, d))


def random_rigid_framework(
    rng: np.random.Generator,
    n: int,
    d: int = 2,
    params: ProximityParams | None = None,
    spread: float = 3.5,
    max_tries: int = 50,
) -> Framework:
    """Proximity framework that is infinitesimally rigid (oracle-checked).

    Positions are resampled until the proximity graph at the given params
    has full generic rigidity-matrix rank.
    """
    params = params or ProximityParams()
    nt = d * (d + 1) // 2
    for _ in range(max_tries):
        p = random_positions(rng, n, d, spread)
        wg = proximity_graph(p, params)
        if oracle_rank(wg.graph, p) == d * n - nt:
            return Framework(wg, p)
    raise RuntimeError(f"no rigid framework found in {max_tries} tries (n={n}, d={d})")


def healthy_framework(
    rng: np.random.Generator,
    n: int,
    d: int = 2,
    lam_floor: float = 1.5,
) -> Framework:
    """Rigid draw whose rigidity eigenvalue is not borderline tiny.

    Rank-checked rigidity alone admits instances with a near-zero rigidity
    eigenvalue; those need unbounded solver budgets, which accuracy-focused
    tests should not pay for.
    """
    for _ in range(300):
        f = random_rigid_framework(rng, n, d)
        if oracle_rigidity_index(f) >= lam_floor:
            return f
    raise RuntimeError(f"no healthy instance found (n={n}, d={d})")


def minimally_rigid_framework(
    rng: np.random.Generator,
    n: int,
    d: int = 2,
    spread: float = 3.5,
    max_tries: int = 50,
) -> tuple[Graph, np.ndarray]:
    """Rigid framework with no redundant edges: m = d*n - d(d+1)/2.

    Built by seeding a complete graph on d+1 nodes and attaching each
    further node to d existing ones, then oracle-checking the rank at
    random positions.
    """
    base = d + 1
    if n < base:
        raise ValueError(f"need at least {base} nodes in {d}-D, got {n}")
    nt = d * (d + 1) // 2
    for _ in range(max_tries):
        edges = [(i, j) for i in range(base) for j in range(i + 1, base)]
        for v in range(base, n):
            anchors = rng.choice(v, size=d, replace=False)
            edges.extend((int(a), v) for a in anchors)
        g = Graph.from_edges(n, edges)
        assert g.m == d * n - nt
        p = random_positions(rng, n, d, spread)
        if oracle_rank(g, p) == d * n - nt:
            return g, p
    raise RuntimeError(f"no minimally rigid framework found (n={n}, d={d})")


def collapsed_pair_framework(rng: np.random.Generator, n: int, d: int = 2) -> Framework:
    """Framework with a coincident neighbor pair that removes a needed edge.

    One edge of a minimally rigid framework is collapsed by moving one
    endpoint onto the other; the surviving constraints then number fewer
    than the rigid rank, so the rigidity index is provably zero.
    """
    g, p = minimally_rigid_framework(rng, n, d)
    k = int(rng.integers(g.m))
    i, j = g.edges[k]
    p = p.copy()
    p[j] = p[i]
    return Framework.with_unit_weights(g, p)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260815)
