"""Per-agent estimation of the rigidity eigenpair over a message-limited network.

Each outer cycle: solve (Ebar - mu I) r = v by block Jacobi overrelaxation
using only neighbor data (the rank-deficiency deflation coupling is
reconstructed from network averages), normalize r through an averaged norm,
synchronize the eigenvector sign, and read the eigenvalue off a local
Rayleigh quotient. Every network average comes from a PI average-consensus
estimator running in synchronous rounds.

The array engine here and the message engine in ``bus`` share the per-agent
arithmetic helpers below, so the two produce bit-identical float64 results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import kernels
from .graphs import neighbor_csr
from .rigidity import Framework, trivial_motion_basis

# divergence checks run between consensus rounds at this cadence
_CHECK_EVERY = 25
# squared global norm below this is treated as a vanished iterate
_VANISH_TOL = 1e-24
# sign-indicator components smaller than this are ambiguous and skipped
_SIGN_TOL = 1e-9
# consensus readouts further than this (relative) from the true average
# at the end of a solve mark the result as stale
_STALE_TOL = 5e-2


class GainConfigError(ValueError):
    """Consensus gains outside the stable region for the current graph."""


class ShiftError(ValueError):
    """Spectral shift too large: a local solver block is not positive definite."""


@dataclass(frozen=True)
class ConsensusGains:
    """Gains of the PI average-consensus estimator."""

    rho: float = 10.0
    k_p: float = 20.0
    k_i: float = 10.0

    def __post_init__(self):
        for name in ("rho", "k_p", "k_i"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {v}")

    def step(self, deg_max: int) -> float:
        """Euler step keeping the discretized estimator stable on graphs
        with maximum degree deg_max."""
        return 0.9 / (self.rho + 2.0 * self.k_p * max(int(deg_max), 1))

    def validate_step(self, h: float, deg_max: int) -> None:
        if h * (self.rho + self.k_p * max(int(deg_max), 1)) >= 2.0:
            raise GainConfigError(
                f"step {h} unstable for gains (rho={self.rho}, k_p={self.k_p}) "
                f"at max degree {deg_max}"
            )


@dataclass(frozen=True)
class DeflationParams:
    """Deflation strength and spectral shift of the inverse iteration.

    vartheta must lift the rigid-motion null directions above every
    eigenvalue the iteration may target; mu must sit strictly below the
    rigidity eigenvalue (the closed loop keeps it below the barrier floor).
    """

    vartheta: float = 100.0
    mu: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.vartheta) or self.vartheta <= 0.0:
            raise ValueError(f"vartheta must be positive, got {self.vartheta}")
        if not np.isfinite(self.mu) or self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")


@dataclass(frozen=True)
class EstimationBudgets:
    """Round budgets and early-stop tolerances for the nested loops."""

    consensus_rounds: int = 100
    solver_rounds: int = 200
    solver_tol: float = 1e-8
    outer_cycles: int = 15
    angle_tol: float = 1e-6
    readout_rounds: int = 600

    def __post_init__(self):
        for name in ("consensus_rounds", "solver_rounds", "outer_cycles", "readout_rounds"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")
        for name in ("solver_tol", "angle_tol"):
            if not np.isfinite(getattr(self, name)) or getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class EstimationConfig:
    gains: ConsensusGains = ConsensusGains()
    deflation: DeflationParams = DeflationParams()
    budgets: EstimationBudgets = EstimationBudgets()
    gamma: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"relaxation gamma must lie in (0, 1), got {self.gamma}")


def rotation_generators(position: np.ndarray) -> np.ndarray:
    """Rigid-rotation generator directions evaluated at one position.

    Returns a (d, n_rot) matrix: one column per independent rotation
    (1 in the plane, 3 in space), matching the rotation columns of
    ``trivial_motion_basis``.
    """
    p = np.asarray(position, dtype=float)
    if p.shape == (2,):
        return np.array([[p[1]], [-p[0]]])
    if p.shape == (3,):
        return np.array(
            [
                [p[1], p[2], 0.0],
                [-p[0], 0.0, p[2]],
                [0.0, -p[0], -p[1]],
            ]
        )
    raise ValueError(f"positions must be 2-D or 3-D, got shape {p.shape}")


def q_block(p_i: np.ndarray, p_j: np.ndarray, vartheta: float) -> np.ndarray:
    """The (i, j) block of the deflation matrix for a pair of positions."""
    k_i = rotation_generators(p_i)
    k_j = rotation_generators(p_j)
    d = k_i.shape[0]
    return vartheta * (np.eye(d) + k_i @ k_j.T)


def deflation_matrix(positions: np.ndarray, vartheta: float) -> np.ndarray:
    """Dense rank-lifting matrix: vartheta times the Gram expansion of the
    rigid-motion generators. Added to the rigidity Laplacian it moves the
    trivial eigenvalues away from zero without touching the others."""
    basis = trivial_motion_basis(positions)
    return vartheta * (basis @ basis.T)


def deflated_laplacian(f: Framework, vartheta: float) -> np.ndarray:
    from .rigidity import rigidity_laplacian

    return rigidity_laplacian(f) + deflation_matrix(f.positions, vartheta)


def initial_vector(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """Seeded random unit start vector shared by all estimation engines."""
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# Per-agent arithmetic, shared verbatim by the array and message engines.
# Reductions are sequential loops: both engines must round identically.


def bank_inputs(pc: np.ndarray, r: np.ndarray) -> tuple[float, ...]:
    """Local products whose network averages rebuild the deflation coupling.

    pc is the agent's centered position, r its current solver iterate.
    """
    if pc.shape[0] == 2:
        return (pc[1] * r[0], pc[0] * r[1], r[0], r[1])
    return (
        pc[1] * r[0],
        pc[0] * r[1],
        pc[2] * r[0],
        pc[0] * r[2],
        pc[2] * r[1],
        pc[1] * r[2],
        r[0],
        r[1],
        r[2],
    )


def deflation_sum(pc: np.ndarray, ave: np.ndarray, n: int, vartheta: float) -> np.ndarray:
    """Reconstruct (Q r)_i at one agent from its bank averages."""
    if pc.shape[0] == 2:
        srot = n * (ave[0] - ave[1])
        tx = n * ave[2]
        ty = n * ave[3]
        return np.array(
            [
                vartheta * (pc[1] * srot + tx),
                vartheta * (ty - pc[0] * srot),
            ]
        )
    sz = n * (ave[0] - ave[1])
    sy = n * (ave[2] - ave[3])
    sx = n * (ave[4] - ave[5])
    tx = n * ave[6]
    ty = n * ave[7]
    tz = n * ave[8]
    return np.array(
        [
            vartheta * (pc[1] * sz + pc[2] * sy + tx),
            vartheta * (pc[2] * sx - pc[0] * sz + ty),
            vartheta * (tz - pc[0] * sy - pc[1] * sx),
        ]
    )


def local_rhs(b: np.ndarray, qr: np.ndarray, qii: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Right-hand side handed to the relaxation kernel at one agent:
    target minus the off-diagonal deflation coupling."""
    d = b.shape[0]
    out = np.empty(d)
    for a in range(d):
        t = 0.0
        for c in range(d):
            t = t + qii[a, c] * r[c]
        out[a] = b[a] - qr[a] + t
    return out


def sq_norm(v: np.ndarray) -> float:
    s = 0.0
    for a in range(v.shape[0]):
        s = s + v[a] * v[a]
    return s


def rayleigh_input(v_i: np.ndarray, neighbor_terms) -> float:
    """Local quadratic-form contribution: v_i^T sum_j B_ij (v_i - v_j),
    neighbor_terms iterating (coupling block, neighbor vector) in ascending
    sender order. Summed over all agents this telescopes to the full
    quadratic form of the rigidity Laplacian."""
    d = v_i.shape[0]
    acc = np.zeros(d)
    for blk, v_j in neighbor_terms:
        for a in range(d):
            t = 0.0
            for c in range(d):
                t = t + blk[a, c] * (v_i[c] - v_j[c])
            acc[a] = acc[a] + t
    s = 0.0
    for a in range(d):
        s = s + v_i[a] * acc[a]
    return s


def global_sq_norm(rows: np.ndarray) -> float:
    t = 0.0
    for i in range(rows.shape[0]):
        t = t + sq_norm(rows[i])
    return t


def subspace_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between two direction estimates, sign-insensitive."""
    du = float(np.linalg.norm(u))
    dv = float(np.linalg.norm(v))
    if du == 0.0 or dv == 0.0:
        return np.pi / 2.0
    dot = abs(float(np.sum(u * v))) / (du * dv)
    return float(np.arccos(min(dot, 1.0)))


def run_monitored(rounds: int, advance, read_norm, gate: float) -> None:
    """Advance a consensus iteration in divergence-checked chunks.

    advance(k) runs k synchronous rounds; read_norm() reports the largest
    estimate magnitude. Three consecutive growths beyond the gate, or a
    non-finite readout, abort with GainConfigError. Both estimation engines
    drive their consensus loops through this exact schedule.
    """
    prev = None
    grow = 0
    done = 0
    while done < rounds:
        chunk = min(_CHECK_EVERY, rounds - done)
        advance(chunk)
        done += chunk
        norm = read_norm()
        if not np.isfinite(norm):
            raise GainConfigError("average-consensus iterate overflowed")
        if prev is not None and norm > prev and norm > gate:
            grow += 1
        else:
            grow = 0
        prev = norm
        if grow >= 3:
            raise GainConfigError(
                "average-consensus iterate growing; gains unstable for this graph"
            )


def divergence_gate(alpha: np.ndarray) -> float:
    """Magnitude beyond which a growing consensus iterate counts as divergent."""
    return 100.0 * (1.0 + float(np.max(np.abs(alpha))))


def local_solver_blocks(
    pc_i: np.ndarray, ediag_i: np.ndarray, vartheta: float, mu: float, agent: int
) -> tuple[np.ndarray, np.ndarray]:
    """One agent's deflation diagonal block and inverted solver block.

    Raises ShiftError when the shift makes the local block indefinite.
    """
    d = pc_i.shape[0]
    k_i = rotation_generators(pc_i)
    qii = vartheta * (np.eye(d) + k_i @ k_i.T)
    m_i = ediag_i + qii - mu * np.eye(d)
    try:
        np.linalg.cholesky(m_i)
    except np.linalg.LinAlgError:
        raise ShiftError(
            f"shift mu={mu} makes the local block of agent {agent} indefinite"
        ) from None
    return qii, np.linalg.inv(m_i)


def assemble_system(
    pc: np.ndarray,
    ediag: np.ndarray,
    qii: np.ndarray,
    blocks: np.ndarray,
    ptr: np.ndarray,
    idx: np.ndarray,
    vartheta: float,
    mu: float,
) -> np.ndarray:
    """Dense copy of the shifted system the distributed solver targets,
    used only for residual stops and staleness diagnostics."""
    n, d = pc.shape
    big = np.zeros((n * d, n * d))
    for i in range(n):
        big[i * d:(i + 1) * d, i * d:(i + 1) * d] = (
            ediag[i] + qii[i] - mu * np.eye(d)
        )
        for k in range(ptr[i], ptr[i + 1]):
            j = int(idx[k])
            big[i * d:(i + 1) * d, j * d:(j + 1) * d] -= blocks[k]
    for i in range(n):
        k_i = rotation_generators(pc[i])
        u_i = np.hstack([np.eye(d), k_i])
        for j in range(n):
            if j == i:
                continue
            k_j = rotation_generators(pc[j])
            u_j = np.hstack([np.eye(d), k_j])
            big[i * d:(i + 1) * d, j * d:(j + 1) * d] += vartheta * (u_i @ u_j.T)
    return big


def coupling_blocks(
    f: Framework, ptr: np.ndarray, idx: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Edge coupling blocks B_ij = w (p_j - p_i)(p_j - p_i)^T laid out in
    CSR order, plus the per-agent diagonal sums. B_ij enters the local
    equations with a positive sign (it is the negated off-diagonal block
    of the rigidity Laplacian)."""
    n, d = f.positions.shape
    p = f.positions
    wmap = {}
    for k, (i, j) in enumerate(f.graph.edges):
        wmap[(i, j)] = f.weights[k]
        wmap[(j, i)] = f.weights[k]
    blocks = np.empty((idx.shape[0], d, d))
    diag = np.zeros((n, d, d))
    for i in range(n):
        for k in range(ptr[i], ptr[i + 1]):
            j = int(idx[k])
            z = p[j] - p[i]
            blk = wmap[(i, j)] * np.outer(z, z)
            blocks[k] = blk
            diag[i] += blk
    return blocks, diag


class AverageBank:
    """Parallel PI consensus estimators, one lane per averaged scalar."""

    def __init__(self, n: int, width: int):
        self.z = np.zeros((n, width))
        self.w = np.zeros((n, width))
        self.seeded = False

    def seed_once(self, alpha: np.ndarray) -> None:
        """Start the estimate lanes at the local inputs, first call only.

        For inputs sharing a large common offset (positions far from the
        origin) this removes the offset from the initial error, which
        otherwise sets the rounds needed for a given absolute accuracy.
        """
        if not self.seeded:
            self.z[:] = alpha
            self.seeded = True

    def run(
        self,
        alpha: np.ndarray,
        ptr: np.ndarray,
        idx: np.ndarray,
        gains: ConsensusGains,
        h: float,
        rounds: int,
    ) -> None:
        """Advance all lanes by the given number of synchronous rounds,
        watching for divergence between chunks."""

        def advance(chunk):
            kernels.consensus_rounds(
                self.z, self.w, alpha, ptr, idx, gains.rho, gains.k_p, gains.k_i, h, chunk
            )

        def read_norm():
            return float(np.max(np.abs(self.z)))

        run_monitored(rounds, advance, read_norm, divergence_gate(alpha))

    def averages(self) -> np.ndarray:
        return self.z


@dataclass
class EstimatorState:
    """Warm-startable estimator memory, carried across closed-loop steps."""

    vtilde: np.ndarray
    r: np.ndarray
    banks: dict
    rng: np.random.Generator

    @classmethod
    def fresh(
        cls,
        n: int,
        dim: int,
        rng: np.random.Generator,
        v0: np.ndarray | None = None,
    ) -> "EstimatorState":
        if v0 is None:
            v0 = initial_vector(rng, n, dim)
        else:
            v0 = np.array(v0, dtype=float)
            if v0.shape != (n, dim):
                raise ValueError(f"v0 must have shape {(n, dim)}, got {v0.shape}")
        banks = {
            "center": AverageBank(n, dim),
            "qr": AverageBank(n, dim * dim),
            "norm": AverageBank(n, 1),
            "sign": AverageBank(n, dim),
            "ray": AverageBank(n, 1),
        }
        return cls(vtilde=v0, r=v0.copy(), banks=banks, rng=rng)


@dataclass(frozen=True)
class EstimationResult:
    """Outcome of one estimation run.

    history holds one per-agent eigenvalue readout per row: row 0 for the
    start vector, then one per completed outer cycle.
    """

    vtilde: np.ndarray
    lambda_by_agent: np.ndarray
    history: np.ndarray
    cycles: int
    solver_rounds: tuple[int, ...]
    stale_consensus: bool

    @property
    def lambda_mean(self) -> float:
        return float(np.mean(self.lambda_by_agent))


class KernelEstimator:
    """Array engine: one process holds every agent's rows and advances them
    with compiled kernels. Each update reads only neighbor data, so the
    message engine in ``bus`` reproduces it round for round."""

    def __init__(
        self,
        f: Framework,
        config: EstimationConfig,
        state: EstimatorState | None = None,
        rng: np.random.Generator | None = None,
        v0: np.ndarray | None = None,
    ):
        self.f = f
        self.config = config
        n, d = f.positions.shape
        self.n = n
        self.dim = d
        self.ptr, self.idx = neighbor_csr(f.graph)
        degs = f.graph.degrees()
        deg_max = int(max(degs)) if n else 0
        self.h_c = config.gains.step(deg_max)
        config.gains.validate_step(self.h_c, deg_max)

        if state is None:
            if rng is None:
                rng = np.random.default_rng(0)
            state = EstimatorState.fresh(n, d, rng, v0)
        self.state = state

        self.blocks, self.ediag = coupling_blocks(f, self.ptr, self.idx)
        self._center_positions()
        mu = config.deflation.mu
        vt = config.deflation.vartheta
        self.qii = np.empty((n, d, d))
        self.minv = np.empty((n, d, d))
        for i in range(n):
            self.qii[i], self.minv[i] = local_solver_blocks(
                self.pc[i], self.ediag[i], vt, mu, i
            )
        self.system = assemble_system(
            self.pc, self.ediag, self.qii, self.blocks, self.ptr, self.idx, vt, mu
        )
        self.stale_consensus = False

    def _center_positions(self) -> None:
        # agents subtract an averaged centroid before building rotation
        # generators; this keeps the deflation conditioned no matter where
        # the formation has drifted
        banks = self.state.banks["center"]
        alpha = np.array(self.f.positions, dtype=float)
        banks.seed_once(alpha)
        banks.run(
            alpha, self.ptr, self.idx, self.config.gains, self.h_c,
            self.config.budgets.consensus_rounds,
        )
        centers = banks.averages()
        self.pc = np.empty_like(alpha)
        for i in range(self.n):
            for a in range(self.dim):
                self.pc[i, a] = alpha[i, a] - centers[i, a]

    def system_matrix(self) -> np.ndarray:
        """The dense shifted operator whose solution the solver approaches."""
        return self.system.copy()

    # -- solve phase --------------------------------------------------

    def solve(self, b: np.ndarray) -> int:
        """Relax (Ebar - mu I) r = b to the round budget or the residual
        tolerance; returns rounds used. r and the coupling banks warm-start
        from the estimator state."""
        cfg = self.config
        n, d = self.n, self.dim
        bvec = b.ravel()
        bnorm = float(np.linalg.norm(bvec))
        banks = self.state.banks["qr"]
        r = self.state.r
        scratch = np.empty_like(r)
        rhs = np.empty_like(r)
        alpha = np.empty((n, d * d))
        rounds_used = cfg.budgets.solver_rounds
        for p in range(cfg.budgets.solver_rounds):
            for i in range(n):
                alpha[i] = bank_inputs(self.pc[i], r[i])
            banks.run(alpha, self.ptr, self.idx, cfg.gains, self.h_c,
                      cfg.budgets.consensus_rounds)
            aves = banks.averages()
            for i in range(n):
                qr_i = deflation_sum(self.pc[i], aves[i], n, cfg.deflation.vartheta)
                rhs[i] = local_rhs(b[i], qr_i, self.qii[i], r[i])
            kernels.jor_round(r, scratch, rhs, self.blocks, self.minv,
                              self.ptr, self.idx, cfg.gamma)
            r, scratch = scratch, r
            res = float(np.linalg.norm(self.system @ r.ravel() - bvec))
            if res <= cfg.budgets.solver_tol * bnorm:
                rounds_used = p + 1
                break
        self.state.r = r
        true_ave = alpha.mean(axis=0)
        scale = 1e-12 + float(np.max(np.abs(true_ave)))
        err = float(np.max(np.abs(banks.averages() - true_ave)))
        if err / scale > _STALE_TOL:
            self.stale_consensus = True
        return rounds_used

    # -- normalize / sign / readout phases -----------------------------

    def _normalize(self) -> bool:
        """Scale r to a unit global norm through the averaged squared norm.
        Returns False when the iterate has vanished and was restarted."""
        cfg = self.config
        n = self.n
        r = self.state.r
        if global_sq_norm(r) <= _VANISH_TOL:
            v0 = initial_vector(self.state.rng, n, self.dim)
            self.state.vtilde = v0
            self.state.r = v0.copy()
            return False
        banks = self.state.banks["norm"]
        alpha = np.empty((n, 1))
        for i in range(n):
            alpha[i, 0] = sq_norm(r[i])
        banks.run(alpha, self.ptr, self.idx, cfg.gains, self.h_c,
                  cfg.budgets.consensus_rounds)
        aves = banks.averages()
        vt = self.state.vtilde
        for i in range(n):
            scale = np.sqrt(n * aves[i, 0])
            for a in range(self.dim):
                vt[i, a] = r[i, a] / scale
        return True

    def _sign_sync(self) -> None:
        """Flip every agent's components so the first resolvable component
        of agent 0 reads positive network-wide."""
        cfg = self.config
        n, d = self.n, self.dim
        vt = self.state.vtilde
        banks = self.state.banks["sign"]
        alpha = np.zeros((n, d))
        for a in range(d):
            alpha[0, a] = vt[0, a]
        banks.run(alpha, self.ptr, self.idx, cfg.gains, self.h_c,
                  cfg.budgets.consensus_rounds)
        aves = banks.averages()
        for i in range(n):
            flip = False
            for a in range(d):
                s = n * aves[i, a]
                if abs(s) > _SIGN_TOL:
                    flip = s < 0.0
                    break
            if flip:
                for a in range(d):
                    vt[i, a] = -vt[i, a]

    def _readout(self) -> np.ndarray:
        """Per-agent eigenvalue estimates from the averaged local Rayleigh
        contributions."""
        cfg = self.config
        n = self.n
        vt = self.state.vtilde
        banks = self.state.banks["ray"]
        alpha = np.empty((n, 1))
        for i in range(n):
            terms = [
                (self.blocks[k], vt[int(self.idx[k])])
                for k in range(self.ptr[i], self.ptr[i + 1])
            ]
            alpha[i, 0] = rayleigh_input(vt[i], terms)
        banks.run(alpha, self.ptr, self.idx, cfg.gains, self.h_c,
                  cfg.budgets.readout_rounds)
        aves = banks.averages()
        out = np.empty(n)
        for i in range(n):
            out[i] = n * aves[i, 0]
        return out

    # -- outer loop -----------------------------------------------------

    def run(self, outer_cycles: int | None = None) -> EstimationResult:
        budgets = self.config.budgets
        cycles_budget = budgets.outer_cycles if outer_cycles is None else int(outer_cycles)
        history = [self._readout()]
        rounds = []
        cycles = 0
        for _ in range(cycles_budget):
            prev = self.state.vtilde.copy()
            b = self.state.vtilde.copy()
            rounds.append(self.solve(b))
            if not self._normalize():
                history.append(self._readout())
                cycles += 1
                continue
            self._sign_sync()
            history.append(self._readout())
            cycles += 1
            if subspace_angle(prev, self.state.vtilde) < budgets.angle_tol:
                break
        final = history[-1]
        return EstimationResult(
            vtilde=self.state.vtilde.copy(),
            lambda_by_agent=final.copy(),
            history=np.array(history),
            cycles=cycles,
            solver_rounds=tuple(rounds),
            stale_consensus=self.stale_consensus,
        )


def power_baseline(
    f: Framework, v0: np.ndarray, iterations: int
) -> np.ndarray:
    """Deflated power iteration targeting the rigidity eigenvalue, kept as a
    centralized reference for convergence-speed comparisons.

    The operator c(I - P) - E has the rigidity eigenpair as its dominant
    one (P projects onto the rigid-motion space, c clears the spectrum),
    so plain power iteration converges to it from above. Returns the
    Rayleigh-quotient series, entry 0 for the start vector.
    """
    from .rigidity import rigidity_laplacian
    from .spectral import symmetric_eig

    e_mat = rigidity_laplacian(f)
    basis = trivial_motion_basis(f.positions)
    q, _ = np.linalg.qr(basis)
    proj = q @ q.T
    lam_max = float(symmetric_eig(e_mat).values[-1])
    c = 1.05 * lam_max
    m_op = c * (np.eye(e_mat.shape[0]) - proj) - e_mat
    x = np.asarray(v0, dtype=float).ravel().copy()
    x0 = float(np.linalg.norm(x))
    x = x - proj @ x
    nrm = float(np.linalg.norm(x))
    if nrm <= 1e-12 * max(x0, 1e-300):
        raise ValueError("start vector lies entirely in the rigid-motion space")
    x /= nrm
    series = [float(x @ e_mat @ x)]
    for _ in range(int(iterations)):
        y = m_op @ x
        nrm = float(np.linalg.norm(y))
        if nrm == 0.0:
            break
        x = y / nrm
        series.append(float(x @ e_mat @ x))
    return np.array(series)
