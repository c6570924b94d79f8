"""Message-passing estimation engine.

Runs the same estimation pipeline as :class:`swarmrig.estimation.KernelEstimator`
but at the message level: each agent is a separate object holding only its
own state, and every neighbor value it reads arrives through a synchronous
network bus, optionally logged message by message. Agent arithmetic reuses
the shared per-agent helpers, inboxes are sorted by sender id (the same
order the array kernels walk the CSR layout), and both engines follow the
same monitor and stop schedules, so results are bit-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .estimation import (
    EstimationConfig,
    EstimationResult,
    EstimatorState,
    assemble_system,
    bank_inputs,
    coupling_blocks,
    deflation_sum,
    divergence_gate,
    global_sq_norm,
    initial_vector,
    local_rhs,
    local_solver_blocks,
    rayleigh_input,
    run_monitored,
    sq_norm,
    subspace_angle,
    _SIGN_TOL,
    _STALE_TOL,
    _VANISH_TOL,
)
from .graphs import Graph, neighbor_csr
from .rigidity import Framework

__all__ = ["Message", "NetBus", "BusAgent", "BusEstimator"]

BANKS = ("center", "qr", "norm", "sign", "ray")


@dataclass(frozen=True)
class Message:
    """One payload delivered over one edge in one synchronous round."""

    phase: str
    round: int
    sender: int
    recipient: int
    payload: tuple[float, ...]


class NetBus:
    """Synchronous broadcast medium restricted to graph edges.

    Every round each agent hands the bus one payload; the bus delivers it
    to exactly the agent's neighbors and returns per-recipient inboxes
    sorted by sender id. With a trace path set, every delivered message
    becomes one JSON line (ids are 1-based on disk).
    """

    def __init__(self, graph: Graph, trace_path=None):
        self.n = graph.n
        self.neighbors = []
        ptr, idx = neighbor_csr(graph)
        for i in range(graph.n):
            self.neighbors.append([int(idx[k]) for k in range(ptr[i], ptr[i + 1])])
        self.round = 0
        self.messages_delivered = 0
        self._fh = open(trace_path, "w") if trace_path is not None else None

    def broadcast(self, phase: str, values) -> list[list[tuple[int, np.ndarray]]]:
        """Deliver each agent's payload to its neighbors; one round."""
        self.round += 1
        inboxes: list[list[tuple[int, np.ndarray]]] = [[] for _ in range(self.n)]
        for i in range(self.n):
            payload = values[i]
            for j in self.neighbors[i]:
                inboxes[j].append((i, payload))
                self.messages_delivered += 1
                if self._fh is not None:
                    rec = {
                        "phase": phase,
                        "round": self.round,
                        "from": i + 1,
                        "to": j + 1,
                        "data": [float(x) for x in payload],
                    }
                    self._fh.write(json.dumps(rec, separators=(",", ":")))
                    self._fh.write("\n")
        return inboxes

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


class BusAgent:
    """One node: its own position, solver rows, and consensus lanes."""

    def __init__(self, i: int, position: np.ndarray, dim: int):
        self.i = i
        self.p = position
        self.dim = dim
        self.pc = None
        self.qii = None
        self.minv = None
        self.ediag = None
        self.blocks = {}  # sender id -> coupling block
        self.r = None
        self.rhs = None
        self.vtilde = None
        self.z = {}
        self.w = {}

    def consensus_update(self, bank, alpha_i, inbox, width, gains, h):
        """One PI round from neighbor (z, w) payloads; returns (zn, wn)."""
        z_i = self.z[bank]
        w_i = self.w[bank]
        accz = np.zeros(width)
        accw = np.zeros(width)
        for _, payload in inbox:
            z_j = payload[:width]
            w_j = payload[width:]
            accz = accz + (z_i - z_j)
            accw = accw + (w_i - w_j)
        zn = z_i + h * (gains.rho * (alpha_i - z_i) - gains.k_p * accz + gains.k_i * accw)
        wn = w_i + h * (-(gains.k_i) * accz)
        return zn, wn

    def jor_update(self, inbox, gamma):
        """One overrelaxation round from neighbor solver rows."""
        d = self.dim
        acc = np.empty(d)
        for a in range(d):
            acc[a] = self.rhs[a]
        for j, r_j in inbox:
            blk = self.blocks[j]
            for a in range(d):
                for b in range(d):
                    acc[a] = acc[a] + blk[a, b] * r_j[b]
        out = np.empty(d)
        for a in range(d):
            t = 0.0
            for b in range(d):
                t = t + self.minv[a, b] * acc[b]
            out[a] = (1.0 - gamma) * self.r[a] + gamma * t
        return out


class BusEstimator:
    """Message-level twin of the array estimation engine."""

    def __init__(
        self,
        f: Framework,
        config: EstimationConfig,
        state: EstimatorState | None = None,
        rng: np.random.Generator | None = None,
        v0: np.ndarray | None = None,
        trace_path=None,
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

        blocks, ediag = coupling_blocks(f, self.ptr, self.idx)
        self.bus = NetBus(f.graph, trace_path)
        self.agents = []
        for i in range(n):
            agent = BusAgent(i, np.array(f.positions[i], dtype=float), d)
            agent.ediag = ediag[i]
            for k in range(self.ptr[i], self.ptr[i + 1]):
                agent.blocks[int(self.idx[k])] = blocks[k]
            agent.r = np.array(state.r[i], dtype=float)
            agent.vtilde = np.array(state.vtilde[i], dtype=float)
            for name in BANKS:
                bank = state.banks[name]
                agent.z[name] = np.array(bank.z[i], dtype=float)
                agent.w[name] = np.array(bank.w[i], dtype=float)
            self.agents.append(agent)
        self.blocks = blocks
        self.ediag = ediag

        self._center_positions()
        vt = config.deflation.vartheta
        mu = config.deflation.mu
        for agent in self.agents:
            agent.qii, agent.minv = local_solver_blocks(
                agent.pc, agent.ediag, vt, mu, agent.i
            )
        pc = np.array([agent.pc for agent in self.agents])
        qii = np.array([agent.qii for agent in self.agents])
        self.system = assemble_system(
            pc, ediag, qii, blocks, self.ptr, self.idx, vt, mu
        )
        self.stale_consensus = False

    # -- consensus plumbing --------------------------------------------

    def _consensus(self, bank: str, alphas, rounds: int) -> None:
        """Run monitored PI rounds of one bank over the bus."""
        gains = self.config.gains
        h = self.h_c
        width = self.agents[0].z[bank].shape[0]

        def advance(chunk):
            for _ in range(chunk):
                values = [
                    np.concatenate([a.z[bank], a.w[bank]]) for a in self.agents
                ]
                inboxes = self.bus.broadcast(bank, values)
                updates = [
                    a.consensus_update(bank, alphas[i], inboxes[i], width, gains, h)
                    for i, a in enumerate(self.agents)
                ]
                for a, (zn, wn) in zip(self.agents, updates):
                    a.z[bank] = zn
                    a.w[bank] = wn

        def read_norm():
            return float(np.max(np.abs([a.z[bank] for a in self.agents])))

        run_monitored(rounds, advance, read_norm, divergence_gate(np.array(alphas)))

    def _center_positions(self) -> None:
        bank = self.state.banks["center"]
        alphas = [a.p for a in self.agents]
        if not bank.seeded:
            for a in self.agents:
                a.z["center"] = np.array(a.p, dtype=float)
            bank.seeded = True
        self._consensus("center", alphas, self.config.budgets.consensus_rounds)
        for a in self.agents:
            centers = a.z["center"]
            a.pc = np.empty(self.dim)
            for c in range(self.dim):
                a.pc[c] = a.p[c] - centers[c]

    def system_matrix(self) -> np.ndarray:
        """The dense shifted operator whose solution the solver approaches."""
        return self.system.copy()

    # -- phases ----------------------------------------------------------

    def solve(self, b: np.ndarray) -> int:
        cfg = self.config
        n = self.n
        bvec = b.ravel()
        bnorm = float(np.linalg.norm(bvec))
        alphas = None
        rounds_used = cfg.budgets.solver_rounds
        for p in range(cfg.budgets.solver_rounds):
            alphas = [bank_inputs(a.pc, a.r) for a in self.agents]
            self._consensus("qr", alphas, cfg.budgets.consensus_rounds)
            for i, a in enumerate(self.agents):
                qr_i = deflation_sum(a.pc, a.z["qr"], n, cfg.deflation.vartheta)
                a.rhs = local_rhs(b[i], qr_i, a.qii, a.r)
            values = [a.r for a in self.agents]
            inboxes = self.bus.broadcast("jor", values)
            updates = [a.jor_update(inboxes[i], cfg.gamma) for i, a in enumerate(self.agents)]
            for a, out in zip(self.agents, updates):
                a.r = out
            r = np.array([a.r for a in self.agents])
            res = float(np.linalg.norm(self.system @ r.ravel() - bvec))
            if res <= cfg.budgets.solver_tol * bnorm:
                rounds_used = p + 1
                break
        alpha = np.array(alphas)
        true_ave = alpha.mean(axis=0)
        scale = 1e-12 + float(np.max(np.abs(true_ave)))
        aves = np.array([a.z["qr"] for a in self.agents])
        err = float(np.max(np.abs(aves - true_ave)))
        if err / scale > _STALE_TOL:
            self.stale_consensus = True
        return rounds_used

    def _normalize(self) -> bool:
        cfg = self.config
        n = self.n
        r = np.array([a.r for a in self.agents])
        if global_sq_norm(r) <= _VANISH_TOL:
            v0 = initial_vector(self.state.rng, n, self.dim)
            for i, a in enumerate(self.agents):
                a.vtilde = np.array(v0[i])
                a.r = np.array(v0[i])
            return False
        alphas = [np.array([sq_norm(a.r)]) for a in self.agents]
        self._consensus("norm", alphas, cfg.budgets.consensus_rounds)
        for a in self.agents:
            scale = np.sqrt(n * a.z["norm"][0])
            vt = np.empty(self.dim)
            for c in range(self.dim):
                vt[c] = a.r[c] / scale
            a.vtilde = vt
        return True

    def _sign_sync(self) -> None:
        cfg = self.config
        n, d = self.n, self.dim
        alphas = [
            np.array(a.vtilde) if a.i == 0 else np.zeros(d) for a in self.agents
        ]
        self._consensus("sign", alphas, cfg.budgets.consensus_rounds)
        for a in self.agents:
            flip = False
            for c in range(d):
                s = n * a.z["sign"][c]
                if abs(s) > _SIGN_TOL:
                    flip = s < 0.0
                    break
            if flip:
                for c in range(d):
                    a.vtilde[c] = -a.vtilde[c]

    def _readout(self) -> np.ndarray:
        cfg = self.config
        n = self.n
        values = [a.vtilde for a in self.agents]
        inboxes = self.bus.broadcast("ray", values)
        alphas = []
        for i, a in enumerate(self.agents):
            terms = [(a.blocks[j], v_j) for j, v_j in inboxes[i]]
            alphas.append(np.array([rayleigh_input(a.vtilde, terms)]))
        self._consensus("ray", alphas, cfg.budgets.readout_rounds)
        out = np.empty(n)
        for i, a in enumerate(self.agents):
            out[i] = n * a.z["ray"][0]
        return out

    # -- outer loop -------------------------------------------------------

    def _flush_state(self) -> None:
        """Copy agent memory back into the shared warm-start state."""
        for i, a in enumerate(self.agents):
            self.state.r[i] = a.r
            self.state.vtilde[i] = a.vtilde
            for name in BANKS:
                bank = self.state.banks[name]
                bank.z[i] = a.z[name]
                bank.w[i] = a.w[name]

    def run(self, outer_cycles: int | None = None) -> EstimationResult:
        budgets = self.config.budgets
        cycles_budget = budgets.outer_cycles if outer_cycles is None else int(outer_cycles)
        history = [self._readout()]
        rounds = []
        cycles = 0
        for _ in range(cycles_budget):
            prev = np.array([a.vtilde for a in self.agents])
            b = prev.copy()
            rounds.append(self.solve(b))
            if not self._normalize():
                history.append(self._readout())
                cycles += 1
                continue
            self._sign_sync()
            history.append(self._readout())
            cycles += 1
            vt = np.array([a.vtilde for a in self.agents])
            if subspace_angle(prev, vt) < budgets.angle_tol:
                break
        self._flush_state()
        self.bus.close()
        final = history[-1]
        return EstimationResult(
            vtilde=np.array([a.vtilde for a in self.agents]),
            lambda_by_agent=final.copy(),
            history=np.array(history),
            cycles=cycles,
            solver_rounds=tuple(rounds),
            stale_consensus=self.stale_consensus,
        )
