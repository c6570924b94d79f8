"""Message engine: delivery rules, trace format, and bit-equality with the
array engine."""

import json

import numpy as np
import pytest

from swarmrig.bus import BusEstimator, NetBus
from swarmrig.estimation import (
    DeflationParams,
    EstimationBudgets,
    EstimationConfig,
    KernelEstimator,
)
from swarmrig.graphs import Graph
from swarmrig.rigidity import Framework

from conftest import (
    healthy_framework,
    oracle_rigidity_pair,
    random_rigid_framework,
    square_framework,
)


def small_config(lam4, n, **overrides):
    return EstimationConfig(
        deflation=DeflationParams(
            vartheta=max(1.0, 20.0 / n), mu=0.5 * min(2.0, lam4)
        ),
        budgets=EstimationBudgets(
            consensus_rounds=overrides.pop("consensus_rounds", 30),
            solver_rounds=overrides.pop("solver_rounds", 12),
            outer_cycles=overrides.pop("outer_cycles", 3),
            readout_rounds=overrides.pop("readout_rounds", 40),
            **overrides,
        ),
    )


def run_both(f, cfg, seed=5):
    res = []
    for cls in (KernelEstimator, BusEstimator):
        est = cls(f, cfg, rng=np.random.default_rng(seed))
        res.append(est.run())
    return res


class TestNetBus:
    def test_delivery_restricted_to_edges(self):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        bus = NetBus(g)
        values = [np.array([float(i)]) for i in range(4)]
        inboxes = bus.broadcast("x", values)
        assert [[s for s, _ in box] for box in inboxes] == [[1], [0, 2], [1, 3], [2]]
        # payloads travel unmodified
        assert inboxes[1][1][1][0] == 2.0

    def test_inboxes_sorted_by_sender(self):
        g = Graph.from_edges(5, [(0, 4), (0, 2), (0, 1), (0, 3)])
        bus = NetBus(g)
        inboxes = bus.broadcast("x", [np.zeros(1)] * 5)
        senders = [s for s, _ in inboxes[0]]
        assert senders == sorted(senders) == [1, 2, 3, 4]

    def test_round_and_message_counts(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        bus = NetBus(g)
        for _ in range(4):
            bus.broadcast("x", [np.zeros(2)] * 3)
        assert bus.round == 4
        assert bus.messages_delivered == 4 * 2 * g.m

    def test_trace_records(self, tmp_path):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        path = tmp_path / "trace.jsonl"
        bus = NetBus(g, trace_path=path)
        bus.broadcast("phase-a", [np.array([1.5, -2.0])] * 3)
        bus.close()
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 2 * g.m
        edge_set = {(1, 2), (2, 1), (2, 3), (3, 2)}
        for line in lines:
            rec = json.loads(line)
            assert rec["phase"] == "phase-a"
            assert rec["round"] == 1
            assert (rec["from"], rec["to"]) in edge_set  # 1-based ids
            assert rec["data"] == [1.5, -2.0]


class TestBitEquality:
    def test_full_run_matches_array_engine(self, rng):
        f = random_rigid_framework(rng, 5, 2)
        lam4 = oracle_rigidity_pair(f)[0]
        kres, bres = run_both(f, small_config(lam4, 5))
        assert np.array_equal(kres.lambda_by_agent, bres.lambda_by_agent)
        assert np.array_equal(kres.vtilde, bres.vtilde)
        assert np.array_equal(kres.history, bres.history)
        assert kres.solver_rounds == bres.solver_rounds
        assert kres.cycles == bres.cycles
        assert kres.stale_consensus == bres.stale_consensus

    def test_three_dimensional_match(self, rng):
        f = random_rigid_framework(rng, 5, 3)
        lam4 = oracle_rigidity_pair(f)[0]
        kres, bres = run_both(f, small_config(lam4, 5, outer_cycles=2))
        assert np.array_equal(kres.lambda_by_agent, bres.lambda_by_agent)
        assert np.array_equal(kres.vtilde, bres.vtilde)
        assert np.array_equal(kres.history, bres.history)

    def test_early_residual_stop_matches(self, rng):
        # a loose solver tolerance triggers the early residual stop; both
        # engines must break at the same round
        g, p = square_framework(side=1.0)
        f = Framework.with_unit_weights(g, p)
        lam4 = oracle_rigidity_pair(f)[0]
        cfg = EstimationConfig(
            gamma=0.8,
            deflation=DeflationParams(vartheta=1.0, mu=0.5 * lam4),
            budgets=EstimationBudgets(
                consensus_rounds=100, solver_rounds=200, solver_tol=0.1,
                outer_cycles=2, readout_rounds=40,
            ),
        )
        kres, bres = run_both(f, cfg)
        assert kres.solver_rounds == bres.solver_rounds
        assert all(r < 200 for r in kres.solver_rounds)
        assert np.array_equal(kres.lambda_by_agent, bres.lambda_by_agent)

    def test_system_matrices_identical(self, rng):
        f = random_rigid_framework(rng, 5, 2)
        lam4 = oracle_rigidity_pair(f)[0]
        cfg = small_config(lam4, 5)
        kest = KernelEstimator(f, cfg, rng=np.random.default_rng(5))
        best = BusEstimator(f, cfg, rng=np.random.default_rng(5))
        assert np.array_equal(kest.system_matrix(), best.system_matrix())

    def test_warm_state_round_trip(self, rng):
        # state written back by the message engine warm-starts the array
        # engine exactly like the array engine's own state
        f = random_rigid_framework(rng, 4, 2)
        lam4 = oracle_rigidity_pair(f)[0]
        cfg = small_config(lam4, 4)
        kest = KernelEstimator(f, cfg, rng=np.random.default_rng(5))
        kest.run()
        best = BusEstimator(f, cfg, rng=np.random.default_rng(5))
        best.run()
        kbank = kest.state.banks["qr"]
        bbank = best.state.banks["qr"]
        assert np.array_equal(kbank.z, bbank.z)
        assert np.array_equal(kbank.w, bbank.w)
        assert np.array_equal(kest.state.r, best.state.r)
        k2 = KernelEstimator(f, cfg, state=best.state).run(outer_cycles=1)
        b2 = KernelEstimator(f, cfg, state=kest.state).run(outer_cycles=1)
        assert np.array_equal(k2.lambda_by_agent, b2.lambda_by_agent)

    def test_traced_run_unchanged(self, rng, tmp_path):
        # tracing is observation only: same numbers with and without it
        f = random_rigid_framework(rng, 4, 2)
        lam4 = oracle_rigidity_pair(f)[0]
        cfg = small_config(lam4, 4, outer_cycles=2)
        plain = BusEstimator(f, cfg, rng=np.random.default_rng(5)).run()
        traced_est = BusEstimator(
            f, cfg, rng=np.random.default_rng(5), trace_path=tmp_path / "t.jsonl"
        )
        traced = traced_est.run()
        assert np.array_equal(plain.lambda_by_agent, traced.lambda_by_agent)
        lines = (tmp_path / "t.jsonl").read_text().strip().split("\n")
        assert len(lines) == traced_est.bus.messages_delivered
        phases = {json.loads(ln)["phase"] for ln in lines}
        assert {"center", "qr", "jor", "norm", "sign", "ray"} <= phases


class TestBusAccuracy:
    def test_converges_like_array_engine(self, rng):
        # moderate budgets still reach the oracle eigenvalue
        f = healthy_framework(rng, 4)
        lam4 = oracle_rigidity_pair(f)[0]
        cfg = EstimationConfig(
            deflation=DeflationParams(vartheta=5.0, mu=0.5 * min(2.0, lam4)),
            budgets=EstimationBudgets(solver_rounds=300, outer_cycles=25),
        )
        res = BusEstimator(f, cfg, rng=np.random.default_rng(2)).run()
        assert np.max(np.abs(res.lambda_by_agent - lam4)) < 1e-2 * lam4
