"""Time the compiled kernels against the pure-Python reference.

Runs each numeric kernel (plane-rotation eigensolver, PI consensus rounds,
block overrelaxation rounds) and one full per-agent eigenpair estimation on
identical inputs under both backends, checks the outputs are bit-identical,
and prints per-call timings with the speedup.

The compiled extension is optional at runtime (SWARMRIG_PURE=1 forces the
fallback); this script imports both modules directly so a single process
can compare them.

Usage: python3 benchmarks/bench_backends.py [--n 12] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from swarmrig import _kernels_py
from swarmrig import estimation
from swarmrig.estimation import EstimationConfig, KernelEstimator
from swarmrig.graphs import ProximityParams
from swarmrig.rigidity import (
    Framework,
    is_infinitesimally_rigid,
    rigidity_index,
    rigidity_laplacian,
)

try:
    from swarmrig import _kernels
except ImportError:
    _kernels = None


def rigid_framework(rng: np.random.Generator, n: int, dim: int) -> Framework:
    params = ProximityParams()
    for _ in range(100):
        p = rng.uniform(-3.5, 3.5, size=(n, dim))
        f = Framework.from_proximity(p, params)
        if is_infinitesimally_rigid(f) and rigidity_index(f) > 1.5:
            return f
    raise RuntimeError("no rigid draw, lower --n")


def best_of(fn, make_args, repeats: int) -> float:
    # the kernels mutate their arrays, so every repeat gets fresh inputs
    # and only the call itself is timed
    best = float("inf")
    for _ in range(repeats):
        args = make_args()
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def time_backends(label, make_args, call, repeats, rows):
    """Run `call(module, *make_args())` per backend on fresh equal inputs."""
    results = {}
    times = {}
    for name, module in (("compiled", _kernels), ("pure", _kernels_py)):
        if module is None:
            continue
        times[name] = best_of(
            lambda *a, m=module: call(m, *a), make_args, repeats
        )
        args = make_args()
        call(module, *args)
        results[name] = [np.asarray(a).copy() for a in args]
    identical = ""
    if len(results) == 2:
        same = all(
            np.array_equal(a, b, equal_nan=True)
            for a, b in zip(results["compiled"], results["pure"])
        )
        identical = "yes" if same else "NO"
    rows.append((label, times.get("compiled"), times.get("pure"), identical))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12, help="agents (default 12)")
    ap.add_argument("--dim", type=int, default=2, choices=(2, 3))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=5,
                    help="best-of repeats per kernel timing (default 5)")
    ap.add_argument("--rounds", type=int, default=400,
                    help="consensus / solver rounds per timed call")
    args = ap.parse_args()

    if _kernels is None:
        print("compiled extension not importable; timing the pure backend only")

    rng = np.random.default_rng(args.seed)
    f = rigid_framework(rng, args.n, args.dim)
    cfg = EstimationConfig()
    est = KernelEstimator(f, cfg, rng=np.random.default_rng(args.seed))
    n, d = f.n, f.dim
    print(f"framework: n={n} dim={d} edges={f.m} index={rigidity_index(f):.3f}")
    print(f"rounds per timed call: {args.rounds}, best of {args.repeats}")
    rows: list[tuple] = []

    L = rigidity_laplacian(f)

    def jacobi_args():
        return L.copy(), np.eye(L.shape[0])

    time_backends(
        f"jacobi_sweeps ({L.shape[0]}x{L.shape[0]})",
        jacobi_args,
        lambda m, A, V: m.jacobi_sweeps(A, V, 1e-12, 100),
        args.repeats,
        rows,
    )

    gains = cfg.gains
    banks = d * d  # matches the widest consensus stage (coupling averages)

    def consensus_args():
        r2 = np.random.default_rng(args.seed + 1)
        return (
            r2.standard_normal((n, banks)),
            np.zeros((n, banks)),
            r2.standard_normal((n, banks)),
        )

    time_backends(
        f"consensus_rounds (n={n}, {banks} banks)",
        consensus_args,
        lambda m, z, w, alpha: m.consensus_rounds(
            z, w, alpha, est.ptr, est.idx,
            gains.rho, gains.k_p, gains.k_i, est.h_c, args.rounds,
        ),
        args.repeats,
        rows,
    )

    def jor_args():
        r3 = np.random.default_rng(args.seed + 2)
        return (
            r3.standard_normal((n, d)),
            np.empty((n, d)),
            r3.standard_normal((n, d)),
        )

    def jor_call(m, r, scratch, rhs):
        for _ in range(args.rounds):
            m.jor_round(r, scratch, rhs, est.blocks, est.minv,
                        est.ptr, est.idx, cfg.gamma)
            r, scratch = scratch, r

    time_backends(
        f"jor_round (n={n}, d={d})",
        jor_args,
        jor_call,
        args.repeats,
        rows,
    )

    # full estimation run: swap the module the estimator dispatches through
    est_results = {}
    est_times = {}
    for name, module in (("compiled", _kernels), ("pure", _kernels_py)):
        if module is None:
            continue
        estimation.kernels = module
        try:
            def run():
                e = KernelEstimator(f, cfg, rng=np.random.default_rng(args.seed))
                est_results[name] = e.run().lambda_by_agent
            est_times[name] = best_of(run, tuple, max(1, args.repeats // 2))
        finally:
            estimation.kernels = _kernels_py if _kernels is None else _kernels
    identical = ""
    if len(est_results) == 2:
        identical = (
            "yes"
            if np.array_equal(est_results["compiled"], est_results["pure"])
            else "NO"
        )
    rows.append(
        ("full estimator run", est_times.get("compiled"),
         est_times.get("pure"), identical)
    )

    width = max(len(r[0]) for r in rows)
    header = f"{'kernel':<{width}}  {'compiled':>10}  {'pure':>10}  {'speedup':>8}  bitwise"
    print()
    print(header)
    print("-" * len(header))
    for label, tc, tp, same in rows:
        fc = f"{tc * 1e3:9.3f}ms" if tc is not None else "       n/a"
        fp = f"{tp * 1e3:9.3f}ms" if tp is not None else "       n/a"
        sp = f"{tp / tc:7.1f}x" if tc and tp else "     n/a"
        print(f"{label:<{width}}  {fc}  {fp}  {sp}  {same}")


if __name__ == "__main__":
    main()
