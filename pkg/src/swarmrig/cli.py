"""Command line front end: analyze, estimate, simulate.

Exit codes: 0 success (analyze: rigid; simulate: no breach), 1 negative
verdict (not rigid / barrier breached), 2 unusable input.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .estimation import EstimationConfig, KernelEstimator, power_baseline
from .files import (
    FormatError,
    estimation_from_dict,
    load_framework,
    load_scenario,
    write_estimates_csv,
    write_snapshots,
    write_summary_json,
    write_trace_csv,
)
from .rigidity import (
    connectivity_value,
    is_infinitesimally_rigid,
    rigidity_index,
    rigidity_pair,
    rigidity_rank,
    rigidity_spectrum,
    trivial_dim,
)
from .sim import GenerationError, run as run_sim

__all__ = ["main"]


def _fmt(x) -> str:
    return repr(float(x))


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _set_by_path(doc: dict, dotted: str, text: str) -> None:
    """Apply one key=value override; values parse as JSON, else stay text."""
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise FormatError(f"override {dotted!r}: {key!r} is not a section")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    node[keys[-1]] = value


def _parse_overrides(doc: dict, pairs: list[str]) -> None:
    for pair in pairs:
        if "=" not in pair:
            raise FormatError(f"override {pair!r} is not of the form key=value")
        key, _, text = pair.partition("=")
        _set_by_path(doc, key.strip(), text.strip())


# ------------------------------------------------------------------ analyze

def _analyze(args) -> int:
    try:
        f, _ = load_framework(args.framework)
    except (FormatError, OSError) as exc:
        return _fail(str(exc))
    spectrum = rigidity_spectrum(f)
    rank = rigidity_rank(f)
    full_rank = f.dim * f.n - trivial_dim(f.dim)
    rigid = is_infinitesimally_rigid(f)
    k = trivial_dim(f.dim)
    lines = [
        f"nodes: {f.n}",
        f"dimension: {f.dim}",
        f"edges: {f.m}",
        f"spectrum: {' '.join(_fmt(v) for v in spectrum)}",
        f"rank: {rank}/{full_rank}",
        f"null_dim: {f.dim * f.n - rank}",
        f"rigid: {str(rigid).lower()}",
        f"index_position: {k + 1}",
        f"index: {_fmt(spectrum[k])}",
        f"connectivity: {_fmt(connectivity_value(f.wg))}",
    ]
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "analysis.txt").write_text(text)
    return 0 if rigid else 1


# ----------------------------------------------------------------- estimate

def _mean_series(history: np.ndarray) -> np.ndarray:
    return history.mean(axis=1)


def _iterations_to_tol(series: np.ndarray, target: float, tol: float):
    hits = np.nonzero(np.abs(series - target) < tol)[0]
    return int(hits[0]) if hits.size else None


def _estimate(args) -> int:
    try:
        f, _ = load_framework(args.framework)
    except (FormatError, OSError) as exc:
        return _fail(str(exc))
    if not is_infinitesimally_rigid(f):
        return _fail("framework is not rigid; the target eigenvalue is degenerate")

    doc = {}
    try:
        _parse_overrides(doc, args.set)
        config = estimation_from_dict(doc, "<overrides>")
    except FormatError as exc:
        return _fail(str(exc))

    fractions = []
    for text in args.mu.split(","):
        try:
            frac = float(text)
        except ValueError:
            return _fail(f"--mu entry {text!r} is not a number")
        if not 0.0 < frac < 1.0:
            return _fail(f"--mu fraction {frac} must lie strictly inside (0, 1)")
        fractions.append(frac)

    lam4 = rigidity_index(f)
    rng = np.random.default_rng(args.seed)
    if args.warm_start:
        v0 = rigidity_pair(f).vector.reshape(f.n, f.dim).copy()
    else:
        v0 = rng.standard_normal((f.n, f.dim))

    runs: list[tuple[str, np.ndarray]] = []
    if args.method in ("power", "both"):
        series = power_baseline(f, v0.ravel(), args.iterations)
        runs.append(("power", np.asarray(series)))
    if args.method in ("inverse", "both"):
        for frac in fractions:
            shifted = dataclasses.replace(
                config,
                deflation=dataclasses.replace(config.deflation, mu=frac * lam4),
            )
            estimator = KernelEstimator(
                f, shifted, rng=np.random.default_rng(args.seed), v0=v0.copy()
            )
            result = estimator.run()
            runs.append((f"inverse_mu{frac:g}", _mean_series(result.history)))

    print(f"target index: {_fmt(lam4)}")
    print(f"tolerance: {_fmt(args.tol)} (absolute)")
    print(f"{'run':<18} {'iterations_to_tol':>18} {'final_estimate':>24}")
    for name, series in runs:
        need = _iterations_to_tol(series, lam4, args.tol)
        shown = "never" if need is None else str(need)
        print(f"{name:<18} {shown:>18} {_fmt(series[-1]):>24}")

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "estimate_series.csv"
    depth = max(series.size for _, series in runs)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration"] + [name for name, _ in runs])
        for k in range(depth):
            row = [str(k)]
            for _, series in runs:
                row.append(_fmt(series[k]) if k < series.size else "")
            writer.writerow(row)
    print(f"series written to {path}")
    return 0


# ----------------------------------------------------------------- simulate

def _simulate(args) -> int:
    try:
        doc_text = Path(args.config).read_text()
        doc = json.loads(doc_text)
    except OSError as exc:
        return _fail(str(exc))
    except json.JSONDecodeError as exc:
        return _fail(f"{args.config}: not valid JSON ({exc})")
    if not isinstance(doc, dict):
        return _fail(f"{args.config}: expected a JSON object at top level")
    if args.seed is not None:
        doc["seed"] = args.seed
    try:
        _parse_overrides(doc, args.set)
        from .files import scenario_from_dict

        cfg = scenario_from_dict(doc, args.config)
    except FormatError as exc:
        return _fail(str(exc))

    try:
        result = run_sim(cfg)
    except GenerationError as exc:
        return _fail(str(exc))

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_trace_csv(outdir / "trace.csv", result)
    write_estimates_csv(outdir / "estimates.csv", result)
    write_summary_json(outdir / "summary.json", result)
    snapshot_paths = write_snapshots(outdir, result)

    print(f"status: {result.status}")
    print(f"steps_recorded: {result.times.size}")
    print(f"min_lambda4: {_fmt(result.lambda4.min())}")
    print(f"min_lambda2: {_fmt(result.lambda2.min())}")
    print(f"min_dist: {_fmt(result.min_dist.min())}")
    print(f"outputs: {outdir / 'trace.csv'} {outdir / 'estimates.csv'} {outdir / 'summary.json'}")
    if snapshot_paths:
        print(f"snapshots: {len(snapshot_paths)}")
    if result.status == "breach":
        print(
            f"barrier breached at step {result.breach_step} "
            f"(index {_fmt(result.breach_value)})",
            file=sys.stderr,
        )
        return 1
    return 0


# ------------------------------------------------------------------- parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmrig",
        description="Formation rigidity: analysis, eigenvalue estimation, closed-loop simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser(
        "analyze",
        help="rigidity report for a framework file; exit 0 iff rigid",
    )
    p_analyze.add_argument("framework", help="framework JSON file")
    p_analyze.add_argument("--out", default=None, help="directory for analysis.txt")
    p_analyze.set_defaults(func=_analyze)

    p_estimate = sub.add_parser(
        "estimate",
        help="convergence comparison of the eigenvalue estimators on one framework",
    )
    p_estimate.add_argument("framework", help="framework JSON file (must be rigid)")
    p_estimate.add_argument(
        "--method",
        choices=("power", "inverse", "both"),
        default="both",
        help="which estimator(s) to run (default: both)",
    )
    p_estimate.add_argument(
        "--mu",
        default="0.5",
        help="comma-separated shift fractions in (0,1); each shift is the "
        "fraction times the exactly computed rigidity index (default: 0.5)",
    )
    p_estimate.add_argument(
        "--iterations",
        type=int,
        default=100,
        help="power-iteration budget (default: 100)",
    )
    p_estimate.add_argument(
        "--tol",
        type=float,
        default=1e-3,
        help="absolute tolerance for iterations-to-tolerance (default: 1e-3)",
    )
    p_estimate.add_argument(
        "--warm-start",
        action="store_true",
        help="start from the exactly computed eigenvector instead of a random vector",
    )
    p_estimate.add_argument("--seed", type=int, default=0, help="start-vector seed")
    p_estimate.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="estimation config override, dotted keys (e.g. budgets.outer_cycles=30)",
    )
    p_estimate.add_argument("--out", default=".", help="directory for estimate_series.csv")
    p_estimate.set_defaults(func=_estimate)

    p_simulate = sub.add_parser(
        "simulate",
        help="closed-loop run from a scenario file; exit 0 iff the barrier held",
    )
    p_simulate.add_argument("config", help="scenario JSON file")
    p_simulate.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_simulate.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="scenario override, dotted keys (e.g. control.eps=2.0, estimator=distributed)",
    )
    p_simulate.add_argument("--out", default=".", help="output directory (default: .)")
    p_simulate.set_defaults(func=_simulate)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
