"""File formats: framework and scenario JSON, trace/estimate CSV, summaries.

All numeric text is written with repr(float(x)), which round-trips every
double exactly; CSV rows end in a bare newline on every platform so equal
runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np

from .control import ControlParams
from .estimation import (
    ConsensusGains,
    DeflationParams,
    EstimationBudgets,
    EstimationConfig,
)
from .graphs import Graph, ProximityParams, WeightedGraph, reweight
from .rigidity import Framework
from .sim import ScenarioConfig, SimResult

__all__ = [
    "FormatError",
    "load_framework",
    "save_framework",
    "load_scenario",
    "save_scenario",
    "scenario_to_dict",
    "scenario_from_dict",
    "estimation_from_dict",
    "write_trace_csv",
    "write_estimates_csv",
    "write_summary_json",
    "write_snapshots",
]


class FormatError(ValueError):
    """The file does not follow the documented structure."""


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- framework

def save_framework(
    path,
    f: Framework,
    params: ProximityParams,
    include_edges: bool = True,
    include_weights: bool = True,
    extra: dict | None = None,
) -> None:
    """Write a framework file.

    Without edges the file stores only positions and the proximity rule,
    which regenerates the framework exactly; with edges (and optionally
    weights) the stored graph is authoritative.
    """
    doc: dict = {"dimension": f.dim}
    if extra:
        doc.update(extra)
    doc["positions"] = [[float(x) for x in row] for row in f.positions]
    if include_edges:
        doc["edges"] = [[i + 1, j + 1] for i, j in f.graph.edges]
        if include_weights:
            doc["weights"] = [float(w) for w in f.weights]
    doc["params"] = {"kappa": params.kappa, "sigma_prime": params.sigma_prime}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


_FRAMEWORK_KEYS = {"dimension", "positions", "edges", "weights", "params", "t"}


def load_framework(path) -> tuple[Framework, ProximityParams]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object at top level")
    unknown = set(doc) - _FRAMEWORK_KEYS
    if unknown:
        raise FormatError(f"{path}: unknown fields {sorted(unknown)}")
    for key in ("dimension", "positions", "params"):
        if key not in doc:
            raise FormatError(f"{path}: missing required field {key!r}")

    dim = doc["dimension"]
    if dim not in (2, 3):
        raise FormatError(f"{path}: dimension must be 2 or 3, got {dim!r}")
    positions = np.asarray(doc["positions"], dtype=float)
    if positions.ndim != 2 or positions.shape[1] != dim:
        raise FormatError(
            f"{path}: positions must be an n x {dim} array, got shape {positions.shape}"
        )
    raw = doc["params"]
    if not isinstance(raw, dict) or set(raw) != {"kappa", "sigma_prime"}:
        raise FormatError(f"{path}: params must have exactly kappa and sigma_prime")
    try:
        params = ProximityParams(float(raw["kappa"]), float(raw["sigma_prime"]))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc

    n = positions.shape[0]
    try:
        if "edges" in doc:
            pairs = [(int(i) - 1, int(j) - 1) for i, j in doc["edges"]]
            for i, j in pairs:
                if not (0 <= i < n and 0 <= j < n):
                    raise FormatError(
                        f"{path}: edge ({i + 1},{j + 1}) out of range for n={n} (1-based)"
                    )
            g = Graph.from_edges(n, pairs)
            if "weights" in doc:
                wg = WeightedGraph(g, np.asarray(doc["weights"], dtype=float))
                f = Framework(wg, positions)
            else:
                f = Framework(reweight(g, positions, params), positions)
        else:
            if "weights" in doc:
                raise FormatError(f"{path}: weights need an explicit edges field")
            f = Framework.from_proximity(positions, params)
    except FormatError:
        raise
    except (ValueError, TypeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return f, params


# ----------------------------------------------------------------- scenario

def _to_jsonable(value):
    if isinstance(value, np.ndarray):
        return [[float(x) for x in row] for row in value]
    if dataclasses.is_dataclass(value):
        return {
            field.name: _to_jsonable(getattr(value, field.name))
            for field in dataclasses.fields(value)
        }
    return value


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    return _to_jsonable(cfg)


def _build(cls, doc: dict, path):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(doc) - set(fields)
    if unknown:
        raise FormatError(
            f"{path}: unknown {cls.__name__} fields {sorted(unknown)}"
        )
    kwargs = {}
    for name, value in doc.items():
        nested = _NESTED.get((cls, name))
        if nested is not None:
            if not isinstance(value, dict):
                raise FormatError(f"{path}: {name} must be an object")
            value = _build(nested, value, path)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


_NESTED = {
    (ScenarioConfig, "prox"): ProximityParams,
    (ScenarioConfig, "control"): ControlParams,
    (ScenarioConfig, "estimation"): EstimationConfig,
    (EstimationConfig, "gains"): ConsensusGains,
    (EstimationConfig, "deflation"): DeflationParams,
    (EstimationConfig, "budgets"): EstimationBudgets,
}


def scenario_from_dict(doc: dict, path="<scenario>") -> ScenarioConfig:
    doc = dict(doc)
    positions = doc.get("initial_positions")
    if positions is not None:
        doc["initial_positions"] = np.asarray(positions, dtype=float)
    return _build(ScenarioConfig, doc, path)


def estimation_from_dict(doc: dict, path="<estimation>") -> EstimationConfig:
    return _build(EstimationConfig, doc, path)


def save_scenario(path, cfg: ScenarioConfig) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(cfg), indent=2) + "\n")


def load_scenario(path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object at top level")
    return scenario_from_dict(doc, path)


# ------------------------------------------------------------------- traces

_AXES = "xyz"


def write_trace_csv(path, res: SimResult) -> None:
    """One row per traced state; positions flattened to 1-based columns."""
    n, dim = res.config.n, res.config.dim
    header = ["t", "lambda4", "lambda2", "min_dist", "energy", "edge_count"]
    header += [f"p{i + 1}_{_AXES[a]}" for i in range(n) for a in range(dim)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k in range(res.times.size):
            row = [
                _fmt(res.times[k]),
                _fmt(res.lambda4[k]),
                _fmt(res.lambda2[k]),
                _fmt(res.min_dist[k]),
                _fmt(res.energy[k]),
                str(int(res.edge_count[k])),
            ]
            row += [_fmt(x) for x in res.positions[k].ravel()]
            writer.writerow(row)


def write_estimates_csv(path, res: SimResult) -> None:
    """Per-decision rigidity-index estimates, one column per agent.

    In oracle mode every agent column repeats the exact value, so the
    schema is identical across estimator modes.
    """
    n = res.config.n
    header = ["t"] + [f"lambda_{i + 1}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for k in range(res.est_times.size):
            writer.writerow(
                [_fmt(res.est_times[k])] + [_fmt(x) for x in res.estimates[k]]
            )


def write_summary_json(path, res: SimResult) -> None:
    """Run verdict and the trace extrema; the only place wall time goes.

    Wall time is kept out of the CSVs so identical inputs give
    byte-identical data files.
    """
    doc = {
        "status": res.status,
        "breach_step": res.breach_step,
        "breach_value": res.breach_value,
        "steps_recorded": int(res.times.size),
        "min_lambda4": float(res.lambda4.min()),
        "min_lambda2": float(res.lambda2.min()),
        "lambda2_positive": bool(np.all(res.lambda2 > 0.0)),
        "min_dist": float(res.min_dist.min()),
        "final_lambda4": float(res.lambda4[-1]),
        "edge_count_range": [int(res.edge_count.min()), int(res.edge_count.max())],
        "wall_time_s": res.wall_time,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_snapshots(outdir, res: SimResult) -> list[Path]:
    """One framework file per stored snapshot; the proximity rule in the
    file regenerates the exact framework the run had at that instant."""
    outdir = Path(outdir)
    paths = []
    for k, (t, f) in enumerate(res.snapshots):
        path = outdir / f"snapshot_{k:03d}.json"
        save_framework(
            path, f, res.config.prox,
            include_edges=False, extra={"t": float(t)},
        )
        paths.append(path)
    return paths
