"""Grid experiments: generate, solve, diagnose, aggregate.

A spec lists grid cells (``n`` with ``d`` or ``p``), the number of seeds per
cell and which diagnostics to compute. Every replicate gets its own seed
derived from ``(master_seed, cell index, replicate index)``, so any single
run can be reproduced in isolation.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .factor_graph import build, census, components
from .formula import save_dimacs
from .generator import GenParams, generate
from .residual import solve_planted
from .wp import WarningPropagation, WPConfig

DIAGNOSTICS = ("core", "components")


@dataclass
class ExperimentSpec:
    cells: list[dict]
    seeds: int = 1
    master_seed: int = 0
    max_passes: int | None = None
    diagnostics: list[str] = field(default_factory=list)
    workers: int = 1
    name: str = "experiment"

    def __post_init__(self):
        if not self.cells:
            raise ValueError("experiment grid is empty")
        if self.seeds < 1:
            raise ValueError("seeds must be at least 1")
        for c in self.cells:
            if "n" not in c or (("d" in c) == ("p" in c)):
                raise ValueError(f"cell {c} needs n and exactly one of d, p")
        bad = set(self.diagnostics) - set(DIAGNOSTICS)
        if bad:
            raise ValueError(f"unknown diagnostics {sorted(bad)}")

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        path = Path(path)
        text = path.read_text()
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ImportError:  # Python < 3.11
                import tomli as tomllib
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
        return cls(**data)


def run_seed(master: int, cell: int, rep: int) -> int:
    return int(np.random.SeedSequence([master, cell, rep]).generate_state(1, dtype=np.uint64)[0])


def _params(cell: dict, seed: int) -> GenParams:
    return GenParams(n=int(cell["n"]), d=cell.get("d"), p=cell.get("p"), seed=seed)


def first_pass_inputs(graph, seed: int):
    """Initial messages and first-pass edge order that ``wp.run`` uses with ``seed``."""
    w = WarningPropagation(graph, seed)
    return w.initial, w.next_order()


def run_one(cell_index: int, cell: dict, rep: int, spec: ExperimentSpec, out_dir: str | None = None) -> dict:
    seed = run_seed(spec.master_seed, cell_index, rep)
    row: dict = {"cell": cell_index, "replicate": rep, "seed": seed}
    try:
        t0 = time.perf_counter()
        inst = generate(_params(cell, seed))
        t_gen = time.perf_counter() - t0
        res = solve_planted(inst, WPConfig(seed=seed, max_passes=spec.max_passes))
        rep_ = res.report
        row.update(
            status=rep_.status,
            success=rep_.status == "SAT",
            converged=rep_.converged,
            passes=rep_.passes,
            assigned_fraction=rep_.assigned_fraction,
            psi_equals_phi=rep_.psi_equals_phi,
            residual_clauses=rep_.residual_clauses,
            residual_max_component=rep_.residual_components.get("max_size", 0),
            m=inst.formula.m,
            t_generate=t_gen,
            t_wp=rep_.timings.get("wp", 0.0),
            t_simplify=rep_.timings.get("simplify", 0.0),
            t_residual=rep_.timings.get("residual", 0.0),
        )
        if "core" in spec.diagnostics or "components" in spec.diagnostics:
            graph = build(inst.formula)
            alpha, order = first_pass_inputs(graph, seed)
            params = analysis.StabilityParams(_params(cell, seed).density)
            core = analysis.core(inst, order, alpha, params)
            row["core_fraction"] = core.fraction
            if "components" in spec.diagnostics:
                cen = census(components(build(analysis.noncore_formula(inst, core.core))))
                row["noncore_max_component"] = cen["max_size"]
                row["noncore_multicyclic"] = cen["multicyclic"]
        if not row["success"] and out_dir:
            fail = Path(out_dir) / "failures"
            fail.mkdir(parents=True, exist_ok=True)
            stem = fail / f"cell{cell_index}_rep{rep}"
            save_dimacs(inst.formula, stem.with_suffix(".cnf"), [f"seed {seed}", f"status {rep_.status}"])
            stem.with_suffix(".psi.json").write_text(json.dumps(res.wp.assignment.tolist()))
            stem.with_suffix(".planted.json").write_text(json.dumps(inst.planted.tolist()))
    except Exception as exc:  # recorded, never aborts the grid
        row.update(status="ERROR", success=False, error=repr(exc))
    return row


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return float(np.mean(xs)) if xs else math.nan


def aggregate(cell: dict, rows: list[dict]) -> dict:
    agg = {"n": cell["n"], "d": cell.get("d"), "p": cell.get("p"), "runs": len(rows)}
    agg["success_rate"] = _mean([float(r.get("success", False)) for r in rows])
    agg["converged_rate"] = _mean([float(r.get("converged", False)) for r in rows])
    agg["mean_passes"] = _mean([r.get("passes") for r in rows])
    agg["max_passes"] = max((r.get("passes", 0) for r in rows), default=0)
    agg["mean_assigned_fraction"] = _mean([r.get("assigned_fraction") for r in rows])
    agg["min_assigned_fraction"] = min((r.get("assigned_fraction", 0.0) for r in rows), default=math.nan)
    eq = [r.get("psi_equals_phi") for r in rows if r.get("psi_equals_phi") is not None]
    agg["psi_equals_phi_rate"] = _mean([float(x) for x in eq])
    agg["residual_max_component"] = max((r.get("residual_max_component", 0) for r in rows), default=0)
    if any("core_fraction" in r for r in rows):
        agg["mean_core_fraction"] = _mean([r.get("core_fraction") for r in rows])
    if any("noncore_max_component" in r for r in rows):
        agg["noncore_max_component"] = max(r.get("noncore_max_component", 0) for r in rows)
        agg["noncore_multicyclic_runs"] = sum(1 for r in rows if r.get("noncore_multicyclic", 0) > 0)
    for stage in ("generate", "wp", "simplify", "residual"):
        agg[f"mean_t_{stage}"] = _mean([r.get(f"t_{stage}") for r in rows])
    return agg


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    cells: list[dict]
    runs: list[dict]

    def to_dict(self) -> dict:
        return {"spec": asdict(self.spec), "cells": self.cells, "runs": self.runs}

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(self.to_dict(), indent=2, default=_jsonable))
        keys: list[str] = []
        for c in self.cells:
            keys += [k for k in c if k not in keys]
        with open(out / "report.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys)
            w.writeheader()
            for c in self.cells:
                w.writerow({k: ("" if c.get(k) is None else repr(c[k]) if isinstance(c.get(k), float) else c.get(k))
                            for k in keys})


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def run_experiment(spec: ExperimentSpec, out_dir=None) -> ExperimentReport:
    jobs = [(ci, cell, r) for ci, cell in enumerate(spec.cells) for r in range(spec.seeds)]
    od = str(out_dir) if out_dir is not None else None
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as ex:
            futs = [ex.submit(run_one, ci, cell, r, spec, od) for ci, cell, r in jobs]
            rows = [f.result() for f in futs]
    else:
        rows = [run_one(ci, cell, r, spec, od) for ci, cell, r in jobs]
    cells = [aggregate(cell, [r for r in rows if r["cell"] == ci]) for ci, cell in enumerate(spec.cells)]
    report = ExperimentReport(spec, cells, rows)
    if out_dir is not None:
        report.write(out_dir)
    return report
