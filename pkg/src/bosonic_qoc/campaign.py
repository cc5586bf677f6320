"""Sweep campaigns over (angle, tau, restart) cells and their percentile aggregation."""

from __future__ import annotations

import logging
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .io import check_roundtrip, write_json, write_rows
from .objective import SynthesisProblem
from .optimizer import run_restart
from .resonance import carrier_sets, enumerate_transitions
from .targets import build_layer

log = logging.getLogger(__name__)

LONG_COLUMNS = ["gate", "angle_over_pi", "tau_ns", "seed", "fidelity", "leakage", "iterations",
                "evals", "cpu_s", "objective_leakage", "converged", "status"]
PER_ANGLE_COLUMNS = ["gate", "angle_over_pi", "tau_ns", "restarts", "best_fidelity", "mean_fidelity",
                     "p20_fidelity", "p80_fidelity", "mean_leakage", "max_leakage", "cpu_per_eval_s"]
AGGREGATE_COLUMNS = ["gate", "tau_ns", "angles", "mean_fidelity", "mean_best_fidelity",
                     "mean_p20_fidelity", "mean_p80_fidelity", "max_leakage", "cpu_per_eval_s"]


@dataclass(frozen=True)
class Cell:
    gate: str
    angle_over_pi: float
    tau_ns: float
    seed: int


def build_problem(config: ExperimentConfig, angle_over_pi: float, tau_ns: float) -> SynthesisProblem:
    system = config.system
    table = enumerate_transitions(system, config.frame)
    carriers = carrier_sets(table)
    expected = config.pulse.expected_carriers
    if expected is not None and table.total_distinct() != expected:
        raise ValueError(f"found {table.total_distinct()} distinct carriers, config expects {expected}")
    target = build_layer(system, config.gate.layer, angle_over_pi * math.pi, config.gate.graph)
    return SynthesisProblem(system, target, carriers, tau_ns * 1e-9, config.pulse.splines,
                            config.pulse.steps, config.pulse.method, config.frame)


def cells(config: ExperimentConfig) -> list[Cell]:
    opt = config.optimizer
    return [
        Cell(config.gate.layer, a, t, opt.seed + r)
        for a in config.gate.angles_over_pi
        for t in config.pulse.durations_ns
        for r in range(opt.restarts)
    ]


def run_cell(config: ExperimentConfig, cell: Cell) -> dict:
    """One restart; failures become a row with status 'error: ...' instead of propagating."""
    row = {"gate": cell.gate, "angle_over_pi": cell.angle_over_pi, "tau_ns": cell.tau_ns, "seed": cell.seed}
    try:
        problem = build_problem(config, cell.angle_over_pi, cell.tau_ns)
        _, rec = run_restart(problem, config.optimizer, cell.seed)
    except Exception as exc:  # isolate the cell, keep the campaign going
        log.warning("cell %s failed: %s", cell, exc)
        row.update(fidelity=math.nan, leakage=math.nan, iterations=0, evals=0, cpu_s=0.0,
                   objective_leakage=math.nan, converged=False, status=f"error: {type(exc).__name__}")
        return row
    row.update(fidelity=rec.fidelity, leakage=rec.max_guard_population, iterations=rec.iterations,
               evals=rec.evaluations, cpu_s=rec.cpu_time, objective_leakage=rec.leakage,
               converged=rec.converged, status=rec.status)
    return row


def _cell_job(args):
    return run_cell(*args)


def run_cells(config: ExperimentConfig, todo: list[Cell], workers: int = 1) -> list[dict]:
    """Rows in cell order regardless of completion order."""
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_cell_job, [(config, c) for c in todo]))
    return [run_cell(config, c) for c in todo]


def _percentile(values, q):
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    return float(np.percentile(values, q)) if values.size else math.nan


def _finite_mean(values):
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    return float(values.mean()) if values.size else math.nan


def _finite_max(values):
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    return float(values.max()) if values.size else math.nan


def per_angle(rows: list[dict]) -> list[dict]:
    """Statistics across restarts for each (gate, angle, tau)."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["gate"], r["angle_over_pi"], r["tau_ns"]), []).append(r)
    out = []
    for (gate, angle, tau), rs in groups.items():
        fid = [r["fidelity"] for r in rs]
        leak = [r["leakage"] for r in rs]
        evals = sum(r["evals"] for r in rs)
        out.append({
            "gate": gate, "angle_over_pi": angle, "tau_ns": tau, "restarts": len(rs),
            "best_fidelity": _finite_max(fid),
            "mean_fidelity": _finite_mean(fid),
            "p20_fidelity": _percentile(fid, 20),
            "p80_fidelity": _percentile(fid, 80),
            "mean_leakage": _finite_mean(leak),
            "max_leakage": _finite_max(leak),
            "cpu_per_eval_s": sum(r["cpu_s"] for r in rs) / evals if evals else 0.0,
        })
    return out


def aggregate(angle_rows: list[dict]) -> list[dict]:
    """Means across angles per (gate, tau); the first column is the black line of a fidelity-vs-tau plot."""
    groups: dict = {}
    for r in angle_rows:
        groups.setdefault((r["gate"], r["tau_ns"]), []).append(r)
    out = []
    for (gate, tau), rs in groups.items():
        out.append({
            "gate": gate, "tau_ns": tau, "angles": len(rs),
            "mean_fidelity": _finite_mean([r["mean_fidelity"] for r in rs]),
            "mean_best_fidelity": _finite_mean([r["best_fidelity"] for r in rs]),
            "mean_p20_fidelity": _finite_mean([r["p20_fidelity"] for r in rs]),
            "mean_p80_fidelity": _finite_mean([r["p80_fidelity"] for r in rs]),
            "max_leakage": _finite_max([r["max_leakage"] for r in rs]),
            "cpu_per_eval_s": _finite_mean([r["cpu_per_eval_s"] for r in rs]),
        })
    return out


def run_sweep(config: ExperimentConfig, out_dir, workers: int = 1, timing: bool = True) -> dict:
    """Run every cell and write long.csv, per_angle.csv, aggregate.csv and manifest.json.

    With ``timing=False`` the CPU-time columns are zeroed so that reruns are
    byte-identical.
    """
    todo = cells(config)
    rows = run_cells(config, todo, workers)
    if not timing:
        for r in rows:
            r["cpu_s"] = 0.0
    angle_rows = per_angle(rows)
    agg_rows = aggregate(angle_rows)
    paths = {
        "long": write_rows(out_dir / "long.csv", LONG_COLUMNS, rows),
        "per_angle": write_rows(out_dir / "per_angle.csv", PER_ANGLE_COLUMNS, angle_rows),
        "aggregate": write_rows(out_dir / "aggregate.csv", AGGREGATE_COLUMNS, agg_rows),
    }
    check_roundtrip(paths["long"], LONG_COLUMNS, len(rows))
    check_roundtrip(paths["per_angle"], PER_ANGLE_COLUMNS, len(angle_rows))
    check_roundtrip(paths["aggregate"], AGGREGATE_COLUMNS, len(agg_rows))
    manifest = {
        "tool": "bosonic-qoc",
        "version": __version__,
        "config_hash": config.config_hash,
        "seeds": sorted({c.seed for c in todo}),
        "cells": len(todo),
        "failed_cells": sum(1 for r in rows if str(r["status"]).startswith("error")),
        "numpy": np.__version__,
    }
    if timing:
        manifest["platform"] = platform.platform()
    write_json(out_dir / "manifest.json", manifest)
    return {"rows": rows, "per_angle": angle_rows, "aggregate": agg_rows, "paths": paths}
