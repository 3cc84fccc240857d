"""Benchmark harness: run methods on instances, compute PG / PI / wins, write CSV reports."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import bnb
from .heuristic import HeuristicResult, neural_dive, relax_and_round
from .instance import MbqpInstance, check_feasibility
from .metrics import Trajectory, count_wins, gap_series, primal_gap, primal_integral

METHODS = ("neural_dive", "relax_round", "bnb")


@dataclass
class BenchConfig:
    instances: Sequence[MbqpInstance]
    methods: Sequence[str] = METHODS
    models: Mapping[str, object] = field(default_factory=dict)  # label -> model
    node_budget: int = 200_000
    relax_budget: int = 5000
    p: float | Mapping[str, float] = 0.7


@dataclass
class BenchReport:
    rows: list[dict]
    summary: dict[str, dict]
    series: list[dict]

    def write_csv(self, path, include_wall: bool = True) -> None:
        cols = ["instance", "method", "pg", "pi", "feasible"] + (["wall_ms"] if include_wall else [])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in self.rows:
                w.writerow([r[c] if c != "feasible" else int(r[c]) for c in cols])

    def write_series(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["instance", "method", "t", "gap"])
            for s in self.series:
                w.writerow([s["instance"], s["method"], s["t"], s["gap"]])


def _run_bnb(inst: MbqpInstance, node_budget: int) -> HeuristicResult:
    res = bnb.solve(inst, node_budget)
    sol = res.best if res.best is not None and check_feasibility(inst, res.best.x)[0] else None
    return HeuristicResult(sol, res.trajectory if sol else [], 0.0, "bnb", res.nodes_explored)


def _method_runs(cfg: BenchConfig) -> list[tuple[str, callable]]:
    runs = []
    for m in cfg.methods:
        if m == "neural_dive":
            if not cfg.models:
                raise ValueError("neural_dive needs at least one model")
            for label, model in cfg.models.items():
                p = cfg.p[label] if isinstance(cfg.p, Mapping) else cfg.p
                runs.append((f"neural_dive:{label}", lambda inst, model=model, p=p, label=label: neural_dive(
                    inst, model, p, cfg.node_budget, method=f"neural_dive:{label}")))
        elif m == "relax_round":
            runs.append(("relax_round", lambda inst: relax_and_round(inst, cfg.relax_budget, cfg.node_budget)))
        elif m == "bnb":
            runs.append(("bnb", lambda inst: _run_bnb(inst, cfg.node_budget)))
        else:
            raise ValueError(f"unknown method {m!r}")
    return runs


def evaluate_results(
    results: Mapping[str, Mapping[str, HeuristicResult]],
    horizon: float,
    wall_ms: Mapping[tuple[str, str], float] | None = None,
) -> BenchReport:
    """Score ``results[instance][method]`` against the cross-method best objective."""
    rows, series = [], []
    pi_table: dict[str, dict[str, float]] = {}
    methods: list[str] = []
    for inst_name, by_method in results.items():
        found = [r.solution.objective for r in by_method.values() if r.solution is not None]
        v_star = min(found) if found else 0.0
        pi_table[inst_name] = {}
        for m, r in by_method.items():
            if m not in methods:
                methods.append(m)
            traj = Trajectory(r.trajectory, horizon)
            pg = primal_gap(r.solution.objective if r.solution else None, v_star, r.solution is not None)
            pi = primal_integral(traj, v_star)
            pi_table[inst_name][m] = pi
            rows.append({
                "instance": inst_name, "method": m, "pg": pg, "pi": pi,
                "feasible": r.solution is not None,
                "wall_ms": round((wall_ms or {}).get((inst_name, m), 0.0), 3),
            })
            series += [{"instance": inst_name, "method": m, "t": t, "gap": g} for t, g in gap_series(traj, v_star)]
    wins = count_wins(pi_table, methods) if methods else {}
    summary = {}
    for m in methods:
        mine = [r for r in rows if r["method"] == m]
        summary[m] = {
            "mean_pg": float(np.mean([r["pg"] for r in mine])),
            "mean_pi": float(np.mean([r["pi"] for r in mine])),
            "wins": wins[m],
            "feasibility_rate": float(np.mean([r["feasible"] for r in mine])),
        }
    return BenchReport(rows, summary, series)


def run_experiment(cfg: BenchConfig) -> BenchReport:
    """Every enabled method on every instance with a shared node budget (the time axis)."""
    runs = _method_runs(cfg)
    results: dict[str, dict[str, HeuristicResult]] = {}
    wall: dict[tuple[str, str], float] = {}
    for inst in cfg.instances:
        results[inst.name] = {}
        for label, fn in runs:
            t0 = time.perf_counter()
            results[inst.name][label] = fn(inst)
            wall[(inst.name, label)] = 1000.0 * (time.perf_counter() - t0)
    return evaluate_results(results, cfg.node_budget, wall)
