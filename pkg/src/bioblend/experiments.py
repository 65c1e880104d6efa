"""Run configuration, instance ingestion and the demand-sweep experiments behind the CLI.

Every run writes into its own directory: one tab-separated table per mode, a
``summary.json`` and a ``timing.log``. Tables and summary depend only on the
configuration; wall-clock numbers live in the log alone.
"""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .centralized import SearchFailure, blend_percentages, saa_binary_search
from .decentralized import compare_centralized, heuristic_inner, heuristic_solve
from .io import ingest_files, thermal_requirement_for_demand
from .lp import ResourceLimitError, SolverError
from .model import ModelError, ProblemInstance, RefinerySpec
from .sampling import dump_scenarios, sample_scenarios
from .synthetic import SyntheticConfig, generate_synthetic
from .validation import (RISK_TABLE_COLUMNS, check_scenarios, posterior_feasibility, risk_table_row,
                         saa_lower_bound, worker_count)

MODES = ("centralized", "decentralized", "gap", "validate")
DEFAULT_DEMANDS = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8)


@dataclass(frozen=True)
class RunConfig:
    mode: str = "centralized"
    suppliers: Optional[str] = None
    biomass: Optional[str] = None
    curves: Optional[str] = None
    ash_limit: float = 1.0
    thermal_gbtu: Optional[float] = None  # 10^9 BTU; derived from demand when absent
    risk_ash: float = 0.2
    risk_thermal: float = 0.2
    inner_risk_ash: float = 0.0
    inner_risk_thermal: float = 0.0
    N: int = 50
    N_check: int = 1000
    M: int = 10
    seed: int = 0
    replications: int = 1
    demands: tuple[float, ...] = DEFAULT_DEMANDS
    sample_sizes: tuple[int, ...] = ()
    output_dir: str = "runs"
    nu: int = 5
    search_delta: Optional[float] = None
    eps: float = 0.0
    confidence_delta: float = 0.05
    n_suppliers: int = 10

    def __post_init__(self):
        if self.mode not in MODES:
            raise ModelError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("risk_ash", "risk_thermal", "inner_risk_ash", "inner_risk_thermal", "confidence_delta"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ModelError(f"{name} must lie in [0, 1), got {v}")
        if self.N < 1 or self.M < 1 or self.replications < 1 or self.N_check < 1:
            raise ModelError("N, N_check, M and replications must be positive")
        if any(n < 1 for n in self.sample_sizes):
            raise ModelError("sample sizes must be positive")
        if not self.demands or any(not (d > 0) for d in self.demands):
            raise ModelError("demand levels must be positive")
        if self.nu < 1:
            raise ModelError("nu must be at least 1")
        if self.thermal_gbtu is not None and self.thermal_gbtu <= 0:
            raise ModelError("thermal requirement must be positive")
        files = (self.suppliers, self.curves)
        if any(f is not None for f in files) and not all(f is not None for f in files):
            raise ModelError("supplier and curve files go together")

    @property
    def synthetic(self) -> bool:
        return self.suppliers is None

    def refinery(self, demand: float) -> RefinerySpec:
        tau = thermal_requirement_for_demand(demand) if self.thermal_gbtu is None else self.thermal_gbtu * 1000.0
        return RefinerySpec(self.ash_limit, tau, self.risk_ash, self.risk_thermal,
                            self.inner_risk_ash, self.inner_risk_thermal)


def ingest(config: RunConfig, demand: Optional[float] = None, replication: int = 0) -> ProblemInstance:
    """Instance for one sweep point: parsed files, or a synthetic draw seeded by seed + replication."""
    demand = config.demands[0] if demand is None else demand
    if config.synthetic:
        syn = SyntheticConfig(n_suppliers=config.n_suppliers, ash_limit=config.ash_limit,
                              risk_ash=config.risk_ash, risk_thermal=config.risk_thermal,
                              inner_risk_ash=config.inner_risk_ash, inner_risk_thermal=config.inner_risk_thermal)
        inst = generate_synthetic(demand, config.seed + replication, syn)
        return inst.replace_refinery(thermal_requirement=config.refinery(demand).thermal_requirement)
    return ingest_files(config.suppliers, config.biomass, config.curves, config.refinery(demand))


# ---------------------------------------------------------------------
# one sweep point

def _point(config: RunConfig, demand: float, rep: int) -> tuple[dict, float]:
    t0 = time.perf_counter()
    inst = ingest(config, demand, rep)
    sc = sample_scenarios(inst, config.N, config.seed, stream="optimize", replication=rep)
    row: dict = {"demand": demand, "replication": rep}
    if config.mode == "centralized":
        res, w = saa_binary_search(inst, sc, eps=config.eps, delta=config.search_delta)
        x = res.solution.quantities
        row.update(_cost_cols(inst, res.supply_cost, x))
        row.update({"ash_violations": res.violations[0], "thermal_violations": res.violations[1],
                    "upper_bound": res.upper_bound, "lower_bound": res.lower_bound,
                    "error_gap_pct": 100.0 * res.error_gap, "lam": w.lam, "mu": w.mu})
    elif config.mode == "decentralized":
        res, w = saa_binary_search(inst, sc, eps=config.eps, delta=config.search_delta,
                                   inner=heuristic_inner(config.nu))
        row.update(_cost_cols(inst, res.supply_cost, res.purchases))
        row.update({"ash_violations": res.violations[0], "thermal_violations": res.violations[1],
                    "objective": res.objective, "status": res.status, "lam": w.lam, "mu": w.mu})
    elif config.mode == "gap":
        central, w = saa_binary_search(inst, sc, eps=config.eps, delta=config.search_delta)
        dec = heuristic_solve(inst, sc, w.lam, w.mu, config.nu)
        g = compare_centralized(inst, central, dec)
        row.update({"centralized_ub": g.centralized_ub, "centralized_lb": g.centralized_lb,
                    "decentralized": g.decentralized, "delta_max": g.delta_max,
                    "raw_gap_pct": g.raw_gap_pct, "corrected_gap_pct": g.corrected_gap_pct,
                    "ordering_ok": g.ordering_ok, "lam": w.lam, "mu": w.mu})
    else:
        raise ModelError(f"mode {config.mode!r} is not a sweep mode")
    return row, time.perf_counter() - t0


def _cost_cols(inst: ProblemInstance, cost: float, x) -> dict:
    x = np.asarray(x, dtype=float)
    tons = float(x.sum())
    out = {"cost": cost, "cost_per_dt": cost / tons if tons > 0 else 0.0}
    out.update({f"pct_{k}": v for k, v in blend_percentages(inst, x).items()})
    return out


def _point_job(args):
    config, demand, rep = args
    try:
        return _point(config, demand, rep)
    except SearchFailure as e:
        raise SearchFailure(f"{config.mode} at demand {demand:g}, replication {rep}", e.diagnostics) from e
    except (SolverError, ResourceLimitError) as e:
        raise type(e)(f"{config.mode} at demand {demand:g}, replication {rep}: {e}") from e


# ---------------------------------------------------------------------
# reports

def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else f"{v:.10g}"
    return str(v)


def write_table(path, rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> Path:
    path = Path(path)
    cols = list(columns) if columns is not None else (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([format_value(r.get(c, "")) for c in cols])
    return path


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def write_summary(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def _aggregate(rows: list[dict], keys: Sequence[str]) -> list[dict]:
    out = []
    for d in sorted({r["demand"] for r in rows}):
        sub = [r for r in rows if r["demand"] == d]
        agg = {"demand": d, "runs": len(sub)}
        for k in keys:
            vals = [float(r[k]) for r in sub if k in r]
            if vals:
                agg[f"{k}_avg"] = float(np.mean(vals))
                agg[f"{k}_min"] = float(np.min(vals))
                agg[f"{k}_max"] = float(np.max(vals))
        out.append(agg)
    return out


@dataclass
class RunOutput:
    directory: Path
    tables: dict[str, Path]
    summary: Path
    timing_log: Path
    rows: list[dict] = field(default_factory=list)


def _run_sweep(config: RunConfig, out: Path, log) -> tuple[dict, list[dict]]:
    jobs = [(config, d, r) for d in config.demands for r in range(config.replications)]
    workers = worker_count()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_job, jobs))
    else:
        results = [_point_job(j) for j in jobs]
    rows = []
    for (_, d, r), (row, secs) in zip(jobs, results):
        rows.append(row)
        log.write(f"{config.mode}\tdemand={d:g}\treplication={r}\tseconds={secs:.4f}\n")
    key = {"centralized": ("cost", "cost_per_dt", "error_gap_pct"),
           "decentralized": ("cost", "cost_per_dt", "objective"),
           "gap": ("raw_gap_pct", "corrected_gap_pct")}[config.mode]
    tables = {config.mode: write_table(out / f"{config.mode}.tsv", rows)}
    agg = _aggregate(rows, key)
    tables[f"{config.mode}_by_demand"] = write_table(out / f"{config.mode}_by_demand.tsv", agg)
    return tables, rows


def _run_validate(config: RunConfig, out: Path, log) -> tuple[dict, list[dict], dict]:
    demand = config.demands[0]
    inst = ingest(config, demand, 0)
    check = check_scenarios(inst, config.N_check, config.seed)
    dump_scenarios(check, out / "check_scenarios.csv")
    sizes = config.sample_sizes or (config.N,)
    table, sol_rows = [], []
    labels = [f"x_{inst.suppliers[i].id}_{inst.biomass[j].id}" for i, j in inst.pairs]
    for N in sizes:
        t0 = time.perf_counter()
        certs, costs = [], []
        for m in range(config.M):
            sc = sample_scenarios(inst, N, config.seed, stream="replicate", replication=m)
            res, _ = saa_binary_search(inst, sc, eps=config.eps, delta=config.search_delta)
            x = res.solution.quantities
            certs.append(posterior_feasibility(x, inst, config.N_check, config.confidence_delta, config.seed,
                                               scenarios=check))
            costs.append(res.supply_cost)
            sol = {"N": N, "replication": m, "cost": res.supply_cost}
            sol.update({lab: float(v) for lab, v in zip(labels, x)})
            sol_rows.append(sol)
        table.append(risk_table_row(N, certs, costs))
        log.write(f"validate\tN={N}\treplications={config.M}\tseconds={time.perf_counter() - t0:.4f}\n")
    tables = {"validate": write_table(out / "validate.tsv", table, RISK_TABLE_COLUMNS),
              "solutions": write_table(out / "validate_solutions.tsv", sol_rows)}
    extra: dict = {"demand": demand, "check_scenarios": "check_scenarios.csv"}
    if config.inner_risk_ash == 0 and config.inner_risk_thermal == 0:
        lb = saa_lower_bound(inst, config.N, config.M, config.confidence_delta, config.seed)
        extra["lower_bound"] = {"T": lb.T, "bound": lb.bound, "pi_ash": lb.pi_ash, "pi_thermal": lb.pi_thermal,
                                "objectives": list(lb.objectives)}
    return tables, table, extra


def run_experiment(config: RunConfig) -> RunOutput:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "timing.log"
    with open(log_path, "w") as log:
        if config.mode == "validate":
            tables, rows, extra = _run_validate(config, out, log)
        else:
            tables, rows = _run_sweep(config, out, log)
            extra = {}
    cfg = {k: v for k, v in asdict(config).items() if k != "output_dir"}
    payload = {"config": cfg, "tables": {k: p.name for k, p in tables.items()}, **extra}
    if config.mode != "validate":
        payload["by_demand"] = _aggregate(rows, [k for k in rows[0] if k not in ("demand", "replication", "status")])
    summary = write_summary(out / "summary.json", payload)
    return RunOutput(out, tables, summary, log_path, rows)
