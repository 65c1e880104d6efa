"""A-posteriori feasibility certificates and order-statistic lower bounds for SAA solutions."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from statistics import NormalDist
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import binom

from .centralized import violation_thresholds
from .lp import GE, INFEASIBLE, LE, LPBuilder, LpSolution, SolverError, solve_lp
from .model import BlendSolution, ProblemInstance
from .sampling import ScenarioSet, sample_scenarios, scenario_residuals

_STD_NORMAL = NormalDist()


def worker_count(default: int = 1) -> int:
    """Pool size from BIOBLEND_WORKERS (the only environment knob)."""
    raw = os.environ.get("BIOBLEND_WORKERS", "")
    try:
        return max(1, int(raw)) if raw.strip() else default
    except ValueError:
        return default


# ---------------------------------------------------------------------
# distributions

def binomial_cdf(k: int, p: float, n: int) -> float:
    """P(Bin(n, p) <= k)."""
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n}")
    if int(k) != k or not (0 <= k <= n):
        raise ValueError(f"k must be an integer in [0, n], got {k}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return float(min(1.0, binom.cdf(int(k), int(n), float(p))))


def normal_cdf(x: float) -> float:
    return _STD_NORMAL.cdf(float(x))


def normal_ppf(q: float) -> float:
    if not (0.0 < q < 1.0):
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    return _STD_NORMAL.inv_cdf(float(q))


# ---------------------------------------------------------------------
# feasibility certificate

@dataclass(frozen=True)
class FeasibilityCertificate:
    n_check: int
    p_hat_ash: float
    p_hat_thermal: float
    upper_ash: float
    upper_thermal: float
    delta: float
    risk_ash: float
    risk_thermal: float

    @property
    def feasible_ash(self) -> bool:
        return self.upper_ash <= self.risk_ash

    @property
    def feasible_thermal(self) -> bool:
        return self.upper_thermal <= self.risk_thermal

    @property
    def feasible(self) -> bool:
        return self.feasible_ash and self.feasible_thermal


def upper_confidence(p_hat: float, n: int, delta: float) -> float:
    """One-sided normal-approximation upper limit p_hat + z_{1-delta} sqrt(p_hat(1-p_hat)/n)."""
    u = p_hat + normal_ppf(1.0 - delta) * math.sqrt(max(0.0, p_hat * (1.0 - p_hat)) / n)
    return min(1.0, u)


def check_scenarios(instance: ProblemInstance, n_check: int, seed: int, replication: int = 0) -> ScenarioSet:
    """The fresh sample used for certification; never shares draws with optimisation samples."""
    return sample_scenarios(instance, n_check, seed, stream="validate", replication=replication)


def check_violation_rates(instance: ProblemInstance, scenarios: ScenarioSet, x) -> tuple[float, float]:
    """Violation frequencies, ignoring residuals inside the optimizer's round-off band."""
    x = np.asarray(x, dtype=float)
    ref = instance.refinery
    e1, e2 = scenario_residuals(x, scenarios, ref.ash_limit, ref.thermal_requirement, instance.efficiency)
    t1, t2 = violation_thresholds(instance, scenarios, x)
    return float(np.mean(e1 > t1)), float(np.mean(e2 > t2))


def posterior_feasibility(solution, instance: ProblemInstance, n_check: int, delta: float, seed: int, *,
                          min_check: int = 30, scenarios: Optional[ScenarioSet] = None,
                          beta: Optional[float] = None, gamma: Optional[float] = None) -> FeasibilityCertificate:
    """Certify each chance constraint separately on a fresh sample of size ``n_check``."""
    if n_check < min_check:
        raise ValueError(f"need at least {min_check} check scenarios for the normal approximation")
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    ref = instance.refinery
    beta = ref.risk_ash if beta is None else beta
    gamma = ref.risk_thermal if gamma is None else gamma
    if not (0.0 <= beta <= 1.0 and 0.0 <= gamma <= 1.0):
        raise ValueError("risk levels must lie in [0, 1]")
    x = solution.quantities if isinstance(solution, BlendSolution) else np.asarray(solution, dtype=float)
    sc = scenarios if scenarios is not None else check_scenarios(instance, n_check, seed)
    if sc.N != n_check:
        raise ValueError("supplied scenario count differs from n_check")
    p1, p2 = check_violation_rates(instance, sc, x)
    return FeasibilityCertificate(n_check, p1, p2, upper_confidence(p1, n_check, delta),
                                  upper_confidence(p2, n_check, delta), delta, beta, gamma)


# ---------------------------------------------------------------------
# order-statistic lower bound

def success_probability(N: int, inner_risk: float, risk: float) -> float:
    """pi = B(floor(N * inner_risk); risk, N)."""
    return binomial_cdf(int(math.floor(N * inner_risk + 1e-9)), risk, N)


def order_statistic_index(pi: float, M: int, delta: float) -> Optional[int]:
    """Largest T in 1..M with B(T-1; pi, M) <= delta, or None."""
    best = None
    for T in range(1, M + 1):
        if binomial_cdf(T - 1, pi, M) <= delta:
            best = T
        else:
            break
    return best


def hard_outer_solution(instance: ProblemInstance, scenarios: ScenarioSet) -> LpSolution:
    """Outer-approximation LP with every sampled ash and thermal row enforced; columns X then F."""
    b = LPBuilder()
    n = len(instance.pairs)
    unit = instance.transport + instance.handling
    X = [b.add_var(f"X_{k}", ub=instance.availability[k], cost=unit[k]) for k in range(n)]
    F = [b.add_var(f"F_{k}", cost=1.0) for k in range(n)]
    for k, curve in enumerate(instance.curves):
        for p in range(len(curve)):
            c = curve.prices[p]
            b.add_row({F[k]: 1.0, X[k]: -c}, GE, curve.intercepts[p] - c * curve.lowers[p])
    alpha = instance.refinery.ash_limit
    tau = instance.refinery.thermal_requirement
    eh = scenarios.heat * instance.efficiency
    for s in range(scenarios.N):
        b.add_row(dict(zip(X, scenarios.ash[s] - alpha)), LE, 0.0)
        b.add_row(dict(zip(X, -eh[s])), LE, -tau)
    return solve_lp(b.build())


def hard_outer_objective(instance: ProblemInstance, scenarios: ScenarioSet) -> float:
    """Optimum of :func:`hard_outer_solution`, or +inf when the sample cannot be met.

    Sits at or below the all-units SAA optimum, so order statistics of it stay
    valid lower bounds.
    """
    sol = hard_outer_solution(instance, scenarios)
    if sol.status == INFEASIBLE:
        return math.inf
    if not sol.optimal:
        raise SolverError(f"hard-constrained LP returned {sol.status}")
    return sol.objective


@dataclass(frozen=True)
class LowerBoundReport:
    M: int
    N: int
    objectives: tuple[float, ...]
    T: Optional[int]
    bound: Optional[float]
    delta: float
    pi_ash: float
    pi_thermal: float
    T_ash: Optional[int]
    T_thermal: Optional[int]


def _replicate(m: int, instance, N, seed, solver) -> float:
    return float(solver(instance, sample_scenarios(instance, N, seed, stream="replicate", replication=m)))


def saa_lower_bound(instance: ProblemInstance, N: int, M: int, delta: float, seed: int, *,
                    beta_hat: Optional[float] = None, beta: Optional[float] = None,
                    gamma_hat: Optional[float] = None, gamma: Optional[float] = None,
                    solver: Optional[Callable[[ProblemInstance, ScenarioSet], float]] = None,
                    workers: Optional[int] = None) -> LowerBoundReport:
    """T-th smallest of M replication optima; a lower bound on the true optimum w.p. >= 1 - delta.

    T is computed per chance constraint and the smaller index is used. The
    default solver enforces every sampled row, so it needs zero inner risks.
    """
    ref = instance.refinery
    beta_hat = ref.inner_risk_ash if beta_hat is None else beta_hat
    gamma_hat = ref.inner_risk_thermal if gamma_hat is None else gamma_hat
    beta = ref.risk_ash if beta is None else beta
    gamma = ref.risk_thermal if gamma is None else gamma
    if M < 1 or N < 1:
        raise ValueError("need M >= 1 and N >= 1")
    if solver is None:
        if beta_hat > 0 or gamma_hat > 0:
            raise ValueError("the default replication solver enforces every scenario; pass a solver for positive inner risks")
        solver = hard_outer_objective
    pi1 = success_probability(N, beta_hat, beta)
    pi2 = success_probability(N, gamma_hat, gamma)
    t1 = order_statistic_index(pi1, M, delta)
    t2 = order_statistic_index(pi2, M, delta)
    T = None if (t1 is None or t2 is None) else min(t1, t2)

    workers = worker_count() if workers is None else workers
    job = partial(_replicate, instance=instance, N=N, seed=seed, solver=solver)
    if workers > 1 and M > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            objs = list(pool.map(job, range(M)))
    else:
        objs = [job(m) for m in range(M)]
    objs = tuple(sorted(objs))
    bound = objs[T - 1] if T is not None else None
    return LowerBoundReport(M, N, objs, T, bound, delta, pi1, pi2, t1, t2)


# ---------------------------------------------------------------------
# replication tables

RISK_TABLE_COLUMNS = ("N", "ash_risk_min", "ash_risk_avg", "ash_risk_max", "ash_risk_std",
                      "thermal_risk_min", "thermal_risk_avg", "thermal_risk_max", "thermal_risk_std",
                      "feasible", "cost_min", "cost_avg", "cost_max", "cost_std")


def risk_table_row(N: int, certificates: Sequence[FeasibilityCertificate], costs: Sequence[float]) -> dict:
    """Summary of M replications at sample size N: estimated risks, feasible count, cost of feasible ones."""
    a = np.array([c.p_hat_ash for c in certificates])
    h = np.array([c.p_hat_thermal for c in certificates])
    ok = [c.feasible for c in certificates]
    fc = np.array([v for v, f in zip(costs, ok) if f])
    row = {"N": N}
    for name, arr in (("ash_risk", a), ("thermal_risk", h)):
        row[f"{name}_min"] = float(arr.min())
        row[f"{name}_avg"] = float(arr.mean())
        row[f"{name}_max"] = float(arr.max())
        row[f"{name}_std"] = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    row["feasible"] = int(sum(ok))
    row["cost_min"] = float(fc.min()) if fc.size else math.nan
    row["cost_avg"] = float(fc.mean()) if fc.size else math.nan
    row["cost_max"] = float(fc.max()) if fc.size else math.nan
    row["cost_std"] = float(fc.std(ddof=1)) if fc.size > 1 else (0.0 if fc.size else math.nan)
    return row
