"""Centralized blending: penalised SAA model, its convex outer LP and the penalty search.

The all-units purchase cost makes the penalised model a MIP. Replacing each
supplier's cost by the convex incremental-price envelope ``F`` gives an LP
whose optimum X* is feasible for the MIP; evaluating both objectives at X*
brackets the MIP optimum (UB uses all-units cost, LB the envelope). The two
differ by the per-bracket gap c_p*k_low_p - lambda_p summed over the
brackets X* lands in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .lp import GE, LE, EQ, LinearProgram, LPBuilder, SolverError, solve_lp
from .lp.simplex import Basis
from .model import BlendSolution, ProblemInstance, cost_breakdown, lift, outer_total_cost
from .sampling import ScenarioSet, scenario_residuals

#: a slack counts as a violation when it exceeds this fraction of its row scale
VIOLATION_RTOL = 1e-6


class SearchFailure(RuntimeError):
    """Penalty search could not reach the violation targets."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(f"{message}: {diagnostics}")
        self.message, self.diagnostics = message, diagnostics

    def __reduce__(self):
        return type(self), (self.message, self.diagnostics)


@dataclass(frozen=True)
class PenaltyWeights:
    lam: float
    mu: float
    lam_lo: float = 0.0
    lam_hi: float = math.inf
    mu_lo: float = 0.0
    mu_hi: float = math.inf
    eps: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.lam_lo <= self.lam <= self.lam_hi):
            raise ValueError(f"need 0 <= lam_lo <= lam <= lam_hi, got {self}")
        if not (0.0 <= self.mu_lo <= self.mu <= self.mu_hi):
            raise ValueError(f"need 0 <= mu_lo <= mu <= mu_hi, got {self}")


@dataclass
class CentralizedResult:
    solution: BlendSolution
    upper_bound: float
    lower_bound: float
    error_gap: float
    penalties: PenaltyWeights
    violations: tuple[int, int]
    delta: float  # UB - LB predicted by the bracket gaps
    supply_cost: float  # purchase + transport + processing, all-units pricing
    lp_objective: float = math.nan
    basis: Optional[Basis] = None
    trace: list = field(default_factory=list)


# ---------------------------------------------------------------------
# model construction

@dataclass(frozen=True)
class OuterLayout:
    """Column offsets of the outer LP: X, F (one per pair), then V, W, U, J (one per scenario)."""

    n_pairs: int
    N: int

    def block(self, name: str) -> slice:
        n, N = self.n_pairs, self.N
        start = {"X": 0, "F": n, "V": 2 * n, "W": 2 * n + N, "U": 2 * n + 2 * N, "J": 2 * n + 3 * N}[name]
        return slice(start, start + (n if name in ("X", "F") else N))


def _scenario_rows(b: LPBuilder, instance: ProblemInstance, scenarios: ScenarioSet, xcols, V, W, U, J):
    alpha = instance.refinery.ash_limit
    tau = instance.refinery.thermal_requirement
    eh = scenarios.heat * instance.efficiency
    for s in range(scenarios.N):
        ash = {c: a for c, a in zip(xcols, scenarios.ash[s] - alpha)}
        ash[V[s]] = 1.0
        ash[W[s]] = -1.0
        b.add_row(ash, EQ, 0.0, f"ash_{s}")
    for s in range(scenarios.N):
        heat = {c: -v for c, v in zip(xcols, eh[s])}
        heat[U[s]] = 1.0
        heat[J[s]] = -1.0
        b.add_row(heat, EQ, -tau, f"thermal_{s}")


def _slack_vars(b: LPBuilder, N: int, lam: float, mu: float):
    V = [b.add_var(f"V_{s}") for s in range(N)]
    W = [b.add_var(f"W_{s}", cost=lam) for s in range(N)]
    U = [b.add_var(f"U_{s}") for s in range(N)]
    J = [b.add_var(f"J_{s}", cost=mu) for s in range(N)]
    return V, W, U, J


def _check_inputs(instance: ProblemInstance, scenarios: ScenarioSet, lam: float, mu: float):
    if scenarios.N < 1:
        raise ValueError("need at least one scenario")
    if scenarios.ash.shape[1] != len(instance.pairs):
        raise ValueError("scenario columns do not match the instance's supplier/biomass pairs")
    if lam < 0 or mu < 0:
        raise ValueError("penalties must be nonnegative")


def build_outer_model(instance: ProblemInstance, scenarios: ScenarioSet, lam: float, mu: float) -> LinearProgram:
    """Outer-approximation LP; columns follow :class:`OuterLayout`."""
    _check_inputs(instance, scenarios, lam, mu)
    b = LPBuilder()
    unit = instance.transport + instance.handling
    n = len(instance.pairs)
    X = [b.add_var(f"X_{k}", cost=unit[k]) for k in range(n)]
    F = [b.add_var(f"F_{k}", cost=1.0) for k in range(n)]
    V, W, U, J = _slack_vars(b, scenarios.N, lam, mu)
    for k, curve in enumerate(instance.curves):
        for p in range(len(curve)):
            c, lo, lam_p = curve.prices[p], curve.lowers[p], curve.intercepts[p]
            b.add_row({F[k]: 1.0, X[k]: -c}, GE, lam_p - c * lo, f"epi_{k}_{p}")
    _scenario_rows(b, instance, scenarios, X, V, W, U, J)
    for k, curve in enumerate(instance.curves):
        b.add_row({X[k]: 1.0}, LE, curve.availability, f"avail_{k}")
    return b.build()


def build_penalized_mip(instance: ProblemInstance, scenarios: ScenarioSet, lam: float, mu: float):
    """Bracketed MIP with all-units cost, as ``(lp, groups, x_columns)``.

    ``groups[k]`` lists the indicator columns of pair k and ``x_columns[k]``
    its per-bracket quantity columns. Intended for brute-force checks on tiny
    instances via :func:`bioblend.lp.solve_bracket_mip`.
    """
    _check_inputs(instance, scenarios, lam, mu)
    b = LPBuilder()
    unit = instance.transport + instance.handling
    xcols, zcols = [], []
    for k, curve in enumerate(instance.curves):
        xcols.append([b.add_var(f"X_{k}_{p}", cost=curve.prices[p] + unit[k]) for p in range(len(curve))])
    for k, curve in enumerate(instance.curves):
        zcols.append([b.add_var(f"Z_{k}_{p}", ub=1.0) for p in range(len(curve))])
    V, W, U, J = _slack_vars(b, scenarios.N, lam, mu)
    for k, curve in enumerate(instance.curves):
        for p in range(len(curve)):
            b.add_row({xcols[k][p]: 1.0, zcols[k][p]: -curve.lowers[p]}, GE, 0.0, f"low_{k}_{p}")
            b.add_row({xcols[k][p]: 1.0, zcols[k][p]: -curve.uppers[p]}, LE, 0.0, f"up_{k}_{p}")
        b.add_row({z: 1.0 for z in zcols[k]}, EQ, 1.0, f"choose_{k}")
    alpha = instance.refinery.ash_limit
    tau = instance.refinery.thermal_requirement
    eh = scenarios.heat * instance.efficiency
    for s in range(scenarios.N):
        row = {c: scenarios.ash[s, k] - alpha for k in range(len(xcols)) for c in xcols[k]}
        row.update({V[s]: 1.0, W[s]: -1.0})
        b.add_row(row, EQ, 0.0, f"ash_{s}")
    for s in range(scenarios.N):
        row = {c: -eh[s, k] for k in range(len(xcols)) for c in xcols[k]}
        row.update({U[s]: 1.0, J[s]: -1.0})
        b.add_row(row, EQ, -tau, f"thermal_{s}")
    return b.build(), zcols, xcols


# ---------------------------------------------------------------------
# evaluation at a fixed purchase vector

def violation_thresholds(instance: ProblemInstance, scenarios: ScenarioSet, x) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    alpha = instance.refinery.ash_limit
    tau = instance.refinery.thermal_requirement
    ash_scale = np.maximum(1.0, np.abs(scenarios.ash - alpha) @ x)
    heat_scale = np.maximum(np.maximum(1.0, tau), (scenarios.heat * instance.efficiency) @ x)
    return VIOLATION_RTOL * ash_scale, VIOLATION_RTOL * heat_scale


def snap_to_breakpoints(instance: ProblemInstance, x, rtol: float = 1e-7) -> np.ndarray:
    """Pull LP round-off back onto bracket breakpoints (and zero) so it cannot change the bracket."""
    x = np.array(x, dtype=float)
    for k, curve in enumerate(instance.curves):
        pts = np.concatenate([[0.0], curve.uppers])
        near = np.abs(pts - x[k]) <= rtol * max(1.0, curve.availability)
        if near.any():
            x[k] = pts[np.argmax(near)]
    return np.clip(x, 0.0, instance.availability)


def evaluate_purchases(instance: ProblemInstance, scenarios: ScenarioSet, x, lam: float, mu: float):
    """Slacks, violation counts and both objectives at aggregate purchases ``x``."""
    q, br = lift(instance, x)
    ref = instance.refinery
    e1, e2 = scenario_residuals(q, scenarios, ref.ash_limit, ref.thermal_requirement, instance.efficiency)
    t1, t2 = violation_thresholds(instance, scenarios, q)
    # residuals inside the round-off band count as met, and their slacks as zero
    W, V = np.where(e1 > t1, e1, 0.0), np.maximum(0.0, -e1)
    J, U = np.where(e2 > t2, e2, 0.0), np.maximum(0.0, -e2)
    counts = (int(np.count_nonzero(W)), int(np.count_nonzero(J)))
    parts = cost_breakdown(instance, q)
    supply = float(sum(parts.values()))
    penalty = float(lam * W.sum() + mu * J.sum())
    parts["penalty"] = penalty
    ub = supply + penalty
    lb = outer_total_cost(instance, q) + penalty
    delta = float(sum(c.bracket_gaps[p] for c, p in zip(instance.curves, br)))
    sol = BlendSolution(q, br, V, W, U, J, ub, parts)
    return sol, ub, lb, delta, counts, supply


def solve_centralized_fixed_penalty(instance: ProblemInstance, scenarios: ScenarioSet, lam: float, mu: float,
                                    *, basis: Optional[Basis] = None) -> CentralizedResult:
    lp = build_outer_model(instance, scenarios, lam, mu)
    sol = solve_lp(lp, basis=basis)
    if not sol.optimal:
        raise SolverError(f"outer LP returned {sol.status}; slack columns should make it feasible")
    layout = OuterLayout(len(instance.pairs), scenarios.N)
    x = snap_to_breakpoints(instance, sol.x[layout.block("X")])
    blend, ub, lb, delta, counts, supply = evaluate_purchases(instance, scenarios, x, lam, mu)
    gap = (ub - lb) / ub if ub > 0 else 0.0
    return CentralizedResult(blend, ub, lb, max(0.0, gap), PenaltyWeights(lam, mu), counts, delta, supply,
                             sol.objective, sol.basis)


# ---------------------------------------------------------------------
# penalty search

def violation_targets(N: int, beta_hat: float, gamma_hat: float) -> tuple[int, int]:
    """Allowed violated-scenario counts: N minus ceil((1 - risk) N), i.e. floor(risk N)."""
    return int(math.floor(beta_hat * N + 1e-9)), int(math.floor(gamma_hat * N + 1e-9))


def default_penalty_cap(instance: ProblemInstance) -> float:
    """Ten times the dearest cost of repairing one unit of violation by swapping tons.

    A unit of thermal shortfall costs at most one delivered ton per e*LHV_min;
    a unit of ash excess at most one delivered ton per unit of ash spread. The
    search doubles the cap when it turns out too small.
    """
    delivered = max(float(c.prices[-1]) for c in instance.curves) + float(np.max(instance.transport + instance.handling))
    heat = min(b.efficiency * b.heat.low for b in instance.biomass)
    spread = max(b.ash.high for b in instance.biomass) - min(b.ash.low for b in instance.biomass)
    per_unit = max(1.0 / heat, 1.0 / spread if spread > 0 else 1.0)
    return 10.0 * max(delivered, 1.0) * per_unit


def _centralized_inner(instance, scenarios, lam, mu, warm=None):
    return solve_centralized_fixed_penalty(instance, scenarios, lam, mu,
                                           basis=getattr(warm, "basis", None))


@dataclass
class SearchStep:
    lam: float
    mu: float
    c1: int
    c2: int
    supply_cost: float


def saa_binary_search(instance: ProblemInstance, scenarios: ScenarioSet, beta_hat: Optional[float] = None,
                      gamma_hat: Optional[float] = None, *, bounds: Optional[PenaltyWeights] = None,
                      eps: float = 0.0, delta: Optional[float] = None, inner: Optional[Callable] = None,
                      max_doublings: int = 30, max_iter: int = 500):
    """Joint bisection on (lam, mu) until both sit within ``delta`` of their bracket midpoints.

    Each coordinate is raised when its violation count exceeds target + eps and
    lowered when it falls below target - eps. The cheapest iterate (by
    supply-chain cost) meeting both targets within eps is returned with its
    penalties.
    """
    ref = instance.refinery
    beta_hat = ref.inner_risk_ash if beta_hat is None else beta_hat
    gamma_hat = ref.inner_risk_thermal if gamma_hat is None else gamma_hat
    inner = inner or _centralized_inner
    N = scenarios.N
    k1, k2 = violation_targets(N, beta_hat, gamma_hat)
    if bounds is None:
        cap = default_penalty_cap(instance)
        lam_lo, lam_hi, mu_lo, mu_hi = 0.0, cap, 0.0, cap
    else:
        lam_lo, lam_hi, mu_lo, mu_hi = bounds.lam_lo, bounds.lam_hi, bounds.mu_lo, bounds.mu_hi
        if not (math.isfinite(lam_hi) and math.isfinite(mu_hi)):
            raise ValueError("search bounds must be finite")

    trace: list[SearchStep] = []
    best = None

    def feasible(res) -> bool:
        c1, c2 = res.violations
        return c1 <= k1 + eps and c2 <= k2 + eps

    def record(res, lam, mu):
        nonlocal best
        trace.append(SearchStep(lam, mu, res.violations[0], res.violations[1], res.supply_cost))
        if feasible(res) and (best is None or res.supply_cost < best[0].supply_cost - 1e-9 * max(1.0, abs(best[0].supply_cost))):
            best = (res, lam, mu)

    # make sure the upper bounds already meet the targets
    warm = None
    for _ in range(max_doublings + 1):
        warm = inner(instance, scenarios, lam_hi, mu_hi, warm)
        record(warm, lam_hi, mu_hi)
        c1, c2 = warm.violations
        if c1 <= k1 + eps and c2 <= k2 + eps:
            break
        if c1 > k1 + eps:
            lam_lo, lam_hi = lam_hi, 2.0 * lam_hi
        if c2 > k2 + eps:
            mu_lo, mu_hi = mu_hi, 2.0 * mu_hi
    else:
        raise SearchFailure("penalty bounds reached their cap without meeting the violation targets",
                            {"lam_hi": lam_hi, "mu_hi": mu_hi, "violations": warm.violations,
                             "targets": (k1, k2), "N": N})

    if delta is None:
        delta = 1e-4 * max(lam_hi, mu_hi)
    for _ in range(max_iter):
        lam = 0.5 * (lam_lo + lam_hi)
        mu = 0.5 * (mu_lo + mu_hi)
        warm = inner(instance, scenarios, lam, mu, warm)
        record(warm, lam, mu)
        c1, c2 = warm.violations
        if c1 > k1 + eps:
            lam_lo = lam
        elif c1 < k1 - eps:
            lam_hi = lam
        if c2 > k2 + eps:
            mu_lo = mu
        elif c2 < k2 - eps:
            mu_hi = mu
        if abs(lam - 0.5 * (lam_lo + lam_hi)) <= delta and abs(mu - 0.5 * (mu_lo + mu_hi)) <= delta:
            break

    res, lam, mu = best
    weights = PenaltyWeights(lam, mu, min(lam_lo, lam), max(lam_hi, lam), min(mu_lo, mu), max(mu_hi, mu), eps, delta)
    res = replace(res, penalties=weights) if hasattr(res, "penalties") else res
    res.trace = trace
    return res, weights


# ---------------------------------------------------------------------
# reporting

def blend_percentages(instance: ProblemInstance, x) -> dict[str, float]:
    x = np.asarray(x, dtype=float)
    total = float(x.sum())
    out = {b.id: 0.0 for b in instance.biomass}
    if total <= 0:
        return out
    for k, (_, j) in enumerate(instance.pairs):
        out[instance.biomass[j].id] += 100.0 * x[k] / total
    return out


def run_report_row(instance: ProblemInstance, demand: float, result) -> dict:
    """One line of the cost/blend table: demand, supply cost, $/DT, blend % per biomass."""
    x = result.solution.quantities
    tons = float(np.sum(x))
    row = {"demand": demand, "cost": result.supply_cost, "cost_per_dt": result.supply_cost / tons if tons > 0 else 0.0}
    row.update(blend_percentages(instance, x))
    return row


def format_report(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    lines = ["\t".join(cols)]
    for r in rows:
        lines.append("\t".join(f"{r[c]:.6f}" if isinstance(r[c], float) else str(r[c]) for c in cols))
    return "\n".join(lines) + "\n"
