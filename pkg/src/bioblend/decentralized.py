"""Leader/follower blending: follower best responses, their KKT certificate,
the price-raising heuristic and a price-grid lower bound.

The refinery (leader) posts a door price per biomass type. Each supplier
(follower) then picks, per biomass, the bracket with the largest profit
(price - harvest cost - transport) * bracket top and offers that whole bracket,
or nothing when every bracket loses money. The leader buys from the offers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .centralized import violation_thresholds
from .lp import EQ, GE, LE, LinearProgram, LPBuilder, LpSolution, ResourceLimitError, SolverError, solve_lp
from .lp.simplex import Basis
from .model import ProblemInstance
from .sampling import ScenarioSet, scenario_residuals

KKT_TOL = 1e-8


@dataclass(frozen=True)
class PriceVector:
    """Door price per biomass id ($/DT)."""

    prices: Mapping[str, float]

    def __post_init__(self):
        p = {str(k): float(v) for k, v in dict(self.prices).items()}
        bad = [k for k, v in p.items() if not (v >= 0 and math.isfinite(v))]
        if bad:
            raise ValueError(f"door prices must be finite and nonnegative: {bad}")
        object.__setattr__(self, "prices", p)

    def __getitem__(self, bid: str) -> float:
        return self.prices[bid]

    def per_biomass(self, instance: ProblemInstance) -> np.ndarray:
        return np.array([self.prices.get(b.id, 0.0) for b in instance.biomass])

    def per_pair(self, instance: ProblemInstance) -> np.ndarray:
        return self.per_biomass(instance)[instance.pair_biomass]


@dataclass(frozen=True)
class FollowerResponse:
    """Per-pair best response; ``bracket[k] == -1`` means pair k offers nothing."""

    bracket: np.ndarray
    offered: np.ndarray
    margin: np.ndarray  # margin at the chosen (or best) bracket
    profit: np.ndarray

    def z_rows(self, instance: ProblemInstance) -> list[np.ndarray]:
        """Bracket indicators; a pair that offers nothing sits in bracket 0 at X = 0."""
        out = []
        for k, curve in enumerate(instance.curves):
            z = np.zeros(len(curve))
            z[max(int(self.bracket[k]), 0)] = 1.0
            out.append(z)
        return out

    def x_rows(self, instance: ProblemInstance) -> list[np.ndarray]:
        out = []
        for k, curve in enumerate(instance.curves):
            x = np.zeros(len(curve))
            if self.bracket[k] >= 0:
                x[self.bracket[k]] = self.offered[k]
            out.append(x)
        return out


def pair_margins(instance: ProblemInstance, prices: PriceVector, k: int) -> np.ndarray:
    """Door price minus harvest cost minus transport, per bracket of pair k."""
    C = prices.per_pair(instance)[k]
    return C - instance.harvest_costs(k) - instance.transport[k]


def follower_best_response(instance: ProblemInstance, prices: PriceVector) -> FollowerResponse:
    n = len(instance.pairs)
    bracket = np.full(n, -1, dtype=int)
    offered = np.zeros(n)
    margin = np.zeros(n)
    profit = np.zeros(n)
    for k, curve in enumerate(instance.curves):
        m = pair_margins(instance, prices, k)
        gains = m * curve.uppers
        p = int(np.argmax(gains))  # first maximiser, i.e. lowest bracket on ties
        margin[k] = m[p]
        if gains[p] >= 0:  # zero profit still offers: ties favour the leader
            bracket[k] = p
            offered[k] = curve.uppers[p]
            profit[k] = gains[p]
    return FollowerResponse(bracket, offered, margin, profit)


# ---------------------------------------------------------------------
# follower LP relaxation and KKT certificate

def follower_lp(instance: ProblemInstance, prices: PriceVector, k: int) -> LinearProgram:
    """LP relaxation of pair k's profit maximisation; columns X_0..X_{P-1}, Z_0..Z_{P-1}."""
    curve = instance.curve(k)
    m = pair_margins(instance, prices, k)
    P = len(curve)
    b = LPBuilder(maximize=True)
    X = [b.add_var(f"X_{p}", cost=m[p]) for p in range(P)]
    Z = [b.add_var(f"Z_{p}", ub=1.0) for p in range(P)]
    b.add_row({x: 1.0 for x in X}, LE, curve.availability, "supply")
    for p in range(P):
        b.add_row({X[p]: 1.0, Z[p]: -curve.lowers[p]}, GE, 0.0, f"lower_{p}")
        b.add_row({X[p]: 1.0, Z[p]: -curve.uppers[p]}, LE, 0.0, f"upper_{p}")
    b.add_row({z: 1.0 for z in Z}, EQ, 1.0, "choose")
    return b.build()


@dataclass
class KktMultipliers:
    u: float
    gamma: float
    v: np.ndarray
    w: np.ndarray
    l: np.ndarray
    m: np.ndarray
    k: np.ndarray


@dataclass
class KktReport:
    ok: bool
    first_violation: Optional[tuple[str, int, int]]  # (row, pair, bracket)
    max_residual: float
    multipliers: list[KktMultipliers] = field(default_factory=list)
    lp_mismatch: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def kkt_multipliers(margins: np.ndarray, lowers: np.ndarray, uppers: np.ndarray, x: np.ndarray, profit: float
                    ) -> KktMultipliers:
    """Multipliers that make the stationarity rows hold for the claimed response.

    Stationarity, with the relaxation written as max m.X over
    X_p in [k_low Z_p, k_up Z_p], sum Z = 1, sum X <= S, 0 <= Z <= 1:
        dual_1:  m_p - u + v_p - w_p + l_p = 0
        dual_2:  k_low_p v_p - k_up_p w_p + gamma - m_p' + k_p = 0
    The supply row never binds at a single full bracket, so u = 0, and gamma
    is the claimed profit.
    """
    P = len(margins)
    v, w, l = np.zeros(P), np.zeros(P), np.zeros(P)
    pos = margins > 0
    w[pos] = margins[pos]
    neg = margins < 0
    v[neg & (x > 0)] = -margins[neg & (x > 0)]
    l[neg & (x <= 0)] = -margins[neg & (x <= 0)]
    gamma = float(profit)
    r = lowers * v - uppers * w + gamma
    return KktMultipliers(0.0, gamma, v, w, l, np.maximum(0.0, r), np.maximum(0.0, -r))


def _kkt_rows(margins, lowers, uppers, S, x, z, mult: KktMultipliers):
    """Residual vectors in check order: primal, stationarity, dual feasibility, complementarity."""
    u, g, v, w, l, m, k = mult.u, mult.gamma, mult.v, mult.w, mult.l, mult.m, mult.k
    scale = max(1.0, float(np.max(np.abs(margins) * uppers)), float(np.max(uppers)))
    rows = [
        ("primal_supply", np.array([max(0.0, x.sum() - S)])),
        ("primal_lower", np.maximum(0.0, lowers * z - x)),
        ("primal_upper", np.maximum(0.0, x - uppers * z)),
        ("primal_choose", np.array([z.sum() - 1.0])),
        ("primal_bounds", np.maximum(0.0, -x) + np.maximum(0.0, -z) + np.maximum(0.0, z - 1.0)),
        ("dual_1", margins - u + v - w + l),
        ("dual_2", lowers * v - uppers * w + g - m + k),
        ("dual_feasibility", np.concatenate([[min(0.0, u)], np.minimum(0.0, v), np.minimum(0.0, w),
                                             np.minimum(0.0, l), np.minimum(0.0, m), np.minimum(0.0, k)])),
        ("dual_3", np.array([(x.sum() - S) * u])),
        ("dual_4", (-x + lowers * z) * v),
        ("dual_5", (x - uppers * z) * w),
        ("dual_6", np.array([(z.sum() - 1.0) * g])),
        ("dual_7", x * l),
        ("dual_8", z * m),
        ("dual_9", (z - 1.0) * k),
    ]
    return rows, scale


def verify_follower_optimality(instance: ProblemInstance, prices: PriceVector, response: FollowerResponse,
                               *, tol: float = KKT_TOL, cross_check: bool = True) -> KktReport:
    """Build KKT multipliers for every pair's relaxed problem and check each row.

    With ``cross_check`` the relaxed LP is also solved and its optimum compared
    with the claimed profit.
    """
    first = None
    worst = 0.0
    mults = []
    mismatch = None
    for k, curve in enumerate(instance.curves):
        margins = pair_margins(instance, prices, k)
        x = response.x_rows(instance)[k]
        z = response.z_rows(instance)[k]
        claimed = float(margins @ x)
        mult = kkt_multipliers(margins, curve.lowers, curve.uppers, x, claimed)
        mults.append(mult)
        rows, scale = _kkt_rows(margins, curve.lowers, curve.uppers, curve.availability, x, z, mult)
        for name, res in rows:
            rel = np.abs(res) / scale
            worst = max(worst, float(rel.max(initial=0.0)))
            bad = np.flatnonzero(rel > tol)
            if bad.size and first is None:
                first = (name, k, int(bad[0]))
        if cross_check and mismatch is None:
            sol = solve_lp(follower_lp(instance, prices, k))
            if not sol.optimal or abs(sol.objective - claimed) > tol * max(1.0, abs(claimed)):
                mismatch = k
    return KktReport(first is None and mismatch is None, first, worst, mults, mismatch)


# ---------------------------------------------------------------------
# leader subproblem

@dataclass
class LeaderSolution:
    lp: LpSolution
    purchases: np.ndarray
    objective: float
    supply_cost: float
    violations: tuple[int, int]
    ash_excess: np.ndarray
    thermal_shortfall: np.ndarray


def _leader_lp(instance: ProblemInstance, scenarios: ScenarioSet, price_pair: np.ndarray, margin_pair: np.ndarray,
               ub_pair: np.ndarray, lam: float, mu: float) -> LinearProgram:
    b = LPBuilder()
    n = len(instance.pairs)
    X = [b.add_var(f"X_{k}", ub=ub_pair[k], cost=price_pair[k] + instance.handling[k]) for k in range(n)]
    N = scenarios.N
    V = [b.add_var(f"V_{s}") for s in range(N)]
    W = [b.add_var(f"W_{s}", cost=lam) for s in range(N)]
    U = [b.add_var(f"U_{s}") for s in range(N)]
    J = [b.add_var(f"J_{s}", cost=mu) for s in range(N)]
    alpha = instance.refinery.ash_limit
    tau = instance.refinery.thermal_requirement
    eh = scenarios.heat * instance.efficiency
    for s in range(N):
        row = dict(zip(X, scenarios.ash[s] - alpha))
        row.update({V[s]: 1.0, W[s]: -1.0})
        b.add_row(row, EQ, 0.0, f"ash_{s}")
    for s in range(N):
        row = dict(zip(X, -eh[s]))
        row.update({U[s]: 1.0, J[s]: -1.0})
        b.add_row(row, EQ, -tau, f"thermal_{s}")
    for i, sup in enumerate(instance.suppliers):
        ks = np.flatnonzero(instance.pair_supplier == i)
        b.add_row({X[k]: margin_pair[k] for k in ks}, GE, 0.0, f"profit_{sup.id}")
    return b.build()


def leader_objective(instance, scenarios, price_pair, x, lam, mu):
    """Leader cost, penalties from recomputed slacks, and violation counts at purchases x."""
    ref = instance.refinery
    e1, e2 = scenario_residuals(x, scenarios, ref.ash_limit, ref.thermal_requirement, instance.efficiency)
    W, J = np.maximum(0.0, e1), np.maximum(0.0, e2)
    t1, t2 = violation_thresholds(instance, scenarios, x)
    supply = float((price_pair + instance.handling) @ x)
    return supply + lam * float(W.sum()) + mu * float(J.sum()), supply, (int(np.sum(W > t1)), int(np.sum(J > t2))), W, J


def leader_subproblem(instance: ProblemInstance, scenarios: ScenarioSet, prices: PriceVector,
                      offers: FollowerResponse, lam: float, mu: float, *, basis: Optional[Basis] = None
                      ) -> LeaderSolution:
    """Cheapest purchases within the offers, with penalised scenario rows and supplier profit rows."""
    C = prices.per_pair(instance)
    margin = np.zeros(len(instance.pairs))
    for k in range(len(instance.pairs)):
        if offers.bracket[k] >= 0:
            margin[k] = C[k] - instance.harvest_costs(k)[offers.bracket[k]] - instance.transport[k]
    lp = _leader_lp(instance, scenarios, C, margin, np.asarray(offers.offered, dtype=float), lam, mu)
    sol = solve_lp(lp, basis=basis)
    if not sol.optimal:
        return LeaderSolution(sol, np.zeros(len(instance.pairs)), math.inf, math.inf, (scenarios.N, scenarios.N),
                              np.zeros(0), np.zeros(0))
    x = np.clip(sol.x[: len(instance.pairs)], 0.0, offers.offered)
    obj, supply, counts, W, J = leader_objective(instance, scenarios, C, x, lam, mu)
    return LeaderSolution(sol, x, obj, supply, counts, W, J)


# ---------------------------------------------------------------------
# price-raising heuristic

@dataclass
class TraceStep:
    step: int
    bracket: int
    prices: dict
    objective: float
    improved: bool
    violations: tuple[int, int]


@dataclass
class DecentralizedResult:
    status: str  # "ok" or "no-solution"
    prices: Optional[PriceVector]
    purchases: np.ndarray
    offers: Optional[FollowerResponse]
    objective: float
    supply_cost: float
    follower_profits: dict
    violations: tuple[int, int]
    trace: list = field(default_factory=list)
    penalties: object = None

    @property
    def incumbent_path(self) -> list[float]:
        best, out = math.inf, []
        for t in self.trace:
            best = min(best, t.objective)
            out.append(best)
        return out


def _supplier_profits(instance, prices: PriceVector, offers: FollowerResponse, x) -> dict:
    C = prices.per_pair(instance)
    out = {s.id: 0.0 for s in instance.suppliers}
    for k, (i, _) in enumerate(instance.pairs):
        if offers.bracket[k] >= 0:
            m = C[k] - instance.harvest_costs(k)[offers.bracket[k]] - instance.transport[k]
            out[instance.suppliers[i].id] += float(m * x[k])
    return out


def heuristic_solve(instance: ProblemInstance, scenarios: ScenarioSet, lam: float, mu: float, nu: int = 5,
                    *, max_steps: Optional[int] = None) -> DecentralizedResult:
    """Raise door prices along the supplier cost ladder until nu consecutive steps bring no improvement.

    At bracket p each biomass is priced at the cheapest delivered cost
    t_ib + c_bar_bp among suppliers still in its pool; that supplier then
    leaves the pool. When every pool is empty they refill and p advances.
    A biomass whose pool empties first keeps its last price.
    """
    if nu < 1:
        raise ValueError("patience nu must be at least 1")
    nb = len(instance.biomass)
    owners = [[i for i in range(len(instance.suppliers)) if (i, j) in instance.pair_index] for j in range(nb)]
    n_br = [len(instance.curve(instance.pair_index[(owners[j][0], j)])) if owners[j] else 0 for j in range(nb)]
    P = max(n_br)

    def delivered(i: int, j: int, p: int) -> float:
        k = instance.pair_index[(i, j)]
        return float(instance.transport[k] + instance.harvest_costs(k)[p])

    pools = [list(o) for o in owners]
    price = np.zeros(nb)
    p = 0
    best: Optional[tuple] = None
    best_obj = math.inf
    counter = 0
    trace: list[TraceStep] = []
    basis = None
    step = 0
    while True:
        if all(not pool for j, pool in enumerate(pools) if p < n_br[j]):
            pools = [list(o) for o in owners]
            p += 1
        if p >= P:
            break
        chosen = {}
        for j in range(nb):
            if p < n_br[j] and pools[j]:
                costs = [delivered(i, j, p) for i in pools[j]]
                t = int(np.argmin(costs))
                price[j] = costs[t]
                chosen[j] = pools[j][t]
        prices = PriceVector({b.id: float(price[j]) for j, b in enumerate(instance.biomass)})
        offers = follower_best_response(instance, prices)
        lead = leader_subproblem(instance, scenarios, prices, offers, lam, mu, basis=basis)
        basis = lead.lp.basis
        improved = lead.objective < best_obj - 1e-9 * max(1.0, abs(best_obj) if math.isfinite(best_obj) else 1.0)
        trace.append(TraceStep(step, p, dict(prices.prices), lead.objective, improved, lead.violations))
        step += 1
        if improved:
            best_obj = lead.objective
            best = (prices, offers, lead)
            counter = 1
        elif counter >= nu:
            break
        else:
            counter += 1
        for j, i in chosen.items():
            pools[j].remove(i)
        if max_steps is not None and step >= max_steps:
            break

    if best is None:
        return DecentralizedResult("no-solution", None, np.zeros(len(instance.pairs)), None, math.inf, math.inf,
                                   {}, (scenarios.N, scenarios.N), trace)
    prices, offers, lead = best
    return DecentralizedResult("ok", prices, lead.purchases, offers, lead.objective, lead.supply_cost,
                               _supplier_profits(instance, prices, offers, lead.purchases), lead.violations, trace)


def heuristic_inner(nu: int = 5):
    """Adapter so :func:`bioblend.centralized.saa_binary_search` can drive the heuristic."""

    def inner(instance, scenarios, lam, mu, warm=None):
        return heuristic_solve(instance, scenarios, lam, mu, nu)

    return inner


# ---------------------------------------------------------------------
# feasibility of an incumbent in the bilevel model

@dataclass
class BilevelCheck:
    ok: bool
    failures: list[str]

    def __bool__(self) -> bool:
        return self.ok


def check_bilevel_feasibility(instance: ProblemInstance, scenarios: ScenarioSet, result: DecentralizedResult,
                              lam: float, mu: float, *, rtol: float = 1e-7) -> BilevelCheck:
    """Machine-check an incumbent against every constraint of the sampled bilevel model.

    Follower quantities must be optimal responses at the posted prices and
    respect their bracket bounds; the leader buys between zero and the
    offered amount; each supplier's profit row, price nonnegativity and the
    scenario balance rows must hold; the reported objective must match.
    """
    fails: list[str] = []
    if result.status != "ok":
        return BilevelCheck(False, ["no incumbent"])
    prices, offers, x = result.prices, result.offers, np.asarray(result.purchases, dtype=float)
    if any(v < 0 for v in prices.prices.values()):
        fails.append("negative door price")
    br = follower_best_response(instance, prices)
    if not (np.array_equal(br.bracket, offers.bracket) and np.allclose(br.offered, offers.offered, rtol=0, atol=0)):
        fails.append("offers are not the followers' best response")
    kkt = verify_follower_optimality(instance, prices, offers, cross_check=False)
    if not kkt.ok:
        fails.append(f"follower KKT row {kkt.first_violation}")
    for k, curve in enumerate(instance.curves):
        xr, zr = offers.x_rows(instance)[k], offers.z_rows(instance)[k]
        if np.any(xr < curve.lowers * zr - rtol * curve.availability) or np.any(xr > curve.uppers * zr + rtol * curve.availability):
            fails.append(f"pair {k}: follower quantity outside its bracket")
        if abs(zr.sum() - 1.0) > 0 or np.any((zr != 0) & (zr != 1)):
            fails.append(f"pair {k}: bracket indicators not a single 0/1 choice")
    tol_x = rtol * np.maximum(1.0, offers.offered)
    if np.any(x < -tol_x) or np.any(x > offers.offered + tol_x):
        fails.append("purchases outside [0, offered]")
    C = prices.per_pair(instance)
    for i, s in enumerate(instance.suppliers):
        ks = np.flatnonzero(instance.pair_supplier == i)
        prof = 0.0
        scale = 1.0
        for k in ks:
            if offers.bracket[k] >= 0:
                m = C[k] - instance.harvest_costs(k)[offers.bracket[k]] - instance.transport[k]
                prof += m * x[k]
                scale += abs(m * x[k])
            elif x[k] > 0:
                fails.append(f"pair {k}: bought without an offer")
        if prof < -rtol * scale:
            fails.append(f"supplier {s.id}: negative profit {prof}")
    ref = instance.refinery
    e1, e2 = scenario_residuals(x, scenarios, ref.ash_limit, ref.thermal_requirement, instance.efficiency)
    V, W, U, J = np.maximum(0, -e1), np.maximum(0, e1), np.maximum(0, -e2), np.maximum(0, e2)
    if np.max(np.abs(e1 + V - W), initial=0) > 0 or np.max(np.abs(e2 + U - J), initial=0) > 0:
        fails.append("scenario balance rows")
    obj, _, _, _, _ = leader_objective(instance, scenarios, C, x, lam, mu)
    if abs(obj - result.objective) > 1e-9 * max(1.0, abs(obj)):
        fails.append(f"reported objective {result.objective} differs from {obj}")
    return BilevelCheck(not fails, fails)


# ---------------------------------------------------------------------
# price-grid lower bound

def price_grid(instance: ProblemInstance) -> list[np.ndarray]:
    """Candidate door prices per biomass: 0 plus every delivered bracket cost t_ib + c_bar_bp."""
    out = []
    for j in range(len(instance.biomass)):
        vals = {0.0}
        for k, (_, jj) in enumerate(instance.pairs):
            if jj == j:
                vals.update(float(v) for v in instance.transport[k] + instance.harvest_costs(k))
        out.append(np.array(sorted(vals)))
    return out


def _relaxation_lp(instance, scenarios, C_b: np.ndarray, lam, mu) -> LinearProgram:
    """Leader LP over every follower bracket at fixed prices: X_kp in [0, k_up_p], sum_p X_kp/k_up_p <= 1."""
    b = LPBuilder()
    cols = []
    C = C_b[instance.pair_biomass]
    for k, curve in enumerate(instance.curves):
        cols.append([b.add_var(f"X_{k}_{p}", ub=curve.uppers[p], cost=C[k] + instance.handling[k])
                     for p in range(len(curve))])
    N = scenarios.N
    V = [b.add_var(f"V_{s}") for s in range(N)]
    W = [b.add_var(f"W_{s}", cost=lam) for s in range(N)]
    U = [b.add_var(f"U_{s}") for s in range(N)]
    J = [b.add_var(f"J_{s}", cost=mu) for s in range(N)]
    for k, curve in enumerate(instance.curves):
        b.add_row({c: 1.0 / curve.uppers[p] for p, c in enumerate(cols[k])}, LE, 1.0, f"hull_{k}")
    for i, s in enumerate(instance.suppliers):
        row = {}
        for k in np.flatnonzero(instance.pair_supplier == i):
            m = C[k] - instance.harvest_costs(k) - instance.transport[k]
            row.update({c: m[p] for p, c in enumerate(cols[k])})
        b.add_row(row, GE, 0.0, f"profit_{s.id}")
    alpha = instance.refinery.ash_limit
    tau = instance.refinery.thermal_requirement
    eh = scenarios.heat * instance.efficiency
    for s in range(N):
        row = {c: scenarios.ash[s, k] - alpha for k in range(len(cols)) for c in cols[k]}
        row.update({V[s]: 1.0, W[s]: -1.0})
        b.add_row(row, EQ, 0.0, f"ash_{s}")
    for s in range(N):
        row = {c: -eh[s, k] for k in range(len(cols)) for c in cols[k]}
        row.update({U[s]: 1.0, J[s]: -1.0})
        b.add_row(row, EQ, -tau, f"thermal_{s}")
    return b.build()


def relaxation_value(instance: ProblemInstance, scenarios: ScenarioSet, prices: Sequence[float], lam: float, mu: float,
                     *, basis: Optional[Basis] = None) -> LpSolution:
    sol = solve_lp(_relaxation_lp(instance, scenarios, np.asarray(prices, dtype=float), lam, mu), basis=basis)
    if not sol.optimal:
        raise SolverError(f"relaxation LP returned {sol.status}")
    return sol


def lower_bound_relaxation(instance: ProblemInstance, scenarios: ScenarioSet, lam: float, mu: float,
                           *, grid_cap: int = 20_000) -> float:
    """Minimum of the relaxation LP over the per-biomass price grid (grid order, first minimum kept)."""
    grid = price_grid(instance)
    size = int(np.prod([len(g) for g in grid]))
    if size > grid_cap:
        raise ResourceLimitError(f"price grid has {size} points, cap is {grid_cap}")
    best = math.inf
    basis = None
    for combo in itertools.product(*grid):
        sol = relaxation_value(instance, scenarios, combo, lam, mu, basis=basis)
        basis = sol.basis
        best = min(best, sol.objective)
    return best


# ---------------------------------------------------------------------
# centralized vs decentralized

@dataclass
class GapRecord:
    centralized_ub: float
    centralized_lb: float
    decentralized: float
    delta_max: float
    raw_gap_pct: float
    corrected_gap_pct: float
    ordering_ok: bool


def compare_centralized(instance: ProblemInstance, central, decentral: DecentralizedResult) -> GapRecord:
    """Percent gap of the decentralized objective over the centralized one, raw and Delta-corrected."""
    ub, lb = central.upper_bound, central.lower_bound
    z = decentral.objective
    dmax = instance.max_gap()
    tol = 1e-9 * max(1.0, abs(z))

    def pct(ref):
        # ties reached by different LPs differ in the last bits; report them as zero
        return 0.0 if z <= 0 or abs(z - ref) <= tol else 100.0 * (z - ref) / z

    raw, corrected = pct(ub), pct(lb)
    ok = ub <= z + dmax + tol
    return GapRecord(ub, lb, z, dmax, raw, corrected, ok)
