"""Small hand-rolled instances shared by the test modules."""
from __future__ import annotations

import numpy as np

from bioblend.model import (Bracket, BiomassType, ProblemInstance, RefinerySpec, Supplier, SupplyCurve,
                            TriangularParams, UniformParams)


def curve(*rows) -> SupplyCurve:
    return SupplyCurve(tuple(Bracket(*r) for r in rows))


def biomass(bid="b", ash=(0.5, 1.0, 1.5), heat=(14.0, 16.0), eff=0.8, pr=5.0, st=2.0, g=10.0, v=0.05, hc=0.0):
    return BiomassType(bid, TriangularParams(*ash), UniformParams(*heat), eff, pr, st, g, v, hc)


def random_curve(rng: np.random.Generator, n_brackets: int, scale: float = 100.0) -> SupplyCurve:
    widths = rng.uniform(0.3, 1.0, n_brackets) * scale
    uppers = np.cumsum(widths)
    prices = 10.0 + np.cumsum(rng.uniform(1.0, 8.0, n_brackets))
    return SupplyCurve.from_breakpoints(uppers.tolist(), prices.tolist())


def random_instance(rng: np.random.Generator, n_suppliers: int = 2, n_biomass: int = 2, n_brackets: int = 2,
                    *, tau_share: float | None = None, risk: float = 0.2, inner_risk: float = 0.0,
                    density: float = 1.0) -> ProblemInstance:
    """Random desk-scale instance whose thermal target is reachable with the cheapest heat."""
    bios = []
    for j in range(n_biomass):
        lo = rng.uniform(0.2, 3.0)
        hi = lo + rng.uniform(0.2, 4.0)
        mode = rng.uniform(lo, hi)
        L = rng.uniform(9.0, 16.0)
        bios.append(biomass(f"b{j}", (lo, mode, hi), (L, L + rng.uniform(0.2, 2.0)), rng.uniform(0.7, 0.85),
                            rng.uniform(2, 8), rng.uniform(0, 4), rng.uniform(5, 20), rng.uniform(0.01, 0.1)))
    sups = []
    for i in range(n_suppliers):
        curves = {}
        for j in range(n_biomass):
            if j == 0 or rng.random() < density:
                curves[f"b{j}"] = random_curve(rng, n_brackets)
        if not curves:
            curves["b0"] = random_curve(rng, n_brackets)
        sups.append(Supplier(f"s{i}", float(rng.uniform(0, 100)), None, curves))
    ref = RefinerySpec(1.0, 1.0, risk, risk, inner_risk, inner_risk)
    inst = ProblemInstance(tuple(sups), tuple(bios), ref)
    cap = float(np.sum(inst.availability * inst.efficiency * np.array([inst.biomass[j].heat.low
                                                                        for _, j in inst.pairs])))
    share = rng.uniform(0.2, 0.6) if tau_share is None else tau_share
    ash_mid = float(np.mean([b.ash.mean for b in bios]))
    return inst.replace_refinery(ash_limit=max(ash_mid, 0.1), thermal_requirement=share * cap)


def single_pair_instance(c=((0, 100, 10), (100, 250, 20)), *, tau=0.0, ash=(0.5, 0.5, 0.5), heat=(10.0, 10.0),
                         eff=1.0, pr=0.0, st=0.0, g=0.0, v=0.0, alpha=1.0, dist=0.0, risk=0.2) -> ProblemInstance:
    b = biomass("b", ash, heat, eff, pr, st, g, v)
    s = Supplier("s", dist, None, {"b": curve(*c)})
    return ProblemInstance((s,), (b,), RefinerySpec(alpha, tau, risk, risk))


def quantile_oracle_instance(*, c=5.0, tau=1000.0, heat=(10.0, 20.0), eff=0.8, risk=0.2) -> ProblemInstance:
    """One lot, ash never binding: the chance-constrained optimum is known in closed form."""
    return single_pair_instance(c=((0, 1e6, c),), tau=tau, ash=(0.1, 0.2, 0.3), heat=heat, eff=eff,
                                alpha=1.0, risk=risk)


def quantile_oracle_optimum(*, c=5.0, tau=1000.0, heat=(10.0, 20.0), eff=0.8, risk=0.2) -> float:
    # P(e h X >= tau) >= 1 - risk  <=>  X >= tau / (e * q_risk(h))
    lo, hi = heat
    return c * tau / (eff * (lo + risk * (hi - lo)))


def brute_force_profit(margins, lowers, uppers) -> float:
    """Best follower profit by trying every bracket at zero, its lower and its upper end."""
    best = 0.0
    for p in range(len(margins)):
        for x in (0.0, lowers[p], uppers[p]):
            best = max(best, margins[p] * x)
    return best


def random_prices(instance: ProblemInstance, rng: np.random.Generator):
    from bioblend.decentralized import PriceVector, price_grid
    grid = price_grid(instance)
    return PriceVector({b.id: float(rng.uniform(0, 1.2 * g.max())) for b, g in zip(instance.biomass, grid)})
