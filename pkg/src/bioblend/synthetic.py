"""Synthetic benchmark instances built on the bundled feedstock table.

Each biomass type's total quantity (TQ, million DT) is split across randomly
placed suppliers with a flat Dirichlet draw and cut into contiguous brackets.
Farmgate prices climb from the harvest-and-collection cost in fixed steps.
The refinery sits at the availability-weighted 1-median of the suppliers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .io import default_biomass, site_refinery, table1_rows, thermal_requirement_for_demand
from .model import ProblemInstance, RefinerySpec, Supplier, SupplyCurve

# keeps generator draws apart from the scenario streams of the same seed
_GENERATOR_KEY = 7


@dataclass(frozen=True)
class SyntheticConfig:
    n_suppliers: int = 10
    n_brackets: int = 3
    price_step: float = 10.0
    first_bracket_share: float = 0.7
    bracket_concentration: float = 20.0
    area_miles: float = 100.0
    supply_scale: float = 1.0
    efficiency: float = 0.8
    ash_limit: float = 1.0
    risk_ash: float = 0.2
    risk_thermal: float = 0.2
    inner_risk_ash: float = 0.0
    inner_risk_thermal: float = 0.0
    biomass_ids: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.n_suppliers < 1 or self.n_brackets < 1:
            raise ValueError("need at least one supplier and one bracket")
        if not (0.0 < self.first_bracket_share < 1.0):
            raise ValueError("first bracket share must lie in (0, 1)")
        if self.price_step <= 0 or self.area_miles < 0 or self.supply_scale <= 0:
            raise ValueError("price step and supply scale must be positive, area nonnegative")


def _bracket_weights(P: int, config: SyntheticConfig) -> np.ndarray:
    if P == 1:
        return np.ones(1)
    rest = (1.0 - config.first_bracket_share) / (P - 1)
    return config.bracket_concentration * np.array([config.first_bracket_share] + [rest] * (P - 1))


def generate_synthetic(demand_mdt: float, seed: int, config: SyntheticConfig = SyntheticConfig()) -> ProblemInstance:
    if demand_mdt <= 0:
        raise ValueError("demand must be positive")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(_GENERATOR_KEY,))))
    biomass = default_biomass(config.efficiency)
    tq = {r["id"]: float(r["tq"]) * 1e6 * config.supply_scale for r in table1_rows()}
    if config.biomass_ids is not None:
        biomass = tuple(b for b in biomass if b.id in set(config.biomass_ids))
    n, P = config.n_suppliers, config.n_brackets
    locs = rng.uniform(0.0, config.area_miles, size=(n, 2))
    curves: list[dict[str, SupplyCurve]] = [{} for _ in range(n)]
    for b in biomass:
        shares = rng.dirichlet(np.ones(n))
        for i in range(n):
            qty = shares[i] * tq[b.id]
            widths = rng.dirichlet(_bracket_weights(P, config)) * qty
            uppers = np.cumsum(widths)
            uppers[-1] = qty
            if qty <= 0 or np.any(np.diff(np.concatenate([[0.0], uppers])) <= 0):
                continue
            prices = b.harvest_collection + config.price_step * np.arange(P)
            curves[i][b.id] = SupplyCurve.from_breakpoints(uppers.tolist(), prices.tolist())
    weights = [sum(c.availability for c in cv.values()) for cv in curves]
    _, site = site_refinery(locs, weights)
    suppliers = tuple(
        Supplier(f"S{i + 1:02d}", float(np.hypot(*(locs[i] - site))), (float(locs[i, 0]), float(locs[i, 1])), curves[i])
        for i in range(n))
    refinery = RefinerySpec(config.ash_limit, thermal_requirement_for_demand(demand_mdt), config.risk_ash,
                            config.risk_thermal, config.inner_risk_ash, config.inner_risk_thermal)
    return ProblemInstance(suppliers, biomass, refinery)
