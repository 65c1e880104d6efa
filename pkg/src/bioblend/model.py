"""Domain types and deterministic cost functions.

Canonical units: dry tons (DT) for mass, 10^6 BTU for energy, dollars for
money and miles for distance. Thermal requirements quoted in 10^9 BTU are
converted once, by :func:`thermal_requirement_from_gbtu`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np

#: 10^9 BTU -> 10^6 BTU
GBTU_TO_MMBTU = 1000.0

# relative slack accepted when a solver hands back X a hair above S_ib
_DOMAIN_RTOL = 1e-9


class ModelError(ValueError):
    """Invalid model data."""


class DomainError(ValueError):
    """Quantity outside the domain of a supply curve."""


def thermal_requirement_from_gbtu(tau_gbtu: float) -> float:
    return float(tau_gbtu) * GBTU_TO_MMBTU


@dataclass(frozen=True)
class TriangularParams:
    low: float
    mode: float
    high: float

    def __post_init__(self):
        if not (0.0 <= self.low <= self.mode <= self.high):
            raise ModelError(f"triangular parameters must satisfy 0 <= min <= mode <= max, got {self}")

    @property
    def mean(self) -> float:
        return (self.low + self.mode + self.high) / 3.0


@dataclass(frozen=True)
class UniformParams:
    low: float
    high: float

    def __post_init__(self):
        if not (0.0 < self.low <= self.high):
            raise ModelError(f"uniform parameters must satisfy 0 < LHV <= HHV, got {self}")

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)


@dataclass(frozen=True)
class Bracket:
    lower: float
    upper: float
    price: float


@dataclass(frozen=True)
class SupplyCurve:
    """Step supply curve: quantity brackets with an all-units farmgate price."""

    brackets: tuple[Bracket, ...]

    def __post_init__(self):
        br = tuple(Bracket(float(b.lower), float(b.upper), float(b.price)) for b in self.brackets)
        object.__setattr__(self, "brackets", br)
        if not br:
            raise ModelError("supply curve needs at least one bracket")
        if br[0].lower != 0.0:
            raise ModelError("first bracket must start at 0")
        for p, b in enumerate(br):
            if not b.lower < b.upper:
                raise ModelError(f"bracket {p}: lower {b.lower} must be < upper {b.upper}")
            if b.price < 0:
                raise ModelError(f"bracket {p}: negative price")
            if p > 0:
                if b.lower != br[p - 1].upper:
                    raise ModelError(f"bracket {p} is not contiguous with bracket {p - 1}")
                if not b.price > br[p - 1].price:
                    raise ModelError(f"bracket {p}: prices must be strictly increasing")

    @classmethod
    def from_breakpoints(cls, uppers: Sequence[float], prices: Sequence[float]) -> "SupplyCurve":
        if len(uppers) != len(prices):
            raise ModelError("uppers and prices differ in length")
        lows = [0.0, *uppers[:-1]]
        return cls(tuple(Bracket(lo, up, c) for lo, up, c in zip(lows, uppers, prices)))

    def __len__(self) -> int:
        return len(self.brackets)

    @property
    def availability(self) -> float:
        return self.brackets[-1].upper

    @cached_property
    def lowers(self) -> np.ndarray:
        return np.array([b.lower for b in self.brackets])

    @cached_property
    def uppers(self) -> np.ndarray:
        return np.array([b.upper for b in self.brackets])

    @cached_property
    def prices(self) -> np.ndarray:
        return np.array([b.price for b in self.brackets])

    @cached_property
    def intercepts(self) -> np.ndarray:
        """Cost accumulated below each bracket at incremental pricing (lambda_ibp)."""
        widths = self.uppers - self.lowers
        return np.concatenate([[0.0], np.cumsum(self.prices[:-1] * widths[:-1])])

    @cached_property
    def bracket_gaps(self) -> np.ndarray:
        """all-units minus incremental cost inside each bracket, c_p*lower_p - lambda_p."""
        return self.prices * self.lowers - self.intercepts

    def _check(self, x: float) -> float:
        x = float(x)
        S = self.availability
        if x < 0.0 or not np.isfinite(x):
            if x > -_DOMAIN_RTOL * max(1.0, S):
                return 0.0
            raise DomainError(f"quantity {x} is negative")
        if x > S:
            if x <= S * (1.0 + _DOMAIN_RTOL) + _DOMAIN_RTOL:
                return S
            raise DomainError(f"quantity {x} exceeds availability {S}")
        return x

    def bracket_index(self, x: float) -> int:
        """Bracket holding ``x``; a shared breakpoint belongs to the cheaper bracket."""
        x = self._check(x)
        return int(np.searchsorted(self.uppers, x, side="left"))

    def purchase_cost(self, x: float) -> float:
        p = self.bracket_index(x)
        return float(self.prices[p] * self._check(x))

    def outer_cost(self, x: float) -> float:
        x = self._check(x)
        p = self.bracket_index(x)
        return float(self.intercepts[p] + self.prices[p] * (x - self.lowers[p]))

    def max_gap(self) -> float:
        return float(self.bracket_gaps.max())


@dataclass(frozen=True)
class BiomassType:
    id: str
    ash: TriangularParams
    heat: UniformParams
    efficiency: float
    processing: float
    storage: float
    transport_fixed: float
    transport_variable: float
    harvest_collection: float = 0.0
    harvest_cost: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if not (0.0 < self.efficiency <= 1.0):
            raise ModelError(f"{self.id}: efficiency must lie in (0, 1]")
        for name in ("processing", "storage", "transport_fixed", "transport_variable", "harvest_collection"):
            if getattr(self, name) < 0:
                raise ModelError(f"{self.id}: {name} must be nonnegative")
        if self.harvest_cost is not None:
            hc = tuple(float(v) for v in self.harvest_cost)
            if any(v < 0 for v in hc):
                raise ModelError(f"{self.id}: harvest costs must be nonnegative")
            object.__setattr__(self, "harvest_cost", hc)

    @property
    def handling(self) -> float:
        """f_b: processing plus storage at the refinery."""
        return self.processing + self.storage


@dataclass(frozen=True)
class Supplier:
    id: str
    distance: Optional[float] = None
    location: Optional[tuple[float, float]] = None
    curves: Mapping[str, SupplyCurve] = field(default_factory=dict)

    def __post_init__(self):
        if self.distance is not None and self.distance < 0:
            raise ModelError(f"supplier {self.id}: negative distance")
        object.__setattr__(self, "curves", dict(self.curves))

    def with_distance(self, distance: float) -> "Supplier":
        return Supplier(self.id, float(distance), self.location, self.curves)


@dataclass(frozen=True)
class RefinerySpec:
    ash_limit: float
    thermal_requirement: float
    risk_ash: float = 0.2
    risk_thermal: float = 0.2
    inner_risk_ash: float = 0.0
    inner_risk_thermal: float = 0.0

    def __post_init__(self):
        if not self.ash_limit > 0:
            raise ModelError("ash limit must be positive")
        if self.thermal_requirement < 0:
            raise ModelError("thermal requirement must be nonnegative")
        if not (0.0 <= self.inner_risk_ash <= self.risk_ash < 1.0):
            raise ModelError("need 0 <= inner ash risk <= ash risk < 1")
        if not (0.0 <= self.inner_risk_thermal <= self.risk_thermal < 1.0):
            raise ModelError("need 0 <= inner thermal risk <= thermal risk < 1")


@dataclass(frozen=True)
class ProblemInstance:
    """Suppliers, biomass types and refinery requirements.

    Supplier/biomass combinations that carry a supply curve are the decision
    "pairs"; every per-pair array below is aligned with :attr:`pairs`.
    """

    suppliers: tuple[Supplier, ...]
    biomass: tuple[BiomassType, ...]
    refinery: RefinerySpec

    def __post_init__(self):
        object.__setattr__(self, "suppliers", tuple(self.suppliers))
        object.__setattr__(self, "biomass", tuple(self.biomass))
        if not self.suppliers:
            raise ModelError("instance has no suppliers")
        if not self.biomass:
            raise ModelError("instance has no biomass types")
        for group, label in ((self.suppliers, "supplier"), (self.biomass, "biomass")):
            ids = [x.id for x in group]
            if len(set(ids)) != len(ids):
                raise ModelError(f"duplicate {label} ids")
        known = {b.id: b for b in self.biomass}
        counts: dict[str, int] = {}
        for s in self.suppliers:
            if s.distance is None:
                raise ModelError(f"supplier {s.id} has no distance to the refinery")
            for bid, curve in s.curves.items():
                if bid not in known:
                    raise ModelError(f"supplier {s.id}: unknown biomass {bid!r}")
                n = counts.setdefault(bid, len(curve))
                if n != len(curve):
                    raise ModelError(f"biomass {bid}: supplier {s.id} has {len(curve)} brackets, expected {n}")
                hc = known[bid].harvest_cost
                if hc is not None and len(hc) != len(curve):
                    raise ModelError(f"biomass {bid}: harvest cost count differs from bracket count")
        if not counts:
            raise ModelError("instance has no supply curves")

    # lookups -----------------------------------------------------------
    @cached_property
    def supplier_index(self) -> dict[str, int]:
        return {s.id: i for i, s in enumerate(self.suppliers)}

    @cached_property
    def biomass_index(self) -> dict[str, int]:
        return {b.id: j for j, b in enumerate(self.biomass)}

    @cached_property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        out = []
        for i, s in enumerate(self.suppliers):
            for j, b in enumerate(self.biomass):
                if b.id in s.curves:
                    out.append((i, j))
        return tuple(out)

    @cached_property
    def pair_index(self) -> dict[tuple[int, int], int]:
        return {ij: k for k, ij in enumerate(self.pairs)}

    def curve(self, k: int) -> SupplyCurve:
        i, j = self.pairs[k]
        return self.suppliers[i].curves[self.biomass[j].id]

    @cached_property
    def curves(self) -> tuple[SupplyCurve, ...]:
        return tuple(self.curve(k) for k in range(len(self.pairs)))

    # per-pair parameter arrays ----------------------------------------
    @cached_property
    def transport(self) -> np.ndarray:
        return np.array([unit_transport_cost(self, i, j) for i, j in self.pairs])

    @cached_property
    def handling(self) -> np.ndarray:
        return np.array([self.biomass[j].handling for _, j in self.pairs])

    @cached_property
    def efficiency(self) -> np.ndarray:
        return np.array([self.biomass[j].efficiency for _, j in self.pairs])

    @cached_property
    def availability(self) -> np.ndarray:
        return np.array([c.availability for c in self.curves])

    @cached_property
    def pair_supplier(self) -> np.ndarray:
        return np.array([i for i, _ in self.pairs], dtype=int)

    @cached_property
    def pair_biomass(self) -> np.ndarray:
        return np.array([j for _, j in self.pairs], dtype=int)

    def harvest_costs(self, k: int) -> np.ndarray:
        """c-bar_bp for pair ``k``; defaults to the farmgate prices of its curve."""
        hc = self.biomass[self.pairs[k][1]].harvest_cost
        return np.array(hc) if hc is not None else self.curve(k).prices

    def max_gap(self) -> float:
        """Largest possible all-units vs. outer-approximation gap, summed over pairs."""
        return float(sum(c.max_gap() for c in self.curves))

    def replace_refinery(self, **changes) -> "ProblemInstance":
        from dataclasses import replace

        return ProblemInstance(self.suppliers, self.biomass, replace(self.refinery, **changes))


def unit_transport_cost(instance: ProblemInstance, supplier, biomass) -> float:
    """t_ib = v_b * Dist_i + g_b. ``supplier``/``biomass`` may be ids or indices."""
    i = instance.supplier_index[supplier] if isinstance(supplier, str) else int(supplier)
    j = instance.biomass_index[biomass] if isinstance(biomass, str) else int(biomass)
    if not (0 <= i < len(instance.suppliers)) or not (0 <= j < len(instance.biomass)):
        raise KeyError((supplier, biomass))
    s, b = instance.suppliers[i], instance.biomass[j]
    return b.transport_variable * s.distance + b.transport_fixed


def purchase_cost(curve: SupplyCurve, x: float) -> float:
    return curve.purchase_cost(x)


def outer_cost(curve: SupplyCurve, x: float) -> float:
    return curve.outer_cost(x)


@dataclass
class BlendSolution:
    """Purchases per pair with the bracket each one falls in, plus scenario slacks.

    ``quantities[k]`` is X_ib for pair ``k``; ``brackets[k]`` is the bracket
    index p with Z_ibp = 1. The full X_ibp / Z_ibp tables are derived.
    """

    quantities: np.ndarray
    brackets: np.ndarray
    ash_surplus: np.ndarray  # V_s
    ash_excess: np.ndarray  # W_s
    thermal_surplus: np.ndarray  # U_s
    thermal_shortfall: np.ndarray  # J_s
    objective: float = float("nan")
    cost_breakdown: dict = field(default_factory=dict)

    def x_ibp(self, instance: ProblemInstance) -> list[np.ndarray]:
        out = []
        for k, curve in enumerate(instance.curves):
            row = np.zeros(len(curve))
            row[self.brackets[k]] = self.quantities[k]
            out.append(row)
        return out

    def z_ibp(self, instance: ProblemInstance) -> list[np.ndarray]:
        out = []
        for k, curve in enumerate(instance.curves):
            row = np.zeros(len(curve), dtype=int)
            row[self.brackets[k]] = 1
            out.append(row)
        return out


def lift(instance: ProblemInstance, x: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Bracketed form of aggregate purchases: (clipped quantities, bracket index per pair).

    X = 0 is placed in bracket 0, whose lower bound is 0, so sum_p Z_ibp = 1 holds.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (len(instance.pairs),):
        raise ValueError("x must hold one quantity per supplier/biomass pair")
    q = np.empty_like(x)
    p = np.empty(len(x), dtype=int)
    for k, curve in enumerate(instance.curves):
        q[k] = curve._check(x[k])
        p[k] = curve.bracket_index(q[k])
    return q, p


def flatten(x_ibp: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([float(np.sum(row)) for row in x_ibp])


def cost_breakdown(instance: ProblemInstance, x: Sequence[float]) -> dict[str, float]:
    x = np.asarray(x, dtype=float)
    purchase = sum(c.purchase_cost(v) for c, v in zip(instance.curves, x))
    return {
        "purchase": float(purchase),
        "transport": float(instance.transport @ x),
        "processing": float(instance.handling @ x),
    }


def total_deterministic_cost(instance: ProblemInstance, solution) -> float:
    """Supply-chain cost: all-units purchase + transport + processing/storage."""
    x = solution.quantities if isinstance(solution, BlendSolution) else solution
    return float(sum(cost_breakdown(instance, x).values()))


def outer_breakdown(instance: ProblemInstance, x: Sequence[float]) -> dict[str, float]:
    """:func:`cost_breakdown` with each pair's purchase priced by the outer approximation.

    The outer cost never exceeds the all-units cost; capping each pair at it
    keeps that true after round-off, and the shared summation order carries it
    over to the totals.
    """
    x = np.asarray(x, dtype=float)
    purchase = sum(min(c.outer_cost(v), c.purchase_cost(v)) for c, v in zip(instance.curves, x))
    return {
        "purchase": float(purchase),
        "transport": float(instance.transport @ x),
        "processing": float(instance.handling @ x),
    }


def outer_total_cost(instance: ProblemInstance, x: Sequence[float]) -> float:
    return float(sum(outer_breakdown(instance, x).values()))
