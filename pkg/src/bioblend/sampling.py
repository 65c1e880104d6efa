"""Seeded Monte Carlo quality scenarios and empirical violation rates.

Each supplier/biomass pair draws from its own PCG64 stream, keyed by the
run seed, a stream tag, a replication number and CRC32 hashes of the two
ids. Adding suppliers or biomass types therefore leaves existing streams
untouched, and optimisation, validation and replication samples never
share draws.
"""
from __future__ import annotations

import csv
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import ProblemInstance, TriangularParams, UniformParams

STREAM_TAGS = {"optimize": 0, "validate": 1, "replicate": 2}


@dataclass(frozen=True)
class ScenarioSet:
    """N joint draws of ash (wt.%) and heating value (10^6 BTU/DT) per pair.

    ``ash`` and ``heat`` have shape (N, n_pairs) with columns aligned to
    ``ProblemInstance.pairs``.
    """

    ash: np.ndarray
    heat: np.ndarray
    seed: int = 0
    pairs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        ash = np.array(self.ash, dtype=float)
        heat = np.array(self.heat, dtype=float)
        if ash.ndim != 2 or ash.shape != heat.shape:
            raise ValueError("ash and heat must be equal-shaped 2-d arrays")
        ash.flags.writeable = False
        heat.flags.writeable = False
        object.__setattr__(self, "ash", ash)
        object.__setattr__(self, "heat", heat)

    @property
    def N(self) -> int:
        return self.ash.shape[0]

    def subset(self, rows) -> "ScenarioSet":
        return ScenarioSet(self.ash[rows], self.heat[rows], self.seed, self.pairs)


def _stream(seed: int, tag: int, rep: int, supplier_id: str, biomass_id: str) -> np.random.Generator:
    key = (tag, rep, zlib.crc32(supplier_id.encode()), zlib.crc32(biomass_id.encode()))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def triangular_inverse_cdf(u, params: TriangularParams) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    lo, mode, hi = params.low, params.mode, params.high
    width = hi - lo
    if width == 0.0:
        return np.full_like(u, lo)
    split = (mode - lo) / width
    left = lo + np.sqrt(u * width * (mode - lo))
    right = hi - np.sqrt((1.0 - u) * width * (hi - mode))
    return np.where(u < split, left, right)


def uniform_from_unit(u, params: UniformParams) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return params.low + (params.high - params.low) * u


def sample_scenarios(instance: ProblemInstance, N: int, seed: int, *, stream: str = "optimize",
                     replication: int = 0) -> ScenarioSet:
    if int(N) < 1:
        raise ValueError("N must be at least 1")
    N = int(N)
    tag = STREAM_TAGS[stream]
    n = len(instance.pairs)
    ash = np.empty((N, n))
    heat = np.empty((N, n))
    ids = []
    for k, (i, j) in enumerate(instance.pairs):
        s, b = instance.suppliers[i], instance.biomass[j]
        rng = _stream(seed, tag, replication, s.id, b.id)
        ash[:, k] = triangular_inverse_cdf(rng.random(N), b.ash)
        heat[:, k] = uniform_from_unit(rng.random(N), b.heat)
        ids.append((s.id, b.id))
    return ScenarioSet(ash, heat, int(seed), tuple(ids))


def scenario_residuals(x, scenarios: ScenarioSet, alpha: float, tau: float, efficiency) -> tuple[np.ndarray, np.ndarray]:
    """Per-scenario (E1_s, E2_s): ash excess over the limit and thermal shortfall."""
    x = np.asarray(x, dtype=float)
    e1 = (scenarios.ash - alpha) @ x
    e2 = tau - (scenarios.heat * np.asarray(efficiency, dtype=float)) @ x
    return e1, e2


def empirical_violation_rates(x, scenarios: ScenarioSet, alpha: float, tau: float, efficiency) -> tuple[float, float]:
    """Fraction of scenarios with E1 > 0 and with E2 > 0 (ties count as satisfied)."""
    e1, e2 = scenario_residuals(x, scenarios, alpha, tau, efficiency)
    return float(np.mean(e1 > 0)), float(np.mean(e2 > 0))


# flat-table dump -------------------------------------------------------

DUMP_HEADER = ("scenario", "supplier", "biomass", "ash", "heat")


def dump_scenarios(scenarios: ScenarioSet, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DUMP_HEADER)
        for s in range(scenarios.N):
            for k, (sid, bid) in enumerate(scenarios.pairs):
                w.writerow((s, sid, bid, repr(float(scenarios.ash[s, k])), repr(float(scenarios.heat[s, k]))))


def load_scenarios(path, pairs: Sequence[tuple[str, str]] | None = None, seed: int = 0) -> ScenarioSet:
    rows = list(csv.DictReader(open(Path(path), newline="")))
    if not rows:
        raise ValueError(f"{path}: empty scenario table")
    if pairs is None:
        seen: dict[tuple[str, str], None] = {}
        for r in rows:
            seen.setdefault((r["supplier"], r["biomass"]), None)
        pairs = tuple(seen)
    col = {p: k for k, p in enumerate(pairs)}
    N = 1 + max(int(r["scenario"]) for r in rows)
    ash = np.full((N, len(pairs)), np.nan)
    heat = np.full((N, len(pairs)), np.nan)
    for r in rows:
        s, k = int(r["scenario"]), col[(r["supplier"], r["biomass"])]
        ash[s, k] = float(r["ash"])
        heat[s, k] = float(r["heat"])
    if np.isnan(ash).any():
        raise ValueError(f"{path}: incomplete scenario table")
    return ScenarioSet(ash, heat, seed, tuple(pairs))
