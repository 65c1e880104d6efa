"""CSV ingestion and export, the bundled feedstock table, and refinery siting.

Three comma-separated files with a header line describe an instance:

``suppliers``  id, x, y, distance
    Either a distance (miles) or planar coordinates; with coordinates only,
    distance is Euclidean to the refinery location.
``biomass``    id, ash_min, ash_mode, ash_max, lhv, hhv, efficiency,
               processing, storage, transport_fixed, transport_variable,
               harvest_collection[, harvest_cost]
    ``harvest_cost`` is an optional ';'-separated list, one entry per bracket.
``curves``     supplier, biomass, bracket, lower, upper, price
    Long format, one row per bracket, ``bracket`` numbered from 1.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .model import (Bracket, BiomassType, ModelError, ProblemInstance, RefinerySpec, Supplier, SupplyCurve,
                    TriangularParams, UniformParams)

SUPPLIER_COLUMNS = ("id", "x", "y", "distance")
BIOMASS_COLUMNS = ("id", "ash_min", "ash_mode", "ash_max", "lhv", "hhv", "efficiency", "processing", "storage",
                   "transport_fixed", "transport_variable", "harvest_collection", "harvest_cost")
CURVE_COLUMNS = ("supplier", "biomass", "bracket", "lower", "upper", "price")

#: thermal requirement per million dry tons of demand (10^9 BTU / MDT), from 3,838 at 0.3 MDT
THERMAL_GBTU_PER_MDT = 3838.0 / 0.3
DEFAULT_EFFICIENCY = 0.8


class ParseError(ValueError):
    """Malformed input file; the message names file, row and column."""

    def __init__(self, path, row: Optional[int], column: Optional[str], message: str):
        where = f"{path}"
        if row is not None:
            where += f", row {row}"
        if column is not None:
            where += f", column {column!r}"
        super().__init__(f"{where}: {message}")
        self.path, self.row, self.column = str(path), row, column


def _read(path, required: Sequence[str]) -> list[dict]:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in required if c not in header]
            if missing:
                raise ParseError(path, 1, missing[0], "missing column")
            return [(n + 2, row) for n, row in enumerate(reader)]  # type: ignore[misc]
    except FileNotFoundError:
        raise ParseError(path, None, None, "file not found") from None


def _num(path, row_no: int, row: dict, col: str, default: Optional[float] = None) -> float:
    raw = (row.get(col) or "").strip()
    if raw == "":
        if default is not None:
            return default
        raise ParseError(path, row_no, col, "empty value")
    try:
        v = float(raw)
    except ValueError:
        raise ParseError(path, row_no, col, f"not a number: {raw!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, row_no, col, f"not finite: {raw!r}")
    return v


# ---------------------------------------------------------------------
# bundled feedstock table

def table1_rows() -> list[dict]:
    """Raw rows of the bundled feedstock property and cost table."""
    with resources.files("bioblend.data").joinpath("table1.csv").open(newline="") as fh:
        return list(csv.DictReader(fh))


def default_biomass(efficiency: float = DEFAULT_EFFICIENCY) -> tuple[BiomassType, ...]:
    """Biomass types from the bundled table.

    Ash is triangular over the post-processing range with the average ash
    content as its mode; f_b = Pr + St.
    """
    out = []
    for r in table1_rows():
        f = {k: float(v) for k, v in r.items() if k not in ("id", "feedstock")}
        out.append(BiomassType(
            id=r["id"],
            ash=TriangularParams(f["acr_bar_low"], f["aac"], f["acr_bar_high"]),
            heat=UniformParams(f["lhv"], f["hhv"]),
            efficiency=efficiency,
            processing=f["pr"],
            storage=f["st"],
            transport_fixed=f["g"],
            transport_variable=f["v"],
            harvest_collection=f["hc"],
        ))
    return tuple(out)


def thermal_requirement_for_demand(demand_mdt: float) -> float:
    """tau in 10^6 BTU for a demand level in million dry tons."""
    return THERMAL_GBTU_PER_MDT * demand_mdt * 1000.0


# ---------------------------------------------------------------------
# siting

def site_refinery(locations: Sequence[Sequence[float]], weights: Sequence[float]) -> tuple[int, tuple[float, float]]:
    """Weighted 1-median restricted to supplier centroids; ties go to the lowest index."""
    pts = np.asarray(locations, dtype=float).reshape(-1, 2)
    w = np.asarray(weights, dtype=float)
    if pts.shape[0] == 0 or w.shape != (pts.shape[0],):
        raise ValueError("need one weight per supplier location")
    if np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weights must be nonnegative with at least one positive")
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    score = dist @ w
    best = int(np.flatnonzero(score <= score.min())[0])
    return best, (float(pts[best, 0]), float(pts[best, 1]))


# ---------------------------------------------------------------------
# ingestion

def read_biomass(path) -> tuple[BiomassType, ...]:
    out = []
    for n, r in _read(path, BIOMASS_COLUMNS[:-1]):
        g = lambda c, d=None: _num(path, n, r, c, d)  # noqa: E731
        bid = (r.get("id") or "").strip()
        if not bid:
            raise ParseError(path, n, "id", "empty id")
        hc_raw = (r.get("harvest_cost") or "").strip()
        hc = None
        if hc_raw:
            try:
                hc = tuple(float(v) for v in hc_raw.split(";"))
            except ValueError:
                raise ParseError(path, n, "harvest_cost", f"bad list {hc_raw!r}") from None
        try:
            out.append(BiomassType(bid, TriangularParams(g("ash_min"), g("ash_mode"), g("ash_max")),
                                   UniformParams(g("lhv"), g("hhv")), g("efficiency"), g("processing"), g("storage"),
                                   g("transport_fixed"), g("transport_variable"), g("harvest_collection", 0.0), hc))
        except ModelError as e:
            raise ModelError(f"{path}, row {n}: {e}") from None
    if not out:
        raise ModelError(f"{path}: no biomass types")
    return tuple(out)


def read_curves(path) -> dict[tuple[str, str], SupplyCurve]:
    rows: dict[tuple[str, str], list[tuple[int, Bracket]]] = {}
    for n, r in _read(path, CURVE_COLUMNS):
        sid, bid = (r["supplier"] or "").strip(), (r["biomass"] or "").strip()
        if not sid or not bid:
            raise ParseError(path, n, "supplier" if not sid else "biomass", "empty id")
        p = _num(path, n, r, "bracket")
        if p != int(p) or p < 1:
            raise ParseError(path, n, "bracket", "bracket numbers start at 1")
        br = Bracket(_num(path, n, r, "lower"), _num(path, n, r, "upper"), _num(path, n, r, "price"))
        rows.setdefault((sid, bid), []).append((int(p), br))
    out = {}
    for key, items in rows.items():
        items.sort(key=lambda t: t[0])
        if [p for p, _ in items] != list(range(1, len(items) + 1)):
            raise ModelError(f"{path}: brackets of {key} are not numbered 1..P")
        try:
            out[key] = SupplyCurve(tuple(b for _, b in items))
        except ModelError as e:
            raise ModelError(f"{path}: curve {key}: {e}") from None
    return out


def read_suppliers(path, curves: dict, refinery_location: Optional[tuple[float, float]] = None
                   ) -> tuple[tuple[Supplier, ...], Optional[tuple[float, float]]]:
    raw = []
    for n, r in _read(path, ("id",)):
        sid = (r.get("id") or "").strip()
        if not sid:
            raise ParseError(path, n, "id", "empty id")
        x = (r.get("x") or "").strip()
        y = (r.get("y") or "").strip()
        loc = (_num(path, n, r, "x"), _num(path, n, r, "y")) if (x or y) else None
        d = (r.get("distance") or "").strip()
        dist = _num(path, n, r, "distance") if d else None
        if loc is None and dist is None:
            raise ParseError(path, n, "distance", "need a distance or x/y coordinates")
        raw.append((sid, loc, dist))
    if not raw:
        raise ModelError(f"{path}: no suppliers")
    if any(dist is None for _, _, dist in raw) and refinery_location is None:
        if any(loc is None for _, loc, _ in raw):
            raise ModelError(f"{path}: cannot site the refinery without coordinates for every supplier")
        weights = [sum(c.availability for (s, _), c in curves.items() if s == sid) for sid, _, _ in raw]
        _, refinery_location = site_refinery([loc for _, loc, _ in raw], weights)
    suppliers = []
    for sid, loc, dist in raw:
        if dist is None:
            dist = math.dist(loc, refinery_location)
        own = {b: c for (s, b), c in curves.items() if s == sid}
        suppliers.append(Supplier(sid, dist, loc, own))
    known = {s for s, _, _ in raw}
    stray = sorted({s for s, _ in curves} - known)
    if stray:
        raise ModelError(f"supply curves reference unknown suppliers {stray}")
    return tuple(suppliers), refinery_location


def ingest_files(suppliers_path, biomass_path, curves_path, refinery: RefinerySpec,
                 refinery_location: Optional[tuple[float, float]] = None) -> ProblemInstance:
    biomass = read_biomass(biomass_path) if biomass_path else default_biomass()
    curves = read_curves(curves_path)
    suppliers, _ = read_suppliers(suppliers_path, curves, refinery_location)
    return ProblemInstance(suppliers, biomass, refinery)


# ---------------------------------------------------------------------
# export (canonical form)

def _fmt(v: float) -> str:
    return repr(float(v))


def write_biomass(biomass: Iterable[BiomassType], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BIOMASS_COLUMNS)
        for b in biomass:
            hc = ";".join(_fmt(v) for v in b.harvest_cost) if b.harvest_cost is not None else ""
            w.writerow((b.id, _fmt(b.ash.low), _fmt(b.ash.mode), _fmt(b.ash.high), _fmt(b.heat.low),
                        _fmt(b.heat.high), _fmt(b.efficiency), _fmt(b.processing), _fmt(b.storage),
                        _fmt(b.transport_fixed), _fmt(b.transport_variable), _fmt(b.harvest_collection), hc))


def write_suppliers(suppliers: Iterable[Supplier], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUPPLIER_COLUMNS)
        for s in suppliers:
            x, y = (_fmt(s.location[0]), _fmt(s.location[1])) if s.location is not None else ("", "")
            w.writerow((s.id, x, y, _fmt(s.distance)))


def write_curves(suppliers: Iterable[Supplier], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for s in suppliers:
            for bid in sorted(s.curves):
                for p, br in enumerate(s.curves[bid].brackets, start=1):
                    w.writerow((s.id, bid, p, _fmt(br.lower), _fmt(br.upper), _fmt(br.price)))


@dataclass(frozen=True)
class InstanceFiles:
    suppliers: Path
    biomass: Path
    curves: Path


def export_instance(instance: ProblemInstance, directory) -> InstanceFiles:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = InstanceFiles(d / "suppliers.csv", d / "biomass.csv", d / "curves.csv")
    write_suppliers(instance.suppliers, files.suppliers)
    write_biomass(instance.biomass, files.biomass)
    write_curves(instance.suppliers, files.curves)
    return files
