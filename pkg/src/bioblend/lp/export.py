"""Write a :class:`LinearProgram` in CPLEX LP text format (debugging aid)."""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .simplex import LinearProgram

_BAD = re.compile(r"[^A-Za-z0-9_.\[\]]")


def _clean(name: str) -> str:
    name = _BAD.sub("_", name)
    return name if name and not name[0].isdigit() and name[0] != "." else "_" + name


def _expr(coefs, names) -> str:
    parts = []
    for j, v in enumerate(coefs):
        if v == 0:
            continue
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {abs(v):.17g} {names[j]}")
    if not parts:
        return "0 " + names[0] if names else "0"
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else s


def lp_text(lp: LinearProgram) -> str:
    m, n = lp.shape
    names = [_clean(v) for v in (lp.var_names or [f"x{j}" for j in range(n)])]
    rows = [_clean(r) for r in (lp.row_names or [f"c{i}" for i in range(m)])]
    out = ["Maximize" if lp.maximize else "Minimize", " obj: " + _expr(lp.c, names), "Subject To"]
    for i in range(m):
        out.append(f" {rows[i]}: {_expr(lp.A[i], names)} {lp.senses[i]} {lp.b[i]:.17g}")
    out.append("Bounds")
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isinf(lo) and np.isinf(hi):
            out.append(f" {names[j]} free")
        elif lo == hi:
            out.append(f" {names[j]} = {lo:.17g}")
        else:
            left = "-inf" if np.isinf(lo) else f"{lo:.17g}"
            right = "+inf" if np.isinf(hi) else f"{hi:.17g}"
            out.append(f" {left} <= {names[j]} <= {right}")
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp_file(lp: LinearProgram, path) -> Path:
    path = Path(path)
    path.write_text(lp_text(lp))
    return path
