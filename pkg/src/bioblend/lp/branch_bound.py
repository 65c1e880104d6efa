"""Depth-first branch-and-bound over "choose exactly one" indicator groups.

Each group is a list of column indices of 0/1 variables whose sum is pinned
to 1 by a row already present in the LP. Branching on a group creates one
child per member (that member fixed to 1, the rest to 0), explored in member
order; a node is pruned unless its bound is strictly better than the
incumbent, so among tied optima the first one in lexicographic order wins.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .simplex import OPTIMAL, LinearProgram, LpSolution, solve_lp

INT_TOL = 1e-6


class ResourceLimitError(RuntimeError):
    """The search tree outgrew its node budget."""


@dataclass
class MipResult:
    status: str
    solution: Optional[LpSolution]
    assignment: Optional[tuple[int, ...]]
    objective: float
    root_bound: float
    nodes: int

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _fix(lower: np.ndarray, upper: np.ndarray, group: Sequence[int], pick: int):
    lo, hi = lower.copy(), upper.copy()
    for q, col in enumerate(group):
        lo[col] = hi[col] = 1.0 if q == pick else 0.0
    return lo, hi


def _assignment(x: np.ndarray, groups) -> Optional[tuple[int, ...]]:
    out = []
    for g in groups:
        vals = x[list(g)]
        hit = np.flatnonzero(np.abs(vals - 1.0) <= INT_TOL)
        if hit.size != 1 or np.any(np.abs(np.delete(vals, hit[0])) > INT_TOL):
            return None
        out.append(int(hit[0]))
    return tuple(out)


def _tol(v: float) -> float:
    return 1e-9 * max(1.0, abs(v)) if np.isfinite(v) else 0.0


def solve_bracket_mip(lp: LinearProgram, groups: Sequence[Sequence[int]], *, node_limit: int = 100_000) -> MipResult:
    """Exact minimum of ``lp`` with every group's indicators binary."""
    if lp.maximize:
        raise ValueError("branch-and-bound expects a minimisation")
    groups = [list(g) for g in groups]
    best: Optional[LpSolution] = None
    best_assign = None
    best_obj = np.inf
    nodes = 0
    root = solve_lp(lp)
    root_bound = root.objective if root.optimal else np.inf
    if root.status != OPTIMAL:
        return MipResult(root.status, None, None, np.inf, root_bound, 1)

    # stack of (lower, upper, depth, warm basis); children pushed in reverse for ascending visits
    stack = [(lp.lower, lp.upper, 0, None)]
    while stack:
        lower, upper, depth, basis = stack.pop()
        nodes += 1
        if nodes > node_limit:
            raise ResourceLimitError(f"node limit {node_limit} exceeded")
        sol = root if depth == 0 else solve_lp(lp.with_bounds(lower, upper), basis=basis)
        if sol.status != OPTIMAL or sol.objective >= best_obj - _tol(best_obj):
            continue
        assign = _assignment(sol.x, groups)
        if assign is not None:
            best, best_obj, best_assign = sol, sol.objective, assign
            continue
        g = next(g for g in groups if _assignment(sol.x, [g]) is None)
        for pick in reversed(range(len(g))):
            lo, hi = _fix(lower, upper, g, pick)
            if np.any(lo > hi):
                continue
            stack.append((lo, hi, depth + 1, sol.basis))
    if best is None:
        return MipResult("infeasible", None, None, np.inf, root_bound, nodes)
    return MipResult(OPTIMAL, best, best_assign, best_obj, root_bound, nodes)


def solve_bracket_enumeration(lp: LinearProgram, groups: Sequence[Sequence[int]], *, limit: int = 100_000) -> MipResult:
    """Brute force over every assignment; first minimum in lexicographic order wins."""
    groups = [list(g) for g in groups]
    total = int(np.prod([len(g) for g in groups])) if groups else 1
    if total > limit:
        raise ResourceLimitError(f"{total} assignments exceed the enumeration limit {limit}")
    best, best_obj, best_assign = None, np.inf, None
    for combo in itertools.product(*[range(len(g)) for g in groups]):
        lo, hi = lp.lower, lp.upper
        for g, pick in zip(groups, combo):
            lo, hi = _fix(lo, hi, g, pick)
        if np.any(lo > hi):
            continue
        sol = solve_lp(lp.with_bounds(lo, hi))
        if sol.optimal and sol.objective < best_obj - _tol(best_obj):
            best, best_obj, best_assign = sol, sol.objective, tuple(combo)
    if best is None:
        return MipResult("infeasible", None, None, np.inf, np.inf, total)
    return MipResult(OPTIMAL, best, best_assign, best_obj, np.nan, total)
