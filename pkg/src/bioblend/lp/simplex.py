"""Dense revised simplex with bounded variables.

Rows are turned into equalities with one logical variable each
(``A x + s = b``; s >= 0 for <=, s <= 0 for >=, s = 0 for =), so the all-logical
basis is always available. Phase 1 minimises the sum of basic bound
infeasibilities, which lets a solve start from any basis (warm starts after
objective or bound changes). Pricing is Dantzig with a Harris two-pass ratio
test. After a streak of degenerate pivots the solver switches to Bland's rule
until it makes progress again.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

LE, GE, EQ = "<=", ">=", "="
_SENSES = (LE, GE, EQ)

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"

_BASIC, _AT_LOWER, _AT_UPPER, _FREE = 0, 1, 2, 3


class SolverError(RuntimeError):
    """The simplex could not reach a verdict (iteration cap or numerical breakdown)."""


@dataclass
class LinearProgram:
    """min (or max) c.x  subject to  A x (<=|>=|=) b,  lower <= x <= upper."""

    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    maximize: bool = False
    var_names: Optional[list[str]] = None
    row_names: Optional[list[str]] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        m = self.A.shape[0]
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.senses = list(self.senses)
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float).ravel().copy()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel().copy()
        if self.b.size != m or len(self.senses) != m:
            raise ValueError("b and senses must have one entry per row")
        if self.lower.size != n or self.upper.size != n:
            raise ValueError("bounds must have one entry per variable")
        if any(s not in _SENSES for s in self.senses):
            raise ValueError(f"row senses must be one of {_SENSES}")
        for arr, name in ((self.c, "c"), (self.A, "A"), (self.b, "b")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)) or np.any(self.lower > self.upper):
            raise ValueError("need lower <= upper for every variable")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("infinite bound on the wrong side")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def with_bounds(self, lower=None, upper=None) -> "LinearProgram":
        return LinearProgram(self.c, self.A, self.senses, self.b,
                             self.lower if lower is None else lower,
                             self.upper if upper is None else upper,
                             self.maximize, self.var_names, self.row_names)

    def with_objective(self, c) -> "LinearProgram":
        return LinearProgram(c, self.A, self.senses, self.b, self.lower, self.upper,
                             self.maximize, self.var_names, self.row_names)


class LPBuilder:
    """Incremental construction of a :class:`LinearProgram` from named pieces."""

    def __init__(self, maximize: bool = False):
        self.maximize = maximize
        self._c: list[float] = []
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._names: list[str] = []
        self._rows: list[tuple[dict, str, float]] = []
        self._row_names: list[str] = []

    @property
    def n_vars(self) -> int:
        return len(self._c)

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    def add_var(self, name: str = "", lb: float = 0.0, ub: float = np.inf, cost: float = 0.0) -> int:
        self._c.append(float(cost))
        self._lo.append(float(lb))
        self._hi.append(float(ub))
        self._names.append(name or f"x{len(self._c) - 1}")
        return len(self._c) - 1

    def add_row(self, coeffs: Mapping[int, float], sense: str, rhs: float, name: str = "") -> int:
        if sense not in _SENSES:
            raise ValueError(sense)
        self._rows.append((dict(coeffs), sense, float(rhs)))
        self._row_names.append(name or f"r{len(self._rows) - 1}")
        return len(self._rows) - 1

    def build(self) -> LinearProgram:
        n = len(self._c)
        A = np.zeros((len(self._rows), n))
        for r, (coeffs, _, _) in enumerate(self._rows):
            for j, v in coeffs.items():
                A[r, j] += v
        return LinearProgram(np.array(self._c), A, [s for _, s, _ in self._rows],
                             np.array([v for _, _, v in self._rows]),
                             np.array(self._lo), np.array(self._hi), self.maximize,
                             list(self._names), list(self._row_names))


@dataclass
class Basis:
    """Basic column indices (structurals 0..n-1, then one logical per row) and nonbasics held at upper."""

    basic: np.ndarray
    at_upper: np.ndarray


@dataclass
class LpSolution:
    status: str
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float("nan")
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reduced_costs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    row_activity: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    basis: Optional[Basis] = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _equilibrate(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row then column max-abs scale factors."""
    m, n = A.shape
    rmax = np.abs(A).max(axis=1) if n else np.zeros(m)
    r = np.where(rmax > 0, 1.0 / np.where(rmax > 0, rmax, 1.0), 1.0)
    As = A * r[:, None]
    cmax = np.abs(As).max(axis=0) if m else np.zeros(n)
    s = np.where(cmax > 0, 1.0 / np.where(cmax > 0, cmax, 1.0), 1.0)
    return r, s


class _Simplex:
    refactor_every = 64
    degenerate_streak = 30

    def __init__(self, lp: LinearProgram, feas_tol: float, opt_tol: float, scale: bool, max_iter: Optional[int]):
        m, n = lp.shape
        self.m, self.n = m, n
        sign = -1.0 if lp.maximize else 1.0
        c = sign * lp.c
        if scale and m and n:
            r, s = _equilibrate(lp.A)
        else:
            r, s = np.ones(m), np.ones(n)
        A = lp.A * r[:, None] * s[None, :]
        b = lp.b * r
        lo = lp.lower / s
        hi = lp.upper / s
        finite = np.concatenate([np.abs(b), np.abs(lo[np.isfinite(lo)]), np.abs(hi[np.isfinite(hi)])])
        sigma = max(1.0, float(finite.max())) if (scale and finite.size) else 1.0
        cs = c * s
        # geometric middle of the cost range, so huge penalty weights do not push
        # ordinary costs below the reduced-cost tolerance
        nz = np.abs(cs[cs != 0])
        kappa = max(1.0, math.sqrt(float(nz.min()) * float(nz.max()))) if (scale and nz.size) else 1.0
        self.r, self.s, self.sigma, self.kappa, self.sign = r, s, sigma, kappa, sign

        self.M = np.hstack([A, np.eye(m)])
        self.b = b / sigma
        log_lo = np.array([0.0 if t == LE else (-np.inf if t == GE else 0.0) for t in lp.senses])
        log_hi = np.array([np.inf if t == LE else 0.0 for t in lp.senses])
        self.lo = np.concatenate([lo / sigma, log_lo])
        self.hi = np.concatenate([hi / sigma, log_hi])
        self.cost = np.concatenate([cs / kappa, np.zeros(m)])
        self.movable = self.hi > self.lo
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.max_iter = max_iter if max_iter is not None else max(1000, 50 * (m + n))
        self.iterations = 0

    # basis handling ----------------------------------------------------
    def _nonbasic_value(self, j: int, prefer_upper: bool) -> tuple[float, int]:
        lo, hi = self.lo[j], self.hi[j]
        if prefer_upper and np.isfinite(hi):
            return hi, _AT_UPPER
        if np.isfinite(lo):
            return lo, _AT_LOWER
        if np.isfinite(hi):
            return hi, _AT_UPPER
        return 0.0, _FREE

    def _install(self, basic: np.ndarray, at_upper: np.ndarray) -> bool:
        Ntot = self.n + self.m
        self.status = np.empty(Ntot, dtype=int)
        self.x = np.zeros(Ntot)
        for j in range(Ntot):
            self.x[j], self.status[j] = self._nonbasic_value(j, bool(at_upper[j]))
        self.basic = np.array(basic, dtype=int)
        self.status[self.basic] = _BASIC
        return self._refactor()

    def start(self, basis: Optional[Basis]):
        Ntot = self.n + self.m
        if basis is not None:
            basic = np.asarray(basis.basic, dtype=int)
            at_up = np.asarray(basis.at_upper, dtype=bool)
            if (basic.size == self.m and at_up.size == Ntot and len(set(basic.tolist())) == self.m
                    and basic.min(initial=0) >= 0 and basic.max(initial=0) < Ntot):
                if self._install(basic, at_up):
                    return
        self._install(np.arange(self.n, Ntot), np.zeros(Ntot, dtype=bool))

    def _refactor(self) -> bool:
        B = self.M[:, self.basic]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(Binv)) or np.abs(Binv @ B - np.eye(self.m)).max(initial=0.0) > 1e-6:
            return False
        self.Binv = Binv
        nb = self.status != _BASIC
        rhs = self.b - self.M[:, nb] @ self.x[nb]
        self.x[self.basic] = Binv @ rhs
        self.since_refactor = 0
        return True

    # one simplex step --------------------------------------------------
    def _infeasibility(self):
        xb = self.x[self.basic]
        lo, hi = self.lo[self.basic], self.hi[self.basic]
        below = xb < lo - self.feas_tol
        above = xb > hi + self.feas_tol
        return below, above

    def _step(self, phase1: bool, below=None, above=None, bland: bool = False):
        """Return 'optimal', 'unbounded' or (theta) after performing a pivot/flip."""
        if phase1:
            cB = np.where(below, -1.0, 0.0) + np.where(above, 1.0, 0.0)
            cost = np.zeros_like(self.cost)
        else:
            cB = self.cost[self.basic]
            cost = self.cost
        y = cB @ self.Binv
        d = cost - y @ self.M
        st = self.status
        tol = self.opt_tol
        elig = self.movable & (
            ((st == _AT_LOWER) & (d < -tol)) | ((st == _AT_UPPER) & (d > tol)) | ((st == _FREE) & (np.abs(d) > tol)))
        cand = np.flatnonzero(elig)
        if cand.size == 0:
            return OPTIMAL
        j = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
        direction = 1.0 if d[j] < 0 else -1.0

        alpha = self.Binv @ self.M[:, j]
        rate = -direction * alpha
        xb = self.x[self.basic]
        lo, hi = self.lo[self.basic], self.hi[self.basic]
        piv = 1e-9

        dec = rate < -piv
        inc = rate > piv
        # step length limits; (row, bound hit) per candidate
        lim = np.full(self.m, np.inf)
        lim_relax = np.full(self.m, np.inf)
        hit_upper = np.zeros(self.m, dtype=bool)
        ftol = self.feas_tol
        if phase1:
            feas = ~(below | above)
            m1 = dec & feas & np.isfinite(lo)
            m2 = inc & feas & np.isfinite(hi)
            m3 = inc & below  # rises to its lower bound
            m4 = dec & above  # falls to its upper bound
        else:
            m1 = dec & np.isfinite(lo)
            m2 = inc & np.isfinite(hi)
            m3 = m4 = np.zeros(self.m, dtype=bool)
        lim[m1] = (xb[m1] - lo[m1]) / -rate[m1]
        lim_relax[m1] = (xb[m1] - lo[m1] + ftol) / -rate[m1]
        lim[m2] = (hi[m2] - xb[m2]) / rate[m2]
        lim_relax[m2] = (hi[m2] - xb[m2] + ftol) / rate[m2]
        hit_upper[m2] = True
        lim[m3] = (lo[m3] - xb[m3]) / rate[m3]
        lim_relax[m3] = (lo[m3] - xb[m3] + ftol) / rate[m3]
        lim[m4] = (xb[m4] - hi[m4]) / -rate[m4]
        lim_relax[m4] = (xb[m4] - hi[m4] + ftol) / -rate[m4]
        hit_upper[m4] = True
        lim = np.maximum(lim, 0.0)

        flip = self.hi[j] - self.lo[j]
        r = -1
        theta = np.inf
        if np.isfinite(lim).any():
            if bland:
                tmin = lim.min()
                ties = np.flatnonzero(lim <= tmin + 1e-12)
                r = int(ties[np.argmin(self.basic[ties])])
            else:
                tmax = lim_relax.min()
                ties = np.flatnonzero(lim <= tmax)
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            theta = float(lim[r])
        if flip <= theta:
            if not np.isfinite(flip):
                return UNBOUNDED
            theta = float(flip)
            self.x[j] += direction * theta
            self.x[self.basic] += rate * theta
            self.status[j] = _AT_UPPER if direction > 0 else _AT_LOWER
            return theta

        leave = int(self.basic[r])
        self.x[j] += direction * theta
        self.x[self.basic] += rate * theta
        if hit_upper[r]:
            self.x[leave], self.status[leave] = self.hi[leave], _AT_UPPER
        else:
            self.x[leave], self.status[leave] = self.lo[leave], _AT_LOWER
        if self.lo[leave] == self.hi[leave]:
            self.status[leave] = _AT_LOWER
        self.basic[r] = j
        self.status[j] = _BASIC
        # product-form update of the explicit inverse
        prow = self.Binv[r] / alpha[r]
        self.Binv -= np.outer(alpha, prow)
        self.Binv[r] = prow
        self.since_refactor += 1
        if self.since_refactor >= self.refactor_every:
            if not self._refactor():
                raise SolverError("basis became singular")
        return theta

    def run(self) -> str:
        streak = 0
        bland = False
        checks = 0
        while True:
            if self.iterations >= self.max_iter:
                raise SolverError(f"iteration limit {self.max_iter} reached")
            below, above = self._infeasibility()
            phase1 = bool(below.any() or above.any())
            out = self._step(phase1, below, above, bland)
            if isinstance(out, str):
                if out == UNBOUNDED:
                    return UNBOUNDED
                # confirm on a fresh factorisation before declaring a verdict
                if self.since_refactor:
                    if not self._refactor():
                        raise SolverError("basis became singular")
                    checks += 1
                    if checks < 5:
                        continue
                if phase1:
                    return INFEASIBLE
                below, above = self._infeasibility()
                if below.any() or above.any():
                    checks += 1
                    if checks < 5:
                        continue
                    return INFEASIBLE
                return OPTIMAL
            self.iterations += 1
            if out <= 1e-12:
                streak += 1
                if streak >= self.degenerate_streak:
                    bland = True
            else:
                streak = 0
                bland = False


def solve_lp(lp: LinearProgram, *, basis: Optional[Basis] = None, feas_tol: float = 1e-7,
             opt_tol: float = 1e-7, scale: bool = True, max_iter: Optional[int] = None) -> LpSolution:
    """Solve ``lp``; duals follow the convention dual_r = d(objective)/d(b_r)."""
    m, n = lp.shape
    sx = _Simplex(lp, feas_tol, opt_tol, scale, max_iter)
    sx.start(basis)
    status = sx.run()
    at_upper = sx.status == _AT_UPPER
    out_basis = Basis(sx.basic.copy(), at_upper)
    if status != OPTIMAL:
        return LpSolution(status, iterations=sx.iterations, basis=out_basis)

    x = sx.x[:n] * sx.s * sx.sigma
    x = np.clip(x, lp.lower, lp.upper)
    cB = sx.cost[sx.basic]
    y_scaled = cB @ sx.Binv
    y_min = sx.kappa * sx.r * y_scaled
    d_min = sx.sign * lp.c - lp.A.T @ y_min
    duals = sx.sign * y_min
    reduced = sx.sign * d_min
    return LpSolution(OPTIMAL, x, float(lp.c @ x), duals, reduced, lp.A @ x, sx.iterations, out_basis)
