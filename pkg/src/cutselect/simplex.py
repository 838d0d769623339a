"""Bounded-variable primal simplex with a dense explicit basis inverse.

Rows are brought to the form ``A x + s = b`` with one logical variable per
row whose bounds encode the sense (LE: s >= 0, GE: s <= 0, EQ: s = 0). Cuts
are appended as extra LE rows. Phase 1 minimizes the sum of bound
infeasibilities of the basic variables, so any basis (including a warm one
that became primal infeasible after a bound change or a new cut) is a valid
starting point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import Cut, MilpInstance, Sense

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 50

BASIC, AT_LOWER, AT_UPPER = 0, 1, 2


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray
    objective: float
    basis: np.ndarray
    row_activities: np.ndarray
    iterations: int = 0
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    # factorization snapshot used by tableau_row
    _matrix: np.ndarray | None = field(default=None, repr=False)
    _rhs: np.ndarray | None = field(default=None, repr=False)
    _head: np.ndarray | None = field(default=None, repr=False)
    _binv: np.ndarray | None = field(default=None, repr=False)
    _values: np.ndarray | None = field(default=None, repr=False)
    _lower: np.ndarray | None = field(default=None, repr=False)
    _upper: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    @property
    def num_rows(self) -> int:
        return len(self.row_activities)

    def is_basic(self, j: int) -> bool:
        return self.basis[j] == BASIC

    @property
    def full_values(self) -> np.ndarray:
        """Values of structural and logical variables, structural first."""
        return self._values


@dataclass
class TableauRow:
    """``coefs @ z == rhs`` holds for every ``z = (x, s)`` with ``A x + s = b``.

    ``coefs[basic_var] == 1`` and the coefficients of the other basic
    variables are zero; ``value`` is the basic variable's current value.
    """

    basic_var: int
    coefs: np.ndarray
    rhs: float
    value: float


class LpSession:
    """Mutable LP state for one instance: bounds, appended cuts, last basis.

    A session must not be shared between threads.
    """

    def __init__(self, inst: MilpInstance, cuts: Sequence[Cut] = (), seed: int | None = None):
        self.inst = inst
        self.n = inst.num_vars
        self.cost = np.asarray(inst.min_objective(), dtype=float)
        self.lower = np.array(inst.lower, dtype=float)
        self.upper = np.array(inst.upper, dtype=float)
        self._rows_A = inst.dense_matrix()
        self._rows_b = np.array([r.rhs for r in inst.rows], dtype=float)
        self._slack_lo, self._slack_up = [], []
        for r in inst.rows:
            lo, up = _slack_bounds(r.sense)
            self._slack_lo.append(lo)
            self._slack_up.append(up)
        self.cuts: list[Cut] = []
        self.add_cuts(cuts)
        self.last_basis: np.ndarray | None = None
        self.total_iterations = 0
        self._seed = seed

    @property
    def num_rows(self) -> int:
        return len(self._rows_b)

    def add_cuts(self, cuts: Sequence[Cut]) -> None:
        if not cuts:
            return
        new = np.zeros((len(cuts), self.n))
        for k, cut in enumerate(cuts):
            if len(cut.indices) and cut.indices[-1] >= self.n:
                raise ValueError(f"cut refers to variable {cut.indices[-1]} but n={self.n}")
            new[k, cut.indices] = cut.values
        self._rows_A = np.vstack([self._rows_A, new])
        self._rows_b = np.concatenate([self._rows_b, [c.beta for c in cuts]])
        self._slack_lo += [0.0] * len(cuts)
        self._slack_up += [math.inf] * len(cuts)
        self.cuts.extend(cuts)

    def set_bounds(self, lower: np.ndarray, upper: np.ndarray) -> None:
        self.lower = np.array(lower, dtype=float)
        self.upper = np.array(upper, dtype=float)

    def solve(self, warm_basis: np.ndarray | None = None, iteration_limit: int | None = None
              ) -> LpSolution:
        m = self.num_rows
        M = np.hstack([self._rows_A, np.eye(m)])
        lo = np.concatenate([self.lower, self._slack_lo])
        up = np.concatenate([self.upper, self._slack_up])
        cost = np.concatenate([self.cost, np.zeros(m)])
        if np.any(lo > up):
            N = self.n + m
            basis = np.full(N, AT_LOWER)
            basis[self.n:] = BASIC
            return LpSolution(LpStatus.INFEASIBLE, np.zeros(self.n), math.inf, basis, np.zeros(m))
        solver = _Simplex(M, self._rows_b, lo, up, cost, self._seed)
        status = solver.run(warm_basis, iteration_limit)
        self.total_iterations += solver.iterations
        z = solver.values
        x = z[:self.n].copy()
        sol = LpSolution(
            status=status,
            x=x,
            objective=float(self.cost @ x) if status is LpStatus.OPTIMAL else
            (-math.inf if status is LpStatus.UNBOUNDED else math.inf),
            basis=solver.status.copy(),
            row_activities=self._rows_A @ x,
            iterations=solver.iterations,
            duals=solver.duals,
            reduced_costs=solver.reduced,
            _matrix=M, _rhs=self._rows_b.copy(), _head=solver.head.copy(),
            _binv=solver.binv.copy(), _values=z.copy(), _lower=lo, _upper=up,
        )
        if status is LpStatus.OPTIMAL:
            self.last_basis = sol.basis
        return sol


def _slack_bounds(sense: Sense) -> tuple[float, float]:
    if sense is Sense.LE:
        return 0.0, math.inf
    if sense is Sense.GE:
        return -math.inf, 0.0
    return 0.0, 0.0


class _Simplex:
    def __init__(self, M, b, lo, up, cost, seed):
        self.M, self.b, self.lo, self.up, self.cost = M, b, lo, up, cost
        self.m, self.N = M.shape
        if seed is None:
            self.priority = np.arange(self.N)
        else:
            self.priority = np.random.default_rng(seed).permutation(self.N)
        self.iterations = 0
        self.duals = None
        self.reduced = None

    # -- basis setup ---------------------------------------------------
    def _nonbasic_value(self, j: int) -> float:
        if self.status[j] == AT_UPPER:
            return self.up[j]
        lo = self.lo[j]
        if lo > -math.inf:
            return lo
        return self.up[j] if self.up[j] < math.inf else 0.0

    def _cold_start(self):
        n = self.N - self.m
        self.status = np.full(self.N, AT_LOWER)
        self.status[n:] = BASIC
        for j in range(n):
            if self.lo[j] == -math.inf and self.up[j] < math.inf:
                self.status[j] = AT_UPPER
        self.head = np.arange(n, self.N)
        self.binv = np.eye(self.m)

    def _warm_start(self, basis) -> bool:
        basis = np.asarray(basis)
        if basis.ndim != 1 or len(basis) > self.N or len(basis) < self.N - self.m:
            return False
        status = np.full(self.N, BASIC)
        status[:len(basis)] = basis
        head = np.flatnonzero(status == BASIC)
        if len(head) != self.m:
            return False
        B = self.M[:, head]
        try:
            if np.linalg.cond(B) > 1e12:
                return False
            binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        for j in np.flatnonzero(status != BASIC):
            if status[j] == AT_UPPER and self.up[j] == math.inf:
                status[j] = AT_LOWER
            elif status[j] == AT_LOWER and self.lo[j] == -math.inf and self.up[j] < math.inf:
                status[j] = AT_UPPER
        self.status, self.head, self.binv = status, head, binv
        return True

    def _refactor(self):
        self.binv = np.linalg.inv(self.M[:, self.head])
        self._since_refactor = 0

    # -- main loop -----------------------------------------------------
    def run(self, warm_basis, iteration_limit) -> LpStatus:
        if warm_basis is None or not self._warm_start(warm_basis):
            self._cold_start()
        self._since_refactor = 0
        bland_after = 10 * self.N
        limit = iteration_limit if iteration_limit is not None else max(5000, 100 * self.N)
        fresh = False
        while True:
            xB = self._compute_values()
            below = xB < self.lo[self.head] - FEAS_TOL
            above = xB > self.up[self.head] + FEAS_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = above.astype(float) - below.astype(float)
                cost = np.zeros(self.N)
            else:
                cB = self.cost[self.head]
                cost = self.cost
            y = cB @ self.binv
            d = cost - y @ self.M
            d[self.head] = 0.0
            q, direction = self._price(d, bland=self.iterations >= bland_after)
            if q < 0:
                if not fresh and self._since_refactor > 0:
                    self._refactor()
                    fresh = True
                    continue
                if phase1:
                    return self._finish(LpStatus.INFEASIBLE, y, d)
                return self._finish(LpStatus.OPTIMAL, y, d)
            fresh = False
            if self.iterations >= limit:
                return self._finish(LpStatus.ITERATION_LIMIT, y, d)
            self.iterations += 1
            alpha = self.binv @ self.M[:, q]
            r, theta, leave_at = self._ratio(xB, alpha, q, direction, below, above,
                                             bland=self.iterations >= bland_after)
            if theta == math.inf:
                if phase1:
                    # numerically lost; restart from a fresh factorization once
                    self._refactor()
                    continue
                return self._finish(LpStatus.UNBOUNDED, y, d)
            if r < 0:
                self.status[q] = AT_UPPER if direction > 0 else AT_LOWER
                continue
            p = self.head[r]
            self.status[p] = leave_at
            self.status[q] = BASIC
            self.head[r] = q
            self._pivot(r, alpha)

    def _compute_values(self) -> np.ndarray:
        z = np.zeros(self.N)
        nb = self.status != BASIC
        for j in np.flatnonzero(nb):
            z[j] = self._nonbasic_value(j)
        xB = self.binv @ (self.b - self.M[:, nb] @ z[nb])
        z[self.head] = xB
        self.values = z
        return xB

    def _price(self, d, bland):
        nb = self.status != BASIC
        lo, up = self.lo, self.up
        free = (lo == -math.inf) & (up == math.inf)
        can_up = nb & (up > lo) & ((self.status == AT_LOWER) | free)
        can_down = nb & (up > lo) & ((self.status == AT_UPPER) | free)
        elig_up = can_up & (d < -OPT_TOL)
        elig_down = can_down & (d > OPT_TOL)
        elig = elig_up | elig_down
        if not elig.any():
            return -1, 0
        cand = np.flatnonzero(elig)
        if bland:
            q = int(cand.min())
        else:
            mag = np.abs(d[cand])
            top = cand[mag >= mag.max() * (1 - 1e-12)]
            q = int(top[np.argmin(self.priority[top])])
        return q, (1 if elig_up[q] else -1)

    def _ratio(self, xB, alpha, q, direction, below, above, bland):
        rate = -direction * alpha
        lo, up = self.lo[self.head], self.up[self.head]
        best_r, best_t, best_piv, best_at = -1, math.inf, 0.0, AT_LOWER
        span = self.up[q] - self.lo[q]
        if span < math.inf:
            best_t = span
        for i in np.flatnonzero(np.abs(alpha) > PIVOT_TOL):
            ri = rate[i]
            if ri < 0:
                if above[i]:
                    t, at = (xB[i] - up[i]) / -ri, AT_UPPER
                elif below[i] or lo[i] == -math.inf:
                    continue
                else:
                    t, at = (xB[i] - lo[i]) / -ri, AT_LOWER
            else:
                if below[i]:
                    t, at = (lo[i] - xB[i]) / ri, AT_LOWER
                elif above[i] or up[i] == math.inf:
                    continue
                else:
                    t, at = (up[i] - xB[i]) / ri, AT_UPPER
            t = max(t, 0.0)
            piv = abs(alpha[i])
            if t < best_t - 1e-12:
                better = True
            elif t <= best_t + 1e-12 and best_r >= 0:
                if bland:
                    better = self.head[i] < self.head[best_r]
                else:
                    better = piv > best_piv
            else:
                better = False
            if better:
                best_r, best_t, best_piv, best_at = i, t, piv, at
        if best_r >= 0 and lo[best_r] == up[best_r]:
            best_at = AT_LOWER
        return best_r, best_t, best_at

    def _pivot(self, r, alpha):
        piv = alpha[r]
        row = self.binv[r] / piv
        self.binv -= np.outer(alpha, row)
        self.binv[r] = row
        self._since_refactor += 1
        if self._since_refactor >= REFACTOR_EVERY:
            self._refactor()

    def _finish(self, status, y, d) -> LpStatus:
        self._compute_values()
        self.duals = y
        self.reduced = d
        return status


def solve_relaxation(inst: MilpInstance, extra_cuts: Sequence[Cut] = (),
                     warm_basis: np.ndarray | None = None, seed: int | None = None) -> LpSolution:
    """Solve the LP relaxation of ``inst`` with ``extra_cuts`` appended as LE rows.

    The objective is always reported in minimization form.
    """
    return LpSession(inst, extra_cuts, seed=seed).solve(warm_basis)


def tableau_row(sol: LpSolution, basic_var: int) -> TableauRow:
    if sol.status is not LpStatus.OPTIMAL:
        raise ValueError("tableau rows are only available for optimal solutions")
    if sol.basis[basic_var] != BASIC:
        raise ValueError(f"variable {basic_var} is not basic")
    r = int(np.flatnonzero(sol._head == basic_var)[0])
    beta = sol._binv[r]
    coefs = beta @ sol._matrix
    coefs[sol._head] = 0.0
    coefs[basic_var] = 1.0
    return TableauRow(basic_var, coefs, float(beta @ sol._rhs), float(sol._values[basic_var]))
