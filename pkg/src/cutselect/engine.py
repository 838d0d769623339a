"""Separation rounds at the root and a best-bound-first branch-and-bound."""

from __future__ import annotations

import enum
import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cutgen import generate_gmi_cuts
from .cutsel import ScoringContext, SelectionResult, SelectorConfig, select_cuts
from .model import Cut, MilpInstance, Sense
from .simplex import LpSession, LpSolution, LpStatus

log = logging.getLogger(__name__)

INT_TOL = 1e-6
GAP_TOL = 1e-6


class Direction(str, enum.Enum):
    UP = "up"
    DOWN = "down"


class SolveStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    TIME_LIMIT = "TimeLimit"
    NODE_LIMIT = "NodeLimit"


def compute_locks(inst: MilpInstance, cuts: Sequence[Cut] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Down-/up-lock counts per variable; cuts count as LE rows."""
    down = np.zeros(inst.num_vars, dtype=np.int64)
    up = np.zeros(inst.num_vars, dtype=np.int64)
    rows = [(r.indices, r.values, r.sense) for r in inst.rows]
    rows += [(c.indices, c.values, Sense.LE) for c in cuts]
    for idx, vals, sense in rows:
        pos, neg = idx[vals > 0], idx[vals < 0]
        if sense is Sense.LE:
            up[pos] += 1
            down[neg] += 1
        elif sense is Sense.GE:
            down[pos] += 1
            up[neg] += 1
        else:
            nz = idx[vals != 0]
            up[nz] += 1
            down[nz] += 1
    return down, up


class PseudocostTable:
    """Per-variable objective gain per unit of fractionality, by direction."""

    def __init__(self, n: int):
        self.up_sum = np.zeros(n)
        self.up_count = np.zeros(n, dtype=np.int64)
        self.down_sum = np.zeros(n)
        self.down_count = np.zeros(n, dtype=np.int64)

    def update(self, var: int, direction: Direction, objective_gain: float,
               fractionality: float) -> None:
        if not fractionality > 0:
            raise ValueError("fractionality must be positive")
        if objective_gain < 0:
            raise ValueError("objective gain must be nonnegative")
        if Direction(direction) is Direction.UP:
            self.up_sum[var] += objective_gain / fractionality
            self.up_count[var] += 1
        else:
            self.down_sum[var] += objective_gain / fractionality
            self.down_count[var] += 1

    def _global_average(self) -> float:
        avgs = np.concatenate([self.up_sum[self.up_count > 0] / self.up_count[self.up_count > 0],
                               self.down_sum[self.down_count > 0]
                               / self.down_count[self.down_count > 0]])
        return float(avgs.mean()) if len(avgs) else 1.0

    def directional(self, var: int, direction: Direction, fallback: float | None = None
                    ) -> float:
        s, cnt = ((self.up_sum, self.up_count) if Direction(direction) is Direction.UP
                  else (self.down_sum, self.down_count))
        if cnt[var] > 0:
            return float(s[var] / cnt[var])
        return self._global_average() if fallback is None else fallback

    def psi(self, var: int) -> float:
        fb = self._global_average()
        return 0.5 * (self.directional(var, Direction.UP, fb)
                      + self.directional(var, Direction.DOWN, fb))

    def all_psi(self) -> np.ndarray:
        fb = self._global_average()
        up = np.where(self.up_count > 0, self.up_sum / np.maximum(self.up_count, 1), fb)
        down = np.where(self.down_count > 0, self.down_sum / np.maximum(self.down_count, 1), fb)
        return 0.5 * (up + down)

    def initialized(self, var: int) -> bool:
        return bool(self.up_count[var] > 0 or self.down_count[var] > 0)

    @property
    def empty(self) -> bool:
        return not (self.up_count.any() or self.down_count.any())


def pseudocost_update(table: PseudocostTable, var: int, direction: Direction,
                      objective_gain: float, fractionality: float) -> None:
    table.update(var, direction, objective_gain, fractionality)


def psi(table: PseudocostTable, var: int) -> float:
    return table.psi(var)


@dataclass
class SolveStats:
    """Outcome of one solve. Bounds are in minimization form (negated for max)."""

    status: SolveStatus
    primal_bound: float
    dual_bound: float
    nodes: int = 0
    rounds: int = 0
    cuts_added: int = 0
    nonzeros_added: int = 0
    wall_time: float = 0.0
    lp_iterations: int = 0
    root_bound: float = math.nan
    solution: np.ndarray | None = field(default=None, repr=False)


def _fractional(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.flatnonzero(mask & (np.abs(x - np.round(x)) > INT_TOL))


def separation_loop(inst: MilpInstance, cfg: SelectorConfig, round_limit: int | None = None,
                    seed: int | None = None, session: LpSession | None = None,
                    pseudocosts: PseudocostTable | None = None
                    ) -> tuple[LpSolution, list[SelectionResult]]:
    """Root separation: generate GMI cuts, select, append, resolve.

    Stops when the selector returns nothing, ``round_limit`` (default
    ``cfg.max_rounds``) rounds are done, or the LP optimum is integral.
    Selected cuts are left in ``session``.
    """
    if session is None:
        session = LpSession(inst, seed=seed)
    if round_limit is None:
        round_limit = cfg.max_rounds
    if pseudocosts is None:
        pseudocosts = PseudocostTable(inst.num_vars)
    sol = session.solve(session.last_basis)
    if sol.status is LpStatus.UNBOUNDED:
        raise ValueError("LP relaxation is unbounded")
    results: list[SelectionResult] = []
    c = inst.min_objective()
    for rnd in range(round_limit):
        if not sol.is_optimal or len(_fractional(sol.x, inst.integrality)) == 0:
            break
        pool = generate_gmi_cuts(sol, inst, round_index=rnd)
        if not pool:
            break
        down, up = compute_locks(inst, session.cuts)
        ctx = ScoringContext(sol.x, c, pseudocosts.all_psi(), down, up, inst.integrality)
        res = select_cuts(pool, ctx, cfg)
        if not res.selected:
            break
        results.append(res)
        prev = sol
        session.add_cuts(res.selected)
        sol = session.solve(prev.basis)
        if sol.status is LpStatus.ITERATION_LIMIT:
            sol = session.solve()
        if sol.is_optimal and sol.objective < prev.objective - 1e-9 * max(1.0, abs(prev.objective)):
            log.warning("root objective decreased after adding cuts: %g -> %g",
                        prev.objective, sol.objective)
    return sol, results


@dataclass(order=True)
class _Node:
    bound: float
    order: int
    lower: np.ndarray = field(compare=False)
    upper: np.ndarray = field(compare=False)
    basis: np.ndarray | None = field(compare=False, default=None)
    branch: tuple | None = field(compare=False, default=None)  # (var, direction, frac)


def branch_and_bound(inst: MilpInstance, cfg: SelectorConfig | None = None,
                     time_limit: float = math.inf, node_limit: int | None = None,
                     seed: int | None = None) -> SolveStats:
    """Cut-and-branch: separation at the root, then best-bound-first search."""
    cfg = cfg or SelectorConfig()
    start = time.perf_counter()
    offset = inst.obj_offset if inst.minimize else -inst.obj_offset
    c = inst.min_objective()
    mask = inst.integrality
    table = PseudocostTable(inst.num_vars)
    session = LpSession(inst, seed=seed)
    stats = SolveStats(SolveStatus.INFEASIBLE, math.inf, math.inf)

    root, rounds = separation_loop(inst, cfg, seed=seed, session=session, pseudocosts=table)
    stats.rounds = len(rounds)
    stats.cuts_added = sum(len(r.selected) for r in rounds)
    stats.nonzeros_added = sum(r.nonzeros_added for r in rounds)

    incumbent = math.inf
    best_x = None

    def try_incumbent(x: np.ndarray) -> None:
        nonlocal incumbent, best_x
        cand = x.copy()
        cand[mask] = np.round(cand[mask])
        if not inst.is_feasible(cand):
            return
        val = float(c @ cand)
        if val < incumbent:
            incumbent, best_x = val, cand

    counter = itertools.count()
    heap: list[_Node] = []
    lower0 = np.array(inst.lower, dtype=float)
    upper0 = np.array(inst.upper, dtype=float)
    nodes = 0
    limit_hit = None
    pending = [(root, _Node(-math.inf, next(counter), lower0, upper0))]

    while pending or heap:
        if pending:
            sol, node = pending.pop()
        else:
            node = heapq.heappop(heap)
            if node.bound >= incumbent - GAP_TOL:
                continue
            if node_limit is not None and nodes >= node_limit:
                heapq.heappush(heap, node)
                limit_hit = SolveStatus.NODE_LIMIT
                break
            if time.perf_counter() - start > time_limit:
                heapq.heappush(heap, node)
                limit_hit = SolveStatus.TIME_LIMIT
                break
            session.set_bounds(node.lower, node.upper)
            sol = session.solve(node.basis)
            if sol.status is LpStatus.ITERATION_LIMIT:
                sol = session.solve()
        nodes += 1
        if sol.status is LpStatus.UNBOUNDED:
            raise ValueError("LP relaxation is unbounded")
        if sol.status is LpStatus.ITERATION_LIMIT:
            raise RuntimeError("simplex iteration limit reached twice at one node")
        if node.branch is not None and sol.is_optimal:
            var, direction, frac = node.branch
            table.update(var, direction, max(sol.objective - node.bound, 0.0), frac)
        if not sol.is_optimal:
            continue
        if nodes == 1:
            stats.root_bound = sol.objective + offset
        if sol.objective >= incumbent - GAP_TOL:
            continue
        frac = _fractional(sol.x, mask)
        if len(frac) == 0:
            try_incumbent(sol.x)
            if best_x is None or incumbent > sol.objective + 1e-6 * max(1.0, abs(sol.objective)):
                log.debug("integral LP point rejected or worse than LP value")
            continue
        try_incumbent(sol.x)
        if sol.objective >= incumbent - GAP_TOL:
            continue
        j = _choose_branch_var(sol.x, frac, table)
        xj = sol.x[j]
        f = xj - math.floor(xj)
        down_up = node.upper.copy()
        down_up[j] = math.floor(xj)
        up_lo = node.lower.copy()
        up_lo[j] = math.ceil(xj)
        heapq.heappush(heap, _Node(sol.objective, next(counter), node.lower, down_up,
                                   sol.basis, (j, Direction.DOWN, f)))
        heapq.heappush(heap, _Node(sol.objective, next(counter), up_lo, node.upper,
                                   sol.basis, (j, Direction.UP, 1.0 - f)))

    open_bounds = [nd.bound for nd in heap if nd.bound < incumbent - GAP_TOL]
    stats.nodes = nodes
    stats.lp_iterations = session.total_iterations
    stats.wall_time = time.perf_counter() - start
    if limit_hit is not None and open_bounds:
        stats.status = limit_hit
        stats.dual_bound = min(min(open_bounds), incumbent) + offset
    elif best_x is not None:
        stats.status = SolveStatus.OPTIMAL
        stats.dual_bound = incumbent + offset
    else:
        stats.status = SolveStatus.INFEASIBLE
        stats.dual_bound = math.inf
    stats.primal_bound = incumbent + offset if best_x is not None else math.inf
    stats.solution = best_x
    return stats


def _choose_branch_var(x: np.ndarray, frac: np.ndarray, table: PseudocostTable) -> int:
    f = x[frac] - np.floor(x[frac])
    if not any(table.initialized(j) for j in frac):
        return int(frac[np.argmax(np.minimum(f, 1.0 - f))])
    fb = table._global_average()
    best, best_score = -1, -math.inf
    for j, fj in zip(frac, f):
        down = max(fj * table.directional(j, Direction.DOWN, fb), 1e-6)
        up = max((1.0 - fj) * table.directional(j, Direction.UP, fb), 1e-6)
        score = down * up
        if score > best_score:
            best, best_score = int(j), score
    return best
