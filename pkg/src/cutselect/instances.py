"""Seeded generators for small benchmark instances."""

from __future__ import annotations

import numpy as np

from .model import MilpInstance, Row, Sense


def multi_knapsack(n: int, m: int, density: float, seed: int, name: str | None = None
                   ) -> MilpInstance:
    """max p^T x, sparse knapsack rows W x <= c, x binary."""
    rng = np.random.default_rng(seed)
    rows = []
    for j in range(m):
        k = max(2, int(round(density * n)))
        idx = np.sort(rng.choice(n, size=k, replace=False))
        w = rng.integers(5, 40, size=k).astype(float)
        cap = float(np.floor(0.5 * w.sum()))
        rows.append(Row(idx, w, Sense.LE, cap, f"knap{j}"))
    profit = rng.integers(10, 60, size=n).astype(float)
    return MilpInstance(name or f"mknap_{n}_{m}_{seed}", profit, rows, np.zeros(n), np.ones(n),
                        np.ones(n, dtype=bool), minimize=False)


def generalized_assignment(agents: int, jobs: int, seed: int, slack: float = 0.8,
                           name: str | None = None) -> MilpInstance:
    """min cost assignment of every job to one agent under agent capacities.

    Capacities follow the usual type-C rule ``slack * sum(w_a) / agents``.
    """
    rng = np.random.default_rng(seed)
    n = agents * jobs
    cost = rng.integers(5, 50, size=n).astype(float)
    weight = rng.integers(5, 25, size=(agents, jobs)).astype(float)
    rows = []
    for j in range(jobs):
        rows.append(Row([a * jobs + j for a in range(agents)], np.ones(agents), Sense.EQ, 1.0,
                        f"assign{j}"))
    for a in range(agents):
        cap = float(np.floor(slack * weight[a].sum() / agents))
        rows.append(Row(np.arange(a * jobs, (a + 1) * jobs), weight[a], Sense.LE, cap,
                        f"cap{a}"))
    return MilpInstance(name or f"gap_{agents}x{jobs}_{seed}", cost, rows, np.zeros(n),
                        np.ones(n), np.ones(n, dtype=bool))


def integer_knapsack_set(n: int, m: int, seed: int, ub: int = 4, name: str | None = None
                         ) -> MilpInstance:
    """min -p^T x with general-integer x in [0, ub] and sparse LE rows."""
    rng = np.random.default_rng(seed)
    rows = []
    for j in range(m):
        k = int(rng.integers(2, max(3, n // 3) + 1))
        idx = np.sort(rng.choice(n, size=k, replace=False))
        w = rng.integers(3, 20, size=k).astype(float)
        cap = float(rng.integers(int(w.sum() // 2), int(w.sum()) + 1)) + 0.5
        rows.append(Row(idx, w, Sense.LE, cap, f"r{j}"))
    c = -rng.integers(1, 20, size=n).astype(float)
    return MilpInstance(name or f"iknap_{n}_{m}_{seed}", c, rows, np.zeros(n),
                        np.full(n, float(ub)), np.ones(n, dtype=bool))
