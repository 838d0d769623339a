import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from cutselect.model import MilpInstance, Row, Sense


def random_milp(rng, n=None, m=None, int_frac=1.0, box=3, name="rand"):
    """Bounded random MILP with a feasible zero point.

    Rows are LE/GE/EQ with small integer data; x=0 satisfies every row, so
    the instance is always feasible.
    """
    n = n or int(rng.integers(2, 8))
    m = m or int(rng.integers(1, 5))
    rows = []
    for j in range(m):
        k = int(rng.integers(1, n + 1))
        idx = np.sort(rng.choice(n, size=k, replace=False))
        vals = rng.integers(-4, 10, size=k).astype(float)
        vals[vals == 0] = 1.0
        kind = rng.random()
        if kind < 0.7:
            rows.append(Row(idx, vals, Sense.LE, float(rng.integers(1, 15)) + 0.5 * rng.integers(0, 2)))
        elif kind < 0.9:
            rows.append(Row(idx, vals, Sense.GE, -float(rng.integers(0, 6))))
        else:
            rows.append(Row(idx, vals, Sense.EQ, 0.0))
    integ = rng.random(n) < int_frac
    if int_frac >= 1.0:
        integ[:] = True
    c = rng.integers(-9, 6, size=n).astype(float)
    upper = rng.integers(1, box + 1, size=n).astype(float)
    return MilpInstance(name, c, rows, np.zeros(n), upper, integ)


def _lp_max_over_slice(inst, fixed_idx, fixed_val, objective):
    """max objective^T x over the continuous variables with integers fixed; None if infeasible."""
    n = inst.num_vars
    cont = np.setdiff1d(np.arange(n), fixed_idx)
    x = np.zeros(n)
    x[fixed_idx] = fixed_val
    if len(cont) == 0:
        return (float(objective @ x), x) if inst.is_feasible(x, tol=1e-9) else None
    A = inst.dense_matrix()
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row, arow in zip(inst.rows, A):
        rhs = row.rhs - arow[fixed_idx] @ fixed_val
        if row.sense is Sense.LE:
            A_ub.append(arow[cont]); b_ub.append(rhs)
        elif row.sense is Sense.GE:
            A_ub.append(-arow[cont]); b_ub.append(-rhs)
        else:
            A_eq.append(arow[cont]); b_eq.append(rhs)
    res = linprog(-objective[cont], A_ub=np.array(A_ub) if A_ub else None,
                  b_ub=b_ub or None, A_eq=np.array(A_eq) if A_eq else None,
                  b_eq=b_eq or None, bounds=list(zip(inst.lower[cont], inst.upper[cont])),
                  method="highs")
    if res.status != 0:
        return None
    x[cont] = res.x
    return float(objective @ x), x


def integer_assignments(inst):
    idx = np.flatnonzero(inst.integrality)
    ranges = [range(int(inst.lower[i]), int(inst.upper[i]) + 1) for i in idx]
    for combo in itertools.product(*ranges):
        yield idx, np.array(combo, dtype=float)


def enumerate_optimum(inst):
    """Exact optimum (minimization form) by enumerating the integer box."""
    c = inst.min_objective()
    best = math.inf
    for idx, vals in integer_assignments(inst):
        r = _lp_max_over_slice(inst, idx, vals, -c)
        if r is not None:
            best = min(best, -r[0])
    return best


def max_cut_activity(inst, cut):
    """max alpha^T x over the mixed-integer feasible set, or -inf if empty."""
    alpha = cut.dense(inst.num_vars)
    best = -math.inf
    for idx, vals in integer_assignments(inst):
        r = _lp_max_over_slice(inst, idx, vals, alpha)
        if r is not None:
            best = max(best, r[0])
    return best


# PASS/FAIL lines appended by the acceptance suite, echoed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
