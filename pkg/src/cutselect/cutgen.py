"""Gomory mixed-integer cuts from the optimal simplex tableau."""

from __future__ import annotations

import math

import numpy as np

from .model import Cut, MilpInstance
from .simplex import AT_UPPER, BASIC, LpSolution, tableau_row

ZERO_COEF = 1e-11
MAX_DYNAMISM = 1e8
MIN_EFFICACY = 1e-9
INT_TOL = 1e-9


def _frac(v: float) -> float:
    return v - math.floor(v)


def generate_gmi_cuts(sol: LpSolution, inst: MilpInstance, frac_tol: float = 1e-4,
                      max_cuts: int | None = None, round_index: int = 0) -> list[Cut]:
    """One GMI cut per fractional basic integer variable, most fractional first.

    Cuts are expressed over structural variables only (row logicals are
    substituted out) and are valid for the bounds ``sol`` was solved with.
    ``max_cuts`` defaults to twice the number of fractional candidates.
    """
    if not sol.is_optimal:
        raise ValueError("GMI cuts need an optimal LP solution")
    n = inst.num_vars
    x = sol.x
    cands = []
    for j in np.flatnonzero(inst.integrality):
        if sol.basis[j] != BASIC:
            continue
        f = _frac(x[j])
        if frac_tol <= f <= 1.0 - frac_tol:
            cands.append((-min(f, 1.0 - f), int(j)))
    cands.sort()
    if max_cuts is None:
        max_cuts = 2 * len(cands)

    lo, up = sol._lower, sol._upper
    # integer-valued logicals are not detected; they count as continuous
    int_mask = np.zeros(len(lo), dtype=bool)
    int_mask[:n] = inst.integrality
    int_mask &= _integral_or_inf(lo) & _integral_or_inf(up)
    row_A = sol._matrix[:, :n]
    row_b = sol._rhs

    cuts = []
    for _, k in cands:
        if len(cuts) >= max_cuts:
            break
        cut = _gmi_from_row(sol, k, lo, up, int_mask, row_A, row_b, n, round_index)
        if cut is not None:
            cuts.append(cut)
    return cuts


def _integral_or_inf(v: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return ~np.isfinite(v) | (np.abs(v - np.round(v)) <= INT_TOL)


def _gmi_from_row(sol, k, lo, up, int_mask, row_A, row_b, n, round_index) -> Cut | None:
    trow = tableau_row(sol, k)
    f0 = _frac(trow.value)
    coefs = trow.coefs
    g = np.zeros(len(coefs))
    rhs = 1.0
    for j in np.flatnonzero(np.abs(coefs) > 1e-12):
        if sol.basis[j] == BASIC:
            continue
        if lo[j] == up[j]:
            continue  # fixed: its shift variable is identically zero
        at_upper = sol.basis[j] == AT_UPPER
        bound = up[j] if at_upper else lo[j]
        if not math.isfinite(bound):
            return None  # free nonbasic with nonzero coefficient
        a = -coefs[j] if at_upper else coefs[j]
        if int_mask[j]:
            fj = _frac(a)
            pi = fj / f0 if fj <= f0 else (1.0 - fj) / (1.0 - f0)
        else:
            pi = a / f0 if a >= 0 else -a / (1.0 - f0)
        if pi == 0.0:
            continue
        # pi * t_j with t_j = z_j - l_j or u_j - z_j
        if at_upper:
            g[j] -= pi
            rhs -= pi * bound
        else:
            g[j] += pi
            rhs += pi * bound

    # substitute logicals: s_i = b_i - A_i x
    gs = g[n:]
    h = g[:n] - gs @ row_A
    rhs -= gs @ row_b

    # h^T x >= rhs  ->  alpha^T x <= beta
    alpha = -h
    beta = -rhs
    tiny = (np.abs(alpha) < ZERO_COEF) & (alpha != 0.0)
    for j in np.flatnonzero(tiny):
        a = alpha[j]
        bound = lo[j] if a > 0 else up[j]
        if not math.isfinite(bound):
            return None
        beta -= a * bound
        alpha[j] = 0.0
    idx = np.flatnonzero(alpha)
    if len(idx) == 0:
        return None
    mags = np.abs(alpha[idx])
    if mags.max() / mags.min() > MAX_DYNAMISM:
        return None
    if not (np.all(np.isfinite(alpha)) and math.isfinite(beta)):
        return None
    cut = Cut(idx, alpha[idx], beta, (round_index, "gmi", k))
    if (cut.activity(sol.x) - cut.beta) / cut.norm <= MIN_EFFICACY:
        return None
    return cut
