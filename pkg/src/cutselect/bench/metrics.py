"""Aggregate solver-comparison metrics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .records import RunRecord

OPTIMAL = "Optimal"


def shifted_geomean(values: Sequence[float], shift: float = 0.0) -> float:
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise ValueError("shifted geometric mean of an empty list")
    if np.any(vals < 0) or shift < 0:
        raise ValueError("values and shift must be nonnegative")
    with np.errstate(divide="ignore"):
        return float(np.exp(np.mean(np.log(vals + shift))) - shift)


@dataclass
class CompareReport:
    pairs: int
    affected: int
    solved_both: int
    time_ratio: float
    node_ratio: float
    delta_solved: int
    delta_dual: int
    delta_primal: int
    unsolved_pairs: int

    @property
    def affected_fraction(self) -> float:
        return self.affected / self.pairs if self.pairs else 0.0

    def as_rows(self) -> list[tuple[str, str]]:
        return [
            ("pairs", str(self.pairs)),
            ("affected", str(self.affected)),
            ("affected_fraction", repr(self.affected_fraction)),
            ("solved_both", str(self.solved_both)),
            ("time_ratio", repr(self.time_ratio)),
            ("node_ratio", repr(self.node_ratio)),
            ("delta_solved", str(self.delta_solved)),
            ("delta_dual", str(self.delta_dual)),
            ("delta_primal", str(self.delta_primal)),
            ("unsolved_pairs", str(self.unsolved_pairs)),
        ]


def _key(r: RunRecord) -> tuple[str, int]:
    return (r.instance, r.seed)


def pair_up(a: Iterable[RunRecord], b: Iterable[RunRecord]
            ) -> list[tuple[RunRecord, RunRecord]]:
    da = {_key(r): r for r in a}
    db = {_key(r): r for r in b}
    if set(da) != set(db):
        only = sorted(set(da) ^ set(db))
        raise ValueError(f"run sets cover different instance-seed pairs, e.g. {only[0]}")
    return [(da[k], db[k]) for k in sorted(da)]


def is_affected(ra: RunRecord, rb: RunRecord) -> bool:
    return ra.status != rb.status or ra.nodes != rb.nodes or ra.cuts_added != rb.cuts_added


def compare_runs(a: Iterable[RunRecord], b: Iterable[RunRecord], time_shift: float = 1.0,
                 node_shift: float = 10.0, affected_only: bool = False,
                 bound_tol: float = 1e-6) -> CompareReport:
    """Head-to-head report of ``a`` against ``b`` (ratios < 1 favour ``a``).

    Bounds are compared in minimization form: a higher dual bound and a
    lower primal bound win.
    """
    pairs = pair_up(a, b)
    affected = [is_affected(ra, rb) for ra, rb in pairs]
    both = [(ra, rb) for (ra, rb), aff in zip(pairs, affected)
            if ra.status == OPTIMAL and rb.status == OPTIMAL and (aff or not affected_only)]
    if both:
        time_ratio = (shifted_geomean([ra.time for ra, _ in both], time_shift)
                      / shifted_geomean([rb.time for _, rb in both], time_shift))
        node_ratio = (shifted_geomean([ra.nodes for ra, _ in both], node_shift)
                      / shifted_geomean([rb.nodes for _, rb in both], node_shift))
    else:
        time_ratio = node_ratio = math.nan
    d_solved = d_dual = d_primal = unsolved = 0
    for ra, rb in pairs:
        sa, sb = ra.status == OPTIMAL, rb.status == OPTIMAL
        d_solved += int(sa and not sb) - int(sb and not sa)
        if sa and sb:
            continue
        unsolved += 1
        d_dual += _win(ra.dual_bound, rb.dual_bound, bound_tol)
        d_primal += _win(-ra.primal_bound, -rb.primal_bound, bound_tol)
    return CompareReport(len(pairs), sum(affected), len(both), time_ratio, node_ratio,
                         d_solved, d_dual, d_primal, unsolved)


def _win(x: float, y: float, tol: float) -> int:
    """+1 if x is larger than y beyond tolerance, -1 if smaller, else 0."""
    if math.isnan(x) or math.isnan(y) or x == y:
        return 0
    scale = tol * max(1.0, min(abs(x), abs(y))) if math.isfinite(x) and math.isfinite(y) else 0
    if x > y + scale:
        return 1
    if y > x + scale:
        return -1
    return 0


def relative_improvements(a: Iterable[RunRecord], b: Iterable[RunRecord],
                          affected_only: bool = True) -> list[float]:
    """Per-pair (t_b - t_a) / max(t_a, t_b) over pairs both solved; in [-1, 1]."""
    out = []
    for ra, rb in pair_up(a, b):
        if ra.status != OPTIMAL or rb.status != OPTIMAL:
            continue
        if affected_only and not is_affected(ra, rb):
            continue
        top = max(ra.time, rb.time)
        out.append((rb.time - ra.time) / top if top > 0 else 0.0)
    return out


@dataclass
class WilcoxonResult:
    p_value: float
    statistic: float
    n_informative: int
    low_power: bool


def _average_ranks(v: np.ndarray) -> np.ndarray:
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v))
    sv = v[order]
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def wilcoxon_signed_rank(pairs: Sequence[tuple[float, float]], min_pairs: int = 6
                         ) -> WilcoxonResult:
    """Two-sided signed-rank test on a_i - b_i, normal approximation.

    Zero differences are dropped, tied magnitudes get average ranks (with
    the matching variance correction), and a 0.5 continuity correction is
    applied.
    """
    d = np.array([a - b for a, b in pairs], dtype=float)
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return WilcoxonResult(1.0, 0.0, 0, True)
    ranks = _average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    mean = n * (n + 1) / 4.0
    _, counts = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float((counts ** 3 - counts).sum()) / 48.0
    if var <= 0:
        return WilcoxonResult(1.0, w_plus, n, n < min_pairs)
    diff = w_plus - mean
    z = (abs(diff) - 0.5) / math.sqrt(var) if abs(diff) > 0.5 else 0.0
    p = math.erfc(z / math.sqrt(2.0))
    return WilcoxonResult(min(p, 1.0), w_plus, n, n < min_pairs)


def emit_histogram(values: Sequence[float], bins: int) -> list[tuple[float, float, int]]:
    """Equal-width bins over [min, max] as (low, high, count) rows."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        return []
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        return [(lo, hi, int(vals.size))]
    counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)]


def histogram_csv(rows: Sequence[tuple[float, float, int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("bin_low", "bin_high", "count"))
    for lo, hi, cnt in rows:
        w.writerow((repr(lo), repr(hi), cnt))
    return buf.getvalue()
