"""Cut scoring, filtering and per-round selection."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import Cut


class FilterMode(str, enum.Enum):
    FILTER = "parallelism_filter"
    PENALTY = "parallelism_penalty"
    NONE = "none"


class StopReason(str, enum.Enum):
    POOL_EXHAUSTED = "PoolExhausted"
    NONZERO_BUDGET = "NonzeroBudget"
    MAX_CUTS = "MaxCuts"


DEFAULT_THRESHOLD = {FilterMode.FILTER: 0.95, FilterMode.PENALTY: 0.5, FilterMode.NONE: 1.0}


@dataclass(frozen=True)
class SelectorConfig:
    """Weights, filters and limits of the cut selector.

    ``parallelism_threshold=None`` resolves to the filter mode's default.
    ``ranked=False`` disables selection entirely: cuts are taken in
    generation order up to the same nonzero budget and cut limit.
    """

    w_eff: float = 1.0
    w_exp: float = 0.1
    w_obp: float = 0.1
    w_isp: float = 0.1
    w_psc: float = 0.1
    w_loc: float = 0.1
    w_sps: float = 0.2
    lock_complement: bool = False
    maxsps: float = 1.0
    endsps: float = 0.4
    density_threshold: float = 0.4
    filter_mode: FilterMode = FilterMode.PENALTY
    parallelism_threshold: float | None = None
    penalty: float = 0.1
    removal_threshold: float = 0.0
    budget_multiplier: float = 1.0
    max_cuts_per_round: int = 100
    max_rounds: int = 10
    ranked: bool = True

    def __post_init__(self):
        object.__setattr__(self, "filter_mode", FilterMode(self.filter_mode))
        if self.parallelism_threshold is None:
            object.__setattr__(self, "parallelism_threshold", DEFAULT_THRESHOLD[self.filter_mode])
        for w in self.weights:
            if not (math.isfinite(w) and w >= 0):
                raise ValueError("weights must be finite and nonnegative")
        if not 0 < self.endsps <= 1:
            raise ValueError("endsps must lie in (0, 1]")
        if self.maxsps < 0:
            raise ValueError("maxsps must be nonnegative")
        if not 0 < self.density_threshold <= 1:
            raise ValueError("density_threshold must lie in (0, 1]")
        if not 0 <= self.parallelism_threshold <= 1:
            raise ValueError("parallelism_threshold must lie in [0, 1]")
        if self.penalty < 0:
            raise ValueError("penalty must be nonnegative")
        if self.budget_multiplier <= 0:
            raise ValueError("budget_multiplier must be positive")
        if self.max_cuts_per_round < 1 or self.max_rounds < 0:
            raise ValueError("max_cuts_per_round >= 1 and max_rounds >= 0 required")

    @property
    def weights(self) -> tuple[float, ...]:
        return (self.w_eff, self.w_exp, self.w_obp, self.w_isp, self.w_psc, self.w_loc,
                self.w_sps)

    def with_(self, **changes) -> "SelectorConfig":
        if "filter_mode" in changes and "parallelism_threshold" not in changes:
            changes["parallelism_threshold"] = None
        return replace(self, **changes)


def parse_config(text: str, base: SelectorConfig | None = None) -> SelectorConfig:
    """Read ``key = value`` lines (``#`` starts a comment) into a config."""
    types = {f.name: f.type for f in fields(SelectorConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(types[key], val, lineno)
    base = base or SelectorConfig()
    return base.with_(**values)


def _coerce(typ: str, val: str, lineno: int):
    try:
        if typ == "bool":
            low = val.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(val)
        if typ == "int":
            return int(val)
        if typ == "FilterMode":
            return FilterMode(val)
        if typ.startswith("float | None"):
            return None if val.lower() in ("none", "") else float(val)
        return float(val)
    except ValueError:
        raise ValueError(f"line {lineno}: bad value {val!r} for type {typ}") from None


def load_config(path: str | Path) -> SelectorConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: SelectorConfig) -> str:
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, FilterMode):
            v = v.value
        elif isinstance(v, float):
            v = repr(v)
        out.append(f"{f.name} = {v}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True, eq=False)
class ScoringContext:
    x_lp: np.ndarray
    c: np.ndarray
    pseudocosts: np.ndarray
    downlocks: np.ndarray
    uplocks: np.ndarray
    integrality: np.ndarray

    @property
    def n(self) -> int:
        return len(self.x_lp)


@dataclass
class SelectionResult:
    selected: list[Cut] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)
    rejected_density: int = 0
    rejected_parallelism: int = 0
    nonzeros_added: int = 0
    stop_reason: StopReason = StopReason.POOL_EXHAUSTED


# --------------------------------------------------------------------------
# individual measures


def efficacy(cut: Cut, x_lp: np.ndarray) -> float:
    return (cut.activity(x_lp) - cut.beta) / cut.norm


def objective_parallelism(cut: Cut, c: np.ndarray) -> float:
    cnorm = float(np.linalg.norm(c))
    if cnorm == 0.0:
        return 0.0
    return abs(float(cut.values @ np.asarray(c)[cut.indices])) / (cut.norm * cnorm)


def integer_support(cut: Cut, integrality: np.ndarray) -> float:
    return float(np.count_nonzero(np.asarray(integrality)[cut.indices])) / cut.nnz


def expected_improvement(cut: Cut, x_lp: np.ndarray, c: np.ndarray) -> float:
    return objective_parallelism(cut, c) * efficacy(cut, x_lp) * float(np.linalg.norm(c))


def pseudocost_score(cut: Cut, x_lp: np.ndarray, pseudocosts: np.ndarray) -> float:
    """Pseudo-cost weighted coordinates of the projection of x_lp onto the cut."""
    x = np.asarray(x_lp)[cut.indices]
    step = (cut.activity(x_lp) - cut.beta) / cut.norm ** 2
    return float(np.asarray(pseudocosts)[cut.indices] @ np.abs(x - cut.values * step))


def lock_score(cut: Cut, downlocks: np.ndarray, uplocks: np.ndarray, n: int,
               complement: bool = False, round_max: float | None = None) -> float:
    """Average lock count over the cut's support.

    The complement is defined relative to the round maximum, so it requires
    ``round_max``.
    """
    base = float((np.asarray(downlocks)[cut.indices] + np.asarray(uplocks)[cut.indices]).sum()) / n
    if not complement:
        return base
    if round_max is None:
        raise ValueError("the lock complement needs the round maximum")
    return 1.0 - (base / round_max if round_max > 0 else 0.0)


def sparsity_score(cut: Cut, n: int, maxsps: float, endsps: float) -> float:
    density = cut.nnz / n
    return max(maxsps - maxsps / endsps * density, 0.0)


def normalize_round(raw_scores: Sequence[float]) -> list[float]:
    raw = [float(v) for v in raw_scores]
    if not raw:
        return []
    top = max(raw)
    if top <= 0.0:
        return [0.0] * len(raw)
    return [v / top for v in raw]


def parallelism(a: Cut, b: Cut) -> float:
    common, ia, ib = np.intersect1d(a.indices, b.indices, assume_unique=True,
                                    return_indices=True)
    if len(common) == 0:
        return 0.0
    dot = float(a.values[ia] @ b.values[ib])
    return min(abs(dot) / (a.norm * b.norm), 1.0)


def nonzero_budget(n: int, mu: float) -> int:
    # round first so that e.g. 0.1 * 30 does not ceil to 4
    return math.ceil(round(mu * n, 9))


# --------------------------------------------------------------------------
# pool-level operations


def density_filter(pool: Sequence[Cut], n: int, density_threshold: float
                   ) -> tuple[list[Cut], int]:
    kept = [cut for cut in pool if cut.nnz / n <= density_threshold]
    return kept, len(pool) - len(kept)


def _pool_matrix(pool: Sequence[Cut], n: int) -> np.ndarray:
    P = np.zeros((len(pool), n))
    for k, cut in enumerate(pool):
        P[k, cut.indices] = cut.values
    return P


def score_components(pool: Sequence[Cut], ctx: ScoringContext, cfg: SelectorConfig
                     ) -> dict[str, np.ndarray]:
    """Per-cut measures after round normalization, keyed by measure name."""
    n = ctx.n
    P = _pool_matrix(pool, n)
    beta = np.array([cut.beta for cut in pool])
    nnz = np.array([cut.nnz for cut in pool], dtype=float)
    norms = np.linalg.norm(P, axis=1)
    c = np.asarray(ctx.c, dtype=float)
    cnorm = float(np.linalg.norm(c))
    viol = P @ ctx.x_lp - beta
    eff = viol / norms
    obp = np.abs(P @ c) / (norms * cnorm) if cnorm > 0 else np.zeros(len(pool))
    exp = obp * eff * cnorm
    isp = (P[:, np.asarray(ctx.integrality, dtype=bool)] != 0).sum(axis=1) / nnz
    proj = ctx.x_lp[None, :] - P * (viol / norms ** 2)[:, None]
    psc = ((P != 0) * np.abs(proj)) @ ctx.pseudocosts
    loc = (P != 0) @ (np.asarray(ctx.downlocks, float) + np.asarray(ctx.uplocks, float)) / n
    sps = np.maximum(cfg.maxsps - cfg.maxsps / cfg.endsps * (nnz / n), 0.0)

    loc_n = np.array(normalize_round(np.maximum(loc, 0.0)))
    if cfg.lock_complement:
        loc_n = 1.0 - loc_n
    return {
        "eff": np.array(normalize_round(np.maximum(eff, 0.0))),
        "exp": np.array(normalize_round(np.maximum(exp, 0.0))),
        "obp": obp,
        "isp": isp,
        "psc": np.array(normalize_round(psc)),
        "loc": loc_n,
        "sps": sps,
        "raw_eff": eff,
    }


def total_score(pool: Sequence[Cut], ctx: ScoringContext, cfg: SelectorConfig) -> list[float]:
    if not pool:
        return []
    comp = score_components(pool, ctx, cfg)
    total = (cfg.w_eff * comp["eff"] + cfg.w_exp * comp["exp"] + cfg.w_obp * comp["obp"]
             + cfg.w_isp * comp["isp"] + cfg.w_psc * comp["psc"] + cfg.w_loc * comp["loc"]
             + cfg.w_sps * comp["sps"])
    return total.tolist()


def select_cuts(pool: Sequence[Cut], ctx: ScoringContext, cfg: SelectorConfig
                ) -> SelectionResult:
    n = ctx.n
    if not cfg.ranked:
        return select_unranked(pool, n, cfg)
    kept, n_dense = density_filter(pool, n, cfg.density_threshold)
    result = SelectionResult(rejected_density=n_dense)
    if not kept:
        return result
    scores = np.array(total_score(kept, ctx, cfg))
    eff = np.array([efficacy(cut, ctx.x_lp) for cut in kept])
    nnz = np.array([cut.nnz for cut in kept])
    P = _pool_matrix(kept, n)
    P /= np.linalg.norm(P, axis=1)[:, None]
    alive = np.ones(len(kept), dtype=bool)
    budget = nonzero_budget(n, cfg.budget_multiplier)
    pbar = cfg.parallelism_threshold

    while True:
        if not alive.any():
            result.stop_reason = StopReason.POOL_EXHAUSTED
            break
        best = _argbest(np.flatnonzero(alive), scores, eff, nnz)
        cut = kept[best]
        if result.nonzeros_added + cut.nnz > budget:
            if result.selected:
                result.stop_reason = StopReason.NONZERO_BUDGET
                break
            _append(result, cut, scores[best])
            result.stop_reason = StopReason.NONZERO_BUDGET
            break
        _append(result, cut, scores[best])
        alive[best] = False
        if len(result.selected) >= cfg.max_cuts_per_round:
            result.stop_reason = StopReason.MAX_CUTS
            break
        rest = np.flatnonzero(alive)
        if cfg.filter_mode is FilterMode.NONE or len(rest) == 0:
            continue
        par = np.minimum(np.abs(P[rest] @ P[best]), 1.0)
        hit = rest[par > pbar]
        if cfg.filter_mode is FilterMode.FILTER:
            alive[hit] = False
            result.rejected_parallelism += len(hit)
        else:
            scores[hit] -= cfg.penalty * par[par > pbar]
            drop = hit[scores[hit] < cfg.removal_threshold]
            alive[drop] = False
            result.rejected_parallelism += len(drop)
    return result


TIE_TOL = 1e-12


def _argbest(idx: np.ndarray, scores, eff, nnz) -> int:
    """Score desc, efficacy desc, nnz asc, index asc.

    Scores and efficacies within a relative ``TIE_TOL`` count as ties, so
    scaled copies of one cut are ordered by nnz and index, not rounding noise.
    """
    top = scores[idx].max()
    idx = idx[scores[idx] >= top - TIE_TOL * max(1.0, abs(top))]
    top = eff[idx].max()
    idx = idx[eff[idx] >= top - TIE_TOL * max(1.0, abs(top))]
    return int(min(idx, key=lambda k: (nnz[k], k)))


def _append(result: SelectionResult, cut: Cut, score: float) -> None:
    result.selected.append(cut)
    result.scores.append(float(score))
    result.nonzeros_added += cut.nnz


def select_unranked(pool: Sequence[Cut], n: int, cfg: SelectorConfig) -> SelectionResult:
    """Take cuts in generation order, no scoring or filtering, same limits."""
    result = SelectionResult()
    budget = nonzero_budget(n, cfg.budget_multiplier)
    for cut in pool:
        if result.nonzeros_added + cut.nnz > budget:
            if not result.selected:
                _append(result, cut, 0.0)
            result.stop_reason = StopReason.NONZERO_BUDGET
            return result
        _append(result, cut, 0.0)
        if len(result.selected) >= cfg.max_cuts_per_round:
            result.stop_reason = StopReason.MAX_CUTS
            return result
    return result
