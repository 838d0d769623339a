"""Independent straight-line reimplementations used as test oracles.

Nothing here imports the scoring code under test; every measure is rebuilt
from dense vectors with plain loops.
"""

import math

import numpy as np

from cutselect.cutsel import FilterMode, ScoringContext, SelectorConfig
from cutselect.model import Cut


def random_pool(rng, n=None, size=None):
    """Random pool plus scoring context; includes scaled and exact duplicates."""
    n = n or int(rng.integers(2, 16))
    size = int(rng.integers(0, 21)) if size is None else size
    x = rng.normal(size=n) * 2
    pool = []
    while len(pool) < size:
        r = rng.random()
        if pool and r < 0.15:
            src = pool[int(rng.integers(len(pool)))]
            t = float(rng.choice([1.0, 0.5, 3.0]))
            pool.append(Cut(src.indices, src.values * t, src.beta * t))
            continue
        k = int(rng.integers(1, n + 1))
        idx = np.sort(rng.choice(n, size=k, replace=False))
        vals = rng.integers(-5, 6, size=k).astype(float)
        vals[vals == 0] = 1.0
        if rng.random() < 0.3:
            vals = vals + rng.normal(size=k) * 0.1
        act = float(vals @ x[idx])
        beta = act - float(rng.random()) * 2 if rng.random() < 0.9 else act + 0.5
        pool.append(Cut(idx, vals, beta))
    ctx = ScoringContext(
        x_lp=x,
        c=rng.integers(-4, 5, size=n).astype(float) if rng.random() < 0.95 else np.zeros(n),
        pseudocosts=rng.random(n) * 3 * (rng.random(n) < 0.8),
        downlocks=rng.integers(0, 4, size=n),
        uplocks=rng.integers(0, 4, size=n),
        integrality=rng.random(n) < 0.6,
    )
    return pool, ctx


def random_config(rng, mode=None):
    mode = mode or FilterMode(rng.choice([m.value for m in FilterMode]))
    return SelectorConfig(
        w_eff=float(rng.random()), w_exp=float(rng.random()), w_obp=float(rng.random()),
        w_isp=float(rng.random()), w_psc=float(rng.random()), w_loc=float(rng.random()),
        w_sps=float(rng.random()), lock_complement=bool(rng.random() < 0.5),
        maxsps=float(rng.random() * 2), endsps=float(rng.uniform(0.05, 1.0)),
        density_threshold=float(rng.choice([0.3, 0.4, 0.6, 1.0])),
        filter_mode=mode, parallelism_threshold=float(rng.choice([0.3, 0.5, 0.9, 0.95, 1.0])),
        penalty=float(rng.choice([0.0, 0.1, 0.5, 2.0])),
        budget_multiplier=float(rng.choice([0.3, 1.0, 2.0, 10.0])),
        max_cuts_per_round=int(rng.integers(1, 25)),
    )


def _dense(cut, n):
    a = [0.0] * n
    for i, v in zip(cut.indices, cut.values):
        a[int(i)] = float(v)
    return a


def _dot(a, b):
    return sum(p * q for p, q in zip(a, b))


def _norm(a):
    return math.sqrt(_dot(a, a))


def raw_measures(cut, ctx, cfg):
    n = len(ctx.x_lp)
    a = _dense(cut, n)
    x = [float(v) for v in ctx.x_lp]
    c = [float(v) for v in ctx.c]
    na, nc = _norm(a), _norm(c)
    viol = _dot(a, x) - cut.beta
    eff = viol / na
    obp = abs(_dot(a, c)) / (na * nc) if nc > 0 else 0.0
    support = [i for i in range(n) if a[i] != 0.0]
    isp = sum(1 for i in support if ctx.integrality[i]) / len(support)
    exp = obp * eff * nc
    psc = sum(ctx.pseudocosts[i] * abs(x[i] - a[i] * viol / na ** 2) for i in support)
    loc = sum(int(ctx.downlocks[i]) + int(ctx.uplocks[i]) for i in support) / n
    dens = len(support) / n
    sps = max(cfg.maxsps - cfg.maxsps / cfg.endsps * dens, 0.0)
    return dict(eff=eff, obp=obp, isp=isp, exp=exp, psc=psc, loc=loc, sps=sps)


def reference_scores(pool, ctx, cfg):
    raws = [raw_measures(cut, ctx, cfg) for cut in pool]
    top = {}
    for key in ("eff", "exp", "psc", "loc"):
        top[key] = max([max(r[key], 0.0) for r in raws], default=0.0)

    def hat(r, key):
        return max(r[key], 0.0) / top[key] if top[key] > 0 else 0.0

    out = []
    for r in raws:
        loc = hat(r, "loc")
        if cfg.lock_complement:
            loc = 1.0 - loc
        out.append(cfg.w_eff * hat(r, "eff") + cfg.w_exp * hat(r, "exp") + cfg.w_obp * r["obp"]
                   + cfg.w_isp * r["isp"] + cfg.w_psc * hat(r, "psc") + cfg.w_loc * loc
                   + cfg.w_sps * r["sps"])
    return out, raws


def reference_parallelism(a, b, n):
    da, db = _dense(a, n), _dense(b, n)
    return min(abs(_dot(da, db)) / (_norm(da) * _norm(db)), 1.0)


def _close(a, b):
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def _beats(k, best, score, eff, pool):
    if not _close(score[k], score[best]):
        return score[k] > score[best]
    if not _close(eff[k], eff[best]):
        return eff[k] > eff[best]
    if pool[k].nnz != pool[best].nnz:
        return pool[k].nnz < pool[best].nnz
    return k < best


def reference_select(pool, ctx, cfg):
    """Quadratic-time selection; returns the selected pool indices in order."""
    n = len(ctx.x_lp)
    if not cfg.ranked:
        picked, used = [], 0
        for k, cut in enumerate(pool):
            if used + cut.nnz > math.ceil(round(cfg.budget_multiplier * n, 9)):
                if not picked:
                    picked.append(k)
                break
            picked.append(k)
            used += cut.nnz
            if len(picked) == cfg.max_cuts_per_round:
                break
        return picked
    kept = [k for k, cut in enumerate(pool) if cut.nnz / n <= cfg.density_threshold]
    if not kept:
        return []
    scores, raws = reference_scores([pool[k] for k in kept], ctx, cfg)
    score = dict(zip(kept, scores))
    eff = {k: r["eff"] for k, r in zip(kept, raws)}
    budget = math.ceil(round(cfg.budget_multiplier * n, 9))
    remaining = list(kept)
    picked, used = [], 0
    while remaining:
        best = None
        for k in remaining:
            if best is None or _beats(k, best, score, eff, pool):
                best = k
        if used + pool[best].nnz > budget:
            if not picked:
                picked.append(best)
            break
        picked.append(best)
        used += pool[best].nnz
        remaining.remove(best)
        if len(picked) == cfg.max_cuts_per_round:
            break
        survivors = []
        for k in remaining:
            par = reference_parallelism(pool[k], pool[best], n)
            if cfg.filter_mode is FilterMode.FILTER:
                if par > cfg.parallelism_threshold:
                    continue
            elif cfg.filter_mode is FilterMode.PENALTY:
                if par > cfg.parallelism_threshold:
                    score[k] -= cfg.penalty * par
                    if score[k] < cfg.removal_threshold:
                        continue
            survivors.append(k)
        remaining = survivors
    return picked
