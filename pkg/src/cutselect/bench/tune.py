"""Random-search configuration tuning against the default selector."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from ..cutsel import FilterMode, SelectorConfig
from ..engine import branch_and_bound
from ..model import MilpInstance
from .metrics import shifted_geomean


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class LogUniform:
    low: float
    high: float

    def sample(self, rng: np.random.Generator) -> float:
        return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))


@dataclass(frozen=True)
class Choice:
    options: tuple

    def sample(self, rng: np.random.Generator):
        return self.options[int(rng.integers(len(self.options)))]


DEFAULT_SPACE: dict[str, Any] = {
    "w_eff": LogUniform(1e-2, 1.0),
    "w_exp": LogUniform(1e-3, 1.0),
    "w_obp": LogUniform(1e-3, 1.0),
    "w_isp": LogUniform(1e-3, 1.0),
    "w_psc": LogUniform(1e-3, 1.0),
    "w_loc": LogUniform(1e-3, 1.0),
    "w_sps": LogUniform(1e-3, 1.0),
    "lock_complement": Choice((False, True)),
    "density_threshold": Uniform(0.1, 1.0),
    "filter_mode": Choice(tuple(FilterMode)),
    "penalty": LogUniform(1e-3, 1.0),
    "budget_multiplier": Uniform(0.25, 4.0),
}


@dataclass
class TraceEntry:
    config: SelectorConfig
    ratio: float
    times: list[float]


def _is_fixed(space: Mapping[str, Any]) -> bool:
    return not any(hasattr(v, "sample") for v in space.values())


def sample_config(space: Mapping[str, Any], rng: np.random.Generator,
                  base: SelectorConfig) -> SelectorConfig:
    values = {}
    for key in sorted(space):
        dist = space[key]
        values[key] = dist.sample(rng) if hasattr(dist, "sample") else dist
    return base.with_(**values)


def evaluate(cfg: SelectorConfig, instances: Sequence[MilpInstance], seeds: Sequence[int],
             timing: str = "work", node_limit: int | None = None) -> list[float]:
    times = []
    for inst in instances:
        for s in seeds:
            st = branch_and_bound(inst, cfg, node_limit=node_limit, seed=s)
            times.append(float(st.lp_iterations) if timing == "work" else st.wall_time)
    return times


def random_search_tune(space: Mapping[str, Any], instances: Sequence[MilpInstance],
                       passes: int, seed: int, seeds: Sequence[int] = (1,),
                       base: SelectorConfig | None = None, shift: float = 1.0,
                       timing: str = "work", node_limit: int | None = None
                       ) -> tuple[SelectorConfig, list[TraceEntry]]:
    """Sample ``passes`` configurations; each is scored over the whole
    instance set by the ratio of shifted geometric mean times against
    ``base`` (the default selector unless given). Lowest ratio wins; earlier
    samples win ties.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    if not instances:
        raise ValueError("empty instance set")
    base = base or SelectorConfig()
    reference = shifted_geomean(evaluate(base, instances, seeds, timing, node_limit), shift)
    rng = np.random.default_rng(seed)
    n_samples = 1 if _is_fixed(space) else passes
    trace = []
    for _ in range(n_samples):
        cfg = sample_config(space, rng, base)
        times = evaluate(cfg, instances, seeds, timing, node_limit)
        sg = shifted_geomean(times, shift)
        ratio = sg / reference if reference > 0 else (1.0 if sg == 0 else math.inf)
        trace.append(TraceEntry(cfg, ratio, times))
    best = min(range(len(trace)), key=lambda i: (trace[i].ratio, i))
    return trace[best].config, trace
