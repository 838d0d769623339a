"""Run instance sets under selector configurations."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..cutsel import FilterMode, SelectorConfig, load_config
from ..engine import SolveStats, branch_and_bound
from ..mps import read_mps
from .records import RunRecord

log = logging.getLogger(__name__)

PRESETS: dict[str, SelectorConfig] = {
    "default": SelectorConfig(),
    "nocuts": SelectorConfig(max_rounds=0),
    "unranked": SelectorConfig(ranked=False),
    # density filtering alone: no parallelism handling
    "density": SelectorConfig(filter_mode=FilterMode.NONE),
    "penalty": SelectorConfig(filter_mode=FilterMode.PENALTY, density_threshold=1.0),
    # efficacy/obp/isp with hard parallelism filtering, no density filter
    "classic": SelectorConfig(w_exp=0.0, w_psc=0.0, w_loc=0.0, w_sps=0.0,
                              density_threshold=1.0, filter_mode=FilterMode.FILTER),
}

TIMINGS = ("work", "wall")


def resolve_config(spec: str) -> tuple[str, SelectorConfig]:
    """A preset name or a path to a ``key = value`` config file."""
    path = Path(spec)
    if path.is_file():
        return path.stem, load_config(path)
    if spec in PRESETS:
        return spec, PRESETS[spec]
    raise ValueError(f"unknown config {spec!r} (presets: {', '.join(PRESETS)})")


def parse_seeds(text: str) -> list[int]:
    """``"1..5"`` or ``"1,2,7"``."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def list_instances(directory: str | Path) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise ValueError(f"{d} is not a directory")
    paths = sorted(p for p in d.iterdir() if p.suffix.lower() == ".mps")
    if not paths:
        raise ValueError(f"no .mps files in {d}")
    return paths


def stats_to_record(instance: str, seed: int, config_id: str, stats: SolveStats,
                    timing: str = "work") -> RunRecord:
    t = float(stats.lp_iterations) if timing == "work" else stats.wall_time
    return RunRecord(instance, seed, config_id, stats.status.value, stats.nodes, t,
                     stats.cuts_added, stats.nonzeros_added, float(stats.primal_bound),
                     float(stats.dual_bound))


@dataclass(frozen=True)
class Job:
    path: str
    seed: int
    config_id: str
    config: SelectorConfig
    time_limit: float = math.inf
    node_limit: int | None = None
    timing: str = "work"


def run_job(job: Job) -> RunRecord:
    inst = read_mps(job.path)
    stats = branch_and_bound(inst, job.config, time_limit=job.time_limit,
                             node_limit=job.node_limit, seed=job.seed)
    return stats_to_record(Path(job.path).stem, job.seed, job.config_id, stats, job.timing)


def run_bench(paths: Sequence[str | Path], configs: Sequence[tuple[str, SelectorConfig]],
              seeds: Sequence[int], workers: int = 1, time_limit: float = math.inf,
              node_limit: int | None = None, timing: str = "work") -> list[RunRecord]:
    """Every (instance, seed, config) solve; result order is sorted, not completion order."""
    if timing not in TIMINGS:
        raise ValueError(f"timing must be one of {TIMINGS}")
    jobs = [Job(str(p), s, cid, cfg, time_limit, node_limit, timing)
            for p in paths for s in seeds for cid, cfg in configs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(run_job, jobs))
    else:
        records = [run_job(j) for j in jobs]
    return sorted(records, key=RunRecord.sort_key)


def screen_instances(records: Iterable[RunRecord], min_time: float = 0.01,
                     max_time: float = 60.0, min_nodes: int = 10, max_nodes: int = 100000
                     ) -> list[str]:
    """Instances whose every run solved within the time and node windows."""
    by_inst: dict[str, list[RunRecord]] = {}
    for r in records:
        by_inst.setdefault(r.instance, []).append(r)
    keep = []
    for name, runs in sorted(by_inst.items()):
        if all(r.status == "Optimal" and min_time <= r.time <= max_time
               and min_nodes <= r.nodes <= max_nodes for r in runs):
            keep.append(name)
    return keep
