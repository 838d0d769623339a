"""Branch-and-cut for MILPs with context-aware cut selection."""

from .cutsel import FilterMode, ScoringContext, SelectionResult, SelectorConfig, select_cuts
from .engine import SolveStats, SolveStatus, branch_and_bound, separation_loop
from .model import Cut, InstanceFeatures, MilpInstance, Row, Sense
from .mps import parse_mps, read_mps, write_mps
from .simplex import LpSolution, LpStatus, solve_relaxation

__all__ = [
    "Cut", "FilterMode", "InstanceFeatures", "LpSolution", "LpStatus", "MilpInstance", "Row",
    "ScoringContext", "SelectionResult", "SelectorConfig", "Sense", "SolveStats", "SolveStatus",
    "branch_and_bound", "parse_mps", "read_mps", "select_cuts", "separation_loop",
    "solve_relaxation", "write_mps",
]
