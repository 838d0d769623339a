"""Problem representation: MILP instances, cuts, instance features."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Sequence

import numpy as np


class Sense(str, enum.Enum):
    LE = "L"
    GE = "G"
    EQ = "E"


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Row:
    """One linear constraint ``a^T x (<=|>=|=) rhs`` with sparse ``a``."""

    indices: np.ndarray
    values: np.ndarray
    sense: Sense
    rhs: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "indices", _frozen_array(self.indices, np.int64))
        object.__setattr__(self, "values", _frozen_array(self.values, float))
        object.__setattr__(self, "sense", Sense(self.sense))
        object.__setattr__(self, "rhs", float(self.rhs))

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.indices] = self.values
        return out


@dataclass(frozen=True, eq=False)
class MilpInstance:
    """min/max c^T x  s.t. rows, l <= x <= u, x_j integer for j in the mask."""

    name: str
    objective: np.ndarray
    rows: tuple[Row, ...]
    lower: np.ndarray
    upper: np.ndarray
    integrality: np.ndarray
    minimize: bool = True
    var_names: tuple[str, ...] = ()
    obj_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "objective", _frozen_array(self.objective, float))
        object.__setattr__(self, "lower", _frozen_array(self.lower, float))
        object.__setattr__(self, "upper", _frozen_array(self.upper, float))
        object.__setattr__(self, "integrality", _frozen_array(self.integrality, bool))
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.var_names:
            object.__setattr__(self, "var_names", tuple(f"x{i}" for i in range(self.num_vars)))
        self.validate()

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def validate(self) -> None:
        n = self.num_vars
        for name in ("lower", "upper", "integrality"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has length {len(getattr(self, name))}, expected {n}")
        if len(self.var_names) != n:
            raise ValueError("var_names length mismatch")
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective must be finite")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("bounds must not be NaN")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("lower bound +inf or upper bound -inf")
        if np.any(self.lower > self.upper):
            bad = int(np.argmax(self.lower > self.upper))
            raise ValueError(f"variable {self.var_names[bad]} has lower > upper")
        for row in self.rows:
            idx = row.indices
            if len(idx) and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= n):
                raise ValueError(f"row {row.name!r}: indices must be strictly increasing and < n")
            if not (np.all(np.isfinite(row.values)) and math.isfinite(row.rhs)):
                raise ValueError(f"row {row.name!r}: non-finite data")

    def dense_matrix(self) -> np.ndarray:
        A = np.zeros((self.num_rows, self.num_vars))
        for j, row in enumerate(self.rows):
            A[j, row.indices] = row.values
        return A

    def min_objective(self) -> np.ndarray:
        """Objective in minimization form."""
        return self.objective if self.minimize else -self.objective

    def is_feasible(self, x: np.ndarray, tol: float = 1e-6) -> bool:
        x = np.asarray(x, dtype=float)
        if np.any(x < self.lower - tol) or np.any(x > self.upper + tol):
            return False
        frac = np.abs(x - np.round(x))
        if np.any(frac[self.integrality] > tol):
            return False
        for row in self.rows:
            act = float(row.values @ x[row.indices])
            scale = tol * max(1.0, abs(row.rhs))
            if row.sense is Sense.LE and act > row.rhs + scale:
                return False
            if row.sense is Sense.GE and act < row.rhs - scale:
                return False
            if row.sense is Sense.EQ and abs(act - row.rhs) > scale:
                return False
        return True

    def with_bounds(self, lower: np.ndarray, upper: np.ndarray) -> "MilpInstance":
        return MilpInstance(self.name, self.objective, self.rows, lower, upper,
                            self.integrality, self.minimize, self.var_names, self.obj_offset)


@dataclass(frozen=True, eq=False)
class Cut:
    """A cut ``alpha^T x <= beta``.

    ``origin`` records (round, generator, source tableau row) for diagnostics.
    """

    indices: np.ndarray
    values: np.ndarray
    beta: float
    origin: tuple = ()

    def __post_init__(self):
        idx = _frozen_array(self.indices, np.int64)
        vals = _frozen_array(self.values, float)
        if len(idx) == 0:
            raise ValueError("cut must have at least one nonzero")
        if len(idx) != len(vals):
            raise ValueError("indices/values length mismatch")
        if np.any(np.diff(idx) <= 0) or idx[0] < 0:
            raise ValueError("cut indices must be strictly increasing and nonnegative")
        if not (np.all(np.isfinite(vals)) and math.isfinite(self.beta)):
            raise ValueError("cut data must be finite")
        if np.any(vals == 0.0):
            raise ValueError("cut coefficients must be nonzero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def from_dense(cls, alpha: Sequence[float], beta: float, origin: tuple = ()) -> "Cut":
        alpha = np.asarray(alpha, dtype=float)
        idx = np.flatnonzero(alpha)
        return cls(idx, alpha[idx], beta, origin)

    @property
    def nnz(self) -> int:
        return len(self.indices)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def dense(self, n: int) -> np.ndarray:
        if self.indices[-1] >= n:
            raise ValueError(f"cut index {self.indices[-1]} out of range for n={n}")
        out = np.zeros(n)
        out[self.indices] = self.values
        return out

    def activity(self, x: np.ndarray) -> float:
        return float(self.values @ np.asarray(x)[self.indices])

    def scaled(self, t: float) -> "Cut":
        return Cut(self.indices, self.values * t, self.beta * t, self.origin)

    def as_row(self, name: str = "") -> Row:
        return Row(self.indices, self.values, Sense.LE, self.beta, name)


# --------------------------------------------------------------------------
# features and diverse subset selection


@dataclass(frozen=True)
class InstanceFeatures:
    frac_rows_le: float
    frac_rows_ge: float
    frac_rows_eq: float
    frac_vars_binary: float
    frac_vars_integer: float
    frac_vars_continuous: float
    avg_row_density: float
    max_row_density: float
    objective_density: float

    def vector(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


FEATURE_FIELDS = tuple(f.name for f in fields(InstanceFeatures))


def compute_features(inst: MilpInstance) -> InstanceFeatures:
    n = inst.num_vars
    m = inst.num_rows
    if m:
        senses = [r.sense for r in inst.rows]
        le = senses.count(Sense.LE) / m
        ge = senses.count(Sense.GE) / m
        eq = senses.count(Sense.EQ) / m
        dens = [r.nnz / n for r in inst.rows]
        avg_d, max_d = sum(dens) / m, max(dens)
    else:
        le = ge = eq = avg_d = max_d = 0.0
    if n:
        binary = inst.integrality & (inst.lower == 0.0) & (inst.upper == 1.0)
        n_bin = int(binary.sum())
        n_int = int(inst.integrality.sum()) - n_bin
        obj_d = np.count_nonzero(inst.objective) / n
        fb, fi = n_bin / n, n_int / n
        fc = 1.0 - fb - fi
    else:
        fb = fi = fc = obj_d = 0.0
    return InstanceFeatures(le, ge, eq, fb, fi, fc, avg_d, max_d, float(obj_d))


def select_diverse_subset(features: Sequence[InstanceFeatures | Sequence[float]], k: int,
                          seed: int = 0, restarts: int = 0) -> list[int]:
    """Greedy farthest-point selection of ``k`` indices.

    The first point is the one farthest from the centroid, each further point
    maximizes its minimum Euclidean distance to the chosen set. Ties go to the
    lowest index. With ``restarts > 0``, additional traversals are started
    from points drawn with ``seed`` and the subset with the largest minimum
    pairwise distance wins (the deterministic traversal wins ties).
    """
    pts = np.array([f.vector() if isinstance(f, InstanceFeatures) else f for f in features],
                   dtype=float)
    N = len(pts)
    if k > N:
        raise ValueError(f"cannot select {k} of {N} instances")
    if k <= 0:
        return []
    if not np.all(np.isfinite(pts)):
        raise ValueError("features must be finite")
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1))

    def traverse(first: int) -> list[int]:
        chosen = [first]
        mind = dist[first].copy()
        mind[first] = -np.inf
        while len(chosen) < k:
            nxt = int(np.argmax(mind))  # argmax returns the lowest index among ties
            chosen.append(nxt)
            mind = np.minimum(mind, dist[nxt])
            mind[chosen] = -np.inf
        return chosen

    centroid = pts.mean(axis=0)
    best = traverse(int(np.argmax(np.linalg.norm(pts - centroid, axis=1))))
    if restarts > 0 and k > 1:
        rng = np.random.default_rng(seed)
        best_val = min_pairwise_distance(pts[best])
        for start in rng.choice(N, size=min(restarts, N), replace=False):
            cand = traverse(int(start))
            val = min_pairwise_distance(pts[cand])
            if val > best_val:
                best, best_val = cand, val
    return best


def min_pairwise_distance(points: np.ndarray) -> float:
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return math.inf
    d = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1))
    return float(d[np.triu_indices(len(points), 1)].min())


def write_features_csv(names: Iterable[str], feats: Iterable[InstanceFeatures]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("instance",) + FEATURE_FIELDS)
    for name, f in zip(names, feats):
        w.writerow([name] + [repr(float(v)) for v in astuple(f)])
    return buf.getvalue()


def read_features_csv(text: str) -> tuple[list[str], list[InstanceFeatures]]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(FEATURE_FIELDS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"features CSV missing columns: {sorted(missing)}")
    names, feats = [], []
    for rec in reader:
        names.append(rec.get("instance", ""))
        feats.append(InstanceFeatures(*(float(rec[k]) for k in FEATURE_FIELDS)))
    return names, feats
