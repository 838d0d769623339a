"""Per-solve result rows and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass, fields
from typing import Iterable

COLUMNS = ("instance", "seed", "config_id", "status", "nodes", "time", "cuts_added",
           "nonzeros_added", "primal_bound", "dual_bound")


@dataclass(frozen=True)
class RunRecord:
    instance: str
    seed: int
    config_id: str
    status: str
    nodes: int
    time: float
    cuts_added: int
    nonzeros_added: int
    primal_bound: float
    dual_bound: float

    def sort_key(self):
        return (self.instance, self.seed, self.config_id)


assert tuple(f.name for f in fields(RunRecord)) == COLUMNS


def _cell(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def records_to_csv(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in sorted(records, key=RunRecord.sort_key):
        w.writerow([_cell(v) for v in astuple(r)])
    return buf.getvalue()


def records_from_csv(text: str) -> list[RunRecord]:
    reader = csv.DictReader(io.StringIO(text))
    missing = set(COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"results CSV missing columns: {sorted(missing)}")
    out = []
    for rec in reader:
        out.append(RunRecord(
            rec["instance"], int(rec["seed"]), rec["config_id"], rec["status"],
            int(rec["nodes"]), float(rec["time"]), int(rec["cuts_added"]),
            int(rec["nonzeros_added"]), float(rec["primal_bound"]), float(rec["dual_bound"]),
        ))
    return out


def split_by_config(records: Iterable[RunRecord]) -> dict[str, list[RunRecord]]:
    out: dict[str, list[RunRecord]] = {}
    for r in records:
        out.setdefault(r.config_id, []).append(r)
    return out
