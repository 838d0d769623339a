"""Free-form MPS reader and writer."""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np

from .model import MilpInstance, Row, Sense

log = logging.getLogger(__name__)

SECTIONS = {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}
INFINITY = 1e30
_VALUED_BOUNDS = {"UP", "LO", "FX", "LI", "UI"}
_FLAG_BOUNDS = {"FR", "MI", "PL", "BV"}


class MpsParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def _num(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise MpsParseError(lineno, f"expected a number, got {tok!r}") from None
    if not math.isfinite(v) and abs(v) != math.inf:
        raise MpsParseError(lineno, f"NaN value {tok!r}")
    return v


def parse_mps(text: str) -> MilpInstance:
    name = ""
    minimize = True
    objname = None
    row_sense: dict[str, Sense] = {}
    row_order: list[str] = []
    free_rows: set[str] = set()
    cols: dict[str, dict[str, float]] = {}
    col_int: dict[str, bool] = {}
    obj: dict[str, float] = {}
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    lower: dict[str, float] = {}
    upper: dict[str, float] = {}
    seen_bounds: set[tuple[str, str]] = set()
    obj_offset = 0.0
    section = None
    columns_line = None
    lineno = 0
    in_int = False
    ended = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        if ended:
            raise MpsParseError(lineno, "data after ENDATA")
        toks = line.split()
        if not line[0].isspace():
            head = toks[0].upper()
            if head not in SECTIONS:
                raise MpsParseError(lineno, f"malformed section header {toks[0]!r}")
            if section == "COLUMNS" and not cols:
                raise MpsParseError(columns_line, "empty COLUMNS section")
            section = head
            if head == "COLUMNS":
                columns_line = lineno
            if head == "NAME":
                name = " ".join(toks[1:])
            elif head == "OBJSENSE" and len(toks) > 1:
                minimize = _parse_sense(toks[1], lineno)
            elif head == "ENDATA":
                ended = True
            elif len(toks) > 1 and head not in ("RHS", "RANGES", "BOUNDS"):
                raise MpsParseError(lineno, f"unexpected tokens after {head}")
            continue

        if section is None or section in ("NAME", "ENDATA"):
            raise MpsParseError(lineno, "data line outside a section")
        if section == "OBJSENSE":
            minimize = _parse_sense(toks[0], lineno)
        elif section == "ROWS":
            if len(toks) != 2:
                raise MpsParseError(lineno, "ROWS entry needs type and name")
            typ, rname = toks[0].upper(), toks[1]
            if rname in row_sense or rname in free_rows or rname == objname:
                raise MpsParseError(lineno, f"duplicate row {rname!r}")
            if typ == "N":
                if objname is None:
                    objname = rname
                else:
                    free_rows.add(rname)
            elif typ in ("L", "G", "E"):
                row_sense[rname] = Sense(typ)
                row_order.append(rname)
            else:
                raise MpsParseError(lineno, f"unknown row type {typ!r}")
        elif section == "COLUMNS":
            if len(toks) >= 3 and toks[1].strip("'\"").upper() == "MARKER":
                mark = toks[2].strip("'\"").upper()
                if mark == "INTORG":
                    in_int = True
                elif mark == "INTEND":
                    in_int = False
                else:
                    raise MpsParseError(lineno, f"unknown marker {toks[2]!r}")
                continue
            if len(toks) not in (3, 5):
                raise MpsParseError(lineno, "COLUMNS entry needs column and 1 or 2 (row, value) pairs")
            cname = toks[0]
            if cname not in cols:
                cols[cname] = {}
                col_int[cname] = in_int
            entries = cols[cname]
            for rname, tok in zip(toks[1::2], toks[2::2]):
                val = _num(tok, lineno)
                if rname == objname:
                    if cname in obj:
                        raise MpsParseError(lineno, f"duplicate objective entry for {cname!r}")
                    obj[cname] = val
                elif rname in row_sense:
                    if rname in entries:
                        raise MpsParseError(lineno, f"duplicate entry ({cname!r}, {rname!r})")
                    entries[rname] = val
                elif rname in free_rows:
                    pass
                else:
                    raise MpsParseError(lineno, f"unknown row {rname!r}")
        elif section in ("RHS", "RANGES"):
            if len(toks) in (3, 5):
                toks = toks[1:]
            elif len(toks) not in (2, 4):
                raise MpsParseError(lineno, f"malformed {section} entry")
            target = rhs if section == "RHS" else ranges
            for rname, tok in zip(toks[0::2], toks[1::2]):
                val = _num(tok, lineno)
                if section == "RHS" and rname == objname:
                    obj_offset = -val
                    continue
                if rname in free_rows:
                    continue
                if rname not in row_sense:
                    raise MpsParseError(lineno, f"unknown row {rname!r}")
                if rname in target:
                    raise MpsParseError(lineno, f"duplicate {section} entry for {rname!r}")
                target[rname] = val
        elif section == "BOUNDS":
            typ = toks[0].upper()
            if typ in _VALUED_BOUNDS:
                if len(toks) == 4:
                    cname, tok = toks[2], toks[3]
                elif len(toks) == 3:
                    cname, tok = toks[1], toks[2]
                else:
                    raise MpsParseError(lineno, "malformed BOUNDS entry")
                val = _num(tok, lineno)
                if abs(val) >= INFINITY:
                    val = math.copysign(math.inf, val)
            elif typ in _FLAG_BOUNDS:
                if len(toks) == 3:
                    cname = toks[2]
                elif len(toks) == 2:
                    cname = toks[1]
                elif len(toks) == 4 and typ == "BV":
                    cname = toks[2]
                else:
                    raise MpsParseError(lineno, "malformed BOUNDS entry")
                val = None
            else:
                raise MpsParseError(lineno, f"unknown bound type {typ!r}")
            if cname not in cols:
                raise MpsParseError(lineno, f"unknown column {cname!r}")
            if (typ, cname) in seen_bounds:
                raise MpsParseError(lineno, f"duplicate {typ} bound for {cname!r}")
            seen_bounds.add((typ, cname))
            _apply_bound(typ, cname, val, lower, upper, col_int, lineno)

    if columns_line is None:
        raise MpsParseError(lineno, "missing COLUMNS section")
    if not cols:
        raise MpsParseError(columns_line, "empty COLUMNS section")

    names = list(cols)
    index = {c: i for i, c in enumerate(names)}
    c = np.array([obj.get(cn, 0.0) for cn in names])
    lo = np.array([lower.get(cn, 0.0) for cn in names])
    up = np.array([upper.get(cn, math.inf) for cn in names])
    integ = np.array([col_int[cn] for cn in names])

    coeffs: dict[str, list[tuple[int, float]]] = {r: [] for r in row_order}
    for cn, entries in cols.items():
        for rname, val in entries.items():
            if val != 0.0:
                coeffs[rname].append((index[cn], val))

    rows = []
    for rname in row_order:
        pairs = sorted(coeffs[rname])
        idx = [i for i, _ in pairs]
        vals = [v for _, v in pairs]
        sense = row_sense[rname]
        b = rhs.get(rname, 0.0)
        if rname not in ranges:
            rows.append(Row(idx, vals, sense, b, rname))
            continue
        r = ranges[rname]
        if sense is Sense.LE:
            lo_b, hi_b = b - abs(r), b
        elif sense is Sense.GE:
            lo_b, hi_b = b, b + abs(r)
        else:
            lo_b, hi_b = (b, b + r) if r >= 0 else (b + r, b)
        if sense is Sense.GE:
            rows.append(Row(idx, vals, Sense.GE, lo_b, rname))
            rows.append(Row(idx, vals, Sense.LE, hi_b, rname + "_rng"))
        else:
            rows.append(Row(idx, vals, Sense.LE, hi_b, rname))
            rows.append(Row(idx, vals, Sense.GE, lo_b, rname + "_rng"))

    try:
        return MilpInstance(name, c, rows, lo, up, integ, minimize, tuple(names), obj_offset)
    except ValueError as exc:
        raise MpsParseError(lineno, str(exc)) from None


def _parse_sense(tok: str, lineno: int) -> bool:
    t = tok.upper()
    if t in ("MIN", "MINIMIZE"):
        return True
    if t in ("MAX", "MAXIMIZE"):
        return False
    raise MpsParseError(lineno, f"unknown objective sense {tok!r}")


def _apply_bound(typ, cname, val, lower, upper, col_int, lineno):
    if typ == "UP" or typ == "UI":
        upper[cname] = val
        if val < 0 and cname not in lower:
            log.warning("line %d: negative upper bound on %s with zero lower bound; "
                        "setting lower bound to -inf", lineno, cname)
            lower[cname] = -math.inf
        if typ == "UI":
            col_int[cname] = True
    elif typ == "LO" or typ == "LI":
        lower[cname] = val
        if typ == "LI":
            col_int[cname] = True
    elif typ == "FX":
        lower[cname] = upper[cname] = val
    elif typ == "FR":
        lower[cname], upper[cname] = -math.inf, math.inf
    elif typ == "MI":
        lower[cname] = -math.inf
    elif typ == "PL":
        upper[cname] = math.inf
    elif typ == "BV":
        lower[cname], upper[cname] = 0.0, 1.0
        col_int[cname] = True


def read_mps(path: str | Path) -> MilpInstance:
    inst = parse_mps(Path(path).read_text())
    if not inst.name:
        object.__setattr__(inst, "name", Path(path).stem)
    return inst


def _fmt(v: float) -> str:
    return repr(float(v))


def write_mps(inst: MilpInstance) -> str:
    """Serialize to free-form MPS. ``parse_mps(write_mps(i))`` reproduces ``i``."""
    out = [f"NAME {inst.name}" if inst.name else "NAME"]
    if not inst.minimize:
        out += ["OBJSENSE", "    MAX"]
    out.append("ROWS")
    out.append(" N  OBJ")
    rnames = _unique_row_names(inst)
    for row, rn in zip(inst.rows, rnames):
        out.append(f" {row.sense.value}  {rn}")
    out.append("COLUMNS")
    by_col: list[list[tuple[str, float]]] = [[] for _ in range(inst.num_vars)]
    for row, rn in zip(inst.rows, rnames):
        for i, v in zip(row.indices, row.values):
            by_col[i].append((rn, float(v)))
    in_int = False
    for j, cn in enumerate(inst.var_names):
        if inst.integrality[j] != in_int:
            tag = "'INTORG'" if not in_int else "'INTEND'"
            out.append(f"    MARKER                 'MARKER'                 {tag}")
            in_int = not in_int
        out.append(f"    {cn}  OBJ  {_fmt(inst.objective[j])}")
        for rn, v in by_col[j]:
            out.append(f"    {cn}  {rn}  {_fmt(v)}")
    if in_int:
        out.append("    MARKER                 'MARKER'                 'INTEND'")
    out.append("RHS")
    if inst.obj_offset != 0.0:
        out.append(f"    RHS  OBJ  {_fmt(-inst.obj_offset)}")
    for row, rn in zip(inst.rows, rnames):
        if row.rhs != 0.0:
            out.append(f"    RHS  {rn}  {_fmt(row.rhs)}")
    out.append("BOUNDS")
    for j, cn in enumerate(inst.var_names):
        lo, up = inst.lower[j], inst.upper[j]
        if lo == -math.inf and up == math.inf:
            out.append(f" FR BND  {cn}")
            continue
        if lo == up:
            out.append(f" FX BND  {cn}  {_fmt(lo)}")
            continue
        if lo == -math.inf:
            out.append(f" MI BND  {cn}")
        elif lo != 0.0:
            out.append(f" LO BND  {cn}  {_fmt(lo)}")
        if up != math.inf:
            # LO/MI precede UP, so a negative UP never triggers the implicit -inf lower bound
            out.append(f" UP BND  {cn}  {_fmt(up)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def _unique_row_names(inst: MilpInstance) -> list[str]:
    names, seen = [], {"OBJ"}
    for j, row in enumerate(inst.rows):
        rn = row.name or f"R{j}"
        if rn in seen or " " in rn:
            rn = f"R{j}"
            while rn in seen:
                rn += "_"
        seen.add(rn)
        names.append(rn)
    return names
