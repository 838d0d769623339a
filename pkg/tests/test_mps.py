import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutselect.model import MilpInstance, Row, Sense
from cutselect.mps import MpsParseError, parse_mps, write_mps

MINIMAL = """\
NAME          tiny
ROWS
 N  obj
 L  c1
COLUMNS
    MARKER                 'MARKER'                 'INTORG'
    x         obj       -1.0         c1        1.0
    y         obj       -1.0         c1        1.0
    MARKER                 'MARKER'                 'INTEND'
RHS
    rhs       c1        1.0
BOUNDS
 BV bnd       x
 BV bnd       y
ENDATA
"""


def test_minimal_instance():
    inst = parse_mps(MINIMAL)
    assert inst.name == "tiny"
    assert inst.num_vars == 2
    assert inst.minimize
    assert [r.sense for r in inst.rows] == [Sense.LE]
    assert inst.rows[0].rhs == 1.0
    np.testing.assert_array_equal(inst.integrality, [True, True])
    np.testing.assert_array_equal(inst.objective, [-1.0, -1.0])
    np.testing.assert_array_equal(inst.upper, [1.0, 1.0])


def test_defaults_for_unbounded_columns():
    text = MINIMAL.replace(" BV bnd       x\n BV bnd       y\n", "")
    inst = parse_mps(text)
    np.testing.assert_array_equal(inst.lower, [0.0, 0.0])
    assert np.all(np.isinf(inst.upper))
    assert inst.integrality.all()


def _oracle_row_bounds(text):
    """Independent reading of ROWS/RHS/RANGES into (lo, hi) pairs per row name."""
    section, kinds, rhs, rng = None, {}, {}, {}
    for line in text.splitlines():
        if not line.strip():
            continue
        if not line[0].isspace():
            section = line.split()[0]
            continue
        t = line.split()
        if section == "ROWS" and t[0] != "N":
            kinds[t[1]] = t[0]
        elif section in ("RHS", "RANGES"):
            pairs = t[1:] if len(t) % 2 else t
            for name, val in zip(pairs[::2], pairs[1::2]):
                (rhs if section == "RHS" else rng)[name] = float(val)
    out = {}
    for name, kind in kinds.items():
        b = rhs.get(name, 0.0)
        lo, hi = {"L": (-math.inf, b), "G": (b, math.inf), "E": (b, b)}[kind]
        if name in rng:
            r = rng[name]
            if kind == "L":
                lo = b - abs(r)
            elif kind == "G":
                hi = b + abs(r)
            elif r > 0:
                hi = b + r
            else:
                lo = b + r
        out[name] = (lo, hi)
    return out


RANGED = """\
NAME ranged
ROWS
 N obj
 L lim
 G low
 E eqp
 E eqn
COLUMNS
    x obj 1 lim 2
    x low 1 eqp 1
    x eqn 1
    y obj 1 lim 3
RHS
    RHS lim 10 low 1
    RHS eqp 4 eqn 4
RANGES
    RNG lim 4 low -3
    RNG eqp 2 eqn -2
ENDATA
"""


def test_ranges_match_independent_reader():
    inst = parse_mps(RANGED)
    expect = _oracle_row_bounds(RANGED)
    got = {}
    for row in inst.rows:
        base = row.name.removesuffix("_rng")
        lo, hi = got.get(base, (-math.inf, math.inf))
        if row.sense is Sense.LE:
            hi = min(hi, row.rhs)
        else:
            lo = max(lo, row.rhs)
        got[base] = (lo, hi)
    assert got == expect
    # LE row b with range r becomes LE b and GE b - |r|
    lim = [r for r in inst.rows if r.name.startswith("lim")]
    assert [(r.sense, r.rhs) for r in lim] == [(Sense.LE, 10.0), (Sense.GE, 6.0)]


def test_objsense_and_offset():
    text = MINIMAL.replace("ROWS", "OBJSENSE\n    MAX\nROWS").replace(
        "    rhs       c1        1.0", "    rhs       c1        1.0\n    rhs       obj       -2.5")
    inst = parse_mps(text)
    assert not inst.minimize
    assert inst.obj_offset == 2.5


@pytest.mark.parametrize("text, fragment", [
    ("NAME x\nROWS\n N obj\n L c1\nCOLUMNS\nRHS\nENDATA\n", "empty COLUMNS"),
    ("NAME x\nROWS\n N obj\n L c1\nCOLUMNS\n    x obj 1 c2 1\nENDATA\n", "unknown row"),
    ("NAME x\nROWS\n N obj\n L c1\nCOLUMNS\n    x c1 1\n    x c1 2\nENDATA\n", "duplicate"),
    ("NAME x\nROWS\n N obj\n L c1\n L c1\nCOLUMNS\n    x c1 1\nENDATA\n", "duplicate row"),
    ("NAME x\nROWZ\n N obj\nENDATA\n", "malformed section"),
    ("NAME x\nROWS\n N obj\n L c1\nCOLUMNS\n    x c1 1\nBOUNDS\n UP bnd y 4\nENDATA\n",
     "unknown column"),
])
def test_parse_errors_name_line(text, fragment):
    with pytest.raises(MpsParseError, match=fragment) as info:
        parse_mps(text)
    assert info.value.lineno > 0
    assert str(info.value).startswith(f"line {info.value.lineno}:")


def test_empty_columns_error_names_section_line():
    with pytest.raises(MpsParseError) as info:
        parse_mps("NAME x\nROWS\n N obj\n L c1\nCOLUMNS\nRHS\nENDATA\n")
    assert info.value.lineno == 5


def assert_same_instance(a: MilpInstance, b: MilpInstance):
    assert a.name == b.name
    assert a.minimize == b.minimize
    assert a.var_names == b.var_names
    assert a.obj_offset == b.obj_offset
    np.testing.assert_array_equal(a.objective, b.objective)
    np.testing.assert_array_equal(a.lower, b.lower)
    np.testing.assert_array_equal(a.upper, b.upper)
    np.testing.assert_array_equal(a.integrality, b.integrality)
    assert len(a.rows) == len(b.rows)
    for ra, rb in zip(a.rows, b.rows):
        assert ra.sense == rb.sense and ra.rhs == rb.rhs and ra.name == rb.name
        np.testing.assert_array_equal(ra.indices, rb.indices)
        np.testing.assert_array_equal(ra.values, rb.values)


def test_round_trip_fixed_files():
    for text in (MINIMAL, RANGED):
        first = parse_mps(text)
        assert_same_instance(first, parse_mps(write_mps(first)))


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def instances(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(0, 4))
    rows = []
    for j in range(m):
        idx = sorted(draw(st.sets(st.integers(0, n - 1), min_size=0, max_size=n)))
        vals = [draw(finite.filter(lambda v: v != 0)) for _ in idx]
        rows.append(Row(idx, vals, draw(st.sampled_from(list(Sense))), draw(finite), f"r{j}"))
    lower, upper = [], []
    for _ in range(n):
        kind = draw(st.integers(0, 4))
        if kind == 0:
            lo, up = 0.0, math.inf
        elif kind == 1:
            lo, up = -math.inf, math.inf
        elif kind == 2:
            lo, up = -math.inf, draw(finite)
        elif kind == 3:
            v = draw(finite)
            lo, up = v, v
        else:
            a, b = sorted((draw(finite), draw(finite)))
            lo, up = a, b
        lower.append(lo)
        upper.append(up)
    integ = [draw(st.booleans()) for _ in range(n)]
    c = [draw(finite) for _ in range(n)]
    return MilpInstance(draw(st.sampled_from(["", "p1", "prob"])), c, rows, lower, upper,
                        integ, draw(st.booleans()), obj_offset=draw(finite))


@settings(max_examples=200, deadline=None)
@given(instances())
def test_round_trip_property(inst):
    first = parse_mps(write_mps(inst))
    assert_same_instance(first, parse_mps(write_mps(first)))
    assert_same_instance(inst, first)
