"""MPS export and import for :class:`~ffopt.sparse_model.LinearModel`.

Rows map to MPS types as follows: ``lo == hi`` is E, one-sided rows are L or
G, two-sided rows are G with a RANGES entry ``hi - lo``, and rows free on
both sides are extra N rows. The objective constant is written as the
negated RHS of the objective row.

Fixed format aligns names to the classic columns; names longer than eight
characters (or containing blanks) are mangled. Numbers are printed as the shortest
string that reads back to the same double, which can run past the nominal
12-column field, so the reader splits on whitespace in both formats.
"""

from __future__ import annotations

import re

import numpy as np
import scipy.sparse as sp

from ..sparse_model import LinearModel, ModelError

__all__ = ["export_mps", "parse_mps", "write_mps", "read_mps", "MPSExportError", "MPSParseError"]

_SECTIONS = ("NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA")


class MPSExportError(ModelError):
    pass


class MPSParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def _num(v: float) -> str:
    # shortest repr that reads back to the same double
    s = repr(float(v) + 0.0)
    return s[:-2] if s.endswith(".0") else s


def _mangle(names, prefix: str, fixed: bool) -> list[str]:
    if any(not nm or re.search(r"\s", nm) for nm in names) and not fixed:
        raise MPSExportError("names with blanks cannot be written in free format")
    if not fixed or all(0 < len(nm) <= 8 and not re.search(r"\s", nm) for nm in names):
        out = list(names)
    else:
        # strip brackets first; fall back to positional codes for the whole set
        out = [re.sub(r"[\s\[\]]", "", nm).replace(",", "_") for nm in names]
        if not all(0 < len(nm) <= 8 for nm in out):
            out = [f"{prefix}{np.base_repr(i, 36):0>7}" for i in range(len(names))]
    seen = {}
    for orig, new in zip(names, out):
        if new in seen and seen[new] != orig:
            raise MPSExportError(f"names {seen[new]!r} and {orig!r} collide as {new!r}")
        seen[new] = orig
    return out


def export_mps(model: LinearModel, free: bool = False) -> str:
    """Render ``model`` as an MPS document (fixed format unless ``free``)."""
    model.validate()
    if model.defined:
        raise MPSExportError("substitute defined variables before export")
    cols = _mangle(model.var_names, "C", not free)
    rows = _mangle(model.row_names, "R", not free)
    taken = set(rows)
    obj = next(nm for nm in ("obj", "OBJ", "objrow", "COST") + tuple(f"OBJ{i}" for i in range(len(taken) + 1))
               if nm not in taken)

    if free:
        def line(*f):
            return " " + " ".join(f)
    else:
        def line(code="", a="", b="", c="", d="", e=""):
            s = f" {code:<2} {a:<8}  {b:<8}  {c:>12}"
            if d:
                s += f"   {d:<8}  {e:>12}"
            return s.rstrip()

    lo, hi = model.row_lo, model.row_hi
    out = [f"NAME          {model.name}" if not free else f"NAME {model.name}"]
    if model.sense == "maximize":
        out += ["OBJSENSE", "    MAX"]
    out.append("ROWS")
    out.append(line("N", obj))
    types = []
    for i, nm in enumerate(rows):
        fl, fh = np.isfinite(lo[i]), np.isfinite(hi[i])
        t = "E" if (fl and fh and lo[i] == hi[i]) else "G" if fl else "L" if fh else "N"
        types.append(t)
        out.append(line(t, nm))

    out.append("COLUMNS")
    A = model.A.tocsc()
    A.sort_indices()
    for j, cname in enumerate(cols):
        entries = []
        if model.c[j] != 0 or A.indptr[j] == A.indptr[j + 1]:
            entries.append((obj, model.c[j]))
        for k in range(A.indptr[j], A.indptr[j + 1]):
            entries.append((rows[A.indices[k]], A.data[k]))
        for k in range(0, len(entries), 2):
            pair = entries[k: k + 2]
            flds = [pair[0][0], _num(pair[0][1])]
            if len(pair) > 1:
                flds += [pair[1][0], _num(pair[1][1])]
            out.append(line("", cname, *flds))

    out.append("RHS")
    rhs = []
    if model.c0 != 0:
        rhs.append((obj, -model.c0))
    for i, t in enumerate(types):
        v = {"E": lo[i], "G": lo[i], "L": hi[i], "N": 0.0}[t]
        if v != 0:
            rhs.append((rows[i], v))
    for name, v in rhs:
        out.append(line("", "RHS", name, _num(v)))

    out.append("RANGES")
    for i, t in enumerate(types):
        if t == "G" and np.isfinite(hi[i]):
            out.append(line("", "RNG", rows[i], _num(hi[i] - lo[i])))

    out.append("BOUNDS")
    for j, cname in enumerate(cols):
        lb, ub = model.lb[j], model.ub[j]
        if lb == ub:
            out.append(line("FX", "BND", cname, _num(lb)))
            continue
        if lb == -np.inf and ub == np.inf:
            out.append(line("FR", "BND", cname))
            continue
        if lb == -np.inf:
            out.append(line("MI", "BND", cname))
        elif lb != 0 or (np.isfinite(ub) and ub < 0):
            out.append(line("LO", "BND", cname, _num(lb)))
        if ub != np.inf:
            out.append(line("UP", "BND", cname, _num(ub)))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def write_mps(model: LinearModel, path, free: bool = False) -> None:
    text = export_mps(model, free=free)
    with open(path, "w") as fh:
        fh.write(text)


def read_mps(path) -> LinearModel:
    with open(path) as fh:
        return parse_mps(fh.read())


def parse_mps(text: str) -> LinearModel:
    """Read a fixed- or free-format MPS document (whitespace-separated fields)."""
    name = "model"
    sense = "minimize"
    section = None
    obj = None
    row_names: list[str] = []
    row_type: dict[str, str] = {}
    row_idx: dict[str, int] = {}
    col_names: list[str] = []
    col_idx: dict[str, int] = {}
    trip_r, trip_c, trip_v = [], [], []
    cost: dict[int, float] = {}
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    lb: dict[int, float] = {}
    ub: dict[int, float] = {}
    c0 = 0.0
    ended = False

    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        tok = raw.split()
        if not raw[0].isspace():
            key = tok[0].upper()
            if key not in _SECTIONS:
                raise MPSParseError(lineno, f"unknown section {tok[0]!r}")
            section = key
            if key == "NAME":
                name = tok[1] if len(tok) > 1 else name
            elif key == "OBJSENSE" and len(tok) > 1:
                sense = _sense(tok[1], lineno)
            elif key == "ENDATA":
                ended = True
                break
            elif len(tok) > 1 and key not in ("RHS", "RANGES", "BOUNDS"):
                raise MPSParseError(lineno, f"unexpected fields after {key}")
            continue

        if section == "OBJSENSE":
            sense = _sense(tok[0], lineno)
        elif section == "ROWS":
            if len(tok) != 2:
                raise MPSParseError(lineno, "ROWS entry needs a type and a name")
            t, nm = tok[0].upper(), tok[1]
            if t not in ("N", "E", "L", "G"):
                raise MPSParseError(lineno, f"unknown row type {tok[0]!r}")
            if nm in row_type:
                raise MPSParseError(lineno, f"duplicate row {nm!r}")
            if t == "N" and obj is None:
                obj = nm
                row_type[nm] = "OBJ"
                continue
            row_type[nm] = t
            row_idx[nm] = len(row_names)
            row_names.append(nm)
        elif section == "COLUMNS":
            if "'MARKER'" in tok:
                raise MPSParseError(lineno, "integer markers are not supported")
            if len(tok) not in (3, 5):
                raise MPSParseError(lineno, "COLUMNS entry needs 3 or 5 fields")
            cn = tok[0]
            if cn not in col_idx:
                col_idx[cn] = len(col_names)
                col_names.append(cn)
            j = col_idx[cn]
            for rn, vs in zip(tok[1::2], tok[2::2]):
                v = _float(vs, lineno)
                if rn == obj:
                    cost[j] = cost.get(j, 0.0) + v
                elif rn in row_idx:
                    if v != 0:
                        trip_r.append(row_idx[rn])
                        trip_c.append(j)
                        trip_v.append(v)
                else:
                    raise MPSParseError(lineno, f"unknown row {rn!r}")
        elif section in ("RHS", "RANGES"):
            if len(tok) not in (2, 3, 4, 5):
                raise MPSParseError(lineno, f"malformed {section} entry")
            pairs = tok[1:] if len(tok) in (3, 5) else tok
            for rn, vs in zip(pairs[0::2], pairs[1::2]):
                v = _float(vs, lineno)
                if rn == obj and section == "RHS":
                    c0 = -v
                elif rn in row_idx:
                    (rhs if section == "RHS" else ranges)[rn] = v
                else:
                    raise MPSParseError(lineno, f"unknown row {rn!r}")
        elif section == "BOUNDS":
            if len(tok) < 3:
                raise MPSParseError(lineno, "malformed BOUNDS entry")
            bt = tok[0].upper()
            cn = tok[2]
            if cn not in col_idx:
                raise MPSParseError(lineno, f"unknown column {cn!r}")
            j = col_idx[cn]
            needs_value = bt in ("UP", "LO", "FX")
            if needs_value and len(tok) < 4:
                raise MPSParseError(lineno, f"{bt} bound needs a value")
            if bt == "UP":
                ub[j] = _float(tok[3], lineno)
            elif bt == "LO":
                lb[j] = _float(tok[3], lineno)
            elif bt == "FX":
                lb[j] = ub[j] = _float(tok[3], lineno)
            elif bt == "FR":
                lb[j], ub[j] = -np.inf, np.inf
            elif bt == "MI":
                lb[j] = -np.inf
            elif bt == "PL":
                ub[j] = np.inf
            else:
                raise MPSParseError(lineno, f"unsupported bound type {tok[0]!r}")
        else:
            raise MPSParseError(lineno, "data line outside of a section")

    if not ended:
        raise MPSParseError(len(text.splitlines()), "missing ENDATA")

    nr, nc = len(row_names), len(col_names)
    lo = np.full(nr, -np.inf)
    hi = np.full(nr, np.inf)
    for nm, i in row_idx.items():
        t = row_type[nm]
        v = rhs.get(nm, 0.0)
        r = ranges.get(nm)
        if t == "E":
            lo[i] = hi[i] = v
            if r is not None:
                if r > 0:
                    hi[i] = v + r
                elif r < 0:
                    lo[i] = v + r
        elif t == "L":
            hi[i] = v
            if r is not None:
                lo[i] = v - abs(r)
        elif t == "G":
            lo[i] = v
            if r is not None:
                hi[i] = v + abs(r)
    lbv = np.zeros(nc)
    ubv = np.full(nc, np.inf)
    for j, v in lb.items():
        lbv[j] = v
    for j, v in ub.items():
        ubv[j] = v
    c = np.zeros(nc)
    for j, v in cost.items():
        c[j] = v
    A = sp.csr_matrix((trip_v, (trip_r, trip_c)), shape=(nr, nc))
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    model = LinearModel(var_names=col_names, lb=lbv, ub=ubv, row_names=row_names, A=A,
                        row_lo=lo, row_hi=hi, sense=sense, c=c, c0=c0, start=None, name=name)
    model.validate()
    return model


def _sense(tok: str, lineno: int) -> str:
    t = tok.upper()
    if t in ("MAX", "MAXIMIZE"):
        return "maximize"
    if t in ("MIN", "MINIMIZE"):
        return "minimize"
    raise MPSParseError(lineno, f"unknown objective sense {tok!r}")


def _float(s: str, lineno: int) -> float:
    try:
        return float(s)
    except ValueError:
        raise MPSParseError(lineno, f"bad number {s!r}") from None
