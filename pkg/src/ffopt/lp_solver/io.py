"""Solution dumps: ``key=value`` text and a two-column CSV."""

from __future__ import annotations

import csv
import io
import os
import tempfile

import numpy as np

from .ipm import Solution

__all__ = ["atomic_write", "solution_to_text", "solution_to_csv", "read_solution_text", "read_solution_csv"]

_HEADER = ("status", "primal_objective", "dual_objective", "iterations",
           "primal_infeasibility", "dual_infeasibility", "path")


def atomic_write(path, data: str | bytes) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def solution_to_text(sol: Solution) -> str:
    lines = [f"{k}={_fmt(getattr(sol, k))}" for k in _HEADER]
    lines += [f"var:{nm}={v!r}" for nm, v in zip(sol.var_names, sol.x.tolist())]
    lines += [f"dual:{nm}={v!r}" for nm, v in zip(sol.row_names, sol.row_duals.tolist())]
    return "\n".join(lines) + "\n"


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def solution_to_csv(sol: Solution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variable", "value"])
    for nm, v in zip(sol.var_names, sol.x.tolist()):
        w.writerow([nm, repr(v)])
    return buf.getvalue()


def read_solution_text(path) -> tuple[dict, dict[str, float]]:
    """Return (header fields, variable values) from a ``key=value`` dump."""
    header, values = {}, {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            key, sep, val = line.rpartition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            if key.startswith("var:"):
                values[key[4:]] = float(val)
            elif not key.startswith("dual:"):
                header[key] = val
    return header, values


def read_solution_csv(path) -> dict[str, float]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["variable", "value"]:
        raise ValueError(f"{path}: missing 'variable,value' header")
    return {nm: float(v) for nm, v in rows[1:]}
