"""Bounded-variable linear models and Kronecker-structured constraint blocks.

A :class:`LinearModel` stores its constraint matrix in CSR form; the rows are
ranged (``lo <= a.x <= hi``) and variables carry box bounds. Models of the size
the mask problem produces (tens of millions of coefficients) are built block
by block from numpy arrays, never coefficient by coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SparseMatrix",
    "LinearModel",
    "ModelStats",
    "DefinedVariable",
    "ModelBuilder",
    "ModelError",
    "UnresolvedSymbolError",
    "blockdiag_rows",
    "kron_identity_rows",
    "substitute_defined",
    "model_stats",
    "vec",
]


class ModelError(ValueError):
    pass


class UnresolvedSymbolError(ModelError):
    pass


def vec(F) -> np.ndarray:
    """Column-stacking of a matrix."""
    return np.asarray(F).ravel(order="F")


# --------------------------------------------------------------------------
# sparse triplet matrices

@dataclass(frozen=True)
class SparseMatrix:
    """Triplet matrix without stored zeros (positions are assumed unique)."""

    nrows: int
    ncols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise ModelError("triplet arrays differ in length")
        if len(self.rows):
            if self.rows.min() < 0 or self.rows.max() >= self.nrows:
                raise ModelError("row index out of range")
            if self.cols.min() < 0 or self.cols.max() >= self.ncols:
                raise ModelError("column index out of range")
            if np.any(self.vals == 0):
                raise ModelError("stored zero")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return len(self.vals)

    @property
    def entries(self) -> list[tuple[int, int, float]]:
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.vals.tolist()))

    def to_scipy(self) -> sp.csr_matrix:
        A = sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=self.shape)
        A.sort_indices()
        return A

    def toarray(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def __matmul__(self, v):
        return self.to_scipy() @ v


def blockdiag_rows(K, ncols_of_F: int, keep_cols=None) -> SparseMatrix:
    """diag(K, ..., K) with one block per column of F.

    Encodes vec(K F) = blkdiag(K) vec(F). Entries in columns where the
    boolean ``keep_cols`` (over vec(F)) is False are omitted; the shape is
    unchanged.
    """
    K = np.asarray(K, dtype=float)
    mk, nk = K.shape
    nb = ncols_of_F
    jj, kk = np.nonzero(K)
    v = K[jj, kk]
    b = np.arange(nb)[:, None]
    rows = (b * mk + jj[None, :]).ravel()
    cols = (b * nk + kk[None, :]).ravel()
    vals = np.broadcast_to(v, (nb, len(v))).ravel()
    if keep_cols is not None:
        keep = np.asarray(keep_cols, dtype=bool)[cols]
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    return SparseMatrix(mk * nb, nk * nb, rows, cols, np.ascontiguousarray(vals))


def kron_identity_rows(K, ident_dim: int) -> SparseMatrix:
    """K (x) I: block (j, k) equals K[j, k] times the identity of size ident_dim.

    Encodes vec(G K^T) = (K (x) I) vec(G) for G with ident_dim rows.
    """
    K = np.asarray(K, dtype=float)
    mk, nk = K.shape
    d = ident_dim
    jj, kk = np.nonzero(K)
    i = np.arange(d)[None, :]
    rows = (jj[:, None] * d + i).ravel()
    cols = (kk[:, None] * d + i).ravel()
    vals = np.repeat(K[jj, kk], d)
    return SparseMatrix(mk * d, nk * d, rows, cols, vals)


# --------------------------------------------------------------------------
# linear models

@dataclass(frozen=True)
class ModelStats:
    n_constraints: int
    n_variables: int
    n_nonzeros: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_constraints, self.n_variables, self.n_nonzeros)


@dataclass(frozen=True, eq=False)
class LinearModel:
    """``sense`` c.x + c0 subject to row_lo <= A x <= row_hi, lb <= x <= ub.

    ``start`` holds optional starting values (NaN where none is given).
    Columns listed in ``defined`` are modeling-language defined variables that
    must be removed with :func:`substitute_defined` before solving.
    """

    var_names: Sequence[str]
    lb: np.ndarray
    ub: np.ndarray
    row_names: Sequence[str]
    A: sp.csr_matrix
    row_lo: np.ndarray
    row_hi: np.ndarray
    sense: str = "minimize"
    c: np.ndarray = None
    c0: float = 0.0
    start: np.ndarray | None = None
    defined: frozenset = frozenset()
    warnings: tuple = ()
    name: str = "model"

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    def var_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.var_names)}

    def validate(self) -> None:
        nv, nr = self.n_vars, self.n_rows
        if self.A.shape != (nr, nv):
            raise ModelError(f"matrix shape {self.A.shape} != ({nr}, {nv})")
        for arr, n, what in ((self.lb, nv, "lb"), (self.ub, nv, "ub"), (self.c, nv, "c"),
                             (self.row_lo, nr, "row_lo"), (self.row_hi, nr, "row_hi")):
            if arr.shape != (n,):
                raise ModelError(f"{what} has shape {arr.shape}, expected ({n},)")
        if self.sense not in ("minimize", "maximize"):
            raise ModelError(f"unknown sense {self.sense!r}")
        if np.any(self.lb > self.ub):
            raise ModelError("variable with lb > ub")
        if np.any(self.row_lo > self.row_hi):
            raise ModelError("row with lo > hi")
        if not self.A.has_canonical_format:
            raise ModelError("duplicate coefficients in a row")
        if np.any(self.A.data == 0):
            raise ModelError("stored zero coefficient")
        if len(set(self.var_names)) != nv:
            raise ModelError("duplicate variable names")
        if len(set(self.row_names)) != nr:
            raise ModelError("duplicate row names")

    def objective_value(self, x) -> float:
        return float(self.c @ x + self.c0)


def model_stats(model: LinearModel) -> ModelStats:
    """(rows, decision variables, stored row coefficients)."""
    return ModelStats(model.n_rows, model.n_vars, int(model.A.nnz))


def _canonical(A) -> sp.csr_matrix:
    A = sp.csr_matrix(A)
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    return A


class ModelBuilder:
    """Incremental construction of a :class:`LinearModel`.

    Variables and rows are appended in order; blocks of rows may be added as
    sparse matrices over the variables declared so far.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self._names: list[str] = []
        self._lb: list[np.ndarray] = []
        self._ub: list[np.ndarray] = []
        self._start: list[np.ndarray] = []
        self._defined: set[str] = set()
        self._index: dict[str, int] = {}
        self._rnames: list[str] = []
        self._blocks: list[sp.coo_matrix] = []
        self._lo: list[np.ndarray] = []
        self._hi: list[np.ndarray] = []
        self._obj: dict[int, float] | np.ndarray = {}
        self._sense = "minimize"
        self._c0 = 0.0
        self.warnings: list[str] = []

    @property
    def n_vars(self) -> int:
        return len(self._names)

    def add_variables(self, names: Sequence[str], lb=0.0, ub=np.inf, start=np.nan,
                      defined: bool = False) -> np.ndarray:
        k = len(names)
        first = len(self._names)
        for i, nm in enumerate(names):
            if nm in self._index:
                raise ModelError(f"duplicate variable {nm!r}")
            self._index[nm] = first + i
        self._names.extend(names)
        self._lb.append(np.broadcast_to(np.asarray(lb, dtype=float), (k,)).copy())
        self._ub.append(np.broadcast_to(np.asarray(ub, dtype=float), (k,)).copy())
        self._start.append(np.broadcast_to(np.asarray(start, dtype=float), (k,)).copy())
        if defined:
            self._defined.update(names)
        return np.arange(first, first + k)

    def add_variable(self, name: str, lb=0.0, ub=np.inf, start=np.nan, defined=False) -> int:
        return int(self.add_variables([name], lb, ub, start, defined)[0])

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnresolvedSymbolError(f"unknown variable {name!r}") from None

    def add_rows(self, names: Sequence[str], matrix, lo, hi) -> None:
        M = sp.coo_matrix(matrix)
        if M.shape[0] != len(names):
            raise ModelError("row block height differs from number of names")
        if M.shape[1] > self.n_vars:
            raise ModelError("row block references undeclared variables")
        self._rnames.extend(names)
        self._blocks.append(M)
        k = len(names)
        self._lo.append(np.broadcast_to(np.asarray(lo, dtype=float), (k,)).copy())
        self._hi.append(np.broadcast_to(np.asarray(hi, dtype=float), (k,)).copy())

    def add_row(self, name: str, terms: Mapping[str, float], lo=-np.inf, hi=np.inf) -> None:
        cols = [self.index(v) for v in terms]
        if len(set(cols)) != len(cols):
            raise ModelError(f"row {name!r} repeats a variable")
        vals = [float(terms[v]) for v in terms]
        M = sp.coo_matrix((vals, ([0] * len(cols), cols)), shape=(1, self.n_vars))
        self.add_rows([name], M, lo, hi)

    def set_objective(self, sense: str, coefs, constant: float = 0.0) -> None:
        if sense not in ("minimize", "maximize"):
            raise ModelError(f"unknown sense {sense!r}")
        self._sense = sense
        self._c0 = float(constant)
        if isinstance(coefs, Mapping):
            self._obj = {self.index(v): float(c) for v, c in coefs.items()}
        else:
            self._obj = np.asarray(coefs, dtype=float)

    def build(self) -> LinearModel:
        nv = self.n_vars
        cat = lambda parts: np.concatenate(parts) if parts else np.zeros(0)
        if self._blocks:
            A = sp.vstack([sp.coo_matrix((b.data, (b.row, b.col)), shape=(b.shape[0], nv))
                           for b in self._blocks], format="csr")
        else:
            A = sp.csr_matrix((0, nv))
        A = _canonical(A)
        if isinstance(self._obj, dict):
            c = np.zeros(nv)
            for i, v in self._obj.items():
                c[i] = v
        else:
            c = np.zeros(nv)
            c[: len(self._obj)] = self._obj
        model = LinearModel(
            var_names=list(self._names), lb=cat(self._lb), ub=cat(self._ub),
            row_names=list(self._rnames), A=A, row_lo=cat(self._lo), row_hi=cat(self._hi),
            sense=self._sense, c=c, c0=self._c0, start=cat(self._start),
            defined=frozenset(self._defined), warnings=tuple(self.warnings), name=self.name,
        )
        model.validate()
        return model


# --------------------------------------------------------------------------
# defined-variable substitution

@dataclass(frozen=True)
class DefinedVariable:
    """Defined variable ``name = sum coefs[i] * x[columns[i]]``.

    ``columns`` index the model's columns and must point at decision
    variables only.
    """

    name: str
    columns: np.ndarray
    coefs: np.ndarray = field(repr=False)

    @classmethod
    def from_terms(cls, model: LinearModel, name: str, terms: Mapping[str, float]):
        idx = model.var_index()
        try:
            cols = np.array([idx[v] for v in terms], dtype=np.int64)
        except KeyError as e:
            raise UnresolvedSymbolError(f"definition of {name!r} references unknown {e.args[0]!r}") from None
        return cls(name, cols, np.array([float(terms[v]) for v in terms]))


def substitute_defined(model: LinearModel, defs: Iterable[DefinedVariable]) -> LinearModel:
    """Replace defined variables by their expressions and drop their columns.

    Coefficients landing on the same decision variable are added; sums that
    cancel to exactly 0.0 are removed, anything else is kept.
    """
    defs = list(defs)
    idx = model.var_index()
    def_cols = []
    for d in defs:
        if d.name not in idx:
            raise UnresolvedSymbolError(f"defined variable {d.name!r} is not a model column")
        def_cols.append(idx[d.name])
    def_cols = np.array(def_cols, dtype=np.int64)
    is_def = np.zeros(model.n_vars, dtype=bool)
    is_def[def_cols] = True

    declared = np.array([v in model.defined for v in model.var_names], dtype=bool)
    referenced = (np.diff(model.A.tocsc().indptr) > 0) | (model.c != 0)
    for i in np.flatnonzero(declared & ~is_def & referenced):
        raise UnresolvedSymbolError(f"no definition supplied for {model.var_names[i]!r}")
    drop = is_def | declared

    for d in defs:
        if np.any(drop[d.columns]):
            raise ModelError(f"definition of {d.name!r} references a defined variable")
        if np.isfinite(model.lb[idx[d.name]]) or np.isfinite(model.ub[idx[d.name]]):
            raise ModelError(f"defined variable {d.name!r} carries bounds")

    lengths = [len(d.columns) for d in defs]
    D = sp.csr_matrix(
        (np.concatenate([d.coefs for d in defs]) if defs else np.zeros(0),
         (np.repeat(np.arange(len(defs)), lengths),
          np.concatenate([d.columns for d in defs]) if defs else np.zeros(0, dtype=np.int64))),
        shape=(len(defs), model.n_vars))
    keep = np.flatnonzero(~drop)
    A = model.A.tocsc()
    Dk = D[:, keep]
    A_new = A[:, keep].tocsr() + A[:, def_cols].tocsr() @ Dk
    c_new = model.c[keep] + Dk.T @ model.c[def_cols]
    A_new = _canonical(A_new)

    names = [model.var_names[i] for i in keep]
    out = LinearModel(
        var_names=names, lb=model.lb[keep], ub=model.ub[keep],
        row_names=list(model.row_names), A=A_new,
        row_lo=model.row_lo.copy(), row_hi=model.row_hi.copy(),
        sense=model.sense, c=np.asarray(c_new).ravel(), c0=model.c0,
        start=None if model.start is None else model.start[keep],
        defined=frozenset(), warnings=model.warnings, name=model.name,
    )
    out.validate()
    return out
