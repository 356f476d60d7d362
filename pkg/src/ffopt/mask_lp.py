"""Apodizer LP generator: one-step (dense) and two-step (sparse) formulations.

The mask f lives on the quarter pupil x, y = (k - 1/2)/(2n), k = 1..n, and
is assumed symmetric about both axes, so its transform is the real cosine
transform. The dark zone is the part of the annulus rho0 <= r <= rho1 with
eta <= xi, sampled on xi_j = eta_j = j*rho1/m, j = 0..m.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Mapping, NamedTuple

import numpy as np
import scipy.sparse as sp

from .sparse_model import (DefinedVariable, LinearModel, ModelBuilder,
                           blockdiag_rows, kron_identity_rows, substitute_defined)
from .transforms import SampleGrid, SpectrumGrid, build_cosine_kernel

__all__ = [
    "MaskProblem",
    "PupilPoint",
    "DarkPoint",
    "enumerate_pupil",
    "enumerate_darkhole",
    "pupil_mask",
    "darkhole_mask",
    "build_onestep_model",
    "build_twostep_model",
    "build_model",
    "onestep_stats_estimate",
    "twostep_stats_formula",
    "problem_from_mapping",
    "read_config",
]

DEGENERATE = "degenerate: empty pupil or empty dark hole"


@dataclass(frozen=True)
class MaskProblem:
    n: int
    m: int
    rho0: float = 4.0
    rho1: float = 20.0
    contrast: float = 1e-5

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if not 0 < self.rho0 < self.rho1:
            raise ValueError(f"need 0 < rho0 < rho1, got rho0={self.rho0}, rho1={self.rho1}")
        if not 0 < self.contrast <= 1:
            raise ValueError(f"contrast must lie in (0, 1], got {self.contrast}")

    @property
    def dx(self) -> float:
        return 1.0 / (2 * self.n)

    @property
    def x_grid(self) -> SampleGrid:
        return SampleGrid(self.n, "even", self.dx)

    @property
    def xi_grid(self) -> SpectrumGrid:
        return SpectrumGrid(self.m, "zero", self.rho1 / self.m)

    def kernel(self) -> np.ndarray:
        """cos(2 pi x_k xi_j) dx, shape (m+1, n); same for both axes."""
        return build_cosine_kernel(self.x_grid, self.xi_grid)

    def as_dict(self) -> dict:
        return asdict(self)


def read_config(path) -> dict:
    """Parse ``key=value`` lines (blank lines and ``#`` comments ignored)."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


def problem_from_mapping(values: Mapping) -> MaskProblem:
    conv = {"n": int, "m": int, "rho0": float, "rho1": float, "contrast": float}
    unknown = set(values) - set(conv)
    if unknown:
        raise ValueError(f"unknown problem keys: {sorted(unknown)}")
    return MaskProblem(**{k: conv[k](v) for k, v in values.items()})


# --------------------------------------------------------------------------
# index sets

class PupilPoint(NamedTuple):
    k: int
    l: int
    x: float
    y: float


class DarkPoint(NamedTuple):
    j1: int
    j2: int
    xi: float
    eta: float


def pupil_mask(p: MaskProblem) -> np.ndarray:
    """Boolean (n, n) array, True where x_k^2 + y_l^2 < 1/4.

    Evaluated as (2k-1)^2 + (2l-1)^2 < 4n^2 in integers; the left side is
    2 mod 8 and the right 0 or 4 mod 8, so no point sits on the circle and
    this agrees with the floating-point test.
    """
    odd = 2 * np.arange(1, p.n + 1, dtype=np.int64) - 1
    return odd[:, None] ** 2 + odd[None, :] ** 2 < 4 * p.n * p.n


def _xi_values(p: MaskProblem) -> np.ndarray:
    # j*rho1/m, left to right
    return np.arange(p.m + 1) * p.rho1 / p.m


def darkhole_mask(p: MaskProblem) -> np.ndarray:
    """Boolean (m+1, m+1) array over (j1, j2): inclusive annulus, eta <= xi."""
    xi = _xi_values(p)
    r2 = xi[:, None] ** 2 + xi[None, :] ** 2
    return (r2 >= p.rho0 ** 2) & (r2 <= p.rho1 ** 2) & (xi[None, :] <= xi[:, None])


def enumerate_pupil(p: MaskProblem) -> list[PupilPoint]:
    k, l = np.nonzero(pupil_mask(p))
    x = (k + 0.5) / (2 * p.n)
    y = (l + 0.5) / (2 * p.n)
    return [PupilPoint(*t) for t in zip((k + 1).tolist(), (l + 1).tolist(), x.tolist(), y.tolist())]


def enumerate_darkhole(p: MaskProblem) -> list[DarkPoint]:
    j1, j2 = np.nonzero(darkhole_mask(p))
    xi = _xi_values(p)
    return [DarkPoint(a, b, xi[a], xi[b]) for a, b in zip(j1.tolist(), j2.tolist())]


def f_names(p: MaskProblem) -> list[str]:
    k, l = np.nonzero(pupil_mask(p))
    return [f"f[{a},{b}]" for a, b in zip((k + 1).tolist(), (l + 1).tolist())]


def _fhat_name(j1, j2) -> str:
    return f"fhat[{j1},{j2}]"


# --------------------------------------------------------------------------
# models

def _start_model(p: MaskProblem, name: str):
    b = ModelBuilder(name)
    pm = pupil_mask(p)
    dm = darkhole_mask(p)
    if not pm.any() or not dm.any():
        b.warnings.append(DEGENERATE)
    cols = b.add_variables(f_names(p), lb=0.0, ub=1.0, start=0.5)
    return b, pm, dm, cols


def _sidelobe_names(dark):
    names = []
    for a, c in dark:
        names += [f"sidelobe_pos[{a},{c}]", f"sidelobe_neg[{a},{c}]"]
    return names


def build_onestep_model(p: MaskProblem) -> LinearModel:
    """Dense formulation: every sidelobe row carries all pupil coefficients.

    fhat is declared as a defined variable and eliminated, so each row reads
    +-fhat(xi, eta) - c fhat(0, 0) <= 0 written out in the f variables.
    """
    b, pm, dm, fcols = _start_model(p, f"onestep_n{p.n}_m{p.m}")
    K = p.kernel()
    k, l = np.nonzero(pm)
    dark = list(zip(*np.nonzero(dm)))
    targets = [(0, 0)] + [d for d in dark if d != (0, 0)]
    hat_cols = b.add_variables([_fhat_name(*t) for t in targets], lb=-np.inf, ub=np.inf, defined=True)
    col_of = dict(zip(targets, hat_cols.tolist()))

    nd = len(dark)
    rows = np.repeat(np.arange(2 * nd), 2)
    cols = np.empty(4 * nd, dtype=np.int64)
    vals = np.empty(4 * nd)
    for i, d in enumerate(dark):
        cols[4 * i: 4 * i + 4] = [col_of[d], col_of[(0, 0)], col_of[d], col_of[(0, 0)]]
        vals[4 * i: 4 * i + 4] = [1.0, -p.contrast, -1.0, -p.contrast]
    M = sp.coo_matrix((vals, (rows, cols)), shape=(2 * nd, b.n_vars))
    b.add_rows(_sidelobe_names(dark), M, -np.inf, 0.0)
    b.set_objective("maximize", np.concatenate([np.full(len(fcols), p.dx * p.dx), np.zeros(len(hat_cols))]))
    model = b.build()

    defs = [DefinedVariable(_fhat_name(a, c), fcols, 4.0 * K[a, k] * K[c, l]) for a, c in targets]
    return substitute_defined(model, defs)


def build_twostep_model(p: MaskProblem) -> LinearModel:
    """Sparse formulation with explicit g and fhat variables.

    g[j, l] = 2 sum_k f[k, l] cos(2 pi x_k xi_j) dx     (block diagonal in K)
    fhat[j1, j2] = 2 sum_l g[j1, l] cos(2 pi y_l eta_j2) dy   (K kron I)
    """
    b, pm, dm, fcols = _start_model(p, f"twostep_n{p.n}_m{p.m}")
    n, mp = p.n, p.m + 1
    K2 = 2.0 * p.kernel()

    gcols = b.add_variables([f"g[{j},{l}]" for j in range(mp) for l in range(1, n + 1)],
                            lb=-np.inf, ub=np.inf)
    hcols = b.add_variables([_fhat_name(a, c) for a in range(mp) for c in range(mp)],
                            lb=-np.inf, ub=np.inf)
    nv = b.n_vars

    # vec(F) position of f[k, l] is (l-1)*n + (k-1); map it to the model column
    f_of_vec = np.full(n * n, -1, dtype=np.int64)
    k, l = np.nonzero(pm)
    f_of_vec[l * n + k] = fcols
    # vec(G) position l*mp + j  <->  g column gcols[j*n + l] and g_def row j*n + l
    vj, vl = np.divmod(np.arange(mp * n), n)          # lexicographic (j, l)
    g_vecpos = vl * mp + vj
    g_of_vec = np.empty(mp * n, dtype=np.int64)
    g_of_vec[g_vecpos] = gcols

    B = blockdiag_rows(K2, n, keep_cols=f_of_vec >= 0)
    row_of_vec = np.empty(mp * n, dtype=np.int64)
    row_of_vec[g_vecpos] = np.arange(mp * n)
    G_rows = sp.coo_matrix(
        (np.concatenate([-B.vals, np.ones(mp * n)]),
         (np.concatenate([row_of_vec[B.rows], np.arange(mp * n)]),
          np.concatenate([f_of_vec[B.cols], gcols]))),
        shape=(mp * n, nv))
    b.add_rows([f"g_def[{j},{l + 1}]" for j, l in zip(vj.tolist(), vl.tolist())], G_rows, 0.0, 0.0)

    # vec(Fhat) position j2*mp + j1  <->  fhat column / row j1*mp + j2
    C = kron_identity_rows(K2, mp)
    hj1, hj2 = np.divmod(np.arange(mp * mp), mp)
    hrow_of_vec = np.empty(mp * mp, dtype=np.int64)
    hrow_of_vec[hj2 * mp + hj1] = np.arange(mp * mp)
    H_rows = sp.coo_matrix(
        (np.concatenate([-C.vals, np.ones(mp * mp)]),
         (np.concatenate([hrow_of_vec[C.rows], np.arange(mp * mp)]),
          np.concatenate([g_of_vec[C.cols], hcols]))),
        shape=(mp * mp, nv))
    b.add_rows([_fhat_name(a, c).replace("fhat", "fhat_def") for a, c in zip(hj1.tolist(), hj2.tolist())],
               H_rows, 0.0, 0.0)

    dark = list(zip(*np.nonzero(dm)))
    nd = len(dark)
    h00 = hcols[0]
    rows = np.repeat(np.arange(2 * nd), 2)
    cols = np.empty(4 * nd, dtype=np.int64)
    vals = np.tile([1.0, -p.contrast, -1.0, -p.contrast], nd)
    for i, (a, c) in enumerate(dark):
        h = hcols[a * mp + c]
        cols[4 * i: 4 * i + 4] = [h, h00, h, h00]
    b.add_rows(_sidelobe_names(dark), sp.coo_matrix((vals, (rows, cols)), shape=(2 * nd, nv)),
               -np.inf, 0.0)

    c = np.zeros(nv)
    c[fcols] = p.dx * p.dx
    b.set_objective("maximize", c)
    return b.build()


def build_model(p: MaskProblem, formulation: str) -> LinearModel:
    if formulation == "onestep":
        return build_onestep_model(p)
    if formulation == "twostep":
        return build_twostep_model(p)
    raise ValueError(f"unknown formulation {formulation!r}")


def onestep_stats_estimate(p: MaskProblem) -> tuple[int, int, int]:
    """One-step (rows, variables, nonzeros) from the index sets alone."""
    P = int(pupil_mask(p).sum())
    D = int(darkhole_mask(p).sum())
    return (2 * D, P, 2 * D * P)


def twostep_stats_formula(p: MaskProblem) -> tuple[int, int, int]:
    """Two-step (rows, variables, nonzeros) from the index sets alone."""
    pm = pupil_mask(p)
    P = int(pm.sum())
    D = int(darkhole_mask(p).sum())
    mp, n = p.m + 1, p.n
    per_y = pm.sum(axis=0)
    nnz = mp * int((per_y + 1).sum()) + mp * mp * (n + 1) + 4 * D
    return (mp * n + mp * mp + 2 * D, P + mp * n + mp * mp, nnz)
