"""Primal-dual interior-point method with Mehrotra predictor-corrector steps
and up to two extra centrality correctors per iteration.

The model is rewritten as

    minimize c.z  subject to  A z = b,  l <= z <= u,

where z stacks the model variables and one activity variable per inequality
row (``a.x - w = 0``, ``lo <= w <= hi``). Bounds may be infinite; free
columns (the g and fhat variables of the two-step mask model) are supported
directly, without splitting.

Two linear-algebra paths:

* dense normal equations ``A diag(1/H) A^T``, Cholesky-factored, used when the
  matrix is dense and every column has at least one finite bound;
* the sparse quasidefinite augmented system ``[[-H - rho, A^T], [A, delta]]``
  factored by sparse LU with a symmetric ordering and static pivots, used
  otherwise. Small static regularization keeps it factorizable; iterative
  refinement against the unregularized system removes its effect. When
  refinement falls short, the unregularized matrix is refactored with
  threshold pivoting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..sparse_model import LinearModel, ModelError

log = logging.getLogger(__name__)

__all__ = ["SolverConfig", "Solution", "solve", "STATUSES"]

STATUSES = ("optimal", "iteration_limit", "infeasible", "unbounded", "numerical_failure")

_DENSE_MIN_DENSITY = 0.1
_DENSE_MAX_ROWS = 5000
_REG_PRIMAL = 1e-12
_REG_DUAL = 1e-12
_DIVERGE = 1e10
# initial complementarity in scaled units (objective normalized to max |c| = 1)
_MU0 = 100.0


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 300
    rel_gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    step_fraction: float = 0.95
    epsdiag: float = 0.0
    centrality_correctors: int = 2
    path: str = "auto"            # "auto", "dense", "sparse"
    scale: bool = True
    verbose: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not (self.rel_gap_tol > 0 and self.feas_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.epsdiag < 0:
            raise ValueError("epsdiag must be nonnegative")
        if self.centrality_correctors < 0:
            raise ValueError("centrality_correctors must be nonnegative")
        if self.path not in ("auto", "dense", "sparse"):
            raise ValueError(f"unknown path {self.path!r}")


@dataclass
class Solution:
    status: str
    x: np.ndarray
    row_duals: np.ndarray
    primal_objective: float
    dual_objective: float
    iterations: int
    var_names: list = field(repr=False, default_factory=list)
    row_names: list = field(repr=False, default_factory=list)
    primal_infeasibility: float = np.nan
    dual_infeasibility: float = np.nan
    trace: list = field(repr=False, default_factory=list)
    path: str = ""

    @property
    def values(self) -> dict[str, float]:
        return dict(zip(self.var_names, self.x.tolist()))

    @property
    def duals(self) -> dict[str, float]:
        return dict(zip(self.row_names, self.row_duals.tolist()))


# --------------------------------------------------------------------------
# standard form

class _Problem:
    """Scaled standard form built from a LinearModel."""

    def __init__(self, model: LinearModel, scale: bool, dense: bool | None):
        if model.defined:
            raise ModelError("model still contains defined variables; substitute them first")
        model.validate()
        self.model = model
        nv = model.n_vars
        A = model.A.tocsr()
        lo, hi = model.row_lo, model.row_hi
        self.sign = -1.0 if model.sense == "maximize" else 1.0

        # fixed columns move to the right-hand side
        fixed = model.lb == model.ub
        self.fixed = fixed
        self.fixed_val = np.where(fixed, model.lb, 0.0)
        shift = A @ self.fixed_val
        self.obj_shift = float(model.c @ self.fixed_val)
        cols = np.flatnonzero(~fixed)
        self.cols = cols
        A = A[:, cols]
        lo = lo - shift
        hi = hi - shift

        counts = np.diff(A.indptr)
        empty = counts == 0
        self.trivially_infeasible = bool(np.any(empty & ((lo > 1e-12) | (hi < -1e-12))))
        free_row = ~np.isfinite(lo) & ~np.isfinite(hi)
        active = ~empty & ~free_row
        eq = active & (lo == hi)
        ineq = active & ~eq
        self.eq_rows = np.flatnonzero(eq)
        self.in_rows = np.flatnonzero(ineq)
        self.active = np.flatnonzero(active)
        nx, ne, ni = len(cols), len(self.eq_rows), len(self.in_rows)
        self.nx, self.ne, self.ni = nx, ne, ni

        Aeq = A[self.eq_rows]
        Ain = A[self.in_rows]
        Ahat = sp.bmat([[Aeq, None], [Ain, -sp.eye(ni, format="csr")]], format="csr") \
            if ni else Aeq.tocsr()
        if Ahat.shape != (ne + ni, nx + ni):
            Ahat = sp.csr_matrix(Ahat, shape=(ne + ni, nx + ni))
        b = np.concatenate([lo[self.eq_rows], np.zeros(ni)])
        l = np.concatenate([model.lb[cols], lo[self.in_rows]])
        u = np.concatenate([model.ub[cols], hi[self.in_rows]])
        c = np.concatenate([self.sign * model.c[cols], np.zeros(ni)])
        start = np.full(nx + ni, np.nan)
        if model.start is not None:
            start[:nx] = model.start[cols]

        m_, n_ = Ahat.shape
        r = np.ones(m_)
        s = np.ones(n_)
        if scale and Ahat.nnz:
            r, s = _ruiz(Ahat)
        As = sp.diags(r) @ Ahat @ sp.diags(s)
        self.r, self.s = r, s
        cs = c * s
        self.cscale = max(float(np.abs(cs).max()), 1e-300) if len(cs) and np.any(cs) else 1.0
        self.c = cs / self.cscale
        self.b = b * r
        self.l = l / s
        self.u = u / s
        self.start = start / s
        self.hasl = np.isfinite(self.l)
        self.hasu = np.isfinite(self.u)
        self.free = ~self.hasl & ~self.hasu
        As = sp.csr_matrix(As)
        As.sort_indices()
        density = As.nnz / max(1, m_ * n_)
        if dense is None:
            dense = (not self.free.any()) and density >= _DENSE_MIN_DENSITY and m_ <= _DENSE_MAX_ROWS
        if dense and self.free.any():
            raise ModelError("dense normal equations cannot handle free columns")
        self.dense = dense
        self.A = As.toarray() if dense else As
        self.AT = None if dense else As.T.tocsr()

    def matvec(self, z):
        return self.A @ z

    def rmatvec(self, y):
        return self.A.T @ y if self.dense else self.AT @ y

    def unscale(self, z, y, p, q):
        """Model-space primal values and row duals (in the model's sense)."""
        x = self.fixed_val.copy()
        x[self.cols] = z[: self.nx] * self.s[: self.nx]
        yo = y * self.r * self.cscale * self.sign
        duals = np.zeros(self.model.n_rows)
        duals[self.eq_rows] = yo[: self.ne]
        duals[self.in_rows] = yo[self.ne:]
        return x, duals

    def objectives(self, z, y, p, q):
        pobj_s = float(self.c @ z)
        dobj_s = float(self.b @ y) + float(self.l[self.hasl] @ p[self.hasl]) \
            - float(self.u[self.hasu] @ q[self.hasu])
        k = self.cscale * self.sign
        c0 = self.model.c0 + self.obj_shift
        return pobj_s * k + c0, dobj_s * k + c0


def _ruiz(A: sp.csr_matrix, passes: int = 10):
    m, n = A.shape
    r = np.ones(m)
    s = np.ones(n)
    B = abs(A).tocsr()
    for _ in range(passes):
        S = sp.diags(r) @ B @ sp.diags(s)
        rmax = np.asarray(S.max(axis=1).todense()).ravel()
        cmax = np.asarray(S.max(axis=0).todense()).ravel()
        rmax[rmax == 0] = 1.0
        cmax[cmax == 0] = 1.0
        r /= np.sqrt(rmax)
        s /= np.sqrt(cmax)
    return r, s


# --------------------------------------------------------------------------
# linear algebra

class _DenseNormal:
    def __init__(self, P: _Problem):
        self.A = P.A

    def factor(self, H):
        self.Hinv = 1.0 / H
        M = (self.A * self.Hinv) @ self.A.T
        reg = 0.0
        scale = float(np.max(np.diag(M))) if M.size else 1.0
        for _ in range(12):
            try:
                self.cf = sla.cho_factor(M + reg * np.eye(len(M)), lower=True, check_finite=False)
                if np.all(np.isfinite(self.cf[0])):
                    return
            except np.linalg.LinAlgError:
                pass
            reg = max(reg * 100, 1e-14 * max(scale, 1.0))
        raise np.linalg.LinAlgError("normal matrix is not positive definite")

    def solve(self, rhat, rp):
        # A H^-1 A^T dy = rp + A H^-1 rhat ;  dz = H^-1 (A^T dy - rhat)
        rhs = rp + self.A @ (self.Hinv * rhat)
        dy = sla.cho_solve(self.cf, rhs, check_finite=False)
        dz = self.Hinv * (self.A.T @ dy - rhat)
        return dz, dy


class _SparseAugmented:
    """Quasidefinite augmented system, LU-factored without pivoting.

    The regularized matrix is factored once per iteration and each solve is
    refined against the unregularized one. A solve whose residual stays large
    (measured per block, the primal block against ``rp_scale``) triggers a
    threshold-pivoted factorization of the unregularized matrix for the rest
    of the iteration.
    """

    def __init__(self, P: _Problem):
        m, n = P.A.shape
        self.m, self.n = m, n
        self.off = sp.bmat([[None, P.AT], [P.A, None]], format="csc")
        self.off.sort_indices()
        self.rp_scale = 0.0
        self.fallbacks = 0

    def factor(self, H):
        d = np.concatenate([-(H + _REG_PRIMAL), np.full(self.m, _REG_DUAL)])
        K = (self.off + sp.diags(d, format="csc")).tocsc()
        self.lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                            options={"SymmetricMode": True})
        self.pivoted = False
        self.K0 = (self.off + sp.diags(np.concatenate([-H, np.zeros(self.m)]), format="csc")).tocsc()

    def _refine(self, rhs):
        n = self.n
        sol = self.lu.solve(rhs)
        best, best_err = sol, np.inf
        for _ in range(8):
            if not np.all(np.isfinite(sol)):
                break
            res = rhs - self.K0 @ sol
            err = max(float(np.max(np.abs(res[:n]), initial=0.0)) / self.dual_tol,
                      float(np.max(np.abs(res[n:]), initial=0.0)) / self.primal_tol)
            if err < best_err:
                best, best_err = sol, err
            if err <= 1.0 or err > 0.5 * best_err and err != best_err:
                break
            sol = sol + self.lu.solve(res)
        return best, best_err

    def solve(self, rhat, rp):
        rhs = np.concatenate([rhat, rp])
        self.dual_tol = 1e-10 * (1 + float(np.max(np.abs(rhat), initial=0.0)))
        self.primal_tol = 1e-4 * max(self.rp_scale, float(np.max(np.abs(rp), initial=0.0))) + 1e-15
        sol, err = self._refine(rhs)
        if err > 1.0 and not self.pivoted:
            log.debug("augmented solve error %.1e x tolerance; refactoring with pivoting", err)
            self.fallbacks += 1
            self.lu = spla.splu(self.K0, permc_spec="COLAMD", diag_pivot_thresh=0.1)
            self.pivoted = True
            sol, err = self._refine(rhs)
        return sol[: self.n], sol[self.n:]


# --------------------------------------------------------------------------
# main loop

def _max_step(v, dv, mask):
    neg = mask & (dv < 0)
    if not neg.any():
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def solve(model: LinearModel, cfg: SolverConfig | None = None) -> Solution:
    """Solve ``model`` and report status, primal/dual values and objectives."""
    cfg = cfg or SolverConfig()
    dense = {"auto": None, "dense": True, "sparse": False}[cfg.path]
    P = _Problem(model, cfg.scale, dense)
    names, rnames = list(model.var_names), list(model.row_names)

    def finish(status, z, y, p, q, it, pinf=np.nan, dinf=np.nan, trace=()):
        x, duals = P.unscale(z, y, p, q)
        pobj, dobj = P.objectives(z, y, p, q)
        return Solution(status, x, duals, pobj, dobj, it, names, rnames,
                        pinf, dinf, list(trace), "dense" if P.dense else "sparse")

    m, n = P.A.shape
    hasl, hasu = P.hasl, P.hasu
    l = np.where(hasl, P.l, 0.0)
    u = np.where(hasu, P.u, 0.0)
    if P.trivially_infeasible:
        z = np.zeros(n)
        return finish("infeasible", z, np.zeros(m), np.zeros(n), np.zeros(n), 0)

    lin = _DenseNormal(P) if P.dense else _SparseAugmented(P)
    try:
        z, y, p, q = _initial_point(P)
    except (np.linalg.LinAlgError, RuntimeError) as e:
        log.warning("initial factorization failed: %s", e)
        return finish("numerical_failure", np.zeros(n), np.zeros(m), np.zeros(n), np.zeros(n), 0)
    nb = int(hasl.sum() + hasu.sum())
    bnorm = 1.0 + (np.max(np.abs(P.b)) if m else 0.0)
    cnorm = 1.0 + (np.max(np.abs(P.c)) if n else 0.0)
    trace = []
    eta = cfg.step_fraction
    stalls = 0

    for it in range(cfg.max_iterations + 1):
        s = np.where(hasl, z - l, 1.0)
        t = np.where(hasu, u - z, 1.0)
        rp = P.b - P.matvec(z)
        rd = P.c - P.rmatvec(y) - p + q
        mu = (float(s[hasl] @ p[hasl]) + float(t[hasu] @ q[hasu])) / max(nb, 1)
        pinf = float(np.max(np.abs(rp))) / bnorm if m else 0.0
        dinf = float(np.max(np.abs(rd))) / cnorm if n else 0.0
        pobj, dobj = P.objectives(z, y, p, q)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        trace.append((it, pobj, dobj, pinf, dinf, mu))
        if cfg.verbose:
            log.info("%3d  pobj % .10e  dobj % .10e  pinf %.2e  dinf %.2e  mu %.2e",
                     it, pobj, dobj, pinf, dinf, mu)
        if not (np.isfinite(pobj) and np.isfinite(dobj) and np.isfinite(mu)):
            return finish("numerical_failure", z, y, p, q, it, pinf, dinf, trace)
        if pinf <= cfg.feas_tol and dinf <= cfg.feas_tol and gap <= cfg.rel_gap_tol:
            if _row_violation(P, z) <= cfg.feas_tol:
                return finish("optimal", z, y, p, q, it, pinf, dinf, trace)
        zmax = float(np.max(np.abs(z))) if n else 0.0
        dmax = max(float(np.max(np.abs(y))) if m else 0.0, float(np.max(p)) if n else 0.0,
                   float(np.max(q)) if n else 0.0)
        # divergence: residuals measured relative to the growing iterate
        if zmax > _DIVERGE and pinf * bnorm <= 1e-6 * (bnorm + zmax):
            return finish("unbounded", z, y, p, q, it, pinf, dinf, trace)
        if dmax > _DIVERGE and dinf * cnorm <= 1e-6 * (cnorm + dmax):
            return finish("infeasible", z, y, p, q, it, pinf, dinf, trace)
        if it == cfg.max_iterations:
            break

        H = np.where(hasl, p / s, 0.0) + np.where(hasu, q / t, 0.0) + cfg.epsdiag
        if not P.dense:
            lin.rp_scale = pinf * bnorm
        try:
            lin.factor(H)
        except (np.linalg.LinAlgError, RuntimeError) as e:
            log.warning("factorization failed at iteration %d: %s", it, e)
            return finish("numerical_failure", z, y, p, q, it, pinf, dinf, trace)

        def direction(rsp, rtq, residuals=True):
            rhat = np.where(hasu, rtq / t, 0.0) - np.where(hasl, rsp / s, 0.0)
            dz, dy = lin.solve(rd + rhat, rp) if residuals else lin.solve(rhat, np.zeros(m))
            dp = np.where(hasl, (rsp - p * dz) / s, 0.0)
            dq = np.where(hasu, (rtq + q * dz) / t, 0.0)
            return dz, dy, dp, dq

        def steps(dz, dp, dq, frac=eta):
            ap = min(1.0, frac * _max_step(s, dz, hasl), frac * _max_step(t, -dz, hasu))
            ad = min(1.0, frac * _max_step(p, dp, hasl), frac * _max_step(q, dq, hasu))
            return ap, ad

        # predictor
        rsp = np.where(hasl, -s * p, 0.0)
        rtq = np.where(hasu, -t * q, 0.0)
        dz, dy, dp, dq = direction(rsp, rtq)
        ap, ad = steps(dz, dp, dq, 1.0)
        s_a, t_a = s + ap * dz, t - ap * dz
        p_a, q_a = p + ad * dp, q + ad * dq
        mu_aff = (float(s_a[hasl] @ p_a[hasl]) + float(t_a[hasu] @ q_a[hasu])) / max(nb, 1)
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0

        # corrector
        rsp = np.where(hasl, sigma * mu - s * p - dz * dp, 0.0)
        rtq = np.where(hasu, sigma * mu - t * q + dz * dq, 0.0)
        dz, dy, dp, dq = direction(rsp, rtq)
        if not (np.all(np.isfinite(dz)) and np.all(np.isfinite(dy))):
            return finish("numerical_failure", z, y, p, q, it, pinf, dinf, trace)
        ap, ad = steps(dz, dp, dq)

        # centrality correctors: push outlying complementarity products of a
        # longer trial step back into [0.1, 10] * sigma*mu
        target = sigma * mu
        for _ in range(cfg.centrality_correctors):
            if min(ap, ad) >= 1.0:
                break
            ap_t, ad_t = min(1.0, 1.5 * ap + 0.1), min(1.0, 1.5 * ad + 0.1)
            vs = (s + ap_t * dz) * (p + ad_t * dp)
            vt = (t - ap_t * dz) * (q + ad_t * dq)
            ws = np.where(hasl, np.maximum(np.clip(vs, 0.1 * target, 10 * target) - vs, -10 * target), 0.0)
            wt = np.where(hasu, np.maximum(np.clip(vt, 0.1 * target, 10 * target) - vt, -10 * target), 0.0)
            cz, cy, cp, cq = direction(ws, wt, residuals=False)
            nz, ny, np_, nq = dz + cz, dy + cy, dp + cp, dq + cq
            if not (np.all(np.isfinite(nz)) and np.all(np.isfinite(ny))):
                break
            ap_n, ad_n = steps(nz, np_, nq)
            if ap_n + ad_n < 1.01 * (ap + ad):
                break
            dz, dy, dp, dq, ap, ad = nz, ny, np_, nq, ap_n, ad_n

        if max(ap, ad) < 1e-12:
            stalls += 1
            if stalls >= 3:
                return finish("numerical_failure", z, y, p, q, it, pinf, dinf, trace)
        else:
            stalls = 0
        if cfg.verbose:
            log.info("     step primal %.3e  dual %.3e  sigma %.2e", ap, ad, sigma)
            if log.isEnabledFor(logging.DEBUG):
                _log_blocking(P, names, rnames, s, t, p, q, dz, dp, dq, mu)
        z = z + ap * dz
        y = y + ad * dy
        p = np.where(hasl, p + ad * dp, 0.0)
        q = np.where(hasu, q + ad * dq, 0.0)

    return finish("iteration_limit", z, y, p, q, cfg.max_iterations, pinf, dinf, trace)


def _log_blocking(P, names, rnames, s, t, p, q, dz, dp, dq, mu):
    def who(j):
        if j < P.nx:
            return names[P.cols[j]]
        return "row " + rnames[P.in_rows[j - P.nx]]

    for label, v, dv, mask in (("primal lo", s, dz, P.hasl), ("primal up", t, -dz, P.hasu),
                               ("dual lo", p, dp, P.hasl), ("dual up", q, dq, P.hasu)):
        ratio = np.where(mask & (dv < 0), -v / np.where(dv < 0, dv, -1.0), np.inf)
        j = int(np.argmin(ratio))
        if np.isfinite(ratio[j]):
            log.debug("       %-9s blocks at %.3e on %s", label, ratio[j], who(j))
    comp = np.concatenate([(s * p)[P.hasl], (t * q)[P.hasu]]) / mu
    log.debug("       complementarity/mu min %.2e max %.2e", comp.min(), comp.max())


def _row_violation(P: _Problem, z) -> float:
    """Largest violation of a model row or bound, in model units."""
    x, _ = P.unscale(z, np.zeros(P.A.shape[0]), None, None)
    model = P.model
    act = model.A @ x
    v = np.maximum(model.row_lo - act, act - model.row_hi)
    vb = np.maximum(model.lb - x, x - model.ub)
    worst = 0.0
    if len(v):
        worst = max(worst, float(np.max(v)))
    if len(vb):
        worst = max(worst, float(np.max(vb)))
    return worst


def _initial_point(P: _Problem):
    """Starting iterate in scaled space.

    Primal: the start hint (or 0), with free columns solved to satisfy the
    equality rows, activity columns set to their row activity, and every
    bounded entry pulled strictly inside its bounds. Duals: y = 0 and bound
    multipliers chosen so that each complementarity product equals _MU0.
    """
    m, n = P.A.shape
    l, u, hasl, hasu = P.l, P.u, P.hasl, P.hasu
    both = hasl & hasu
    z = np.where(np.isfinite(P.start), P.start, 0.0)
    nx = P.nx
    fcols = np.flatnonzero(P.free[:nx])
    if P.ne and fcols.size:
        # free columns absorb the equality residual of the hint
        Aeq = P.A[: P.ne, :nx] if P.dense else P.A[: P.ne, :nx].tocsc()
        rhs = P.b[: P.ne] - Aeq @ z[:nx]
        Af = Aeq[:, fcols]
        if P.dense:
            z[fcols] += np.linalg.lstsq(Af, rhs, rcond=None)[0]
        else:
            z[fcols] += spla.lsqr(Af, rhs, atol=1e-14, btol=1e-14, iter_lim=10 * fcols.size)[0]
    if n > nx:
        # activity variables start at the row activity of the hint
        act = np.asarray(P.A[P.ne:, :nx] @ z[:nx]).ravel()
        z[nx:] = act / (P.r[P.ne:] * P.s[nx:])
    width = np.where(both, u - l, np.inf)
    gap = np.where(both, np.minimum(1.0, 0.25 * width), 1.0)
    # one-sided activities: keep the slack as large as the bound violation
    viol = np.maximum(np.where(hasl, l - z, 0.0), np.where(hasu, z - u, 0.0))
    gap = np.where(~both, np.maximum(gap, np.nan_to_num(viol, posinf=0.0)), gap)
    lo_ok = np.where(hasl, l + gap, -np.inf)
    hi_ok = np.where(hasu, u - gap, np.inf)
    with np.errstate(invalid="ignore"):
        mid = np.where(both, 0.5 * (l + u), 0.0)
    z = np.where(both & (lo_ok > hi_ok), mid, np.clip(z, lo_ok, hi_ok))

    y = np.zeros(m)
    p = np.where(hasl, _MU0 / np.where(hasl, z - l, 1.0), 0.0)
    q = np.where(hasu, _MU0 / np.where(hasu, u - z, 1.0), 0.0)
    return z, y, p, q
