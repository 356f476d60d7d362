"""Discrete Fourier transforms: one-step, two-step, radix-3 and 2D cosine forms.

Every executable transform returns ``(values, OpCount)``, where the count is
accumulated while the transform runs. :func:`predict_ops` gives the matching
closed forms.

Centered index sets ``-n..n`` are stored zero-based with offset ``n``. The
two-step algorithm splits ``k = N0*k1 + k0`` and ``j = M0*j1 + j0``; with the
offset convention both splits are plain C-order reshapes, so ``f.reshape(N1,
N0)[k1 + n1, k0 + n0]`` is ``f_k`` without copying.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

__all__ = [
    "SampleGrid",
    "SpectrumGrid",
    "FactorPlan",
    "OpCount",
    "Transform",
    "DimensionError",
    "FactorizationError",
    "SizeError",
    "GridError",
    "dft_1d_direct",
    "dft_1d_twostep",
    "fft_radix3",
    "dft_2d_direct",
    "dft_2d_twostep",
    "build_cosine_kernel",
    "predict_ops",
    "valid_plans",
]

INTEGRALITY_TOL = 1e-9


class DimensionError(ValueError):
    pass


class FactorizationError(ValueError):
    pass


class SizeError(ValueError):
    pass


class GridError(ValueError):
    pass


# --------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class SampleGrid:
    """Sample positions in function space.

    ``parity="odd"``: N = 2n+1 points x_k = k*dx, k = -n..n.
    ``parity="even"``: n points x_k = (k - 1/2)*dx, k = 1..n (positive
    quadrant of an even grid of 2n points).
    """

    n: int
    parity: str = "odd"
    dx: float = 1.0

    def __post_init__(self):
        if self.parity not in ("odd", "even"):
            raise GridError(f"unknown sample grid parity {self.parity!r}")
        if not self.dx > 0:
            raise GridError("dx must be positive")
        if self.n < 0 or (self.parity == "even" and self.n < 1):
            raise GridError(f"invalid half-count n={self.n} for {self.parity} grid")

    @property
    def size(self) -> int:
        return 2 * self.n + 1 if self.parity == "odd" else self.n

    @property
    def indices(self) -> np.ndarray:
        if self.parity == "odd":
            return np.arange(-self.n, self.n + 1)
        return np.arange(1, self.n + 1)

    @property
    def points(self) -> np.ndarray:
        if self.parity == "odd":
            return self.indices * self.dx
        return (self.indices - 0.5) * self.dx


@dataclass(frozen=True)
class SpectrumGrid:
    """Evaluation positions in transform space.

    ``parity="odd"``: xi_j = j*dxi, j = -m..m.
    ``parity="even"``: xi_j = (j - 1/2)*dxi, j = 1..m.
    ``parity="zero"``: xi_j = j*dxi, j = 0..m (contains xi = 0 exactly).
    """

    m: int
    parity: str = "odd"
    dxi: float = 1.0

    def __post_init__(self):
        if self.parity not in ("odd", "even", "zero"):
            raise GridError(f"unknown spectrum grid parity {self.parity!r}")
        if not self.dxi > 0:
            raise GridError("dxi must be positive")
        if self.m < 0 or (self.parity == "even" and self.m < 1):
            raise GridError(f"invalid half-count m={self.m} for {self.parity} grid")

    @property
    def size(self) -> int:
        return {"odd": 2 * self.m + 1, "even": self.m, "zero": self.m + 1}[self.parity]

    @property
    def indices(self) -> np.ndarray:
        if self.parity == "odd":
            return np.arange(-self.m, self.m + 1)
        if self.parity == "even":
            return np.arange(1, self.m + 1)
        return np.arange(0, self.m + 1)

    @property
    def points(self) -> np.ndarray:
        if self.parity == "even":
            return (self.indices - 0.5) * self.dxi
        return self.indices * self.dxi


@dataclass(frozen=True)
class FactorPlan:
    """Odd factorization N = N0*N1, M = M0*M1 stored by half-counts."""

    n0: int
    n1: int
    m0: int
    m1: int

    def __post_init__(self):
        if min(self.n0, self.n1, self.m0, self.m1) < 0:
            raise FactorizationError("plan half-counts must be nonnegative")

    @classmethod
    def from_factors(cls, N0: int, N1: int, M0: int, M1: int) -> "FactorPlan":
        for name, v in (("N0", N0), ("N1", N1), ("M0", M0), ("M1", M1)):
            if v < 1 or v % 2 == 0:
                raise FactorizationError(f"{name}={v} is not a positive odd integer")
        return cls((N0 - 1) // 2, (N1 - 1) // 2, (M0 - 1) // 2, (M1 - 1) // 2)

    @property
    def N0(self) -> int:
        return 2 * self.n0 + 1

    @property
    def N1(self) -> int:
        return 2 * self.n1 + 1

    @property
    def M0(self) -> int:
        return 2 * self.m0 + 1

    @property
    def M1(self) -> int:
        return 2 * self.m1 + 1

    def check(self, N: int, M: int, dx: float, dxi: float) -> None:
        """Raise FactorizationError unless the plan fits (N, M, dx, dxi)."""
        if self.N0 * self.N1 != N:
            raise FactorizationError(f"N0*N1 = {self.N0 * self.N1} != N = {N}")
        if self.M0 * self.M1 != M:
            raise FactorizationError(f"M0*M1 = {self.M0 * self.M1} != M = {M}")
        v = self.N0 * self.M0 * dx * dxi
        if abs(round(v) - v) > INTEGRALITY_TOL:
            raise FactorizationError(f"N0*M0*dx*dxi = {v!r} is not an integer")


def valid_plans(N: int, M: int, dx: float, dxi: float) -> list[FactorPlan]:
    """All odd factor plans for (N, M) that satisfy the integrality condition."""
    out = []
    for N0 in _odd_divisors(N):
        for M0 in _odd_divisors(M):
            plan = FactorPlan.from_factors(N0, N // N0, M0, M // M0)
            try:
                plan.check(N, M, dx, dxi)
            except FactorizationError:
                continue
            out.append(plan)
    return out


def _odd_divisors(N: int) -> list[int]:
    return [d for d in range(1, N + 1, 2) if N % d == 0]


# --------------------------------------------------------------------------
# op counts

@dataclass(frozen=True)
class OpCount:
    """Multiply/add count; ``unit`` is "complex" or "real".

    A complex multiply/add costs roughly four real ones; that factor is left
    as metadata and never folded into ``multiply_adds``.
    """

    multiply_adds: int
    unit: str = "complex"

    def __add__(self, other: "OpCount") -> "OpCount":
        if other.unit != self.unit:
            raise ValueError("cannot add counts in different units")
        return OpCount(self.multiply_adds + other.multiply_adds, self.unit)

    def __int__(self) -> int:
        return self.multiply_adds


class Transform(NamedTuple):
    values: np.ndarray
    ops: OpCount


def predict_ops(scheme: str, *, N=None, M=None, plan: FactorPlan | None = None,
                n=None, m=None) -> OpCount:
    """Closed-form multiply/add count for a transform scheme.

    1D schemes take ``N`` (and ``M``, default ``N``); 2D cosine schemes take
    ``n`` and ``m`` as ints or ``(x, y)`` pairs of sample/transform counts.
    """
    if scheme in ("direct1d", "twostep1d", "radix3"):
        if N is None or N < 1:
            raise ValueError(f"{scheme} needs a positive N")
        M = N if M is None else M
        if scheme == "direct1d":
            return OpCount(N * M)
        if scheme == "twostep1d":
            if plan is None:
                raise ValueError("twostep1d needs a FactorPlan")
            if plan.N0 * plan.N1 != N or plan.M0 * plan.M1 != M:
                raise ValueError("plan does not factor (N, M)")
            return OpCount(N * plan.M0 + M * plan.N0)
        p = _log3(N)
        if p is None or M != N:
            raise ValueError("radix3 needs N = M = 3**p")
        return OpCount(N * (1 + 3 * p))
    if scheme in ("direct2d", "twostep2d"):
        if n is None or m is None:
            raise ValueError(f"{scheme} needs n and m")
        nx, ny = (n, n) if np.isscalar(n) else n
        mx, my = (m, m) if np.isscalar(m) else m
        if min(nx, ny, mx, my) < 0:
            raise ValueError("sizes must be nonnegative")
        if scheme == "direct2d":
            return OpCount(mx * my * nx * ny, "real")
        return OpCount(mx * nx * ny + mx * my * ny, "real")
    raise ValueError(f"unknown scheme {scheme!r}")


def _log3(N: int) -> int | None:
    p = 0
    while N > 1 and N % 3 == 0:
        N //= 3
        p += 1
    return p if N == 1 else None


# --------------------------------------------------------------------------
# complex 1D transforms

def _twiddle(t, q: float) -> np.ndarray:
    """exp(2*pi*i*t*q) for integer arrays ``t``.

    When q is a ratio of small integers the phase is reduced modulo 1 in
    exact integer arithmetic before the exponential, which keeps large
    products k*j from eating into the significand.
    """
    t = np.asarray(t, dtype=np.int64)
    frac = Fraction(q).limit_denominator(1 << 20)
    if abs(float(frac) - q) <= 1e-15 * abs(q):
        phase = np.mod(t * frac.numerator, frac.denominator) / frac.denominator
    else:
        phase = t * q
    return np.exp(2j * np.pi * phase)


def _as_signal(f, grid: SampleGrid) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    if f.ndim != 1 or f.shape[0] != grid.size:
        raise DimensionError(f"signal of shape {f.shape} does not match grid of {grid.size} points")
    return f


def _require_odd(grid, what: str):
    if grid.parity != "odd":
        raise GridError(f"{what} must be an odd-centered grid")


def dft_1d_direct(f, x: SampleGrid, xi: SpectrumGrid) -> Transform:
    """Riemann-sum transform f_hat_j = sum_k exp(2 pi i k dx j dxi) f_k dx."""
    _require_odd(x, "sample grid")
    _require_odd(xi, "spectrum grid")
    f = _as_signal(f, x)
    E = _twiddle(np.outer(xi.indices, x.indices), x.dx * xi.dxi) * x.dx
    return Transform(E @ f, OpCount(x.size * xi.size))


def dft_1d_twostep(f, x: SampleGrid, xi: SpectrumGrid, plan: FactorPlan) -> Transform:
    """Two-step evaluation of :func:`dft_1d_direct` under a factor plan.

    g[j0, k0] = sum_k1 exp(2 pi i N0 k1 dx j0 dxi) f[k0, k1] dx
    f_hat[j0, j1] = sum_k0 exp(2 pi i k0 dx (M0 j1 + j0) dxi) g[j0, k0]
    """
    _require_odd(x, "sample grid")
    _require_odd(xi, "spectrum grid")
    f = _as_signal(f, x)
    N, M = x.size, xi.size
    plan.check(N, M, x.dx, xi.dxi)
    N0, N1, M0, M1 = plan.N0, plan.N1, plan.M0, plan.M1
    q = x.dx * xi.dxi

    k0 = np.arange(-plan.n0, plan.n0 + 1)
    k1 = np.arange(-plan.n1, plan.n1 + 1)
    j0 = np.arange(-plan.m0, plan.m0 + 1)
    j1 = np.arange(-plan.m1, plan.m1 + 1)

    f2 = f.reshape(N1, N0)                       # [k1, k0]
    E1 = _twiddle(N0 * np.outer(j0, k1), q) * x.dx
    g = E1 @ f2                                  # [j0, k0]
    ops = M0 * N1 * N0

    j = M0 * j1[:, None] + j0[None, :]           # [j1, j0]
    E2 = _twiddle(j[:, :, None] * k0[None, None, :], q)
    fhat = np.einsum("bak,ak->ba", E2, g)
    ops += M1 * M0 * N0
    return Transform(fhat.reshape(M), OpCount(ops))


def fft_radix3(f, x: SampleGrid, xi: SpectrumGrid | None = None) -> Transform:
    """Recursive radix-3 transform for N = 3**p with dx*dxi*N = 1.

    Each level splits N0 = 3, N1 = N/3 and recurses on the three
    decimated subsequences; the recursion ends at a single term.
    """
    _require_odd(x, "sample grid")
    N = x.size
    if _log3(N) is None:
        raise SizeError(f"N = {N} is not a power of three")
    if xi is None:
        xi = SpectrumGrid(x.n, "odd", 1.0 / (N * x.dx))
    _require_odd(xi, "spectrum grid")
    if xi.size != N:
        raise SizeError("radix-3 transform needs M = N")
    if abs(x.dx * xi.dxi * N - 1.0) > 1e-12:
        raise GridError("radix-3 transform needs dx*dxi*N = 1")
    f = _as_signal(f, x)
    values, ops = _radix3(f, N, x.dx, x.dx * xi.dxi)
    return Transform(values, OpCount(ops))


def _radix3(f: np.ndarray, N: int, weight: float, q: float):
    # returns sum_k exp(2 pi i k j q) f_k weight, j centered, with N*q = 1
    if N == 1:
        return f * weight, 1
    N1 = N // 3
    n1 = (N1 - 1) // 2
    f2 = f.reshape(N1, 3)
    g = np.empty((N1, 3), dtype=complex)       # [j0, k0]
    ops = 0
    for c in range(3):
        g[:, c], sub = _radix3(f2[:, c], N1, weight, 3 * q)
        ops += sub
    j0 = np.arange(-n1, n1 + 1)
    j = N1 * np.arange(-1, 2)[:, None] + j0[None, :]        # [j1, j0]
    E = _twiddle(j[:, :, None] * np.arange(-1, 2)[None, None, :], q)
    fhat = np.einsum("bak,ak->ba", E, g)
    ops += 3 * N
    return fhat.reshape(N), ops


# --------------------------------------------------------------------------
# 2D cosine transforms

@functools.lru_cache(maxsize=64)
def _cosine_kernel(x: SampleGrid, xi: SpectrumGrid) -> np.ndarray:
    K = np.cos(2 * np.pi * np.outer(xi.points, x.points)) * x.dx
    K.setflags(write=False)
    return K


def build_cosine_kernel(x: SampleGrid, xi: SpectrumGrid) -> np.ndarray:
    """K[j, k] = cos(2 pi x_k xi_j) dx; rows over transform points.

    Kernels are cached by grid value and returned read-only.
    """
    return _cosine_kernel(x, xi)


def _check_image(F, x: SampleGrid, y: SampleGrid) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape != (x.size, y.size):
        raise DimensionError(f"image of shape {F.shape} does not match grids ({x.size}, {y.size})")
    return F


def dft_2d_direct(F, x: SampleGrid, y: SampleGrid, xi: SpectrumGrid,
                  eta: SpectrumGrid | None = None) -> Transform:
    """Quarter-plane cosine transform by full double summation.

    f_hat[j1, j2] = 4 sum_k1 sum_k2 cos(2 pi x_k1 xi_j1) cos(2 pi y_k2 eta_j2)
    f[k1, k2] dy dx, evaluated independently for every output point.
    """
    eta = xi if eta is None else eta
    F = _check_image(F, x, y)
    Kx = build_cosine_kernel(x, xi)
    Ky = build_cosine_kernel(y, eta)
    # optimize=False keeps the naive four-index loop: no shared partial sums
    S = np.einsum("ak,bl,kl->ab", Kx, Ky, F, optimize=False)
    return Transform(4.0 * S, OpCount(xi.size * eta.size * x.size * y.size, "real"))


def dft_2d_twostep(F, x: SampleGrid, y: SampleGrid, xi: SpectrumGrid,
                   eta: SpectrumGrid | None = None) -> Transform:
    """Separable evaluation G = (2Kx) F, F_hat = G (2Ky)^T."""
    eta = xi if eta is None else eta
    F = _check_image(F, x, y)
    Kx = build_cosine_kernel(x, xi)
    Ky = build_cosine_kernel(y, eta)
    G = (2.0 * Kx) @ F
    Fhat = G @ (2.0 * Ky).T
    ops = xi.size * x.size * y.size + xi.size * eta.size * y.size
    return Transform(Fhat, OpCount(ops, "real"))


def speedup(N: int, plan: FactorPlan) -> Fraction:
    """Exact ratio direct/two-step for a square 1D transform."""
    return Fraction(predict_ops("direct1d", N=N).multiply_adds,
                    predict_ops("twostep1d", N=N, plan=plan).multiply_adds)


def ratio_2d(n: int, m: int) -> float:
    return predict_ops("direct2d", n=n, m=m).multiply_adds / predict_ops("twostep2d", n=n, m=m).multiply_adds

