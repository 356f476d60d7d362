from fractions import Fraction

import numpy as np
import pytest
import scipy.fft
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from ffopt.transforms import (
    DimensionError, FactorPlan, FactorizationError, GridError, OpCount, SampleGrid, SizeError,
    SpectrumGrid, build_cosine_kernel, dft_1d_direct, dft_1d_twostep, dft_2d_direct,
    dft_2d_twostep, fft_radix3, predict_ops, ratio_2d, speedup, valid_plans,
)


def unit_grids(N):
    """dx = 1, dxi = 1/N: the classical DFT on a centered grid."""
    return SampleGrid(N // 2, "odd", 1.0), SpectrumGrid(N // 2, "odd", 1.0 / N)


def numpy_oracle(f):
    # sum_k exp(+2 pi i k j / N) f_k with centered k, j
    N = len(f)
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(f)) * N)


# -- grids --------------------------------------------------------------

def test_odd_grid_geometry():
    g = SampleGrid(3, "odd", 0.5)
    assert g.size == 7
    assert g.points.tolist() == [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5]


def test_even_grid_is_half_offset():
    g = SampleGrid(4, "even", 0.125)
    assert g.size == 4
    assert np.allclose(g.points, [0.0625, 0.1875, 0.3125, 0.4375])
    assert g.points.max() < 4 * 0.125


def test_zero_anchored_spectrum_contains_origin():
    g = SpectrumGrid(35, "zero", 20 / 35)
    assert g.points[0] == 0.0 and g.size == 36
    assert g.points[-1] == pytest.approx(20.0)


@pytest.mark.parametrize("kw", [dict(n=1, parity="odd", dx=0.0), dict(n=0, parity="even", dx=1.0),
                                dict(n=2, parity="weird", dx=1.0), dict(n=-1, parity="odd", dx=1.0)])
def test_bad_sample_grids(kw):
    with pytest.raises(GridError):
        SampleGrid(**kw)


def test_single_point_odd_grid_allowed():
    assert SampleGrid(0, "odd", 1.0).size == 1


# -- factor plans ---------------------------------------------------------

def test_plan_from_factors_roundtrip():
    p = FactorPlan.from_factors(3, 5, 7, 1)
    assert (p.n0, p.n1, p.m0, p.m1) == (1, 2, 3, 0)
    assert (p.N0, p.N1, p.M0, p.M1) == (3, 5, 7, 1)


@pytest.mark.parametrize("factors", [(2, 5, 3, 3), (3, 3, 0, 9), (-3, 1, 1, 1)])
def test_even_or_nonpositive_factor_rejected(factors):
    with pytest.raises(FactorizationError):
        FactorPlan.from_factors(*factors)


def test_plan_integrality_checked():
    plan = FactorPlan.from_factors(3, 3, 3, 3)
    plan.check(9, 9, 1.0, 1 / 9)                  # 3*3/9 = 1
    with pytest.raises(FactorizationError):
        plan.check(9, 9, 1.0, 1 / 27)             # 1/3
    with pytest.raises(FactorizationError):
        plan.check(15, 9, 1.0, 1 / 9)


def test_twostep_rejects_bad_plan(rng):
    x, xi = unit_grids(9)
    f = rng.normal(size=9)
    with pytest.raises(FactorizationError):
        dft_1d_twostep(f, x, xi, FactorPlan.from_factors(3, 3, 1, 9))   # 3*1/9 not integral


def test_valid_plans_n9():
    plans = valid_plans(9, 9, 1.0, 1 / 9)
    got = {(p.N0, p.M0) for p in plans}
    # N0*M0/9 integral: (1,9), (9,1), (3,3), (9,3), (3,9), (9,9)
    assert got == {(1, 9), (9, 1), (3, 3), (9, 3), (3, 9), (9, 9)}


# -- 1D values --------------------------------------------------------------

@pytest.mark.parametrize("N", [1, 3, 5, 9, 15, 27])
def test_direct_matches_numpy_fft(N, rng):
    f = rng.normal(size=N) + 1j * rng.normal(size=N)
    x, xi = unit_grids(N)
    assert np.allclose(dft_1d_direct(f, x, xi).values, numpy_oracle(f), atol=1e-12 * N)


def test_direct_frozen_values():
    # N = 3, f = (1, 2, 3) at k = -1, 0, 1: fhat_0 = 6, fhat_{+-1} = 2 + 4 cos(2pi/3) -+ ... 
    x, xi = unit_grids(3)
    got = dft_1d_direct([1, 2, 3], x, xi).values
    w = np.exp(2j * np.pi / 3)
    expect = [w ** 1 * 1 + 2 + w ** -1 * 3, 6, w ** -1 * 1 + 2 + w * 3]
    assert np.allclose(got, expect, atol=1e-14)
    assert got[1] == 6


def test_delta_at_origin_is_flat():
    x, xi = unit_grids(9)
    f = np.zeros(9)
    f[4] = 1.0
    assert np.allclose(dft_1d_direct(f, x, xi).values, 1.0, atol=1e-15)


@pytest.mark.parametrize("N", [9, 15, 45, 105])
def test_all_twostep_plans_match_direct(N, rng):
    f = rng.normal(size=N) + 1j * rng.normal(size=N)
    x, xi = unit_grids(N)
    ref = dft_1d_direct(f, x, xi).values
    for plan in valid_plans(N, N, x.dx, xi.dxi):
        got = dft_1d_twostep(f, x, xi, plan)
        assert np.max(np.abs(got.values - ref)) <= 1e-12 * np.abs(f).sum() * x.dx
        assert int(got.ops) == int(predict_ops("twostep1d", N=N, plan=plan))


def test_twostep_rectangular(rng):
    # N = 15, M = 9, dx = 1, dxi = 1/5: N0 = 5, M0 = 3 -> 5*3/5 = 3
    x, xi = SampleGrid(7, "odd", 1.0), SpectrumGrid(4, "odd", 0.2)
    f = rng.normal(size=15) + 0j
    plan = FactorPlan.from_factors(5, 3, 3, 3)
    a = dft_1d_twostep(f, x, xi, plan)
    assert np.allclose(a.values, dft_1d_direct(f, x, xi).values, atol=1e-12)
    assert int(a.ops) == 15 * 3 + 9 * 5


@pytest.mark.parametrize("N", [1, 3, 9, 27, 81, 243])
def test_radix3_matches_direct(N, rng):
    f = rng.normal(size=N) + 1j * rng.normal(size=N)
    x, xi = unit_grids(N)
    got = fft_radix3(f, x, xi)
    assert np.allclose(got.values, numpy_oracle(f), atol=1e-12 * max(1, np.abs(f).sum()))
    p = round(np.log(N) / np.log(3))
    assert int(got.ops) == N * (1 + 3 * p)


def test_radix3_rejects_other_sizes():
    with pytest.raises(SizeError):
        fft_radix3(np.ones(15), SampleGrid(7, "odd", 1.0))


def test_radix3_needs_reciprocal_grids():
    with pytest.raises(GridError):
        fft_radix3(np.ones(9), SampleGrid(4, "odd", 1.0), SpectrumGrid(4, "odd", 0.5))


def test_signal_length_checked():
    x, xi = unit_grids(9)
    with pytest.raises(DimensionError):
        dft_1d_direct(np.ones(7), x, xi)


def test_even_grid_rejected_for_complex_transform():
    with pytest.raises(GridError):
        dft_1d_direct(np.ones(3), SampleGrid(3, "even", 1.0), SpectrumGrid(1, "odd", 1.0))


@given(a=st.complex_numbers(max_magnitude=1e3, allow_nan=False),
       f=hnp.arrays(complex, 27, elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False)),
       g=hnp.arrays(complex, 27, elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False)))
def test_linearity(a, f, g):
    x, xi = unit_grids(27)
    plan = FactorPlan.from_factors(9, 3, 3, 9)
    lhs = dft_1d_twostep(a * f + g, x, xi, plan).values
    rhs = a * dft_1d_direct(f, x, xi).values + dft_1d_direct(g, x, xi).values
    scale = 1 + np.abs(a * f).sum() + np.abs(g).sum()
    assert np.max(np.abs(lhs - rhs)) <= 1e-11 * scale


@given(shift=st.integers(-20, 20))
def test_shift_theorem(shift):
    # moving the input by s multiplies fhat_j by exp(2 pi i s j / N)
    N = 27
    x, xi = unit_grids(N)
    f = np.cos(np.arange(N)) + 0.5j
    fs = np.roll(f, shift)
    j = xi.indices
    lhs = fft_radix3(fs, x, xi).values
    rhs = np.exp(2j * np.pi * shift * j / N) * fft_radix3(f, x, xi).values
    assert np.allclose(lhs, rhs, atol=1e-10)


# -- op counts ----------------------------------------------------------------

def test_worked_op_counts():
    plan = FactorPlan.from_factors(3, 3, 3, 3)
    assert int(predict_ops("direct1d", N=9)) == 81
    assert int(predict_ops("twostep1d", N=9, M=9, plan=plan)) == 54
    assert int(predict_ops("radix3", N=27)) == 270
    assert int(predict_ops("direct2d", n=4, m=4)) == 256
    assert int(predict_ops("twostep2d", n=4, m=4)) == 128
    assert speedup(9, plan) == Fraction(3, 2)


def test_radix3_count_recurrence():
    for p in range(1, 8):
        N = 3 ** p
        assert int(predict_ops("radix3", N=N)) == 3 * int(predict_ops("radix3", N=N // 3)) + 3 * N


def test_opcount_units():
    assert int(OpCount(3) + OpCount(4)) == 7
    with pytest.raises(ValueError):
        OpCount(1, "real") + OpCount(1)


def test_predict_rejects_unknown_scheme():
    with pytest.raises(ValueError):
        predict_ops("fft", N=8)


def test_ratio_2d_tends_to_n_over_two():
    assert ratio_2d(1000, 1000) == pytest.approx(500)


# -- 2D cosine transforms ---------------------------------------------------

def quarter_grids(n, m, rho1):
    return SampleGrid(n, "even", 1 / (2 * n)), SpectrumGrid(m, "zero", rho1 / m)


def test_kernel_cached_and_read_only():
    x, xi = quarter_grids(5, 3, 2.0)
    K1, K2 = build_cosine_kernel(x, xi), build_cosine_kernel(x, xi)
    assert K1 is K2
    assert not K1.flags.writeable
    assert K1.shape == (4, 5)


def test_2d_matches_scipy_dct(rng):
    # with dxi = 1 the kernel is the DCT-II kernel, scaled by dx per axis
    n = 12
    x = SampleGrid(n, "even", 1 / (2 * n))
    xi = SpectrumGrid(n - 1, "zero", 1.0)
    F = rng.random((n, n))
    ref = scipy.fft.dctn(F, type=2) * x.dx ** 2
    assert np.allclose(dft_2d_direct(F, x, x, xi).values, ref, atol=1e-13)
    assert np.allclose(dft_2d_twostep(F, x, x, xi).values, ref, atol=1e-13)


@given(n=st.integers(1, 16), m=st.integers(1, 16), seed=st.integers(0, 2 ** 31))
def test_2d_twostep_matches_direct(n, m, seed):
    F = np.random.default_rng(seed).random((n, n))
    x, xi = quarter_grids(n, m, 7.0)
    a = dft_2d_direct(F, x, x, xi)
    b = dft_2d_twostep(F, x, x, xi)
    assert np.max(np.abs(a.values - b.values)) <= 1e-12 * max(1.0, np.abs(a.values).max())
    assert int(a.ops) == int(predict_ops("direct2d", n=n, m=m + 1))
    assert int(b.ops) == int(predict_ops("twostep2d", n=n, m=m + 1))


def test_2d_rectangular_axes(rng):
    x, y = SampleGrid(4, "even", 0.125), SampleGrid(6, "even", 1 / 12)
    xi, eta = SpectrumGrid(3, "zero", 1.0), SpectrumGrid(5, "zero", 0.5)
    F = rng.random((4, 6))
    a, b = dft_2d_direct(F, x, y, xi, eta), dft_2d_twostep(F, x, y, xi, eta)
    assert a.values.shape == (4, 6)
    assert np.allclose(a.values, b.values, atol=1e-13)
    assert int(b.ops) == int(predict_ops("twostep2d", n=(4, 6), m=(4, 6)))


def test_2d_image_shape_checked():
    x, xi = quarter_grids(4, 4, 1.0)
    with pytest.raises(DimensionError):
        dft_2d_direct(np.ones((3, 4)), x, x, xi)


def test_constant_image_peak_is_area():
    # fhat(0, 0) = 4 sum f dx dy = area of the full square for f = 1
    x, xi = quarter_grids(10, 3, 1.0)
    assert dft_2d_twostep(np.ones((10, 10)), x, x, xi).values[0, 0] == pytest.approx(1.0)
