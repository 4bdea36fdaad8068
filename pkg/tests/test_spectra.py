"""Truncated norm-spectrum arithmetic against dense quadratic-time references."""

import math
from fractions import Fraction

import pytest

from maxlat.spectra import (
    ModeMismatchError,
    NormSpectrum,
    PackedSpectrum,
    convolve_truncated,
    delta_spectrum,
    one_dim_spectrum,
    prefix_sums,
    spectrum_power,
)

from oracles import convolve_naive, spectrum_naive


def test_one_dim_spectrum_counts():
    s = one_dim_spectrum(4)
    assert s.coeffs == [1, 2, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 2]
    assert s.mode == "exact"
    assert s.complete
    assert s.total() == 9
    assert s.max_norm == 16


def test_one_dim_spectrum_rejects_zero_radius():
    with pytest.raises(ValueError):
        one_dim_spectrum(0)


def test_signed_weight_stays_exact():
    s = one_dim_spectrum(3, weight=lambda v: (-1) ** (v % 2))
    assert s.mode == "exact"
    assert s.coeffs[0] == 1
    assert s.coeffs[1] == -2
    assert s.coeffs[4] == 2
    assert s.coeffs[9] == -2


def test_float_weight_switches_to_fast_mode():
    s = one_dim_spectrum(2, weight=lambda v: math.cos(0.3 * v))
    assert s.mode == "fast"
    assert s.coeffs[1] == pytest.approx(2.0 * math.cos(0.3))


def test_delta_is_convolution_identity():
    s = one_dim_spectrum(3)
    out = convolve_truncated(s, delta_spectrum(), 9)
    assert out.coeffs == s.coeffs


def test_prefix_sums_running_totals():
    assert prefix_sums([1, 2, 0, 2]) == [1, 3, 3, 5]
    assert prefix_sums([]) == []


def test_prefix_method_matches_slice():
    s = one_dim_spectrum(5)
    for n in range(s.max_norm + 1):
        assert s.prefix(n) == sum(s.coeffs[: n + 1])


@pytest.mark.parametrize("budget", [0, 1, 7, 16, 32])
def test_convolution_matches_dense_reference(budget):
    a = one_dim_spectrum(4)
    b = one_dim_spectrum(3)
    got = convolve_truncated(a, b, budget)
    assert got.coeffs == convolve_naive(a.coeffs, b.coeffs, budget)


def test_convolution_with_signed_coefficients():
    a = one_dim_spectrum(4, weight=lambda v: (-1) ** (v % 2))
    b = one_dim_spectrum(4)
    got = convolve_truncated(a, b, 16)
    assert got.coeffs == convolve_naive(a.coeffs, b.coeffs, 16)


def test_kronecker_path_agrees_with_schoolbook():
    # dense spectra with > 32 nonzero slots reach the packed-integer route
    a = NormSpectrum([i + 1 for i in range(40)], complete=True)
    b = NormSpectrum([2 * i + 1 for i in range(40)], complete=True)
    got = convolve_truncated(a, b, 60)
    assert got.coeffs == convolve_naive(a.coeffs, b.coeffs, 60)


def test_mode_mixing_refused():
    a = one_dim_spectrum(2)
    b = NormSpectrum([1.0, 2.0], "fast", complete=True)
    with pytest.raises(ModeMismatchError):
        convolve_truncated(a, b, 2)


def test_budget_beyond_truncated_operand_refused():
    a = convolve_truncated(one_dim_spectrum(3), one_dim_spectrum(3), 4)
    assert not a.complete
    with pytest.raises(ValueError):
        convolve_truncated(a, one_dim_spectrum(3), 6)
    # up to the recorded capacity it still works
    convolve_truncated(a, one_dim_spectrum(3), 4)


def test_complete_flag_tracks_truncation():
    a = one_dim_spectrum(2)
    full = convolve_truncated(a, a, 8)
    cut = convolve_truncated(a, a, 5)
    assert full.complete
    assert not cut.complete
    assert math.isinf(full.capacity())
    assert cut.capacity() == 5


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_power_reproduces_ball_spectra(d):
    got = spectrum_power(one_dim_spectrum(3), d, 9)
    assert got.coeffs == spectrum_naive(d, 3)


def test_power_zero_is_delta():
    assert spectrum_power(one_dim_spectrum(2), 0, 4).coeffs == [1]


def test_power_rejects_negative_exponent():
    with pytest.raises(ValueError):
        spectrum_power(one_dim_spectrum(2), -1, 4)


def test_fast_mode_power_tracks_exact():
    exact = spectrum_power(one_dim_spectrum(4), 6, 16)
    base = NormSpectrum([float(c) for c in one_dim_spectrum(4).coeffs], "fast", complete=True)
    fast = spectrum_power(base, 6, 16)
    assert fast.mode == "fast"
    for e, f in zip(exact.coeffs, fast.coeffs):
        assert abs(f - e) <= 1e-9 * max(1, abs(e))


def test_fraction_coefficients_supported():
    a = NormSpectrum([Fraction(1, 3), Fraction(1, 2)], complete=True)
    got = convolve_truncated(a, a, 2)
    assert got.coeffs == [Fraction(1, 9), Fraction(1, 3), Fraction(1, 4)]


def test_empty_spectrum_rejected():
    with pytest.raises(ValueError):
        NormSpectrum([])


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        NormSpectrum([1], mode="interval")


@pytest.mark.parametrize("d,N", [(1, 4), (3, 3), (5, 2), (4, 4)])
def test_packed_spectrum_incremental_build(d, N):
    packed = PackedSpectrum(N * N, d_max=d, vmax_max=N)
    for _ in range(d):
        packed.add_coordinate(N)
    assert packed.coefficients() == spectrum_naive(d, N)
    assert packed.dim == d


def test_packed_spectrum_masks_overflow_slots():
    # budget below vmax^2: the out-of-budget square must not leak back in
    packed = PackedSpectrum(3, d_max=2, vmax_max=3)
    packed.add_coordinate(3)
    packed.add_coordinate(3)
    ref = convolve_naive([1, 2, 0, 0], [1, 2, 0, 0], 3)
    assert packed.coefficients() == ref
