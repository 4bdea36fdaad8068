"""Exact Krawtchouk tables, their structural identities, and the decay rate."""

import math
from fractions import Fraction

import pytest

from maxlat.krawtchouk import (
    KrawtchoukTable,
    calibrate_uniform_bound,
    kraw_exact,
    property_checks,
    verify_uniform_bound,
)


def kraw_sum_formula(n, k, x):
    """K_k(x) = sum_j (-1)^j C(x,j) C(n-x,k-j) / C(n,k), straight from the
    generating definition."""
    total = sum(
        (-1) ** j * math.comb(x, j) * math.comb(n - x, k - j)
        for j in range(0, k + 1)
    )
    return Fraction(total, math.comb(n, k))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13])
def test_table_matches_sum_formula(n):
    table = KrawtchoukTable(n)
    for k in range(n + 1):
        for x in range(n + 1):
            assert table.value(k, x) == kraw_sum_formula(n, k, x)


def test_kraw_exact_agrees_with_table():
    table = KrawtchoukTable(9)
    for k in range(10):
        for x in range(10):
            assert kraw_exact(9, k, x) == table.value(k, x)


def test_linear_polynomial_closed_form():
    for n in range(1, 12):
        for x in range(n + 1):
            assert kraw_exact(n, 1, x) == Fraction(n - 2 * x, n)


def test_value_at_zero_is_one():
    for n in range(1, 12):
        for k in range(n + 1):
            assert kraw_exact(n, k, 0) == 1


def test_symmetry_in_k_and_x():
    # self-duality of the normalized values: K_k(x) = K_x(k)
    n = 11
    t = KrawtchoukTable(n)
    for k in range(n + 1):
        for x in range(n + 1):
            assert t.value(k, x) == t.value(x, k)


def test_reflection_sign_rule():
    # K_k(n-x) = (-1)^k K_k(x)
    n = 10
    t = KrawtchoukTable(n)
    for k in range(n + 1):
        for x in range(n + 1):
            assert t.value(k, n - x) == (-1) ** k * t.value(k, x)


def test_binomial_orthogonality():
    # sum_x C(n,x) K_k(x) K_l(x) = 2^n C(n,k)^(-1) [k == l]
    n = 8
    t = KrawtchoukTable(n)
    for k in range(n + 1):
        for l in range(n + 1):
            s = sum(
                math.comb(n, x) * t.value(k, x) * t.value(l, x)
                for x in range(n + 1)
            )
            want = Fraction(2**n, math.comb(n, k)) if k == l else 0
            assert s == want


def test_unnormalized_values_are_integers():
    t = KrawtchoukTable(12)
    for k in range(13):
        for x in range(13):
            v = t.unnormalized(k, x)
            assert isinstance(v, int)
            assert Fraction(v, t.binom(k)) == t.value(k, x)


def test_negative_n_rejected():
    with pytest.raises(ValueError):
        KrawtchoukTable(-1)


@pytest.mark.parametrize("n", [0, 1, 2, 7, 16, 31])
def test_property_checks_all_pass(n):
    rep = property_checks(n)
    assert rep.all_passed
    assert rep.symmetry and rep.reflection and rep.unit_bound and rep.root_pattern
    if n <= 30:
        assert rep.orthogonality is True
    assert rep.root_k_max == n // 2


def test_property_checks_orthogonality_skipped_above_limit():
    rep = property_checks(34, orthogonality_limit=30)
    assert rep.orthogonality is None
    assert rep.all_passed


def test_root_pattern_counterexamples_above_half():
    # the interval containment genuinely fails past k = n/2: for n = 4,
    # k = 3, K has a root at x = 2 +- 1/sqrt(... ) outside the k-window;
    # the check is therefore scoped to k <= n/2 and that scoping is load
    # bearing, not decorative.  Verify the k = n/2 boundary stays inside.
    t = KrawtchoukTable(4)
    # K_2^{(4)} roots: 2 +- sqrt(2), i.e. ~0.586 and ~3.414 -- sign flips
    # must happen inside [0.586, 3.414] only
    vals = [t.value(2, x) for x in range(5)]
    assert vals[0] > 0 and vals[4] > 0
    assert vals[2] < 0


def test_calibration_small_window():
    cal = calibrate_uniform_bound(10)
    assert 0.0 < cal.c_hat <= 1.0
    assert cal.raw_min > 0.0
    n, k, x = cal.argmin
    assert 1 <= n <= 10 and 1 <= k <= n // 2 and 1 <= x <= n // 2
    # brute-force the same minimum rate
    best = None
    for nn in range(1, 11):
        t = KrawtchoukTable(nn)
        for kk in range(1, nn // 2 + 1):
            for xx in range(1, nn // 2 + 1):
                v = abs(t.value(kk, xx))
                if v == 0 or v >= 1:
                    continue
                rate = -math.log(float(v)) * nn / (kk * xx)
                if best is None or rate < best:
                    best = rate
    assert cal.raw_min == pytest.approx(best, rel=1e-12)


def test_calibration_known_argmin_at_200():
    cal = calibrate_uniform_bound(200)
    assert cal.argmin == (4, 2, 2)
    assert cal.raw_min == pytest.approx(math.log(3.0), rel=1e-12)
    assert cal.c_hat == 1.0


def test_verification_accepts_calibrated_rate():
    cal = calibrate_uniform_bound(40)
    assert verify_uniform_bound(40, cal.c_hat) == 0


def test_verification_rejects_overclaimed_rate():
    assert verify_uniform_bound(10, 2.0) > 0
