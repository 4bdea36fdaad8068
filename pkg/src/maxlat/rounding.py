"""Outward-rounded evaluation of transcendental bound sides.

Inequality checks in this project compare exact integers or rationals against
expressions built from exp, log, pi and real powers.  Those expressions are
evaluated with mpmath at high precision and then bracketed by an interval
whose width covers the worst-case evaluation error with a wide margin
(default: 128 working bits against a 2^-96 relative slack, i.e. more than 30
guard bits beyond double precision).  The interval endpoints are exact
dyadic rationals, so all final comparisons happen in exact arithmetic.

Convention for one-sided checks "lhs <= rhs" with transcendental rhs: a
violation is flagged only when lhs > upper(rhs), so a reported violation is
always real.  A check that additionally wants a *decisive* pass compares
against lower(rhs) and reports indecision when lhs lands inside the bracket.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

import mpmath

_PREC = 128
_SLACK_BITS = 96  # interval half-width: |value| * 2^-_SLACK_BITS


def mpf_to_fraction(x: mpmath.mpf) -> Fraction:
    """Exact conversion; every finite mpf is a dyadic rational."""
    if x == 0:
        return Fraction(0)
    man, exp = mpmath.mpf(x)._mpf_[1], mpmath.mpf(x)._mpf_[2]
    sign = mpmath.mpf(x)._mpf_[0]
    frac = Fraction(man) * Fraction(2) ** exp
    return -frac if sign else frac


def bracket(compute: Callable[[], mpmath.mpf], prec: int = _PREC) -> tuple[Fraction, Fraction]:
    """Evaluate `compute()` at `prec` bits, return exact (lo, hi) with
    lo <= true value <= hi under a 2^-96 relative error allowance."""
    with mpmath.workprec(prec):
        v = mpmath.mpf(compute())
    f = mpf_to_fraction(v)
    slack = abs(f) * Fraction(1, 2**_SLACK_BITS)
    if slack == 0:
        slack = Fraction(1, 2 ** (2 * _SLACK_BITS))
    return f - slack, f + slack


def exp_bracket(x: Fraction | int) -> tuple[Fraction, Fraction]:
    """Exact dyadic bracket of e^x for rational x."""
    xf = Fraction(x)
    return bracket(lambda: mpmath.exp(mpmath.mpf(xf.numerator) / xf.denominator))


def exp_upper(x: Fraction | int) -> Fraction:
    """Exact rational upper bound of e^x."""
    return exp_bracket(x)[1]


def exp_lower(x: Fraction | int) -> Fraction:
    return exp_bracket(x)[0]


def exp_upper_float(x: float) -> float:
    """Float upper bound of e^x for float x (bound sides of sweeps).
    Two ulp steps absorb libm's sub-ulp error."""
    v = math.exp(x)
    return math.nextafter(math.nextafter(v, math.inf), math.inf)


def pow_bracket(base: Fraction, expo: Fraction) -> tuple[Fraction, Fraction]:
    """Bracket of base**expo for positive rational base, rational exponent."""
    if base <= 0:
        raise ValueError("positive base required")
    b = Fraction(base)
    e = Fraction(expo)

    def compute():
        mb = mpmath.mpf(b.numerator) / b.denominator
        me = mpmath.mpf(e.numerator) / e.denominator
        return mpmath.power(mb, me)

    return bracket(compute)


def two_pi_e_pow_bracket(d: int, inner: Fraction) -> tuple[Fraction, Fraction]:
    """Bracket of (2*pi*e * inner)^(d/2) for rational inner > 0."""

    def compute():
        base = 2 * mpmath.pi * mpmath.e * (mpmath.mpf(inner.numerator) / inner.denominator)
        return mpmath.power(base, mpmath.mpf(d) / 2)

    return bracket(compute)
