"""Exact Krawtchouk tables, identity checks, and decay calibration.

The k-th binary Krawtchouk polynomial of length n is

    K_k(x) = C(n,k)^(-1) * sum_j (-1)^j C(x,j) C(n-x,k-j),

evaluated here at integer arguments 0 <= x <= n.  The module stores the
unnormalized integer values C(n,k)*K_k(x), built by a three-term
recurrence whose divisions are exact, and offers:

  * identity checks run entirely in exact arithmetic: the symmetry
    K_k(x) = K_x(k), the reflection K_k(n-x) = (-1)^k K_k(x), the
    orthogonality relation sum_x C(n,x) K_k(x) K_m(x) = 2^n C(n,k)^(-1)
    delta_km, and the sign pattern induced by root localization;
  * calibration of the decay constant c in the uniform bound

        |K_k(x)| <= exp(-c*k*x/n),    integers 0 <= x, k <= n/2,

    by scanning for the extremal triple (n, k, x).

The root-localization check covers 0 <= k <= n/2, the same index range
on which the uniform bound lives; for larger k the interval
[n/2 - sqrt(k(n-k)), n/2 + sqrt(k(n-k))] degenerates and stops
containing the roots (already at n = k = 2 the roots are 1 +/- 1/sqrt 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "KrawtchoukTable",
    "PropertyReport",
    "UniformBoundCalibration",
    "kraw_exact",
    "property_checks",
    "calibrate_uniform_bound",
    "verify_uniform_bound",
]


def kraw_exact(n, k, x) -> Fraction:
    """Evaluate K_k^{(n)}(x) by the alternating binomial sum.

    Deliberately independent of the recurrence behind KrawtchoukTable so
    the two can cross-check each other.
    """
    if not (0 <= k <= n and 0 <= x <= n):
        raise ValueError(f"indices k={k}, x={x} outside [0, {n}]")
    total = 0
    for j in range(k + 1):
        term = math.comb(x, j) * math.comb(n - x, k - j)
        total += -term if j % 2 else term
    return Fraction(total, math.comb(n, k))


class KrawtchoukTable:
    """All values K_k^{(n)}(x) for 0 <= k, x <= n, exactly.

    Rows hold the integer-valued unnormalized polynomials
    Kt_k(x) = C(n,k)*K_k(x), generated by

        (k+1)*Kt_{k+1}(x) = (n-2x)*Kt_k(x) - (n-k+1)*Kt_{k-1}(x),

    every division being exact.  Immutable after construction.
    """

    __slots__ = ("n", "_rows", "_binom")

    def __init__(self, n: int):
        if n < 0:
            raise ValueError("n must be nonnegative")
        self.n = n
        rows = [[1] * (n + 1)]
        if n >= 1:
            rows.append([n - 2 * x for x in range(n + 1)])
        for k in range(1, n):
            prev, cur = rows[k - 1], rows[k]
            nxt = []
            for x in range(n + 1):
                num = (n - 2 * x) * cur[x] - (n - k + 1) * prev[x]
                q, rem = divmod(num, k + 1)
                if rem:
                    raise ArithmeticError("recurrence division not exact")
                nxt.append(q)
            rows.append(nxt)
        self._rows = tuple(tuple(row) for row in rows)
        self._binom = tuple(math.comb(n, k) for k in range(n + 1))

    def unnormalized(self, k: int, x: int) -> int:
        """C(n,k)*K_k(x) as a plain integer."""
        return self._rows[k][x]

    def binom(self, k: int) -> int:
        """C(n,k), the normalization of row k."""
        return self._binom[k]

    def value(self, k: int, x: int) -> Fraction:
        """K_k^{(n)}(x) as an exact Fraction."""
        return Fraction(self._rows[k][x], self._binom[k])


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the exact identity checks for one table length."""

    n: int
    symmetry: bool
    reflection: bool
    orthogonality: bool | None
    unit_bound: bool
    root_pattern: bool
    root_k_max: int

    @property
    def all_passed(self) -> bool:
        checked = [self.symmetry, self.reflection, self.unit_bound,
                   self.root_pattern]
        if self.orthogonality is not None:
            checked.append(self.orthogonality)
        return all(checked)


def _root_pattern_ok(table: KrawtchoukTable, k: int) -> bool:
    """Sign pattern forced by the roots of K_k lying in
    [n/2 - sqrt(k(n-k)), n/2 + sqrt(k(n-k))].

    At integers strictly outside that interval the values must be
    nonzero, positive on the left and of sign (-1)^k on the right; the
    nonzero values must change sign exactly k times overall, so every
    change is accounted for by a root inside.  Membership is decided by
    the integer comparison (n-2x)^2 vs 4k(n-k).
    """
    n = table.n
    bound = 4 * k * (n - k)
    signs = []
    for x in range(n + 1):
        v = table.unnormalized(k, x)
        t = n - 2 * x
        if t * t > bound:
            if v == 0:
                return False
            if t > 0:
                if v < 0:
                    return False
            elif (v > 0) != (k % 2 == 0):
                return False
        if v != 0:
            signs.append(v > 0)
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    return changes == k


def property_checks(n, orthogonality_limit=30) -> PropertyReport:
    """Verify the classical Krawtchouk identities for one length n.

    All comparisons are exact.  Orthogonality is quadratic in the table
    size and is skipped (reported as None) when n exceeds
    orthogonality_limit; the root sign pattern is checked for
    0 <= k <= n/2.
    """
    table = KrawtchoukTable(n)

    symmetry = all(
        table.value(k, x) == table.value(x, k)
        for k in range(n + 1)
        for x in range(k + 1)
    )

    reflection = all(
        table.unnormalized(k, n - x)
        == (-table.unnormalized(k, x) if k % 2 else table.unnormalized(k, x))
        for k in range(n + 1)
        for x in range(n + 1)
    )

    orthogonality = None
    if n <= orthogonality_limit:
        orthogonality = True
        weights = [math.comb(n, x) for x in range(n + 1)]
        for k in range(n + 1):
            row_k = [table.unnormalized(k, x) for x in range(n + 1)]
            for m in range(k + 1):
                inner = sum(
                    weights[x] * row_k[x] * table.unnormalized(m, x)
                    for x in range(n + 1)
                )
                expected = (1 << n) * table.binom(k) if m == k else 0
                if inner != expected:
                    orthogonality = False

    unit_bound = all(
        abs(table.unnormalized(k, x)) <= table.binom(k)
        for k in range(n + 1)
        for x in range(n + 1)
    )

    root_k_max = n // 2
    root_pattern = all(
        _root_pattern_ok(table, k) for k in range(root_k_max + 1)
    )

    return PropertyReport(
        n=n,
        symmetry=symmetry,
        reflection=reflection,
        orthogonality=orthogonality,
        unit_bound=unit_bound,
        root_pattern=root_pattern,
        root_k_max=root_k_max,
    )


@dataclass(frozen=True)
class UniformBoundCalibration:
    """Calibrated decay constant for |K_k(x)| <= exp(-c*k*x/n).

    c_hat is the scanned minimum of -(n/(k*x))*ln|K_k(x)|, clamped into
    (0, 1]; raw_min keeps the unclamped value and argmin the extremal
    triple (n, k, x).
    """

    n_max: int
    c_hat: float
    argmin: tuple[int, int, int]
    raw_min: float


def calibrate_uniform_bound(n_max) -> UniformBoundCalibration:
    """Scan all n <= n_max, integers 1 <= k, x <= n/2 with K_k(x) != 0
    for the smallest decay rate -(n/(k*x))*ln|K_k(x)|.

    The bound holds with the returned c_hat on the scanned range by
    construction; the clamp to 1 only ever lowers the constant, which
    keeps the bound valid while matching the normalization c <= 1.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    raw_min = math.inf
    argmin = (0, 0, 0)
    for n in range(2, n_max + 1):
        table = KrawtchoukTable(n)
        half = n // 2
        for k in range(1, half + 1):
            log_cnk = math.log(table.binom(k))
            scale = n / k
            for x in range(1, half + 1):
                v = table.unnormalized(k, x)
                if v == 0:
                    continue
                rate = -(scale / x) * (math.log(abs(v)) - log_cnk)
                if rate < raw_min:
                    raw_min = rate
                    argmin = (n, k, x)
    return UniformBoundCalibration(
        n_max=n_max,
        c_hat=min(1.0, raw_min),
        argmin=argmin,
        raw_min=raw_min,
    )


def verify_uniform_bound(n_max, c_hat, slack=1e-9) -> int:
    """Independent pass over every integer 0 <= k, x <= n/2, n <= n_max
    asserting ln|K_k(x)| <= -c_hat*k*x/n + slack.

    Returns the number of violations (0 when the bound holds).  The
    additive slack absorbs float rounding at the extremal triple, where
    equality holds by construction.
    """
    violations = 0
    for n in range(1, n_max + 1):
        table = KrawtchoukTable(n)
        half = n // 2
        for k in range(half + 1):
            log_cnk = math.log(table.binom(k))
            for x in range(half + 1):
                v = table.unnormalized(k, x)
                if v == 0:
                    continue
                lhs = math.log(abs(v)) - log_cnk
                if lhs > -c_hat * k * x / n + slack:
                    violations += 1
    return violations
