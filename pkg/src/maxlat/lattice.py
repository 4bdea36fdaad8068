"""Exact lattice-point counting in Euclidean balls of Z^d.

Counts are coefficients of truncated convolution powers of the one-dimensional
norm spectrum, so everything here reduces to integer series arithmetic from
`spectra`.  The module covers plain ball/sphere counts, profile counts (joint
by squared norm and number of coordinates in a marked value class), the
crude two-sided ball-count estimate, concentration masses for the error-set
lemmas, and brute-force shifted-ball counts in low dimension.

Ratios like |E|/|B| down to 2^-511 are produced as exact integer pairs;
transcendental bound sides are compared through outward-rounded rationals
so a reported violation is never a rounding artifact.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .budget import check_enum, check_work
from .rounding import exp_upper, two_pi_e_pow_bracket
from .spectra import (
    NormSpectrum,
    PackedSpectrum,
    convolve_truncated,
    delta_spectrum,
    one_dim_spectrum,
    prefix_sums,
    spectrum_power,
)

__all__ = [
    "BallSpec",
    "MarkedClass",
    "ProfileSpectrum",
    "Lemma4Report",
    "ConcentrationReport",
    "ball_spectrum",
    "ball_count",
    "sphere_count",
    "enumerate_ball",
    "profile_spectrum",
    "lemma4_check",
    "ball_count_table",
    "concentration_masses",
    "shifted_ball_count",
    "symdiff_count",
]


@dataclass(frozen=True)
class BallSpec:
    """Euclidean ball B_N in Z^d with squared-norm budget n = N^2 and
    proportionality constant kappa = N/sqrt(d)."""

    d: int
    N: int

    def __post_init__(self):
        if self.d < 1 or self.N < 1:
            raise ValueError("d >= 1 and N >= 1 required")

    @property
    def n(self) -> int:
        return self.N * self.N

    @property
    def kappa_sq(self) -> Fraction:
        """kappa^2 = n/d, exact."""
        return Fraction(self.n, self.d)

    @property
    def kappa(self) -> float:
        return self.N / math.sqrt(self.d)


class MarkedClass:
    """Decidable class of integer coordinate values: a finite point set,
    optionally joined with a two-sided tail {v : |v| >= t}, or the universal
    class.  The tail is stored as the exact square t^2 (a Fraction), so
    membership v^2 >= t^2 is decided exactly even for irrational t like
    eps*kappa."""

    __slots__ = ("points", "threshold_sq", "universal")

    def __init__(
        self,
        points: Iterable[int] = (),
        threshold_sq: int | Fraction | None = None,
        universal: bool = False,
    ):
        self.points = frozenset(points)
        if threshold_sq is not None and threshold_sq < 0:
            raise ValueError("threshold_sq must be nonnegative")
        self.threshold_sq = threshold_sq
        self.universal = universal

    @classmethod
    def all_values(cls) -> "MarkedClass":
        return cls(universal=True)

    @classmethod
    def none(cls) -> "MarkedClass":
        return cls()

    @classmethod
    def value_set(cls, values: Iterable[int]) -> "MarkedClass":
        return cls(points=values)

    @classmethod
    def abs_at_least(cls, threshold: int | Fraction) -> "MarkedClass":
        if threshold < 0:
            raise ValueError("threshold must be nonnegative")
        return cls(threshold_sq=threshold * threshold)

    @classmethod
    def parse(cls, text: str) -> "MarkedClass":
        """Grammar: "all" | "none" | "abs>=T" | "in{v1,v2,...}"."""
        s = text.strip()
        if s == "all":
            return cls.all_values()
        if s == "none":
            return cls.none()
        m = re.fullmatch(r"abs>=(\d+)", s)
        if m:
            return cls.abs_at_least(int(m.group(1)))
        m = re.fullmatch(r"in\{(-?\d+(?:,-?\d+)*)\}", s)
        if m:
            return cls.value_set(int(tok) for tok in m.group(1).split(","))
        raise ValueError(f"cannot parse marked-class expression {text!r}")

    def contains(self, v: int) -> bool:
        if self.universal:
            return True
        if v in self.points:
            return True
        t2 = self.threshold_sq
        return t2 is not None and v * v >= t2

    def __repr__(self):
        if self.universal:
            return "MarkedClass(all)"
        parts = []
        if self.points:
            parts.append("{" + ",".join(str(v) for v in sorted(self.points)) + "}")
        if self.threshold_sq is not None:
            parts.append(f"v^2>={self.threshold_sq}")
        return "MarkedClass(" + (" u ".join(parts) or "none") + ")"


@dataclass
class ProfileSpectrum:
    """counts[m][j] = number of x in Z^d with |x|^2 = m and exactly j of the
    profiled coordinates in the marked class.  When built with a split r,
    only the first r coordinates are profiled and max_marked = r."""

    d: int
    N: int
    max_norm: int
    max_marked: int
    counts: list[list[int]]

    def row_sums(self) -> list[int]:
        return [sum(row) for row in self.counts]

    def marked_at_most(self, jmax: int) -> int:
        """Number of counted points with at most jmax marked coordinates."""
        hi = min(jmax, self.max_marked)
        if hi < 0:
            return 0
        return sum(sum(row[: hi + 1]) for row in self.counts)


_SPECTRUM_CACHE: dict[tuple[int, int], NormSpectrum] = {}
_CACHE_LOCK = threading.Lock()


def _marked_split(N: int, marked: MarkedClass) -> tuple[NormSpectrum, NormSpectrum]:
    """One-dimensional spectra of the marked values and their complement
    within [-N, N]."""
    a = [0] * (N * N + 1)
    b = [0] * (N * N + 1)
    for v in range(-N, N + 1):
        (a if marked.contains(v) else b)[v * v] += 1
    return (
        NormSpectrum(a, "exact", complete=True),
        NormSpectrum(b, "exact", complete=True),
    )


def ball_spectrum(spec: BallSpec, work_cap: int | None = None) -> NormSpectrum:
    """Exact norm spectrum of B_N in Z^d: coeffs[m] = r_d(m) for m <= N^2.
    Cached per (d, N); callers must not mutate the result."""
    key = (spec.d, spec.N)
    hit = _SPECTRUM_CACHE.get(key)
    if hit is not None:
        return hit
    check_work(spec.d * spec.n * spec.N, work_cap, f"ball spectrum d={spec.d} N={spec.N}")
    out = spectrum_power(one_dim_spectrum(spec.N), spec.d, spec.n)
    with _CACHE_LOCK:
        _SPECTRUM_CACHE.setdefault(key, out)
    return out


def ball_count(spec: BallSpec, mode: str = "exact", work_cap: int | None = None):
    """|B_N intersect Z^d|: the full coefficient sum of the d-fold spectrum."""
    if mode == "exact":
        return ball_spectrum(spec, work_cap).total()
    check_work(spec.d * spec.n * spec.N, work_cap, f"ball count d={spec.d} N={spec.N}")
    one = one_dim_spectrum(spec.N)
    fast = NormSpectrum([float(c) for c in one.coeffs], "fast", complete=True)
    return spectrum_power(fast, spec.d, spec.n).total()


def sphere_count(d: int, m: int, work_cap: int | None = None) -> int:
    """r_d(m) = number of x in Z^d with |x|^2 = m."""
    if m < 0:
        raise ValueError("m >= 0 required")
    if m == 0:
        return 1
    if d < 1:
        return 0
    N = math.isqrt(m)
    check_work(d * m * max(N, 1), work_cap, f"sphere count d={d} m={m}")
    return spectrum_power(one_dim_spectrum(max(N, 1)), d, m).coeffs[m]


def enumerate_ball(spec: BallSpec, enum_cap: int | None = None) -> list[tuple[int, ...]]:
    """All points of B_N intersect Z^d, in lexicographic order, by recursion
    with squared-norm pruning."""
    check_enum((2 * spec.N + 1) ** spec.d, enum_cap, f"ball enumeration d={spec.d} N={spec.N}")
    out: list[tuple[int, ...]] = []
    prefix: list[int] = []

    def descend(depth: int, remaining: int) -> None:
        if depth == spec.d:
            out.append(tuple(prefix))
            return
        vmax = math.isqrt(remaining)
        for v in range(-vmax, vmax + 1):
            prefix.append(v)
            descend(depth + 1, remaining - v * v)
            prefix.pop()

    descend(0, spec.n)
    return out


def profile_spectrum(
    d: int,
    N: int,
    marked: MarkedClass,
    split: int | None = None,
    work_cap: int | None = None,
) -> ProfileSpectrum:
    """Joint exact table counts[m][j]; with split=r only coordinates 1..r are
    profiled.  Factorizes as sum_j C(r,j) A^j B^(r-j) g^(d-r) where A/B are
    the one-dimensional spectra of marked/unmarked values and g = A + B."""
    spec = BallSpec(d, N)
    r = d if split is None else split
    if not 0 <= r <= d:
        raise ValueError("split must lie in [0, d]")
    n = spec.n
    check_work(d * n * N * (r + 1), work_cap, f"profile spectrum d={d} N={N}")
    a, b = _marked_split(N, marked)
    rest = spectrum_power(one_dim_spectrum(N), d - r, n) if r < d else delta_spectrum()
    apow = [delta_spectrum()]
    bpow = [delta_spectrum()]
    for _ in range(r):
        apow.append(convolve_truncated(apow[-1], a, n))
        bpow.append(convolve_truncated(bpow[-1], b, n))
    counts = [[0] * (r + 1) for _ in range(n + 1)]
    for j in range(r + 1):
        term = convolve_truncated(apow[j], bpow[r - j], n)
        if r < d:
            term = convolve_truncated(term, rest, n)
        c = math.comb(r, j)
        for m, v in enumerate(term.coeffs):
            if v:
                counts[m][j] = c * v
    return ProfileSpectrum(d=d, N=N, max_norm=n, max_marked=r, counts=counts)


@dataclass
class Lemma4Report:
    """Two-sided crude ball-count estimate.  `decisive` is False when the
    exact count lands inside the outward-rounded bracket of the upper bound,
    in which case ok is also False (a pass must be decisive)."""

    d: int
    N: int
    lower: int
    count: int
    upper: float
    ok: bool
    decisive: bool


def lemma4_verdict(spec: BallSpec, count: int) -> Lemma4Report:
    """Judge a known exact count against both crude bounds without recounting."""
    floor_kappa = math.isqrt(spec.n // spec.d)
    lower = (2 * floor_kappa + 1) ** spec.d
    up_lo, up_hi = two_pi_e_pow_bracket(spec.d, spec.kappa_sq + Fraction(1, 4))
    lower_ok = lower <= count
    if count <= up_lo:
        upper_ok, decisive = True, True
    elif count > up_hi:
        upper_ok, decisive = False, True
    else:
        upper_ok, decisive = False, False
    return Lemma4Report(
        d=spec.d,
        N=spec.N,
        lower=lower,
        count=count,
        upper=float(up_hi),
        ok=lower_ok and upper_ok and decisive,
        decisive=decisive,
    )


def lemma4_check(spec: BallSpec, work_cap: int | None = None) -> Lemma4Report:
    """(2*floor(kappa)+1)^d <= |B_N cap Z^d| <= (2 pi e)^(d/2) (kappa^2+1/4)^(d/2)."""
    return lemma4_verdict(spec, ball_count(spec, work_cap=work_cap))


def ball_count_table(d_max: int, N_max: int, work_cap: int | None = None) -> dict[tuple[int, int], int]:
    """Exact |B_N cap Z^d| for all 1 <= d <= d_max, 1 <= N <= N_max from one
    incremental spectrum per dimension.  Values v with v^2 > N^2 never occur
    in points of norm <= N^2, so a single vmax = N_max spectrum serves every
    radius via prefix sums."""
    budget = N_max * N_max
    check_work(d_max * budget * N_max, work_cap, f"ball count table d<={d_max} N<={N_max}")
    packed = PackedSpectrum(budget, d_max, N_max)
    table: dict[tuple[int, int], int] = {}
    for d in range(1, d_max + 1):
        packed.add_coordinate(N_max)
        pref = prefix_sums(packed.coefficients())
        for N in range(1, N_max + 1):
            table[(d, N)] = pref[N * N]
    return table


@dataclass
class ConcentrationReport:
    """Exact error-set mass against its explicit exponential bound.
    `violation` is only ever set when the lemma's hypotheses hold and the
    exact count beats the outward-rounded upper bound of the rhs."""

    lemma: str
    d: int
    N: int
    params: dict
    set_count: int
    ball_total: int
    ratio: float
    bound: float
    hypothesis_met: bool
    violation: bool


def _marked_tail_count(
    d: int,
    n: int,
    a: NormSpectrum,
    b: NormSpectrum,
    jmax: int,
    what: str,
    work_cap: int | None,
) -> int:
    """#{x in B : at most jmax coordinates marked} = sum_{j<=jmax} C(d,j) *
    prefix(A^j B^(d-j), n).  Efficient for small jmax: one binary-power for
    B^(d-jmax), then jmax successive multiplies."""
    if jmax < 0:
        return 0
    jmax = min(jmax, d)
    check_work(d * n * max(1, math.isqrt(n)) * (jmax + 2), work_cap, what)
    bpow = spectrum_power(b, d - jmax, n)
    bchain = [bpow]
    for _ in range(jmax):
        bpow = convolve_truncated(bpow, b, n)
        bchain.append(bpow)
    total = 0
    apow = delta_spectrum()
    for j in range(jmax + 1):
        if j > 0:
            apow = convolve_truncated(apow, a, n)
        term = convolve_truncated(apow, bchain[jmax - j], n)
        total += math.comb(d, j) * term.prefix(n)
    return total


def concentration_masses(
    spec: BallSpec,
    lemma: str,
    *,
    eps1: Fraction | None = None,
    eps2: Fraction | None = None,
    eps: Fraction | None = None,
    r: int | None = None,
    k: int | None = None,
    work_cap: int | None = None,
) -> ConcentrationReport:
    """Exact |E|/|B| for the three error-set lemmas, with the matching
    explicit bound:

    - "few-large-coordinates" (eps1, eps2): E = {x : #
      {i : |x_i| >= eps2*kappa} <= eps1*d}, bound 2 e^(-d/10);
      hypotheses kappa >= 10, eps1, eps2 in (0, 1/10].
    - "small-partial-norm" (eps, r): E = {x : sum_{i<=r} x_i^2 <
      eps^3 kappa^2 r}, bound 4 e^(-eps r/10); hypotheses kappa >= 10,
      eps in (0, 1/50].
    - "few-unit-coordinates" (k): E = {x : #{i : x_i in {-1,1}} <= n-k},
      bound 2^(1-k); hypotheses kappa <= 1/5, n >= k >= 2^9 max(1, kappa^6 n).
    """
    d, N, n = spec.d, spec.N, spec.n
    ball = ball_spectrum(spec, work_cap).total()
    ksq = spec.kappa_sq

    if lemma == "few-large-coordinates":
        if eps1 is None or eps2 is None:
            raise ValueError("eps1 and eps2 required")
        e1, e2 = Fraction(eps1), Fraction(eps2)
        hyp = ksq >= 100 and 0 < e1 <= Fraction(1, 10) and 0 < e2 <= Fraction(1, 10)
        marked = MarkedClass(threshold_sq=e2 * e2 * ksq)
        a, b = _marked_split(N, marked)
        jmax = math.floor(e1 * d)
        count = _marked_tail_count(d, n, a, b, jmax, f"few-large-coordinates d={d} N={N}", work_cap)
        bound_hi = 2 * exp_upper(Fraction(-d, 10))
        params = {"eps1": str(e1), "eps2": str(e2), "jmax": jmax}
    elif lemma == "small-partial-norm":
        if eps is None or r is None:
            raise ValueError("eps and r required")
        ee = Fraction(eps)
        if not 1 <= r <= d:
            raise ValueError("1 <= r <= d required")
        hyp = ksq >= 100 and 0 < ee <= Fraction(1, 50)
        thr = ee**3 * ksq * r
        lmax = min(-((-thr.numerator) // thr.denominator) - 1, n)
        count = 0
        if lmax >= 0:
            check_work(d * n * N * 2, work_cap, f"small-partial-norm d={d} N={N}")
            front = spectrum_power(one_dim_spectrum(N), r, min(lmax, n))
            rest = spectrum_power(one_dim_spectrum(N), d - r, n)
            pref = prefix_sums(rest.coeffs)
            top = len(pref) - 1
            for l, cnt in enumerate(front.coeffs):
                if cnt:
                    count += cnt * pref[min(n - l, top)]
        bound_hi = 4 * exp_upper(-ee * r / 10)
        params = {"eps": str(ee), "r": r, "lmax": lmax}
    elif lemma == "few-unit-coordinates":
        if k is None:
            raise ValueError("k required")
        hyp = 25 * n <= d and n >= k >= 512 * max(Fraction(1), ksq**3 * n)
        a, b = _marked_split(N, MarkedClass.value_set({-1, 1}))
        jmax = n - k
        count = _marked_tail_count(d, n, a, b, jmax, f"few-unit-coordinates d={d} N={N}", work_cap)
        bound_hi = Fraction(2) ** (1 - k)
        params = {"k": k, "jmax": jmax}
    else:
        raise ValueError(f"unknown lemma {lemma!r}")

    violation = bool(hyp) and count > bound_hi * ball
    return ConcentrationReport(
        lemma=lemma,
        d=d,
        N=N,
        params=params,
        set_count=count,
        ball_total=ball,
        ratio=float(Fraction(count, ball)),
        bound=float(bound_hi),
        hypothesis_met=bool(hyp),
        violation=violation,
    )


def _dyadic_fraction(x) -> Fraction:
    """Exact value of a float/int/Fraction input; floats are dyadic."""
    return x if isinstance(x, Fraction) else Fraction(x)


def _scaled_geometry(R, z: Sequence) -> tuple[int, list[int], int]:
    """Common-denominator integer model: returns (D, [z_i*D], (R*D)^2)."""
    rz = [_dyadic_fraction(c) for c in z]
    rr = _dyadic_fraction(R)
    D = 1
    for f in rz + [rr]:
        D = D * f.denominator // math.gcd(D, f.denominator)
    zi = [int(f * D) for f in rz]
    rd = int(rr * D)
    return D, zi, rd * rd


def _enumerate_shifted(r: int, D: int, zi: list[int], r2: int) -> Iterator[tuple[int, ...]]:
    """Integer points y with sum (y_i*D - z_i*D)^2 <= (R*D)^2, pruned recursion."""
    point: list[int] = []

    def descend(depth: int, remaining: int) -> Iterator[tuple[int, ...]]:
        if depth == r:
            yield tuple(point)
            return
        c = zi[depth]
        # conservative float window, then exact integer check per candidate
        s = math.sqrt(remaining) / D
        lo = math.floor(c / D - s) - 1
        hi = math.ceil(c / D + s) + 1
        for y in range(lo, hi + 1):
            t = y * D - c
            rem = remaining - t * t
            if rem >= 0:
                point.append(y)
                yield from descend(depth + 1, rem)
                point.pop()

    yield from descend(0, r2)


def shifted_ball_count(r: int, R, z: Sequence, enum_cap: int | None = None) -> int:
    """|(z + B_R) cap Z^r| by exact enumeration (small r only)."""
    if len(z) != r:
        raise ValueError("z must have r components")
    check_enum((2 * math.ceil(float(R)) + 3) ** r, enum_cap, f"shifted ball r={r}")
    D, zi, r2 = _scaled_geometry(R, z)
    return sum(1 for _ in _enumerate_shifted(r, D, zi, r2))


def symdiff_count(r: int, R, z: Sequence, enum_cap: int | None = None) -> int:
    """|(B_R cap Z^r) symdiff ((z + B_R) cap Z^r)| by exact enumeration."""
    if len(z) != r:
        raise ValueError("z must have r components")
    check_enum((2 * math.ceil(float(R)) + 3) ** r, enum_cap, f"symdiff r={r}")
    D, zi, r2 = _scaled_geometry(R, z)
    shifted = set(_enumerate_shifted(r, D, zi, r2))
    centered = set(_enumerate_shifted(r, D, [0] * r, r2))
    return len(shifted ^ centered)
