"""Discrete Fourier multipliers of ball averaging operators on Z^d.

The multiplier of the averaging operator over B_N cap Z^d at frequency xi is

    m_N(xi) = (1/|B|) sum_{x in B} prod_j cos(2 pi x_j xi_j),

evaluated here by a cosine-weighted truncated-convolution DP over squared
norm: coordinate j contributes the one-dimensional spectrum with weight
cos(2 pi v xi_j) at slot v^2.  The DP runs in float64, batched over
frequencies.  Ball counts overflow float64 far below the dimensions we
sweep, so both numerator and denominator follow a shared power-of-two
rescale schedule derived from the unweighted (denominator) DP; weighted
coefficients are dominated pointwise by unweighted ones, so one schedule
keeps both in range, and since scaling by 2^-512 is exact, the schedule
cancels exactly in every prefix ratio.  At xi = 0 all weights are exactly
1.0 and the ratio is bit-for-bit 1.

Also here: lower-dimensional multipliers at non-square radii, the continuous
ball multiplier by oscillatory quadrature, the heat-type semigroup symbol,
frequency folding, and the small-scale approximants with their exact
alternating mass.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .budget import check_work
from .lattice import BallSpec, ball_spectrum, enumerate_ball

__all__ = [
    "TorusPoint",
    "FoldedFrequency",
    "MultiplierRequest",
    "QuadratureError",
    "m_N",
    "m_batch",
    "m_lower",
    "m_lower_prefix_batch",
    "signed_mass_batch",
    "multiplier_table",
    "continuous_ball_multiplier",
    "semigroup_multiplier",
    "lambda_approximants",
    "lambda_batch",
    "LambdaApproximant",
    "alternating_mass",
    "fold_frequency",
    "alternating_mass_identity_check",
]

_TWO_PI = 2.0 * math.pi

# Rescale when any denominator coefficient tops 2^900; one step of 2^-512
# leaves everything comfortably inside float64 range in both directions.
_RESCALE_TRIGGER = 2.0**900
_RESCALE_STEP = 2.0**-512


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class TorusPoint:
    """Frequency on T^d with every component reduced to [-1/2, 1/2); the
    torus norm then is the plain Euclidean norm of the components."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[float]):
        self.components = tuple(
            x - math.floor(x + 0.5) for x in (float(c) for c in components)
        )
        if not self.components:
            raise ValueError("at least one component required")

    @classmethod
    def zero(cls, d: int) -> "TorusPoint":
        return cls([0.0] * d)

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def norm_sq(self) -> float:
        return math.fsum(c * c for c in self.components)

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    def as_array(self) -> np.ndarray:
        return np.array(self.components, dtype=np.float64)

    def __eq__(self, other):
        if not isinstance(other, TorusPoint):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return f"TorusPoint({list(self.components)!r})"


@dataclass(frozen=True)
class FoldedFrequency:
    """Half-integer shift of the coordinates where the cosine is negative:
    xi_prime has |component| <= 1/4 everywhere and sin^2(pi xi'_i) =
    cos^2(pi xi_i) exactly on v_set."""

    xi_prime: TorusPoint
    v_set: frozenset


@dataclass(frozen=True)
class MultiplierRequest:
    """A multiplier evaluation: full-dimensional for spec.xi, or the
    lower-dimensional multiplier of squared radius lower_dim=(r, l).
    Only fast (float64 DP) mode exists; exact rational cosines do not."""

    spec: BallSpec
    xi: TorusPoint
    mode: str = "fast"
    lower_dim: tuple[int, int] | None = None

    def __post_init__(self):
        if self.mode != "fast":
            raise ValueError("only fast mode is available")
        expected = self.lower_dim[0] if self.lower_dim else self.spec.d
        if self.xi.d != expected:
            raise ValueError(f"xi has dimension {self.xi.d}, expected {expected}")

    def evaluate(self, work_cap: int | None = None) -> float:
        if self.lower_dim is None:
            return m_N(self.spec, self.xi, work_cap)
        r, l = self.lower_dim
        return m_lower(r, l, self.xi, work_cap)


_DEN_PLANS: dict[tuple[int, int, int], tuple[np.ndarray, tuple[int, ...]]] = {}
_PLAN_LOCK = threading.Lock()


def _squares(vmax: int, budget: int) -> list[tuple[int, int]]:
    return [(v, v * v) for v in range(1, vmax + 1) if v * v <= budget]


def _den_plan(d: int, vmax: int, budget: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Unweighted DP coefficients and the rescale schedule (coordinate
    indices after which a 2^-512 step was applied)."""
    key = (d, vmax, budget)
    hit = _DEN_PLANS.get(key)
    if hit is not None:
        return hit
    sq = _squares(vmax, budget)
    den = np.zeros(budget + 1)
    den[0] = 1.0
    schedule = []
    for j in range(d):
        new = den.copy()
        for _, s in sq:
            new[s:] += 2.0 * den[: budget + 1 - s]
        den = new
        if den.max() > _RESCALE_TRIGGER:
            den *= _RESCALE_STEP
            schedule.append(j)
    den.setflags(write=False)
    result = (den, tuple(schedule))
    with _PLAN_LOCK:
        _DEN_PLANS.setdefault(key, result)
    return result


def _weighted_dp(
    d: int,
    vmax: int,
    budget: int,
    weight_fn: Callable[[int], np.ndarray],
    batch: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the weighted DP alongside the cached unweighted plan.

    weight_fn(j) -> (batch, vmax+1) array of w_j(v); |w| <= 1 is required
    so the shared rescale schedule keeps the numerator in range.  Returns
    (num (batch, budget+1), den (budget+1,)), both carrying the same exact
    power-of-two scale."""
    den, schedule = _den_plan(d, vmax, budget)
    sq = _squares(vmax, budget)
    resteps = set(schedule)
    num = np.zeros((batch, budget + 1))
    num[:, 0] = 1.0
    for j in range(d):
        w = weight_fn(j)
        new = num * w[:, 0:1]
        for v, s in sq:
            new[:, s:] += (2.0 * w[:, v])[:, None] * num[:, : budget + 1 - s]
        num = new
        if j in resteps:
            num *= _RESCALE_STEP
    return num, den


def _as_xi_matrix(xi: np.ndarray, d: int) -> np.ndarray:
    arr = np.asarray(xi, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != d:
        raise ValueError(f"frequency matrix has {arr.shape[1]} columns, expected {d}")
    return arr


def m_batch(spec: BallSpec, xi: np.ndarray, work_cap: int | None = None) -> np.ndarray:
    """m_N at a batch of frequencies; xi is (B, d) (or (d,) for one point)."""
    arr = _as_xi_matrix(xi, spec.d)
    check_work(spec.d * spec.n * spec.N, work_cap, f"multiplier DP d={spec.d} N={spec.N}")
    vs = np.arange(spec.N + 1, dtype=np.float64)

    def weights(j: int) -> np.ndarray:
        return np.cos(_TWO_PI * np.outer(arr[:, j], vs))

    num, den = _weighted_dp(spec.d, spec.N, spec.n, weights, arr.shape[0])
    return num.sum(axis=1) / den.sum()


def m_N(spec: BallSpec, xi: TorusPoint, work_cap: int | None = None) -> float:
    """The multiplier m_N(xi) = (1/|B|) sum_{x in B} prod_j cos(2 pi x_j xi_j)."""
    if xi.d != spec.d:
        raise ValueError("dimension mismatch")
    return float(m_batch(spec, xi.as_array(), work_cap)[0])


def m_lower_prefix_batch(
    r: int, budget: int, eta: np.ndarray, work_cap: int | None = None
) -> np.ndarray:
    """All lower-dimensional multipliers at once: entry [b, l] is the
    r-dimensional multiplier of the ball of squared radius l at eta[b].
    One DP serves every l because the ball of squared radius l is exactly
    the truncation of the same series at l."""
    arr = _as_xi_matrix(eta, r)
    vmax = math.isqrt(budget)
    check_work(r * budget * max(vmax, 1), work_cap, f"lower multiplier DP r={r} l<={budget}")
    vs = np.arange(vmax + 1, dtype=np.float64)

    def weights(j: int) -> np.ndarray:
        return np.cos(_TWO_PI * np.outer(arr[:, j], vs))

    num, den = _weighted_dp(r, vmax, budget, weights, arr.shape[0])
    return np.cumsum(num, axis=1) / np.cumsum(den)


def m_lower(r: int, l: int, eta: TorusPoint, work_cap: int | None = None) -> float:
    """Lower-dimensional multiplier of squared radius l (any integer >= 0)."""
    if eta.d != r:
        raise ValueError("dimension mismatch")
    if l < 0:
        raise ValueError("l >= 0 required")
    return float(m_lower_prefix_batch(r, l, eta.as_array(), work_cap)[0, l])


def signed_mass_batch(
    spec: BallSpec, in_v: np.ndarray, work_cap: int | None = None
) -> np.ndarray:
    """(1/|B|) sum_x (-1)^(sum of x_i over flagged coordinates), batched over
    flag rows in_v of shape (B, d)."""
    flags = np.asarray(in_v, dtype=bool)
    if flags.ndim == 1:
        flags = flags[None, :]
    if flags.shape[1] != spec.d:
        raise ValueError("flag matrix has wrong width")
    check_work(spec.d * spec.n * spec.N, work_cap, f"signed mass DP d={spec.d} N={spec.N}")
    alt = np.where(np.arange(spec.N + 1) % 2 == 0, 1.0, -1.0)
    ones = np.ones(spec.N + 1)

    def weights(j: int) -> np.ndarray:
        return np.where(flags[:, j][:, None], alt[None, :], ones[None, :])

    num, den = _weighted_dp(spec.d, spec.N, spec.n, weights, flags.shape[0])
    return num.sum(axis=1) / den.sum()


def multiplier_table(spec: BallSpec, M: int, work_cap: int | None = None) -> np.ndarray:
    """m_N(k/M) for every k in (Z/MZ)^d as an array of shape (M,)*d, with
    cosines read from one table indexed by v*k mod M so values are
    bit-reproducible across runs and platforms."""
    d = spec.d
    check_work(spec.d * spec.n * spec.N * M, work_cap, f"multiplier table d={d} M={M}")
    total = M**d
    cos_tab = np.cos(_TWO_PI * np.arange(M) / M)
    rows = np.arange(total)
    kcols = [(rows // M ** (d - 1 - j)) % M for j in range(d)]
    vs = np.arange(spec.N + 1)

    def weights(j: int) -> np.ndarray:
        idx = (np.outer(kcols[j], vs)) % M
        return cos_tab[idx]

    num, den = _weighted_dp(d, spec.N, spec.n, weights, total)
    values = num.sum(axis=1) / den.sum()
    return values.reshape((M,) * d)


def continuous_ball_multiplier(d: int, R: float, rho: float) -> float:
    """Normalized Fourier transform of the solid ball of radius R in R^d at
    |xi| = rho, via the radial slice integral
    int_{-1}^{1} (1-t^2)^((d-1)/2) cos(2 pi R rho t) dt / B(1/2, (d+1)/2)."""
    if d < 1:
        raise ValueError("d >= 1 required")
    if R <= 0 or rho < 0:
        raise ValueError("R > 0 and rho >= 0 required")
    w = _TWO_PI * R * rho
    if w == 0.0:
        return 1.0
    p = 0.5 * (d - 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, abserr = integrate.quad(
                lambda t: (1.0 - t * t) ** p,
                -1.0,
                1.0,
                weight="cos",
                wvar=w,
                limit=500,
                epsabs=1e-12,
                epsrel=0.0,
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"d={d} R={R} rho={rho}: {exc}") from exc
    if not math.isfinite(val) or abserr > 1e-10:
        raise QuadratureError(f"d={d} R={R} rho={rho}: abserr={abserr}")
    return val / special.beta(0.5, 0.5 * (d + 1))


def semigroup_multiplier(t: float, xi: TorusPoint) -> float:
    """exp(-t sum_i sin^2(pi xi_i))."""
    if t < 0:
        raise ValueError("t >= 0 required")
    s = math.fsum(math.sin(math.pi * c) ** 2 for c in xi.components)
    return math.exp(-t * s)


def fold_frequency(xi: TorusPoint) -> FoldedFrequency:
    """Shift each component with |xi_i| > 1/4 by -+1/2 toward zero; the
    shifted set is exactly where cos(2 pi xi_i) < 0."""
    folded = []
    v_set = []
    for i, c in enumerate(xi.components):
        if c > 0.25:
            folded.append(c - 0.5)
            v_set.append(i)
        elif c < -0.25:
            folded.append(c + 0.5)
            v_set.append(i)
        else:
            folded.append(c)
    return FoldedFrequency(xi_prime=TorusPoint(folded), v_set=frozenset(v_set))


def alternating_mass(spec: BallSpec, work_cap: int | None = None) -> Fraction:
    """Exact (1/|B|) sum_{x in B} (-1)^(sum x_i).  Per coordinate value v the
    sign is (-1)^v = (-1)^(v^2), so the signed spectrum is the plain spectrum
    with alternating signs and the mass is an alternating partial sum."""
    spectrum = ball_spectrum(spec, work_cap)
    alt = sum(c if m % 2 == 0 else -c for m, c in enumerate(spectrum.coeffs))
    return Fraction(alt, spectrum.total())


@dataclass(frozen=True)
class LambdaApproximant:
    branch: int
    value: float


def lambda_approximants(spec: BallSpec, xi: TorusPoint, work_cap: int | None = None) -> LambdaApproximant:
    """Small-scale multiplier approximant: branch 1 (heat-type in sin^2) when
    at most half the coordinates have negative cosine, else branch 2 (the
    alternating mass times a heat factor in cos^2).  Ties go to branch 1."""
    if xi.d != spec.d:
        raise ValueError("dimension mismatch")
    branches, values = lambda_batch(spec, xi.as_array(), work_cap)
    return LambdaApproximant(branch=int(branches[0]), value=float(values[0]))


def lambda_batch(
    spec: BallSpec, xi: np.ndarray, work_cap: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized lambda_approximants: returns (branches, values)."""
    arr = _as_xi_matrix(xi, spec.d)
    ksq = float(spec.kappa_sq)
    sin_sum = np.sum(np.sin(np.pi * arr) ** 2, axis=1)
    cos_sum = np.sum(np.cos(np.pi * arr) ** 2, axis=1)
    nv = np.sum(np.abs(arr) > 0.25, axis=1)
    branch1 = 2 * nv <= spec.d
    if bool(np.all(branch1)):
        mass = 0.0  # branch 2 unused; skip the exact spectrum
    else:
        mass = float(alternating_mass(spec, work_cap))
    values = np.where(
        branch1, np.exp(-ksq * sin_sum), mass * np.exp(-ksq * cos_sum)
    )
    return np.where(branch1, 1, 2), values


def alternating_mass_identity_check(spec: BallSpec, enum_cap: int | None = None) -> bool:
    """DP corner value m_N(1/2,...,1/2) against the brute-force signed sum."""
    corner = TorusPoint([0.5] * spec.d)
    dp = m_N(spec, corner)
    points = enumerate_ball(spec, enum_cap)
    signed = sum(-1 if sum(x) % 2 else 1 for x in points)
    brute = signed / len(points)
    return abs(dp - brute) <= 1e-12
