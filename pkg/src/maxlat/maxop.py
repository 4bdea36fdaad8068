"""Averaging, maximal, semigroup, and square-function operators on small
periodized grids.

Functions live on (Z/MZ)^d with d <= 5.  For compactly supported inputs the
torus models Z^d exactly as long as nothing wraps: M > 2N + diam(support)
guarantees that a ball average of radius N never reaches around the period,
and `faithful=True` enforces that guard.  Averaging is done spectrally
(forward transform, multiply by m_N at the exact rational frequencies k/M,
inverse transform), which agrees with direct convolution by the normalized
ball indicator to rounding error.

Operator-norm probing only ever produces lower bounds: the probes report
the best ratio ||sup_N |M_N f|||_2 / ||f||_2 found over structured inputs
(delta, ball indicator, alternating signs) and seeded random trials, and
never claim an upper bound from sampling.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .budget import check_enum
from .lattice import BallSpec, enumerate_ball
from .multiplier import multiplier_table
from .verifier import DEFAULT_SEED, dyadic_radii

MAGIC = b"MAXLAT01"


@lru_cache(maxsize=64)
def _mult_table(spec: BallSpec, M: int) -> np.ndarray:
    """Shared read-only multiplier tables; probes reuse the same (spec, M)
    pair across hundreds of inputs."""
    return multiplier_table(spec, M)


class WraparoundError(ValueError):
    """Faithful-mode averaging would reach around the period."""


class GridFunction:
    """Complex function on (Z/MZ)^d, d <= 5, with a cached l2 norm.

    Values are stored as a row-major complex128 array of shape (M,)*d and
    treated as immutable once constructed; the cached norm must stay within
    1e-12 relative of a recomputation from the values."""

    __slots__ = ("d", "M", "values", "_norm")

    def __init__(self, d: int, M: int, values):
        if not 1 <= d <= 5:
            raise ValueError("d must lie in 1..5")
        if M < 1:
            raise ValueError("M must be positive")
        vals = np.asarray(values, dtype=np.complex128)
        if vals.shape != (M,) * d:
            vals = vals.reshape((M,) * d)
        self.d = d
        self.M = M
        self.values = vals
        self._norm = float(np.linalg.norm(vals))

    @property
    def norm(self) -> float:
        return self._norm

    def recompute_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def spectral_norm(self) -> float:
        """l2 norm from the transform side; equals `norm` by Parseval."""
        return float(np.linalg.norm(np.fft.fftn(self.values))) / math.sqrt(self.M**self.d)

    def support_diameter(self) -> int:
        """Largest per-axis extent of the support in centered coordinates.
        Zero for the zero function and for single points."""
        idx = np.argwhere(self.values != 0)
        if idx.size == 0:
            return 0
        centered = np.where(idx > self.M // 2, idx - self.M, idx)
        return int((centered.max(axis=0) - centered.min(axis=0)).max())

    @classmethod
    def delta(cls, d: int, M: int) -> "GridFunction":
        vals = np.zeros((M,) * d, dtype=np.complex128)
        vals[(0,) * d] = 1.0
        return cls(d, M, vals)

    @classmethod
    def ball_indicator(cls, d: int, M: int, N: int) -> "GridFunction":
        """Indicator of B_N around the origin, placed periodically."""
        vals = np.zeros((M,) * d, dtype=np.complex128)
        for point in enumerate_ball(BallSpec(d, N)):
            vals[tuple(v % M for v in point)] += 1.0
        return cls(d, M, vals)

    @classmethod
    def alternating_ball(cls, d: int, M: int, N: int) -> "GridFunction":
        """(-1)^(x_1+...+x_d) on B_N: the corner-frequency adversary."""
        if M % 2:
            raise ValueError("alternating signs need an even period")
        vals = np.zeros((M,) * d, dtype=np.complex128)
        for point in enumerate_ball(BallSpec(d, N)):
            vals[tuple(v % M for v in point)] += (-1.0) ** (sum(point) % 2)
        return cls(d, M, vals)

    @classmethod
    def random(cls, d: int, M: int, seed: int, trial: int = 0) -> "GridFunction":
        seq = np.random.SeedSequence(int(seed), spawn_key=(int(trial),))
        rng = np.random.Generator(np.random.PCG64(seq))
        vals = rng.normal(size=(M,) * d) + 1j * rng.normal(size=(M,) * d)
        return cls(d, M, vals)


def _faithful_guard(f: GridFunction, N: int) -> None:
    diam = f.support_diameter()
    if f.M <= 2 * N + diam:
        raise WraparoundError(
            f"period {f.M} too small for radius {N} with support diameter {diam}: "
            f"need M > {2 * N + diam}"
        )


def apply_avg(f: GridFunction, N: int, faithful: bool = False) -> GridFunction:
    """Ball average of radius N, computed spectrally.  With faithful=True the
    wraparound guard M > 2N + diam(support) is enforced so the result matches
    the Z^d operator on the support; otherwise periodic semantics apply."""
    if faithful:
        _faithful_guard(f, N)
    table = _mult_table(BallSpec(f.d, N), f.M)
    out = np.fft.ifftn(np.fft.fftn(f.values) * table)
    return GridFunction(f.d, f.M, out)


def apply_avg_direct(f: GridFunction, N: int, enum_cap: int | None = None) -> GridFunction:
    """Same average by explicit convolution with the normalized indicator;
    the slow reference path for the spectral implementation."""
    points = enumerate_ball(BallSpec(f.d, N), enum_cap)
    acc = np.zeros_like(f.values)
    for point in points:
        acc += np.roll(f.values, point, axis=tuple(range(f.d)))
    return GridFunction(f.d, f.M, acc / len(points))


def semigroup_apply(f: GridFunction, t: float) -> GridFunction:
    """Heat-type semigroup: multiply the spectrum by
    exp(-t sum_i sin^2(pi k_i / M))."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    M, d = f.M, f.d
    line = np.sin(np.pi * np.arange(M) / M) ** 2
    total = np.zeros((M,) * d)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = M
        total = total + line.reshape(shape)
    out = np.fft.ifftn(np.fft.fftn(f.values) * np.exp(-t * total))
    return GridFunction(d, M, out)


def dyadic_maximal(f: GridFunction, dyadic_set, faithful: bool = False) -> GridFunction:
    """Pointwise sup over N in the set of |M_N f|.  Output values are the
    nonnegative reals of the sup, stored complex."""
    radii = sorted(set(int(N) for N in dyadic_set))
    if not radii:
        raise ValueError("dyadic set must be nonempty")
    best = None
    for N in radii:
        mag = np.abs(apply_avg(f, N, faithful).values)
        best = mag if best is None else np.maximum(best, mag)
    return GridFunction(f.d, f.M, best.astype(np.complex128))


def square_function_apply(f: GridFunction, C1=1, C2=1, faithful: bool = False) -> GridFunction:
    """Square function over the dyadic radii N with C1 sqrt(d) <= N <= C2 d:
    Sf(x) = sqrt(sum_N |M_N f(x) - P_(N^2/d) f(x)|^2)."""
    radii = dyadic_radii(f.d, C1, C2)
    if not radii:
        raise ValueError(f"no dyadic radii between {C1}*sqrt({f.d}) and {C2}*{f.d}")
    acc = np.zeros((f.M,) * f.d)
    for N in radii:
        gap = apply_avg(f, N, faithful).values - semigroup_apply(f, N * N / f.d).values
        acc += np.abs(gap) ** 2
    return GridFunction(f.d, f.M, np.sqrt(acc).astype(np.complex128))


def square_function_norm_spectral(f: GridFunction, C1=1, C2=1) -> float:
    """||Sf||_2 by Plancherel: pull the squared gaps to the frequency side,
    sum |m_N(k/M) - p_(N^2/d)(k/M)|^2 |f_hat(k)|^2 over k and N.  An
    independent route to the same number as the spatial computation."""
    radii = dyadic_radii(f.d, C1, C2)
    if not radii:
        raise ValueError(f"no dyadic radii between {C1}*sqrt({f.d}) and {C2}*{f.d}")
    M, d = f.M, f.d
    fhat_sq = np.abs(np.fft.fftn(f.values)) ** 2
    line = np.sin(np.pi * np.arange(M) / M) ** 2
    s_total = np.zeros((M,) * d)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = M
        s_total = s_total + line.reshape(shape)
    total = 0.0
    for N in radii:
        table = _mult_table(BallSpec(d, N), M)
        gap_sq = (table - np.exp(-(N * N / d) * s_total)) ** 2
        total += float(np.sum(gap_sq * fhat_sq))
    return math.sqrt(total / M**d)


@dataclass
class ProbeReport:
    """Lower-bound search result: best ratio ||sup_N |M_N f|||_2 / ||f||_2
    over the probed inputs, plus the input that achieved it."""

    best_ratio: float
    witness: str
    ratios: dict
    d: int
    M: int
    dyadic_set: tuple
    trials: int
    seed: int

    def payload(self) -> dict:
        return {
            "best_ratio": self.best_ratio,
            "witness": self.witness,
            "ratios": self.ratios,
            "d": self.d,
            "M": self.M,
            "dyadic_set": list(self.dyadic_set),
            "trials": self.trials,
            "seed": self.seed,
        }


def operator_norm_probe(
    d: int,
    M: int,
    dyadic_set,
    trials: int = 0,
    seed: int = DEFAULT_SEED,
) -> ProbeReport:
    """Probe the maximal operator's l2 norm from below.  Structured inputs
    (delta, ball indicator, alternating signs at the corner frequency) always
    run; `trials` adds seeded random complex fields.  Inputs are evaluated in
    a fixed order so the report is deterministic for a given seed."""
    if not 1 <= d <= 5:
        raise ValueError("d must lie in 1..5")
    radii = sorted(set(int(N) for N in dyadic_set))
    if not radii:
        raise ValueError("dyadic set must be nonempty")
    n_top = max(radii)
    inputs: list[tuple[str, GridFunction]] = [("delta", GridFunction.delta(d, M))]
    inputs.append((f"indicator-{n_top}", GridFunction.ball_indicator(d, M, n_top)))
    if M % 2 == 0:
        inputs.append((f"alternating-{n_top}", GridFunction.alternating_ball(d, M, n_top)))
    for trial in range(trials):
        inputs.append((f"random-{trial:03d}", GridFunction.random(d, M, seed, trial)))
    ratios: dict = {}
    best = -math.inf
    witness = ""
    for name, f in inputs:
        if f.norm == 0.0:
            continue
        ratio = dyadic_maximal(f, radii).norm / f.norm
        ratios[name] = ratio
        if ratio > best:
            best = ratio
            witness = name
    return ProbeReport(
        best_ratio=best,
        witness=witness,
        ratios=ratios,
        d=d,
        M=M,
        dyadic_set=tuple(radii),
        trials=trials,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# ellipsoid averages by direct enumeration

@dataclass(frozen=True)
class EllipsoidSpec:
    """Anisotropic ball {x : sum (lambda_i x_i)^2 <= t^2} with strictly
    increasing axis weights confined to [1, sqrt(2))."""

    d: int
    lambdas: tuple
    t: float

    def __post_init__(self):
        if not 1 <= self.d <= 4:
            raise ValueError("ellipsoid probes support d in 1..4")
        lams = tuple(float(v) for v in self.lambdas)
        if len(lams) != self.d:
            raise ValueError("need one axis weight per dimension")
        if lams[0] < 1.0 or lams[-1] >= math.sqrt(2.0):
            raise ValueError("axis weights must lie in [1, sqrt(2))")
        if any(a >= b for a, b in zip(lams, lams[1:])):
            raise ValueError("axis weights must be strictly increasing")
        object.__setattr__(self, "lambdas", lams)
        if self.t < 0:
            raise ValueError("radius must be nonnegative")


def ellipsoid_points(spec: EllipsoidSpec, t: float | None = None, enum_cap: int | None = None) -> list:
    """All lattice points of the dilated ellipsoid, in lexicographic order."""
    radius = spec.t if t is None else float(t)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    halves = [int(radius / lam) for lam in spec.lambdas]
    box = 1
    for h in halves:
        box *= 2 * h + 1
    check_enum(box, enum_cap, f"ellipsoid enumeration d={spec.d}")
    t_sq = radius * radius
    out = []
    grids = np.meshgrid(*[np.arange(-h, h + 1) for h in halves], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    lams = np.asarray(spec.lambdas)
    keep = ((pts * lams) ** 2).sum(axis=1) <= t_sq
    for row in pts[keep]:
        out.append(tuple(int(v) for v in row))
    return out


def ellipsoid_apply(f: GridFunction, spec: EllipsoidSpec, t: float | None = None,
                    enum_cap: int | None = None) -> GridFunction:
    """Average of f over the ellipsoid's lattice points, by direct shifts."""
    if f.d != spec.d:
        raise ValueError("grid dimension differs from ellipsoid dimension")
    points = ellipsoid_points(spec, t, enum_cap)
    acc = np.zeros_like(f.values)
    for point in points:
        acc += np.roll(f.values, point, axis=tuple(range(f.d)))
    return GridFunction(f.d, f.M, acc / len(points))


def ellipsoid_probe(
    spec: EllipsoidSpec,
    t_set=None,
    f: GridFunction | None = None,
    M: int = 16,
    enum_cap: int | None = None,
) -> ProbeReport:
    """Maximal-ratio probe for the ellipsoid averages over the radii in
    t_set (defaulting to the spec's own radius).  Reports qualitatively only:
    growth in d is not resolvable at d <= 4 and is not asserted."""
    radii = [float(spec.t)] if t_set is None else sorted(float(v) for v in t_set)
    if not radii:
        raise ValueError("radius set must be nonempty")
    if f is not None:
        inputs = [("input", f)]
        M = f.M
    else:
        n_top = max(1, int(max(radii)))
        inputs = [("delta", GridFunction.delta(spec.d, M))]
        inputs.append((f"indicator-{n_top}", GridFunction.ball_indicator(spec.d, M, n_top)))
        if M % 2 == 0:
            inputs.append((f"alternating-{n_top}", GridFunction.alternating_ball(spec.d, M, n_top)))
    ratios: dict = {}
    best = -math.inf
    witness = ""
    for name, g in inputs:
        if g.norm == 0.0:
            continue
        sup = None
        for t in radii:
            mag = np.abs(ellipsoid_apply(g, spec, t, enum_cap).values)
            sup = mag if sup is None else np.maximum(sup, mag)
        ratio = float(np.linalg.norm(sup)) / g.norm
        ratios[name] = ratio
        if ratio > best:
            best = ratio
            witness = name
    return ProbeReport(
        best_ratio=best,
        witness=witness,
        ratios=ratios,
        d=spec.d,
        M=M,
        dyadic_set=tuple(radii),
        trials=0,
        seed=0,
    )


# ---------------------------------------------------------------------------
# flat binary container

def save_grid(f: GridFunction, path) -> None:
    """Write the MAXLAT01 container: 8-byte magic, d and M as little-endian
    uint32, then the row-major complex128 payload; a JSON sidecar with the
    metadata and the l2 norm lands next to it at <path>.json."""
    payload = np.ascontiguousarray(f.values).astype("<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", f.d, f.M))
        fh.write(payload)
    sidecar = {
        "magic": MAGIC.decode("ascii"),
        "d": f.d,
        "M": f.M,
        "layout": "row-major",
        "element": "complex128",
        "byte_order": "little",
        "l2_norm": f.norm,
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_grid(path) -> GridFunction:
    """Read a MAXLAT01 container back; validates magic, header, and size,
    and cross-checks the sidecar when one is present."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        d, M = struct.unpack("<II", fh.read(8))
        raw = fh.read()
    expected = M**d * 16
    if len(raw) != expected:
        raise ValueError(f"payload is {len(raw)} bytes, expected {expected}")
    values = np.frombuffer(raw, dtype="<c16").reshape((M,) * d)
    f = GridFunction(d, M, values.astype(np.complex128))
    try:
        with open(str(path) + ".json") as fh:
            sidecar = json.load(fh)
    except FileNotFoundError:
        return f
    if sidecar.get("d") != d or sidecar.get("M") != M:
        raise ValueError("sidecar metadata disagrees with binary header")
    norm = sidecar.get("l2_norm")
    if norm is not None and abs(norm - f.norm) > 1e-12 * max(1.0, abs(norm)):
        raise ValueError("sidecar norm disagrees with payload")
    return f
