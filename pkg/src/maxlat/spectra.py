"""Truncated norm-spectrum arithmetic.

Ball and sphere counts in Z^d arise as coefficients of the d-fold truncated
Cauchy product of the one-dimensional generating series sum_{|v|<=N} q^(v^2),
indexed by squared norm.  This module provides that arithmetic in two modes:

- exact: Python integers; dense products go through Kronecker substitution
  (pack coefficients into one big integer, one fixed-width slot each, and do
  a single big multiply), sparse or signed products through schoolbook
  accumulation.  Exact mode is mandatory for concentration ratios as small
  as 2^-511.
- fast: float64 coefficients with Kahan-compensated accumulation, for
  weighted spectra where exact cosines do not exist.

Spectra are indexed by squared norm, never by radius, so truncation is an
integer cutoff and no floating radius comparison ever happens.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

__all__ = [
    "NormSpectrum",
    "ModeMismatchError",
    "one_dim_spectrum",
    "delta_spectrum",
    "convolve_truncated",
    "spectrum_power",
    "prefix_sums",
    "PackedSpectrum",
]


class ModeMismatchError(ValueError):
    """Raised when exact and fast spectra are mixed in one operation."""


class NormSpectrum:
    """Coefficients c[m] = weighted count of lattice points with |x|^2 = m.

    `complete` records whether the underlying series is known to vanish
    beyond max_norm (true for one-dimensional spectra and for untruncated
    products), as opposed to having been cut off at a budget.  Convolution
    of a spectrum beyond its faithful range is refused.
    """

    __slots__ = ("coeffs", "mode", "complete")

    def __init__(self, coeffs: Sequence, mode: str = "exact", complete: bool = False):
        if mode not in ("exact", "fast"):
            raise ValueError(f"unknown mode {mode!r}")
        self.coeffs = list(coeffs)
        if not self.coeffs:
            raise ValueError("empty spectrum")
        self.mode = mode
        self.complete = complete

    @property
    def max_norm(self) -> int:
        return len(self.coeffs) - 1

    def capacity(self) -> float:
        """Largest budget this spectrum can faithfully be convolved to."""
        return math.inf if self.complete else self.max_norm

    def total(self):
        """Sum of all coefficients; the ball count for unweighted spectra."""
        if self.mode == "exact":
            return sum(self.coeffs)
        return _kahan_sum(self.coeffs)

    def prefix(self, n: int):
        """Sum of coefficients with squared norm at most n."""
        upto = self.coeffs[: n + 1]
        if self.mode == "exact":
            return sum(upto)
        return _kahan_sum(upto)

    def __eq__(self, other):
        if not isinstance(other, NormSpectrum):
            return NotImplemented
        return self.mode == other.mode and self.coeffs == other.coeffs

    def __repr__(self):
        head = ", ".join(repr(c) for c in self.coeffs[:6])
        tail = ", ..." if len(self.coeffs) > 6 else ""
        return f"NormSpectrum([{head}{tail}], mode={self.mode!r})"


def one_dim_spectrum(N: int, weight: Callable[[int], object] | None = None) -> NormSpectrum:
    """Spectrum of the interval [-N, N] in Z: coeffs[m^2] = weight(m) + weight(-m)
    for 1 <= m <= N and coeffs[0] = weight(0).  Unweighted spectra are exact;
    weighted spectra are exact when every weight value is an integer, fast
    otherwise."""
    if N < 1:
        raise ValueError("N >= 1 required")
    coeffs: list = [0] * (N * N + 1)
    if weight is None:
        coeffs[0] = 1
        for m in range(1, N + 1):
            coeffs[m * m] = 2
        return NormSpectrum(coeffs, "exact", complete=True)
    vals = {m: weight(m) for m in range(-N, N + 1)}
    exact = all(isinstance(v, int) for v in vals.values())
    coeffs[0] = vals[0]
    for m in range(1, N + 1):
        coeffs[m * m] = vals[m] + vals[-m]
    if not exact:
        coeffs = [float(c) for c in coeffs]
    return NormSpectrum(coeffs, "exact" if exact else "fast", complete=True)


def delta_spectrum(mode: str = "exact") -> NormSpectrum:
    """The identity for convolution: the spectrum of {0} in Z^0."""
    one = 1 if mode == "exact" else 1.0
    return NormSpectrum([one], mode, complete=True)


def prefix_sums(coeffs: Sequence[int]) -> list[int]:
    """Running partial sums; prefix_sums(c)[n] = sum of c[0..n]."""
    out = []
    acc = 0
    for c in coeffs:
        acc += c
        out.append(acc)
    return out


def _kahan_sum(values) -> float:
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _nnz(coeffs) -> int:
    return sum(1 for c in coeffs if c)


def _encode(coeffs: Sequence[int], slot_bytes: int) -> int:
    buf = bytearray(len(coeffs) * slot_bytes)
    for i, c in enumerate(coeffs):
        if c:
            nb = (c.bit_length() + 7) // 8
            buf[i * slot_bytes : i * slot_bytes + nb] = c.to_bytes(nb, "little")
    return int.from_bytes(buf, "little")


def _decode(x: int, slot_bytes: int, count: int) -> list[int]:
    raw = x.to_bytes(slot_bytes * count, "little")
    return [
        int.from_bytes(raw[i * slot_bytes : (i + 1) * slot_bytes], "little")
        for i in range(count)
    ]


def _kronecker_mul(a: Sequence[int], b: Sequence[int], budget: int) -> list[int]:
    """Exact nonnegative truncated product via one big-integer multiply.
    Slot width covers max(a)*max(b)*min(len) so slots never carry into
    each other."""
    slot_bits = (
        max(a).bit_length()
        + max(b).bit_length()
        + min(len(a), len(b)).bit_length()
        + 1
    )
    slot_bytes = (slot_bits + 7) // 8
    out_slots = budget + 1
    x = _encode(a, slot_bytes) * _encode(b, slot_bytes)
    x &= (1 << (8 * slot_bytes * out_slots)) - 1
    return _decode(x, slot_bytes, out_slots)


def _schoolbook_mul(a: Sequence, b: Sequence, budget: int, zero) -> list:
    if _nnz(a) > _nnz(b):
        a, b = b, a
    out = [zero] * (budget + 1)
    lb = len(b)
    for i, av in enumerate(a):
        if not av or i > budget:
            continue
        hi = min(lb - 1, budget - i)
        for j in range(hi + 1):
            bv = b[j]
            if bv:
                out[i + j] += av * bv
    return out


_SPARSE_CUTOFF = 32


def convolve_truncated(a: NormSpectrum, b: NormSpectrum, budget: int) -> NormSpectrum:
    """Truncated Cauchy product: coeffs[m] = sum_{i+j=m} a[i]*b[j] for m <= budget."""
    if a.mode != b.mode:
        raise ModeMismatchError(f"cannot convolve {a.mode} with {b.mode}")
    if budget < 0:
        raise ValueError("budget >= 0 required")
    if budget > a.capacity() or budget > b.capacity():
        raise ValueError(
            f"budget {budget} exceeds faithful range of a truncated operand"
        )
    complete = budget >= a.max_norm + b.max_norm
    if a.mode == "fast":
        out = _fast_mul(a.coeffs, b.coeffs, budget)
        return NormSpectrum(out, "fast", complete=complete)
    ca, cb = a.coeffs, b.coeffs
    signed = any(c < 0 for c in ca) or any(c < 0 for c in cb)
    if signed or min(_nnz(ca), _nnz(cb)) <= _SPARSE_CUTOFF:
        out = _schoolbook_mul(ca, cb, budget, 0)
    else:
        out = _kronecker_mul(ca, cb, budget)
    return NormSpectrum(out, "exact", complete=complete)


def _fast_mul(a: Sequence[float], b: Sequence[float], budget: int) -> list[float]:
    """Compensated truncated product: one Kahan accumulator per coefficient."""
    out = [0.0] * (budget + 1)
    comp = [0.0] * (budget + 1)
    lb = len(b)
    for i, av in enumerate(a):
        if av == 0.0 or i > budget:
            continue
        hi = min(lb - 1, budget - i)
        for j in range(hi + 1):
            bv = b[j]
            if bv == 0.0:
                continue
            k = i + j
            y = av * bv - comp[k]
            t = out[k] + y
            comp[k] = (t - out[k]) - y
            out[k] = t
    return out


def spectrum_power(base: NormSpectrum, p: int, budget: int) -> NormSpectrum:
    """p-fold truncated convolution power by binary exponentiation."""
    if p < 0:
        raise ValueError("p >= 0 required")
    result = delta_spectrum(base.mode)
    if p == 0:
        return result
    sq = base
    while True:
        if p & 1:
            result = convolve_truncated(result, sq, budget)
        p >>= 1
        if p == 0:
            return result
        sq = convolve_truncated(sq, sq, budget)


class PackedSpectrum:
    """Unweighted exact spectrum kept in Kronecker-packed form so coordinates
    can be appended incrementally by shift-adds on one big integer.

    slot_bits must be large enough for every coefficient of every partial
    product; for d coordinates of radius N, d*log2(2N+1) bits suffice since
    each coefficient is at most the total point count (2N+1)^d.  Values in
    slots above the budget are garbage and are masked off after every step.
    """

    __slots__ = ("budget", "slot_bits", "enc", "_mask", "dim")

    def __init__(self, budget: int, d_max: int, vmax_max: int):
        need = math.ceil(d_max * math.log2(2 * vmax_max + 1)) + 8
        self.slot_bits = ((need + 7) // 8) * 8
        self.budget = budget
        self.enc = 1
        self._mask = (1 << (self.slot_bits * (budget + 1))) - 1
        self.dim = 0

    def add_coordinate(self, vmax: int) -> None:
        """Extend by one coordinate ranging over [-vmax, vmax]."""
        e = self.enc
        acc = e
        for v in range(1, vmax + 1):
            s = v * v
            if s > self.budget:
                break
            acc += e << (s * self.slot_bits + 1)
        self.enc = acc & self._mask
        self.dim += 1

    def coefficients(self) -> list[int]:
        slot_bytes = self.slot_bits // 8
        return _decode(self.enc, slot_bytes, self.budget + 1)
