"""Sweep engines that grade the multiplier and counting estimates on grids.

Fully specified inequalities (explicit constants) are checked sample by
sample with the bound side rounded outward, so a violation can only appear
in a report when the inequality genuinely fails at that sample.  Estimates
whose absolute constants are left unspecified are calibrated instead: the
sweep records the extremal ratio

    C_hat = max over samples of lhs / bound_shape

and regression fixtures pin future runs near the recorded baseline.
Hypothesis-violating cells count as skips, never as passes.

Reports serialize to canonical JSON (sorted keys, 17 significant digits,
no whitespace) and to a CSV summary with one row per grid cell.  Cell
evaluation is pure and aggregation walks cells in sorted order, so the
payload bytes are independent of the worker thread count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .budget import WorkBudgetError
from .krawtchouk import calibrate_uniform_bound, property_checks, verify_uniform_bound
from .lattice import (
    BallSpec,
    ball_count_table,
    concentration_masses,
    lemma4_verdict,
    shifted_ball_count,
    symdiff_count,
)
from .multiplier import (
    QuadratureError,
    alternating_mass,
    continuous_ball_multiplier,
    m_batch,
    m_lower_prefix_batch,
    signed_mass_batch,
)
from .rounding import bracket, exp_upper

DEFAULT_SEED = 20260814

CSV_FIELDS = ("d", "N", "kappa", "xi_id", "lhs", "rhs", "margin", "status")


# ---------------------------------------------------------------------------
# canonical serialization

def _canonical_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in report payload")
    if x == 0.0:
        x = 0.0  # fold -0.0: json parsers read "-0" back as integer zero
    return format(x, ".17g")


def _write_canonical(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_canonical_float(float(obj)))
    elif isinstance(obj, Fraction):
        out.append(json.dumps(str(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _write_canonical(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"payload keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _write_canonical(obj[key], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} canonically")


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, %.17g floats, no whitespace."""
    out: list[str] = []
    _write_canonical(obj, out)
    return "".join(out)


def csv_text(rows) -> str:
    """CSV summary, one row per cell, floats at full precision."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        record = []
        for name in CSV_FIELDS:
            value = row.get(name, "")
            if isinstance(value, float):
                record.append(format(value, ".17g"))
            else:
                record.append(value)
        writer.writerow(record)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# report type

@dataclass
class VerificationReport:
    """Outcome of one inequality sweep.  `violations` itemizes every sample
    where the left side beat the outward-rounded right side, with enough
    parameters to re-check the sample independently; empty list <=> pass."""

    inequality: str
    cells_tested: int = 0
    violations: list = field(default_factory=list)
    hypothesis_skips: int = 0
    calibrated_constant: float | None = None
    rows: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def payload(self) -> dict:
        return {
            "inequality": self.inequality,
            "passed": self.passed,
            "cells_tested": self.cells_tested,
            "violations": self.violations,
            "hypothesis_skips": self.hypothesis_skips,
            "calibrated_constant": self.calibrated_constant,
            "rows": self.rows,
            "details": self.details,
        }

    def to_json(self) -> str:
        return canonical_json(self.payload())

    def to_csv(self) -> str:
        return csv_text(self.rows)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("ascii")).hexdigest()


def _row(d, N, kappa, xi_id, lhs, rhs, margin, status) -> dict:
    return {
        "d": d,
        "N": N,
        "kappa": kappa,
        "xi_id": xi_id,
        "lhs": lhs,
        "rhs": rhs,
        "margin": margin,
        "status": status,
    }


# ---------------------------------------------------------------------------
# thread fan-out

def thread_count() -> int:
    """Worker count from MAXLAT_THREADS, defaulting to all cores."""
    raw = os.environ.get("MAXLAT_THREADS", "").strip()
    if raw:
        value = int(raw)
        if value < 1:
            raise ValueError("MAXLAT_THREADS must be a positive integer")
        return value
    return os.cpu_count() or 1


def run_cells(keys, fn):
    """Evaluate fn over sorted cell keys and return (sorted_keys, results).
    Results come back in key order whatever the scheduling, which keeps
    report aggregation canonical."""
    ordered = sorted(keys)
    workers = thread_count()
    if workers == 1 or len(ordered) <= 1:
        return ordered, [fn(key) for key in ordered]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return ordered, list(pool.map(fn, ordered))


# ---------------------------------------------------------------------------
# outward rounding helpers

def _up2(values: np.ndarray) -> np.ndarray:
    """Two upward ulp nudges; absorbs the rounding of the preceding ops."""
    return np.nextafter(np.nextafter(values, np.inf), np.inf)


def float_upper(value: Fraction) -> float:
    """Smallest convenient float >= value."""
    f = float(value)
    if math.isinf(f):
        return f
    return f if Fraction(f) >= value else math.nextafter(f, math.inf)


def float_lower(value: Fraction) -> float:
    """Largest convenient float <= value."""
    f = float(value)
    if math.isinf(f):
        return f
    return f if Fraction(f) <= value else math.nextafter(f, -math.inf)


def torus_dist_sq(arr: np.ndarray) -> np.ndarray:
    """Row sums of squared distances to the nearest integer."""
    t = arr - np.rint(arr)
    return np.einsum("ij,ij->i", t, t)


def _sin_sq_sum(arr: np.ndarray) -> np.ndarray:
    s = np.sin(np.pi * arr)
    return np.einsum("ij,ij->i", s, s)


def _cos_sq_sum(arr: np.ndarray) -> np.ndarray:
    c = np.cos(np.pi * arr)
    return np.einsum("ij,ij->i", c, c)


# ---------------------------------------------------------------------------
# sweep grids and frequency sampling

@dataclass(frozen=True)
class SweepGrid:
    """Cell lattice for a sweep: explicit (d, N) pairs, or a dims x radii
    product, or dims crossed with the powers of two whose kappa = N/sqrt(d)
    falls in `dyadic_kappa`.  Identical grid and seed reproduce the exact
    sample sequence."""

    dims: tuple = ()
    radii: tuple = ()
    pairs: tuple = ()
    dyadic_kappa: tuple | None = None
    sampler: str = "stratified"
    samples_per_cell: int = 24
    seed: int = DEFAULT_SEED

    @classmethod
    def from_params(cls, params: dict) -> "SweepGrid":
        p = dict(params)
        pairs = tuple((int(d), int(N)) for d, N in p.pop("cells", ()))
        dims = tuple(int(v) for v in p.pop("dims", ()))
        radii = tuple(int(v) for v in p.pop("radii", ()))
        dy = p.pop("dyadic_kappa", None)
        if dy is not None:
            dy = (Fraction(str(dy[0])), Fraction(str(dy[1])))
        grid = cls(
            dims=dims,
            radii=radii,
            pairs=pairs,
            dyadic_kappa=dy,
            sampler=str(p.pop("sampler", "stratified")),
            samples_per_cell=int(p.pop("samples_per_cell", 24)),
            seed=int(p.pop("seed", DEFAULT_SEED)),
        )
        if p:
            raise ValueError(f"unknown grid keys: {sorted(p)}")
        if not grid.cells():
            raise ValueError("grid has no cells")
        return grid

    def cells(self) -> list:
        if self.pairs:
            return sorted(set(self.pairs))
        out = []
        for d in self.dims:
            if self.dyadic_kappa is not None:
                lo, hi = self.dyadic_kappa
                N = 1
                while Fraction(N * N) <= hi * hi * d:
                    if Fraction(N * N) >= lo * lo * d:
                        out.append((d, N))
                    N *= 2
            else:
                out.extend((d, N) for N in self.radii)
        return sorted(set(out))


def _as_grid(grid) -> SweepGrid:
    if isinstance(grid, SweepGrid):
        return grid
    return SweepGrid.from_params(dict(grid))


def sample_frequencies(
    d: int,
    kappa: float,
    count: int,
    seed: int = DEFAULT_SEED,
    cell_key=(),
    sampler: str = "stratified",
):
    """Seeded frequency rows on [-1/2, 1/2)^d with stable string ids.

    The default mixture spends one sample on xi = 0 and splits the rest
    25/40/20/15 percent between a near-zero shell of radius about 0.1/kappa,
    bulk uniform points, near-corner points with most coordinates in
    (1/4, 1/2), and low-dimensional axis embeddings.  Pure strategies
    (uniform, near-zero, near-corner, axis-aligned, rational multiples of
    1/64) are available by name.  Each cell draws from its own generator
    spawned from (seed, cell_key), so cells are order-independent.
    """
    if d < 1 or count < 1:
        raise ValueError("d >= 1 and count >= 1 required")
    key = tuple(int(v) for v in cell_key)
    seq = np.random.SeedSequence(int(seed), spawn_key=key)
    rng = np.random.Generator(np.random.PCG64(seq))
    kap = max(float(kappa), 1e-9)
    ids: list = []
    rows: list = []

    def near_zero(i: int) -> None:
        direction = rng.normal(size=d)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            direction[0], norm = 1.0, 1.0
        radius = (0.01 + 0.09 * float(rng.uniform())) / kap
        rows.append(direction * (radius / norm))
        ids.append(f"near-zero-{i:03d}")

    def bulk(i: int, label: str = "bulk") -> None:
        rows.append(rng.uniform(-0.5, 0.5, size=d))
        ids.append(f"{label}-{i:03d}")

    def corner(i: int) -> None:
        flags = rng.uniform(size=d) < 0.75
        if not flags.any():
            flags[int(rng.integers(d))] = True
        mag = 0.25 + 0.25 * rng.uniform(size=d)
        sign = np.where(rng.uniform(size=d) < 0.5, -1.0, 1.0)
        rest = rng.uniform(-0.2, 0.2, size=d)
        rows.append(np.where(flags, sign * mag, rest))
        ids.append(f"corner-{i:03d}")

    def axis(i: int) -> None:
        r = 1 + i % min(3, d)
        row = np.zeros(d)
        row[:r] = rng.uniform(-0.5, 0.5, size=r)
        rows.append(row)
        ids.append(f"axis{r}-{i:03d}")

    if sampler == "stratified":
        rows.append(np.zeros(d))
        ids.append("zero")
        rest = count - 1
        n_near = rest * 25 // 100
        n_corner = rest * 20 // 100
        n_axis = rest * 15 // 100
        n_bulk = rest - n_near - n_corner - n_axis
        for i in range(n_near):
            near_zero(i)
        for i in range(n_bulk):
            bulk(i)
        for i in range(n_corner):
            corner(i)
        for i in range(n_axis):
            axis(i)
    elif sampler == "uniform":
        for i in range(count):
            bulk(i, "uniform")
    elif sampler == "near-zero":
        for i in range(count):
            near_zero(i)
    elif sampler == "near-corner":
        for i in range(count):
            corner(i)
    elif sampler == "axis-aligned":
        for i in range(count):
            axis(i)
    elif sampler == "rational":
        grid = rng.integers(0, 64, size=(count, d))
        for i in range(count):
            rows.append(grid[i] / 64.0)
            ids.append(f"rational-{i:03d}")
    else:
        raise ValueError(f"unknown sampler {sampler!r}")

    mat = np.vstack(rows)
    mat = mat - np.rint(mat)
    return ids, mat


def _cell_rows(d: int, N: int, ids, xs, lhs, rhs):
    """Worst-margin summary row plus itemized genuine violations."""
    margin = rhs - lhs
    worst = int(np.argmin(margin))
    kappa = N / math.sqrt(d)
    bad = np.flatnonzero(lhs > rhs)
    violations = [
        {
            "d": d,
            "N": N,
            "kappa": kappa,
            "xi_id": ids[i],
            "xi": [float(v) for v in xs[i]],
            "lhs": float(lhs[i]),
            "rhs": float(rhs[i]),
            "margin": float(margin[i]),
        }
        for i in bad
    ]
    row = _row(
        d,
        N,
        kappa,
        ids[worst],
        float(lhs[worst]),
        float(rhs[worst]),
        float(margin[worst]),
        "violation" if bad.size else "ok",
    )
    return row, violations


# ---------------------------------------------------------------------------
# sampled multiplier sweeps

def check_prop0(grid, work_cap: int | None = None) -> VerificationReport:
    """Zero-violation sweep of |m_N(xi) - 1| <= 2 pi^2 kappa^2 ||xi||^2
    (torus norm).  The constant is explicit, so every sample is a hard
    pass/fail; the right side gets two upward ulps before comparing.
    m_N(0) = 1 exactly, so zero-norm rows short-circuit to lhs = 0."""
    g = _as_grid(grid)

    def run(cell):
        d, N = cell
        spec = BallSpec(d, N)
        try:
            ids, xs = sample_frequencies(
                d, N / math.sqrt(d), g.samples_per_cell, g.seed, cell, g.sampler
            )
            vals = m_batch(spec, xs, work_cap)
        except WorkBudgetError as exc:
            return ("skip", str(exc))
        nsq = torus_dist_sq(xs)
        lhs = np.abs(vals - 1.0)
        lhs[nsq == 0.0] = 0.0
        rhs = _up2(2.0 * math.pi * math.pi * (N * N / d) * nsq)
        return ("ok", ids, xs, lhs, rhs)

    rows, violations = [], []
    skips = 0
    tested = 0
    keys, results = run_cells(g.cells(), run)
    for cell, res in zip(keys, results):
        d, N = cell
        if res[0] == "skip":
            skips += 1
            rows.append(_row(d, N, N / math.sqrt(d), "budget", "", "", "", "skip"))
            continue
        _, ids, xs, lhs, rhs = res
        row, vio = _cell_rows(d, N, ids, xs, lhs, rhs)
        rows.append(row)
        violations.extend(vio)
        tested += 1
    return VerificationReport(
        inequality="prop0",
        cells_tested=tested,
        violations=violations,
        hypothesis_skips=skips,
        rows=rows,
        details={"seed": g.seed, "sampler": g.sampler, "samples_per_cell": g.samples_per_cell},
    )


def check_prop2(grid, work_cap: int | None = None) -> VerificationReport:
    """Calibrates C_hat = max |m_N(xi)| / ((kappa ||xi||)^(-1) + kappa^(-1/7))
    over cells with 10 <= kappa <= 50 sqrt(d).  No verdicts: the absolute
    constant is unspecified, so the report records the extremal ratio per
    dimension and its spread."""
    g = _as_grid(grid)

    def run(cell):
        d, N = cell
        n = N * N
        if n < 100 * d or N > 50 * d:
            return None
        spec = BallSpec(d, N)
        kappa = N / math.sqrt(d)
        try:
            ids, xs = sample_frequencies(
                d, kappa, g.samples_per_cell, g.seed, cell, g.sampler
            )
            vals = np.abs(m_batch(spec, xs, work_cap))
        except WorkBudgetError as exc:
            return ("skip", str(exc))
        norm = np.sqrt(torus_dist_sq(xs))
        with np.errstate(divide="ignore"):
            denom = 1.0 / (kappa * norm) + kappa ** (-1.0 / 7.0)
        ratio = np.where(np.isfinite(denom), vals / denom, 0.0)
        worst = int(np.argmax(ratio))
        return ("ok", ids[worst], float(vals[worst]), float(denom[worst]), float(ratio[worst]))

    rows = []
    skips = 0
    tested = 0
    per_d: dict = {}
    keys, results = run_cells(g.cells(), run)
    for cell, res in zip(keys, results):
        d, N = cell
        kappa = N / math.sqrt(d)
        if res is None or res[0] == "skip":
            skips += 1
            reason = "hypothesis" if res is None else "budget"
            rows.append(_row(d, N, kappa, reason, "", "", "", "skip"))
            continue
        _, xi_id, lhs, rhs, ratio = res
        rows.append(_row(d, N, kappa, xi_id, lhs, rhs, ratio, "calibrated"))
        per_d[str(d)] = max(per_d.get(str(d), 0.0), ratio)
        tested += 1
    chat = max(per_d.values(), default=None)
    spread = None
    if per_d:
        low = min(per_d.values())
        spread = (chat / low) if low > 0 else None
    return VerificationReport(
        inequality="prop2",
        cells_tested=tested,
        violations=[],
        hypothesis_skips=skips,
        calibrated_constant=chat,
        rows=rows,
        details={
            "seed": g.seed,
            "sampler": g.sampler,
            "samples_per_cell": g.samples_per_cell,
            "per_dimension": per_d,
            "cross_dimension_spread": spread,
        },
    )


def _gaussian_branch_eval(spec: BallSpec, xs: np.ndarray, c_hat: float, work_cap):
    """Shared evaluation for the two-branch Gaussian approximations: returns
    (m values, sin-sq sums, cos-sq sums, branch-1 mask)."""
    vals = m_batch(spec, xs, work_cap)
    s_sin = _sin_sq_sum(xs)
    s_cos = _cos_sq_sum(xs)
    heavy = (np.abs(xs) > 0.25).sum(axis=1)
    branch1 = 2 * heavy <= spec.d
    return vals, s_sin, s_cos, branch1


def check_prop4(grid, c_hat: float) -> VerificationReport:
    """Branch comparison of m_N against its Gaussian models.  Writing
    S = sum_i sin^2(pi xi_i) and C = sum_i cos^2(pi xi_i), cells with
    N >= 23 and kappa <= 1/5 must satisfy

        |m_N(xi) - e^(-kappa^2 S)|   <= 17 min(e^(-c kappa^2 S/400), kappa^2 S)

    when at most half the coordinates have |xi_i| > 1/4, and the same bound
    with the alternating model A e^(-kappa^2 C) and C in place of S on the
    complementary branch (A = alternating mass = m_N at the corner).  At an
    exact corner every cos(pi xi_i) vanishes and m_N equals A identically,
    which float cosines cannot represent; those rows short-circuit to 0."""
    g = _as_grid(grid)
    c = float(c_hat)

    def run(cell):
        d, N = cell
        if N < 23 or 25 * N * N > d:
            return None
        spec = BallSpec(d, N)
        try:
            ids, xs = sample_frequencies(
                d, N / math.sqrt(d), g.samples_per_cell, g.seed, cell, g.sampler
            )
            vals, s_sin, s_cos, branch1 = _gaussian_branch_eval(spec, xs, c, None)
            mass = 0.0 if bool(np.all(branch1)) else float(alternating_mass(spec))
        except WorkBudgetError as exc:
            return ("skip", str(exc))
        ksq = N * N / d
        model = np.where(branch1, np.exp(-ksq * s_sin), mass * np.exp(-ksq * s_cos))
        lhs = np.abs(vals - model)
        lhs[np.all(xs == 0.0, axis=1)] = 0.0
        lhs[(~branch1) & np.all(np.abs(xs) == 0.5, axis=1)] = 0.0
        s = np.where(branch1, s_sin, s_cos)
        rhs = _up2(17.0 * np.minimum(_up2(np.exp(-(c * ksq / 400.0) * s)), _up2(ksq * s)))
        return ("ok", ids, xs, lhs, rhs)

    rows, violations = [], []
    skips = 0
    tested = 0
    keys, results = run_cells(g.cells(), run)
    for cell, res in zip(keys, results):
        d, N = cell
        kappa = N / math.sqrt(d)
        if res is None or res[0] == "skip":
            skips += 1
            reason = "hypothesis" if res is None else "budget"
            rows.append(_row(d, N, kappa, reason, "", "", "", "skip"))
            continue
        _, ids, xs, lhs, rhs = res
        row, vio = _cell_rows(d, N, ids, xs, lhs, rhs)
        rows.append(row)
        violations.extend(vio)
        tested += 1
    return VerificationReport(
        inequality="prop4",
        cells_tested=tested,
        violations=violations,
        hypothesis_skips=skips,
        rows=rows,
        details={
            "seed": g.seed,
            "sampler": g.sampler,
            "samples_per_cell": g.samples_per_cell,
            "c_hat": c,
        },
    )


def check_prop5(grid, c_hat: float) -> VerificationReport:
    """Zero-violation sweep of the two-sided exponential decay estimate

        |m_N(xi)| <= 8 e^(-(c kappa^2/100) S) + 8 e^(-(c kappa^2/100) C),

    S and C the sin^2/cos^2 coordinate sums, on cells with N >= 23 and
    kappa <= 1/5.  Since S + C = d the right side never degenerates."""
    g = _as_grid(grid)
    c = float(c_hat)

    def run(cell):
        d, N = cell
        if N < 23 or 25 * N * N > d:
            return None
        spec = BallSpec(d, N)
        try:
            ids, xs = sample_frequencies(
                d, N / math.sqrt(d), g.samples_per_cell, g.seed, cell, g.sampler
            )
            vals, s_sin, s_cos, _ = _gaussian_branch_eval(spec, xs, c, None)
        except WorkBudgetError as exc:
            return ("skip", str(exc))
        ksq = N * N / d
        scale = c * ksq / 100.0
        rhs = _up2(8.0 * _up2(np.exp(-scale * s_sin)) + 8.0 * _up2(np.exp(-scale * s_cos)))
        lhs = np.abs(vals)
        return ("ok", ids, xs, lhs, rhs)

    rows, violations = [], []
    skips = 0
    tested = 0
    keys, results = run_cells(g.cells(), run)
    for cell, res in zip(keys, results):
        d, N = cell
        kappa = N / math.sqrt(d)
        if res is None or res[0] == "skip":
            skips += 1
            reason = "hypothesis" if res is None else "budget"
            rows.append(_row(d, N, kappa, reason, "", "", "", "skip"))
            continue
        _, ids, xs, lhs, rhs = res
        row, vio = _cell_rows(d, N, ids, xs, lhs, rhs)
        rows.append(row)
        violations.extend(vio)
        tested += 1
    return VerificationReport(
        inequality="prop5",
        cells_tested=tested,
        violations=violations,
        hypothesis_skips=skips,
        rows=rows,
        details={
            "seed": g.seed,
            "sampler": g.sampler,
            "samples_per_cell": g.samples_per_cell,
            "c_hat": c,
        },
    )


def check_lemma14(grid, work_cap: int | None = None) -> VerificationReport:
    """Compares m_N with the signed mass carrying weight (-1)^(x_i) on the
    coordinates where cos(2 pi xi_i) < 0: the gap is at most
    2 kappa^2 sum_i cos^2(pi xi_i), summed over all i.  Unconditional.
    Rows with every coordinate exactly at 1/2 reduce to the identity
    m_N = signed mass, which the float cosine path cannot express, so they
    short-circuit to lhs = 0."""
    g = _as_grid(grid)

    def run(cell):
        d, N = cell
        spec = BallSpec(d, N)
        try:
            ids, xs = sample_frequencies(
                d, N / math.sqrt(d), g.samples_per_cell, g.seed, cell, g.sampler
            )
            vals = m_batch(spec, xs, work_cap)
            flags = np.abs(xs) > 0.25
            signed = signed_mass_batch(spec, flags, work_cap)
        except WorkBudgetError as exc:
            return ("skip", str(exc))
        lhs = np.abs(vals - signed)
        lhs[np.all(np.abs(xs) == 0.5, axis=1)] = 0.0
        lhs[np.all(xs == 0.0, axis=1)] = 0.0
        rhs = _up2(2.0 * (N * N / d) * _cos_sq_sum(xs))
        return ("ok", ids, xs, lhs, rhs)

    rows, violations = [], []
    skips = 0
    tested = 0
    keys, results = run_cells(g.cells(), run)
    for cell, res in zip(keys, results):
        d, N = cell
        if res[0] == "skip":
            skips += 1
            rows.append(_row(d, N, N / math.sqrt(d), "budget", "", "", "", "skip"))
            continue
        _, ids, xs, lhs, rhs = res
        row, vio = _cell_rows(d, N, ids, xs, lhs, rhs)
        rows.append(row)
        violations.extend(vio)
        tested += 1
    return VerificationReport(
        inequality="lemma14",
        cells_tested=tested,
        violations=violations,
        hypothesis_skips=skips,
        rows=rows,
        details={"seed": g.seed, "sampler": g.sampler, "samples_per_cell": g.samples_per_cell},
    )


def _lemma9_slack(r: int, eps: Fraction) -> float:
    """Upper float bound on 4 e^(-eps r/10).  Calls into mpmath, so keep it
    out of worker threads."""
    return float_upper(4 * exp_upper(Fraction(-eps * r, 10)))


def _lemma9_eval(spec: BallSpec, r: int, eps: Fraction, xs: np.ndarray, work_cap, slack=None):
    """lhs = |m_N(xi)|; rhs = sup over integer l in [eps^3 kappa^2 r, n] of
    |m^(r)_sqrt(l)(xi_1..r)| plus 4 e^(-eps r / 10), rounded up."""
    n = spec.n
    thr = eps**3 * Fraction(spec.n, spec.d) * r
    lmin = max(0, math.ceil(thr))
    prefix = m_lower_prefix_batch(r, n, xs[:, :r], work_cap)
    sup = np.abs(prefix[:, lmin:]).max(axis=1)
    if slack is None:
        slack = _lemma9_slack(r, eps)
    lhs = np.abs(m_batch(spec, xs, work_cap))
    rhs = _up2(sup + slack)
    return lhs, rhs, lmin


def check_lemma9(
    spec: BallSpec,
    r: int,
    eps,
    xi: np.ndarray,
    ids=None,
    work_cap: int | None = None,
) -> VerificationReport:
    """Dimension-reduction check: the full multiplier is dominated by the
    worst lower-dimensional multiplier over admissible squared radii plus an
    exponentially small remainder.  Requires kappa >= 10, eps in (0, 1/50],
    1 <= r <= d; hypothesis failures yield an all-skip report."""
    e = Fraction(str(eps))
    xs = np.asarray(xi, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[None, :]
    xs = xs - np.rint(xs)
    if ids is None:
        ids = [f"xi-{i:03d}" for i in range(xs.shape[0])]
    d, N = spec.d, spec.N
    if spec.n < 100 * d or not (0 < e <= Fraction(1, 50)) or not 1 <= r <= d:
        return VerificationReport(
            inequality="lemma9",
            cells_tested=0,
            hypothesis_skips=1,
            rows=[_row(d, N, N / math.sqrt(d), "hypothesis", "", "", "", "skip")],
            details={"r": r, "eps": str(e)},
        )
    try:
        lhs, rhs, lmin = _lemma9_eval(spec, r, e, xs, work_cap)
    except WorkBudgetError as exc:
        return VerificationReport(
            inequality="lemma9",
            cells_tested=0,
            hypothesis_skips=1,
            rows=[_row(d, N, N / math.sqrt(d), "budget", "", "", "", "skip")],
            details={"r": r, "eps": str(e), "error": str(exc)[:80]},
        )
    row, violations = _cell_rows(d, N, ids, xs, lhs, rhs)
    return VerificationReport(
        inequality="lemma9",
        cells_tested=1,
        violations=violations,
        rows=[row],
        details={"r": r, "eps": str(e), "l_min": lmin},
    )


def check_lemma9_suite(params: dict | None = None) -> VerificationReport:
    """Runs the dimension-reduction check over a (d, N) x r x eps grid with
    seeded stratified frequencies."""
    p = _merged("lemma9", params, extra=("seed",))
    cells = [(int(d), int(N)) for d, N in p["cells"]]
    r_list = [int(r) for r in p["r"]]
    eps_list = [Fraction(str(e)) for e in p["eps"]]
    seed = int(p.get("seed", DEFAULT_SEED))
    count = int(p.get("samples_per_cell", 12))
    rows, violations = [], []
    skips = 0
    tested = 0
    keys = sorted(
        (d, N, ri, ei)
        for d, N in cells
        for ri in range(len(r_list))
        for ei in range(len(eps_list))
    )
    slacks = {
        (ri, ei): _lemma9_slack(r, e)
        for ri, r in enumerate(r_list)
        for ei, e in enumerate(eps_list)
    }

    def run(key):
        d, N, ri, ei = key
        spec = BallSpec(d, N)
        r, e = r_list[ri], eps_list[ei]
        if spec.n < 100 * d or not (0 < e <= Fraction(1, 50)) or not 1 <= r <= d:
            return None
        ids, xs = sample_frequencies(d, N / math.sqrt(d), count, seed, key, "stratified")
        try:
            lhs, rhs, _ = _lemma9_eval(spec, r, e, xs, None, slacks[ri, ei])
        except WorkBudgetError as exc:
            return ("skip", str(exc))
        return ("ok", ids, xs, lhs, rhs)

    ordered, results = run_cells(keys, run)
    for key, res in zip(ordered, results):
        d, N, ri, ei = key
        kappa = N / math.sqrt(d)
        label = f"r={r_list[ri]},eps={eps_list[ei]}"
        if res is None or res[0] == "skip":
            skips += 1
            rows.append(_row(d, N, kappa, label, "", "", "", "skip"))
            continue
        _, ids, xs, lhs, rhs = res
        row, vio = _cell_rows(d, N, ids, xs, lhs, rhs)
        row["xi_id"] = f"{label},{row['xi_id']}"
        for v in vio:
            v["r"] = r_list[ri]
            v["eps"] = str(eps_list[ei])
        rows.append(row)
        violations.extend(vio)
        tested += 1
    return VerificationReport(
        inequality="lemma9",
        cells_tested=tested,
        violations=violations,
        hypothesis_skips=skips,
        rows=rows,
        details={"seed": seed, "samples_per_cell": count},
    )


# ---------------------------------------------------------------------------
# square function along the dyadic scale

def dyadic_radii(d: int, C1, C2) -> list:
    """Powers of two N with C1 sqrt(d) <= N <= C2 d, by exact comparison."""
    c1 = Fraction(str(C1))
    c2 = Fraction(str(C2))
    out = []
    N = 1
    while Fraction(N) <= c2 * d:
        if Fraction(N * N) >= c1 * c1 * d:
            out.append(N)
        N *= 2
    return out


def square_sum_batch(d: int, xs: np.ndarray, C1, C2, work_cap: int | None = None):
    """Returns (sums, majorants): sums[b] = sum over dyadic N of
    |m_N(xi_b) - e^(-(N^2/d) S(xi_b))|^2 and the companion majorant
    sum over N of min(kappa_N^2 ||xi||^2, 1/(kappa_N^2 ||xi||^2))."""
    radii = dyadic_radii(d, C1, C2)
    if not radii:
        raise ValueError(f"no dyadic radii between {C1}*sqrt({d}) and {C2}*{d}")
    s_sin = _sin_sq_sum(xs)
    nsq = torus_dist_sq(xs)
    total = np.zeros(xs.shape[0])
    major = np.zeros(xs.shape[0])
    for N in radii:
        spec = BallSpec(d, N)
        gap = m_batch(spec, xs, work_cap) - np.exp(-(N * N / d) * s_sin)
        total += gap * gap
        u = (N * N / d) * nsq
        with np.errstate(divide="ignore"):
            major += np.minimum(u, 1.0 / u)
    return total, major


def square_sum(d: int, xi, C1, C2, work_cap: int | None = None) -> float:
    """Sum of squared gaps between the ball multipliers and the heat model
    e^(-t S), t = N^2/d, along the dyadic radii with C1 sqrt(d) <= N <= C2 d."""
    xs = np.asarray(xi, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[None, :]
    xs = xs - np.rint(xs)
    total, _ = square_sum_batch(d, xs, C1, C2, work_cap)
    return float(total[0])


def check_square_sum(params: dict | None = None) -> VerificationReport:
    """Calibration sweep for the dyadic square function: records the largest
    sampled value per dimension and the extremal ratio against the
    min(u, 1/u) majorant; regression fixtures gate both."""
    p = _merged("square-sum", params, extra=("seed",))
    dims = [int(d) for d in p["dims"]]
    C1, C2 = str(p.get("C1", "1")), str(p.get("C2", "1"))
    seed = int(p.get("seed", DEFAULT_SEED))
    count = int(p.get("samples_per_cell", 50))
    rows = []
    per_d_max: dict = {}
    per_d_ratio: dict = {}
    skips = 0

    def run(d):
        radii = dyadic_radii(d, C1, C2)
        kappa = max(radii) / math.sqrt(d)
        ids, xs = sample_frequencies(d, kappa, count, seed, (d,), "stratified")
        try:
            total, major = square_sum_batch(d, xs, C1, C2)
        except WorkBudgetError as exc:
            return ("skip", str(exc))
        mask = major > 0
        ratio = np.zeros_like(total)
        ratio[mask] = total[mask] / major[mask]
        wv = int(np.argmax(total))
        wr = int(np.argmax(ratio))
        return (
            "ok",
            ids[wv],
            float(total[wv]),
            ids[wr],
            float(ratio[wr]),
            float(major[wr]),
            float(total[wr]),
        )

    keys, results = run_cells(dims, run)
    for d, res in zip(keys, results):
        if res[0] == "skip":
            skips += 1
            rows.append(_row(d, "", "", "budget", "", "", "", "skip"))
            continue
        _, id_max, vmax, id_ratio, ratio, major_at, total_at = res
        per_d_max[str(d)] = vmax
        per_d_ratio[str(d)] = ratio
        rows.append(_row(d, "", "", id_ratio, total_at, major_at, ratio, "calibrated"))
        rows.append(_row(d, "", "", id_max, vmax, "", "", "max"))
    chat = max(per_d_ratio.values(), default=None)
    values = list(per_d_max.values())
    spread = None
    if values and min(values) > 0:
        spread = max(values) / min(values)
    return VerificationReport(
        inequality="square-sum",
        cells_tested=len(per_d_max),
        violations=[],
        hypothesis_skips=skips,
        calibrated_constant=chat,
        rows=rows,
        details={
            "seed": seed,
            "samples_per_cell": count,
            "C1": C1,
            "C2": C2,
            "max_per_dimension": per_d_max,
            "ratio_per_dimension": per_d_ratio,
            "cross_dimension_spread": spread,
        },
    )


# ---------------------------------------------------------------------------
# exact counting suites

def check_lemma4(d_max: int = 64, N_max: int = 64, work_cap: int | None = None) -> VerificationReport:
    """Two-sided crude count bounds for every ball with d <= d_max and
    N <= N_max: (2 floor(kappa) + 1)^d <= |B| <= (2 pi e)^(d/2)
    (kappa^2 + 1/4)^(d/2).  Upper bounds are judged against outward-rounded
    brackets; a cell whose count lands inside the bracket is recorded as
    indecisive rather than passed."""
    table = ball_count_table(d_max, N_max, work_cap)
    rows = []
    violations = []
    indecisive = []
    tested = 0
    for d in range(1, d_max + 1):
        worst = None
        for N in range(1, N_max + 1):
            rep = lemma4_verdict(BallSpec(d, N), table[(d, N)])
            tested += 1
            low_gap = Fraction(rep.count - rep.lower, rep.count)
            up_gap = (Fraction(rep.upper) - rep.count) / rep.count
            margin = float(min(low_gap, up_gap))
            if not rep.decisive:
                indecisive.append({"d": d, "N": N, "count": str(rep.count)})
            elif not rep.ok:
                violations.append(
                    {
                        "d": d,
                        "N": N,
                        "count": str(rep.count),
                        "lower": str(rep.lower),
                        "upper": rep.upper,
                    }
                )
            if worst is None or margin < worst[1]:
                worst = (N, margin, rep)
        N, margin, rep = worst
        status = "ok"
        if not rep.decisive:
            status = "indecisive"
        elif not rep.ok:
            status = "violation"
        rows.append(
            _row(d, N, N / math.sqrt(d), f"count={rep.count}", float(rep.lower),
                 float(rep.upper), margin, status)
        )
    return VerificationReport(
        inequality="lemma4",
        cells_tested=tested,
        violations=violations,
        rows=rows,
        details={"d_max": d_max, "N_max": N_max, "indecisive": indecisive},
    )


def check_lemma5_suite(params: dict | None = None) -> VerificationReport:
    """Exact mass of the few-large-coordinates error set against
    2 e^(-d/10), for kappa >= 10 and thresholds eps1, eps2 in (0, 1/10]."""
    p = _merged("lemma5", params)
    cells = [(int(d), int(N)) for d, N in p["cells"]]
    eps1_list = [Fraction(str(e)) for e in p["eps1"]]
    eps2_list = [Fraction(str(e)) for e in p["eps2"]]
    rows, violations = [], []
    skips = 0
    tested = 0
    for d, N in sorted(cells):
        for e1 in eps1_list:
            for e2 in eps2_list:
                rep = concentration_masses(
                    BallSpec(d, N), "few-large-coordinates", eps1=e1, eps2=e2
                )
                label = f"eps1={e1},eps2={e2}"
                kappa = N / math.sqrt(d)
                if not rep.hypothesis_met:
                    skips += 1
                    rows.append(_row(d, N, kappa, label, "", "", "", "skip"))
                    continue
                tested += 1
                margin = rep.bound - rep.ratio
                status = "violation" if rep.violation else "ok"
                if rep.violation:
                    violations.append(
                        {"d": d, "N": N, "eps1": str(e1), "eps2": str(e2),
                         "lhs": rep.ratio, "rhs": rep.bound}
                    )
                rows.append(_row(d, N, kappa, label, rep.ratio, rep.bound, margin, status))
    return VerificationReport(
        inequality="lemma5",
        cells_tested=tested,
        violations=violations,
        hypothesis_skips=skips,
        rows=rows,
        details={},
    )


def check_lemma8_suite(params: dict | None = None) -> VerificationReport:
    """Exact mass of the small-partial-norm error set {sum_{i<=r} x_i^2 <
    eps^3 kappa^2 r} against 4 e^(-eps r/10), for kappa >= 10 and
    eps in (0, 1/50]."""
    p = _merged("lemma8", params)
    cells = [(int(d), int(N)) for d, N in p["cells"]]
    r_list = [int(r) for r in p["r"]]
    eps_list = [Fraction(str(e)) for e in p["eps"]]
    deep = [(int(d), int(N), int(r), Fraction(str(e))) for d, N, r, e in p.get("deep", ())]
    jobs = sorted(
        {(d, N, r, e) for d, N in cells for r in r_list if r <= d for e in eps_list}
        | set(deep)
    )
    rows, violations = [], []
    skips = 0
    tested = 0
    for d, N, r, e in jobs:
        rep = concentration_masses(BallSpec(d, N), "small-partial-norm", eps=e, r=r)
        label = f"r={r},eps={e}"
        kappa = N / math.sqrt(d)
        if not rep.hypothesis_met:
            skips += 1
            rows.append(_row(d, N, kappa, label, "", "", "", "skip"))
            continue
        tested += 1
        margin = rep.bound - rep.ratio
        status = "violation" if rep.violation else "ok"
        if rep.violation:
            violations.append(
                {"d": d, "N": N, "r": r, "eps": str(e), "lhs": rep.ratio, "rhs": rep.bound}
            )
        rows.append(_row(d, N, kappa, label, rep.ratio, rep.bound, margin, status))
    return VerificationReport(
        inequality="lemma8",
        cells_tested=tested,
        violations=violations,
        hypothesis_skips=skips,
        rows=rows,
        details={},
    )


def check_lemma15_suite(params: dict | None = None) -> VerificationReport:
    """Exact mass of {x in B : fewer than k coordinates in {-1, 1}} against
    2^(1-k) for kappa <= 1/5 and n >= k >= 2^9 max(1, kappa^6 n), plus an
    integer-arithmetic scan proving that no dimension below `scan_d_max`
    admits any valid (N, k) pair at all."""
    p = _merged("lemma15", params)
    cells = [(int(d), int(N)) for d, N in p["cells"]]
    k_list = [int(k) for k in p["k"]]
    scan_d_max = int(p.get("scan_d_max", 13224))
    rows, violations = [], []
    skips = 0
    tested = 0
    for d, N in sorted(cells):
        for k in k_list:
            rep = concentration_masses(BallSpec(d, N), "few-unit-coordinates", k=k)
            kappa = N / math.sqrt(d)
            label = f"k={k}"
            if not rep.hypothesis_met:
                skips += 1
                rows.append(_row(d, N, kappa, label, "", "", "", "skip"))
                continue
            tested += 1
            margin = rep.bound - rep.ratio
            status = "violation" if rep.violation else "ok"
            if rep.violation:
                violations.append({"d": d, "N": N, "k": k, "lhs": rep.ratio, "rhs": rep.bound})
            rows.append(_row(d, N, kappa, label, rep.ratio, rep.bound, margin, status))
    admissible = []
    for d in range(1, scan_d_max + 1):
        N_top = math.isqrt(d // 25) if d >= 25 else 0
        for N in range(1, N_top + 1):
            n = N * N
            if n * d**3 >= 512 * max(d**3, n**4):
                admissible.append([d, N])
    return VerificationReport(
        inequality="lemma15",
        cells_tested=tested,
        violations=violations,
        hypothesis_skips=skips,
        rows=rows,
        details={"scan_d_max": scan_d_max, "admissible_small_cells": admissible},
    )


def _hyp_tail(d: int, r: int, i_size: int, k_top: int) -> Fraction:
    """P[X <= k_top] for X = |sigma(I) cap J|, |J| = r, |I| = i_size."""
    total = 0
    k_lo = max(0, i_size - (d - r))
    for k in range(k_lo, min(r, i_size, k_top) + 1):
        total += math.comb(r, k) * math.comb(d - r, i_size - k)
    return Fraction(total, math.comb(d, i_size))


def check_lemma6(limit_d: int = 50) -> VerificationReport:
    """Exact hypergeometric lower tails: for every d <= limit_d, every
    |J| = r and every |I|, P[|sigma(I) cap J| <= r|I|/(5d)] <= e^(-r|I|/(10d)),
    with the exponential rounded up.  Includes the derived two-parameter
    form: 5 delta2 <= delta1 and delta1 d <= |I| give a tail bound
    e^(-delta1 r/10) at threshold delta2 r."""
    if not 1 <= limit_d <= 60:
        raise ValueError("exact binomial scan supports 1 <= limit_d <= 60")
    cache: dict = {}

    def ebound(x: Fraction) -> Fraction:
        if x not in cache:
            cache[x] = exp_upper(x)
        return cache[x]

    rows, violations = [], []
    tested = 0
    for d in range(1, limit_d + 1):
        worst = None
        for r in range(0, d + 1):
            for i_size in range(0, d + 1):
                thr = Fraction(r * i_size, 5 * d)
                tail = _hyp_tail(d, r, i_size, thr.numerator // thr.denominator)
                bound = ebound(Fraction(-r * i_size, 10 * d))
                tested += 1
                if tail > bound:
                    violations.append(
                        {"d": d, "r": r, "i_size": i_size,
                         "lhs": float(tail), "rhs": float(bound)}
                    )
                margin = float(bound - tail)
                if worst is None or margin < worst[0]:
                    worst = (margin, r, i_size, tail, bound)
        margin, r, i_size, tail, bound = worst
        status = "violation" if tail > bound else "ok"
        rows.append(
            _row(d, "", "", f"r={r},|I|={i_size}", float(tail), float(bound), margin, status)
        )
    delta1_menu = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]
    spec_dims = sorted({min(10, limit_d), min(25, limit_d), limit_d})
    for d in spec_dims:
        for d1 in delta1_menu:
            for d2 in (d1 / 5, d1 / 10):
                i_lo = math.ceil(d1 * d)
                for i_size in sorted({i_lo, (i_lo + d) // 2, d}):
                    worst = None
                    for r in range(0, d + 1):
                        thr = d2 * r
                        tail = _hyp_tail(d, r, i_size, math.floor(thr))
                        bound = ebound(-d1 * r / 10)
                        tested += 1
                        if tail > bound:
                            violations.append(
                                {"d": d, "r": r, "i_size": i_size,
                                 "delta1": str(d1), "delta2": str(d2),
                                 "lhs": float(tail), "rhs": float(bound)}
                            )
                        margin = float(bound - tail)
                        if worst is None or margin < worst[0]:
                            worst = (margin, r, tail, bound)
                    margin, r, tail, bound = worst
                    status = "violation" if tail > bound else "ok"
                    rows.append(
                        _row(d, "", "", f"d1={d1},d2={d2},|I|={i_size},r={r}",
                             float(tail), float(bound), margin, status)
                    )
    return VerificationReport(
        inequality="lemma6",
        cells_tested=tested,
        violations=violations,
        rows=rows,
        details={"limit_d": limit_d},
    )


# ---------------------------------------------------------------------------
# convexity estimate on the permutation group

@dataclass(frozen=True)
class Lemma7Input:
    """One instance of the permutation-average estimate: d coordinates,
    a nonincreasing exponent sequence u (held as two-sided rational brackets
    on the weights w_j = e^(-u_j) for j in J), an index set I with
    delta1 d <= |I|, and the tail window J = (d0, d].  Range and
    monotonicity constraints are enforced at construction."""

    d: int
    i_set: tuple
    d0: int
    delta0: Fraction
    delta1: Fraction
    w_lo: tuple
    w_hi: tuple
    label: str = ""

    def __post_init__(self):
        d, d0 = self.d, self.d0
        if d < 1 or not 0 <= d0 <= d:
            raise ValueError("need d >= 1 and 0 <= d0 <= d")
        if not 0 < self.delta0 <= 1 or not 0 < self.delta1 <= 1:
            raise ValueError("delta0 and delta1 must lie in (0, 1]")
        i_set = self.i_set
        if len(set(i_set)) != len(i_set) or any(not 1 <= j <= d for j in i_set):
            raise ValueError("I must be a subset of {1..d}")
        if len(i_set) < self.delta1 * d:
            raise ValueError("need |I| >= delta1 * d")
        r = d - d0
        if len(self.w_lo) != r or len(self.w_hi) != r:
            raise ValueError("weight brackets must cover J = (d0, d]")
        floor_w = exp_upper(-(1 - self.delta0) / 2)
        prev = None
        for lo, hi in zip(self.w_lo, self.w_hi):
            if not 0 < lo <= hi <= 1:
                raise ValueError("weights must lie in (0, 1]")
            if lo < floor_w and hi < 1:
                raise ValueError("u_1 <= (1 - delta0)/2 requires w >= e^(-(1-delta0)/2)")
            if prev is not None and hi < prev:
                raise ValueError("u must be nonincreasing, so w must be nondecreasing")
            prev = lo

    @classmethod
    def from_weights(cls, d, weights, i_set, d0, delta0, delta1, label="") -> "Lemma7Input":
        """Exact rational weights w_j = e^(-u_j) for j in J, nondecreasing."""
        w = tuple(Fraction(str(x)) for x in weights)
        return cls(
            d=int(d),
            i_set=tuple(sorted(int(j) for j in i_set)),
            d0=int(d0),
            delta0=Fraction(str(delta0)),
            delta1=Fraction(str(delta1)),
            w_lo=w,
            w_hi=w,
            label=label,
        )

    @classmethod
    def from_exponents(cls, d, u, i_set, d0, delta0, delta1, label="") -> "Lemma7Input":
        """Rational exponents u_1 >= ... >= u_d >= 0; weights get two-sided
        rational brackets from directed exponentials."""
        d = int(d)
        d0 = int(d0)
        dq0 = Fraction(str(delta0))
        us = [Fraction(str(x)) for x in u]
        if len(us) != d:
            raise ValueError("u must have length d")
        if any(us[i] < us[i + 1] for i in range(d - 1)) or us[-1] < 0:
            raise ValueError("u must be nonincreasing and nonnegative")
        if us[0] > (1 - dq0) / 2:
            raise ValueError("u_1 <= (1 - delta0)/2 required")
        from .rounding import exp_bracket

        lo, hi = [], []
        for uj in us[d0:]:
            a, b = exp_bracket(-uj)
            lo.append(max(a, Fraction(0)))
            hi.append(min(b, Fraction(1)))
        return cls(
            d=d,
            i_set=tuple(sorted(int(j) for j in i_set)),
            d0=d0,
            delta0=dq0,
            delta1=Fraction(str(delta1)),
            w_lo=tuple(lo),
            w_hi=tuple(hi),
            label=label,
        )


def _elementary_symmetric(ws) -> list:
    """Coefficients e_0..e_r of prod (1 + w_j t), exact."""
    coeffs = [Fraction(1)]
    for w in ws:
        nxt = coeffs + [Fraction(0)]
        for i in range(len(coeffs), 0, -1):
            nxt[i] += w * coeffs[i - 1]
        coeffs = nxt
    return coeffs


def check_lemma7(inp: Lemma7Input) -> VerificationReport:
    """Exact convexity check: the permutation average
    E[exp(-sum_{j in sigma(I) cap J} u_j)] equals
    (1/C(d,|I|)) sum_k C(d-r, |I|-k) e_k(w_J), which must stay below
    3 (prod_J w_j)^(delta0 delta1 / 20).  Both sides are compared without
    rounding by raising to the power of the exponent's denominator."""
    d, d0 = inp.d, inp.d0
    r = d - d0
    i_size = len(inp.i_set)
    es_hi = _elementary_symmetric(inp.w_hi)
    acc = Fraction(0)
    k_lo = max(0, i_size - (d - r))
    for k in range(k_lo, min(r, i_size) + 1):
        acc += math.comb(d - r, i_size - k) * es_hi[k]
    lhs_hi = acc / math.comb(d, i_size)
    w_prod_lo = Fraction(1)
    for w in inp.w_lo:
        w_prod_lo *= w
    expo = inp.delta0 * inp.delta1 / 20
    p, q = expo.numerator, expo.denominator
    ok = lhs_hi**q <= Fraction(3) ** q * w_prod_lo**p
    lhs = float(lhs_hi)
    rhs = 3.0 * float(w_prod_lo) ** float(expo)
    margin = rhs - lhs
    violations = []
    if not ok:
        violations.append(
            {
                "d": d,
                "d0": d0,
                "i_size": i_size,
                "delta0": str(inp.delta0),
                "delta1": str(inp.delta1),
                "weights_lo": [str(w) for w in inp.w_lo],
                "lhs": lhs,
                "rhs": rhs,
            }
        )
    row = _row(d, "", "", inp.label or f"d0={d0},|I|={i_size}", lhs, rhs, margin,
               "violation" if violations else "ok")
    return VerificationReport(
        inequality="lemma7",
        cells_tested=1,
        violations=violations,
        rows=[row],
        details={"delta0": str(inp.delta0), "delta1": str(inp.delta1)},
    )


def check_lemma7_suite(params: dict | None = None) -> VerificationReport:
    """Randomized exact sweep: seeded cases draw dimensions up to d_max,
    delta parameters from small menus, tail windows J, index sets I, and
    nondecreasing 64-adic weights above the admissible floor; two pinned
    edge cases (all exponents zero, I = {1..d}) run first."""
    p = _merged("lemma7", params, extra=("seed",))
    cases = int(p.get("cases", 120))
    d_max = int(p.get("d_max", 40))
    seed = int(p.get("seed", DEFAULT_SEED))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(7,))))
    delta0_menu = [Fraction(1, 2), Fraction(3, 5), Fraction(3, 4), Fraction(9, 10)]
    delta1_menu = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]
    rows, violations = [], []
    tested = 0

    def run_one(inp: Lemma7Input):
        nonlocal tested
        rep = check_lemma7(inp)
        tested += rep.cells_tested
        rows.extend(rep.rows)
        violations.extend(rep.violations)

    run_one(
        Lemma7Input.from_weights(
            6, [1] * 3, (1, 2, 3), 3, Fraction(1, 2), Fraction(1, 2), label="all-zero-exponents"
        )
    )
    run_one(
        Lemma7Input.from_weights(
            8, [Fraction(4, 5)] * 4, tuple(range(1, 9)), 4, Fraction(1, 4), Fraction(1), label="full-I"
        )
    )
    for case in range(cases):
        d = int(rng.integers(2, d_max + 1))
        delta0 = delta0_menu[int(rng.integers(len(delta0_menu)))]
        delta1 = delta1_menu[int(rng.integers(len(delta1_menu)))]
        r = int(rng.integers(1, d + 1))
        d0 = d - r
        floor_w = exp_upper(-(1 - delta0) / 2)
        j_min = math.ceil(floor_w * 64)
        ks = np.sort(rng.integers(j_min, 65, size=r))
        weights = [Fraction(int(k), 64) for k in ks]
        i_lo = math.ceil(delta1 * d)
        i_size = int(rng.integers(i_lo, d + 1))
        i_set = tuple(sorted(int(v) + 1 for v in rng.choice(d, size=i_size, replace=False)))
        run_one(
            Lemma7Input.from_weights(
                d, weights, i_set, d0, delta0, delta1, label=f"case-{case:03d}"
            )
        )
    return VerificationReport(
        inequality="lemma7",
        cells_tested=tested,
        violations=violations,
        rows=rows,
        details={"seed": seed, "cases": cases, "d_max": d_max},
    )


# ---------------------------------------------------------------------------
# shifted-ball counting versus continuous volume

def _mpf_fraction(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def check_lemma10_11(params: dict | None = None) -> VerificationReport:
    """Exact shifted-ball counts against the continuous volume, and exact
    symmetric differences against their drift bounds.  For R >= 1,
    r <= R^delta, delta in (0, 2/3):

        ||(z + B_R) cap Z^r| - vol(B_R)| <= vol t e^t <= e vol R^(3 delta/2 - 1),
        t = r^(3/2)/R,

    and with u = r|z|/R, v = |z| R^(delta - 1):

        |symdiff| <= 4e (u e^u + e^u R^(3 delta/2 - 1)) vol
                  <= 4e (v e^v + e^v R^(3 delta/2 - 1)) vol.

    Counts are exact integers; volumes and bound values are interval
    brackets, compared one-sidedly (lhs lower bound vs rhs upper bound)."""
    p = _merged("lemma10-11", params)
    rows, violations = [], []
    skips = 0
    tested = 0
    for idx, case in enumerate(p["cases"]):
        r = int(case["r"])
        R = Fraction(str(case["R"]))
        z = tuple(Fraction(str(c)) for c in case["z"])
        delta = Fraction(str(case["delta"]))
        if len(z) != r:
            raise ValueError(f"case {idx}: shift length differs from r")
        label = f"case-{idx:03d}"
        hyp = (
            R >= 1
            and 0 < delta < Fraction(2, 3)
            and Fraction(r) ** delta.denominator <= R**delta.numerator
        )
        if not hyp:
            skips += 1
            rows.append(_row(r, "", float(R), f"{label}:hypothesis", "", "", "", "skip"))
            continue
        tested += 1
        count = shifted_ball_count(r, R, z)
        sym = symdiff_count(r, R, z)
        zz = sum(c * c for c in z)
        ex = 3 * delta / 2 - 1

        vol_lo, vol_hi = bracket(
            lambda: mpmath.pi ** (mpmath.mpf(r) / 2)
            * _mpf_fraction(R) ** r
            / mpmath.gamma(mpmath.mpf(r) / 2 + 1)
        )

        def up(fn) -> Fraction:
            return bracket(fn)[1]

        t_expr = lambda: mpmath.power(r, mpmath.mpf(3) / 2) / _mpf_fraction(R)
        b40a_hi = up(lambda: _mpf_fraction(vol_hi) * t_expr() * mpmath.exp(t_expr()))
        b40b_hi = up(
            lambda: mpmath.e * _mpf_fraction(vol_hi) * _mpf_fraction(R) ** _mpf_fraction(ex)
        )
        gap_lo = count - vol_hi
        gap_hi = count - vol_lo
        lhs40_lo = max(Fraction(0), gap_lo, -gap_hi)
        u_expr = lambda: r * mpmath.sqrt(_mpf_fraction(zz)) / _mpf_fraction(R)
        v_expr = lambda: mpmath.sqrt(_mpf_fraction(zz)) * _mpf_fraction(R) ** _mpf_fraction(delta - 1)
        b41a_hi = up(
            lambda: 4
            * mpmath.e
            * (u_expr() * mpmath.exp(u_expr()) + mpmath.exp(u_expr()) * _mpf_fraction(R) ** _mpf_fraction(ex))
            * _mpf_fraction(vol_hi)
        )
        b41b_hi = up(
            lambda: 4
            * mpmath.e
            * (v_expr() * mpmath.exp(v_expr()) + mpmath.exp(v_expr()) * _mpf_fraction(R) ** _mpf_fraction(ex))
            * _mpf_fraction(vol_hi)
        )
        checks = [
            ("count-gap", lhs40_lo, b40a_hi),
            ("count-gap-weak", lhs40_lo, b40b_hi),
            ("symdiff", Fraction(sym), b41a_hi),
            ("symdiff-weak", Fraction(sym), b41b_hi),
        ]
        for name, lhs, rhs in checks:
            bad = lhs > rhs
            if bad:
                violations.append(
                    {
                        "case": idx,
                        "check": name,
                        "r": r,
                        "R": str(R),
                        "z": [str(c) for c in z],
                        "delta": str(delta),
                        "lhs": float(lhs),
                        "rhs": float(rhs),
                    }
                )
            rows.append(
                _row(r, "", float(R), f"{label}:{name}", float(lhs), float(rhs),
                     float(rhs - lhs), "violation" if bad else "ok")
            )
    return VerificationReport(
        inequality="lemma10-11",
        cells_tested=tested,
        violations=violations,
        hypothesis_skips=skips,
        rows=rows,
        details={},
    )


# ---------------------------------------------------------------------------
# intermediate-dimensional and continuous calibrations

def check_intermediate_continuous(r, R, delta, eta, work_cap: int | None = None) -> VerificationReport:
    """Calibration of the reduced-dimension multiplier decay: with
    k = R/sqrt(r), records C_hat = max |m^(r)_R(eta)| /
    (k^(-1/3+2 delta/3) + r k^(-(1+delta)/3) + (k ||eta||)^(-1)) over the
    supplied frequencies, plus the continuous companions at the same
    geometry: decay |m_ball| * (R rho / sqrt(r)) and Lipschitz
    |m_ball - 1| / (R rho / sqrt(r)).  Needs 1 <= r <= R^delta with
    delta in (0, 1/2); eta = 0 contributes nothing (the bound is infinite
    there)."""
    r = int(r)
    Rq = Fraction(str(R))
    dq = Fraction(str(delta))
    hyp = (
        r >= 1
        and Rq >= 1
        and 0 < dq < Fraction(1, 2)
        and Fraction(r) ** dq.denominator <= Rq**dq.numerator
    )
    kappa0 = float(Rq) / math.sqrt(r)
    if not hyp:
        return VerificationReport(
            inequality="lemma20",
            cells_tested=0,
            hypothesis_skips=1,
            rows=[_row(r, "", kappa0, "hypothesis", "", "", "", "skip")],
            details={"R": str(Rq), "delta": str(dq)},
        )
    xs = np.asarray(eta, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[None, :]
    xs = xs - np.rint(xs)
    budget = (Rq * Rq).numerator // (Rq * Rq).denominator
    prefix = m_lower_prefix_batch(r, budget, xs, work_cap)
    vals = np.abs(prefix[:, budget])
    norm = np.sqrt(torus_dist_sq(xs))
    df = float(dq)
    with np.errstate(divide="ignore"):
        denom = (
            kappa0 ** (-1.0 / 3.0 + 2.0 * df / 3.0)
            + r * kappa0 ** (-(1.0 + df) / 3.0)
            + 1.0 / (kappa0 * norm)
        )
    ratio = np.where(np.isfinite(denom), vals / denom, 0.0)
    worst = int(np.argmax(ratio))
    c_dec = 0.0
    c_lip = 0.0
    quad_skips = 0
    Rf = float(Rq)
    for rho in norm:
        if rho <= 0.0:
            continue
        try:
            mc = continuous_ball_multiplier(r, Rf, float(rho))
        except QuadratureError:
            quad_skips += 1
            continue
        scale = Rf * float(rho) / math.sqrt(r)
        c_dec = max(c_dec, abs(mc) * scale)
        c_lip = max(c_lip, abs(mc - 1.0) / scale)
    chat = float(ratio[worst])
    row = _row(r, "", kappa0, f"xi-{worst:03d}", float(vals[worst]),
               float(denom[worst]) if np.isfinite(denom[worst]) else "", chat, "calibrated")
    return VerificationReport(
        inequality="lemma20",
        cells_tested=1,
        violations=[],
        hypothesis_skips=0,
        calibrated_constant=chat,
        rows=[row],
        details={
            "R": str(Rq),
            "delta": str(dq),
            "continuous_decay": c_dec,
            "continuous_lipschitz": c_lip,
            "quadrature_skips": quad_skips,
        },
    )


def check_lemma20_suite(params: dict | None = None) -> VerificationReport:
    """Sweeps the reduced-dimension calibration over (r, R, delta) cells with
    stratified frequencies, and runs the continuous-transform line: per
    dimension, the extremal decay product |m_ball(rho)| * rho/sqrt(d) and
    Lipschitz ratio |m_ball(rho) - 1| / (rho/sqrt(d)) over a fixed
    geometric rho ladder at R = 1."""
    p = _merged("lemma20", params, extra=("seed",))
    seed = int(p.get("seed", DEFAULT_SEED))
    count = int(p.get("samples_per_cell", 40))
    rows = []
    per_cell: dict = {}
    skips = 0
    tested = 0
    chat = None
    cont_dec: dict = {}
    cont_lip: dict = {}
    cases = sorted(
        (tuple(c) for c in p["cases"]),
        key=lambda c: (int(c[0]), str(c[1]), str(c[2])),
    )
    for idx, case in enumerate(cases):
        r, R, delta = int(case[0]), str(case[1]), str(case[2])
        kappa0 = float(Fraction(R)) / math.sqrt(r)
        ids, xs = sample_frequencies(r, kappa0, count, seed, (20, idx), "stratified")
        rep = check_intermediate_continuous(r, R, delta, xs)
        rows.extend(rep.rows)
        skips += rep.hypothesis_skips
        tested += rep.cells_tested
        if rep.calibrated_constant is not None:
            key = f"r={r},R={R},delta={delta}"
            per_cell[key] = rep.calibrated_constant
            chat = rep.calibrated_constant if chat is None else max(chat, rep.calibrated_constant)
    quad_skips = 0
    for d in [int(v) for v in p.get("continuous_dims", [])]:
        dec = 0.0
        lip = 0.0
        for rho in np.geomspace(0.05, 30.0, 41):
            try:
                mc = continuous_ball_multiplier(d, 1.0, float(rho))
            except QuadratureError:
                quad_skips += 1
                continue
            scale = float(rho) / math.sqrt(d)
            dec = max(dec, abs(mc) * scale)
            lip = max(lip, abs(mc - 1.0) / scale)
        cont_dec[str(d)] = dec
        cont_lip[str(d)] = lip
        rows.append(_row(d, "", "", "continuous", dec, lip, "", "calibrated"))
    return VerificationReport(
        inequality="lemma20",
        cells_tested=tested,
        violations=[],
        hypothesis_skips=skips,
        calibrated_constant=chat,
        rows=rows,
        details={
            "seed": seed,
            "samples_per_cell": count,
            "per_cell": per_cell,
            "continuous_decay": cont_dec,
            "continuous_lipschitz": cont_lip,
            "quadrature_skips": quad_skips,
        },
    )


# ---------------------------------------------------------------------------
# orthogonal polynomial suite

def check_kraw_suite(params: dict | None = None) -> VerificationReport:
    """Exact identity checks for the binary orthogonal polynomials up to
    n_max (orthogonality capped separately), followed by calibration of the
    exponential decay rate and an independent re-verification of the decay
    bound with the calibrated constant."""
    p = _merged("kraw", params)
    n_max = int(p.get("n_max", 60))
    orth_limit = int(p.get("orthogonality_limit", 30))
    calib_n = int(p.get("calibration_n_max", 200))
    rows, violations = [], []
    tested = 0
    for n in range(1, n_max + 1):
        rep = property_checks(n, orthogonality_limit=orth_limit)
        tested += 1
        failed = [
            name
            for name, value in (
                ("symmetry", rep.symmetry),
                ("reflection", rep.reflection),
                ("orthogonality", rep.orthogonality),
                ("unit_bound", rep.unit_bound),
                ("root_pattern", rep.root_pattern),
            )
            if value is False
        ]
        if failed:
            violations.append({"n": n, "failed": failed})
        rows.append(
            _row(n, "", "", ",".join(failed) if failed else "identities", "", "",
                 "", "violation" if failed else "ok")
        )
    calib = calibrate_uniform_bound(calib_n)
    bad = verify_uniform_bound(calib_n, calib.c_hat)
    tested += 1
    if bad:
        violations.append({"n_max": calib_n, "decay_violations": bad, "c_hat": calib.c_hat})
    rows.append(
        _row(calib_n, "", "", "decay-with-c-hat", float(bad), 0.0, float(-bad),
             "violation" if bad else "ok")
    )
    return VerificationReport(
        inequality="kraw",
        cells_tested=tested,
        violations=violations,
        calibrated_constant=calib.c_hat,
        rows=rows,
        details={
            "n_max": n_max,
            "orthogonality_limit": orth_limit,
            "calibration_n_max": calib_n,
            "raw_min_rate": calib.raw_min,
            "argmin": list(calib.argmin),
        },
    )


# ---------------------------------------------------------------------------
# suite registry

@lru_cache(maxsize=None)
def default_c_hat(n_max: int = 200) -> float:
    """Calibrated decay rate reused by the Gaussian-branch sweeps."""
    return calibrate_uniform_bound(n_max).c_hat


_DEFAULTS: dict = {
    "prop0": {
        "dims": [2, 3, 4, 8, 16, 32, 64],
        "radii": [1, 2, 4, 8, 16, 32],
        "samples_per_cell": 100,
    },
    "prop2": {
        "cells": [[4, 20], [9, 30], [16, 40], [25, 50]],
        "samples_per_cell": 200,
    },
    "prop4": {"cells": [[13225, 23]], "samples_per_cell": 12},
    "prop5": {"cells": [[13225, 23]], "samples_per_cell": 12},
    "lemma4": {"d_max": 64, "N_max": 64},
    "lemma5": {
        "cells": [[4, 20], [9, 30], [16, 40], [25, 50]],
        "eps1": ["1/10", "1/20"],
        "eps2": ["1/10", "1/20"],
    },
    "lemma6": {"limit_d": 25},
    "lemma7": {"cases": 120, "d_max": 40},
    "lemma8": {
        "cells": [[4, 40], [16, 40]],
        "r": [1, 2, 4],
        "eps": ["1/50", "1/100"],
        "deep": [[4, 520, 4, "1/50"]],
    },
    "lemma9": {
        "cells": [[4, 40], [16, 40]],
        "r": [1, 2],
        "eps": ["1/50"],
        "samples_per_cell": 12,
    },
    "lemma10-11": {
        "cases": [
            {"r": 1, "R": "5/2", "z": ["3/5"], "delta": "1/2"},
            {"r": 1, "R": "5/2", "z": ["0"], "delta": "1/2"},
            {"r": 2, "R": "4", "z": ["1", "0"], "delta": "1/2"},
            {"r": 2, "R": "25/2", "z": ["3/5", "-7/5"], "delta": "3/5"},
            {"r": 3, "R": "27/2", "z": ["1/2", "1/3", "-1/4"], "delta": "13/20"},
            {"r": 2, "R": "30", "z": ["10", "0"], "delta": "1/2"},
            {"r": 3, "R": "9", "z": ["0", "0", "0"], "delta": "1/2"},
            {"r": 3, "R": "4", "z": ["1", "0", "0"], "delta": "1/2"},
        ]
    },
    "lemma14": {
        "dims": [2, 4, 8, 16],
        "radii": [1, 2, 4, 8],
        "samples_per_cell": 100,
    },
    "lemma15": {"cells": [[13500, 23]], "k": [512, 1024], "scan_d_max": 13224},
    "lemma20": {
        "cases": [
            [2, "100", "3/10"],
            [2, "50", "1/3"],
            [3, "60", "1/3"],
            [4, "40", "2/5"],
            [8, "128", "49/100"],
            [10, "128", "49/100"],
        ],
        "samples_per_cell": 40,
        "continuous_dims": [2, 3, 4, 5, 6, 7, 8, 9, 10],
    },
    "square-sum": {"dims": [16, 36, 64], "C1": "1", "C2": "1", "samples_per_cell": 50},
    "kraw": {"n_max": 60, "orthogonality_limit": 30, "calibration_n_max": 200},
}


_GRID_KEYS = ("cells", "dims", "radii", "dyadic_kappa", "sampler", "samples_per_cell", "seed")


def _merged(name: str, params: dict | None, extra=()) -> dict:
    p = dict(params or {})
    unknown = sorted(set(p) - set(_DEFAULTS[name]) - set(extra))
    if unknown:
        raise ValueError(f"unknown {name} parameters: {unknown}")
    merged = dict(_DEFAULTS[name])
    merged.update(p)
    return merged


def _grid_from(name: str, params: dict | None, drop=()) -> SweepGrid:
    merged = _merged(name, params, extra=_GRID_KEYS)
    for key in drop:
        merged.pop(key, None)
    return SweepGrid.from_params(merged)


def _suite_prop0(params):
    return check_prop0(_grid_from("prop0", params))


def _suite_prop2(params):
    return check_prop2(_grid_from("prop2", params))


def _c_hat_from(params: dict) -> float:
    c = params.pop("c_hat", None)
    n_max = int(params.pop("calibration_n_max", 200))
    return float(c) if c is not None else default_c_hat(n_max)


def _suite_prop4(params):
    merged = _merged("prop4", params, extra=_GRID_KEYS + ("c_hat", "calibration_n_max"))
    c = _c_hat_from(merged)
    return check_prop4(SweepGrid.from_params(merged), c)


def _suite_prop5(params):
    merged = _merged("prop5", params, extra=_GRID_KEYS + ("c_hat", "calibration_n_max"))
    c = _c_hat_from(merged)
    return check_prop5(SweepGrid.from_params(merged), c)


def _suite_lemma4(params):
    merged = _merged("lemma4", params)
    return check_lemma4(int(merged["d_max"]), int(merged["N_max"]))


def _suite_lemma6(params):
    merged = _merged("lemma6", params)
    return check_lemma6(int(merged["limit_d"]))


def _suite_lemma14(params):
    return check_lemma14(_grid_from("lemma14", params))


SUITES: dict = {
    "prop0": _suite_prop0,
    "prop2": _suite_prop2,
    "prop4": _suite_prop4,
    "prop5": _suite_prop5,
    "lemma4": _suite_lemma4,
    "lemma5": check_lemma5_suite,
    "lemma6": _suite_lemma6,
    "lemma7": check_lemma7_suite,
    "lemma8": check_lemma8_suite,
    "lemma9": check_lemma9_suite,
    "lemma10-11": check_lemma10_11,
    "lemma14": _suite_lemma14,
    "lemma15": check_lemma15_suite,
    "lemma20": check_lemma20_suite,
    "square-sum": check_square_sum,
    "kraw": check_kraw_suite,
}


def run_suite(suite: str, params: dict | None = None) -> VerificationReport:
    """Dispatch a named suite with config-style parameters (defaults merged)."""
    try:
        fn = SUITES[suite]
    except KeyError:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}") from None
    return fn(dict(params or {}))
