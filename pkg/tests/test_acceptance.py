"""End-to-end acceptance gates for the package.

Each test here is one user-facing guarantee: exact counting agrees with
exhaustive enumeration, the multiplier DP agrees with the defining sum,
every shipped inequality check passes its full sweep with zero violations,
calibrated constants stay within a factor of two of the committed baseline
fixtures, and report payloads are byte-identical across thread counts.
Every test prints a single [acceptance] PASS/FAIL line with its headline
numbers before asserting, so a plain `pytest -v` run doubles as the
acceptance report.

Stated wall-clock caps are asserted with time.monotonic.  The heavy sweeps
(the unconditional bound over all 63 x 32 cells at 1000 samples each, and
the calibrated two-term approximation at d = 13500 and d = 16000) dominate
the runtime; everything else finishes in seconds.
"""

import math
import os
import time

import numpy as np
import pytest

from oracles import ball_points_pruned, multiplier_naive

from maxlat.cli import load_baselines, make_manifest
from maxlat.lattice import BallSpec, MarkedClass, ball_count, profile_spectrum
from maxlat.maxop import GridFunction, apply_avg, apply_avg_direct, operator_norm_probe
from maxlat.multiplier import MultiplierRequest, TorusPoint
from maxlat.verifier import (
    DEFAULT_SEED,
    SUITES,
    SweepGrid,
    canonical_json,
    check_lemma4,
    check_lemma6,
    check_lemma7_suite,
    check_prop0,
    check_prop2,
    check_prop4,
    check_prop5,
    default_c_hat,
    run_suite,
)


def _line(tag: str, ok: bool, note: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    msg = f"[acceptance] {tag}: {status}"
    if note:
        msg += f" ({note})"
    print(msg, flush=True)


def test_criterion_01_counts_and_profiles_match_enumeration():
    """Ball counts, norm spectra, and all three marked-coordinate profiles
    agree with a from-scratch enumeration of every lattice point, for every
    cell with d <= 6 and N <= 8, in under 60 seconds."""
    t0 = time.monotonic()
    classes = ("in{-1,1}", "abs>=2", "all")
    mismatches = []
    cells = 0
    for d in range(1, 7):
        for N in range(1, 9):
            cells += 1
            pts = ball_points_pruned(d, N)
            n = N * N
            # one pass per point: squared norm plus marked-coordinate counts
            # for the unit class {-1,1} and the large class v^2 >= 4
            unit = [[0] * (d + 1) for _ in range(n + 1)]
            large = [[0] * (d + 1) for _ in range(n + 1)]
            whole = [[0] * (d + 1) for _ in range(n + 1)]
            for p in pts:
                m = 0
                j_unit = 0
                j_large = 0
                for v in p:
                    m += v * v
                    if v == 1 or v == -1:
                        j_unit += 1
                    elif v != 0:
                        j_large += 1
                unit[m][j_unit] += 1
                large[m][j_large] += 1
                whole[m][d] += 1
            if ball_count(BallSpec(d, N)) != len(pts):
                mismatches.append((d, N, "count"))
            tallies = {"in{-1,1}": unit, "abs>=2": large, "all": whole}
            for text in classes:
                prof = profile_spectrum(d, N, MarkedClass.parse(text))
                if prof.counts != tallies[text]:
                    mismatches.append((d, N, text))
    elapsed = time.monotonic() - t0
    ok = not mismatches and elapsed < 60.0
    _line("01 counting vs enumeration", ok, f"{cells} cells, {elapsed:.1f}s")
    assert mismatches == []
    assert elapsed < 60.0


def test_criterion_02_multiplier_matches_defining_sum():
    """The series-convolution evaluator agrees with the defining average of
    cosine products over the ball, to 1e-9, on 200 seeded frequencies spread
    over every cell with d <= 5 and N <= 6, in under 120 seconds."""
    t0 = time.monotonic()
    cells = [(d, N) for d in range(1, 6) for N in range(1, 7)]
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    for i in range(200):
        d, N = cells[i % len(cells)]
        xi = rng.uniform(-0.5, 0.5, size=d)
        got = MultiplierRequest(spec=BallSpec(d, N), xi=TorusPoint(xi.tolist())).evaluate()
        ref = multiplier_naive(d, N, xi.tolist())
        worst = max(worst, abs(got - ref))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-9 and elapsed < 120.0
    _line("02 multiplier vs defining sum", ok, f"max err {worst:.3e}, {elapsed:.1f}s")
    assert worst <= 1e-9
    assert elapsed < 120.0


def test_criterion_03_unconditional_bound_full_sweep():
    """The unconditional quadratic bound |m - 1| <= 2 pi^2 kappa^2 |xi|^2
    holds with zero violations over every d in 2..64, every N in 1..32, and
    1000 stratified frequencies per cell."""
    t0 = time.monotonic()
    grid = SweepGrid.from_params(
        {
            "dims": list(range(2, 65)),
            "radii": list(range(1, 33)),
            "samples_per_cell": 1000,
        }
    )
    rep = check_prop0(grid)
    elapsed = time.monotonic() - t0
    ok = rep.passed and not rep.violations and rep.cells_tested == 63 * 32
    _line(
        "03 unconditional bound sweep",
        ok,
        f"{rep.cells_tested} cells x 1000 samples, {elapsed:.0f}s",
    )
    assert rep.passed
    assert rep.violations == []
    assert rep.cells_tested == 63 * 32


def test_criterion_04_count_brackets_all_cells():
    """The rounding-safe volume brackets hold and are decisive (lower bound
    strictly below upper bound) for every exact count with d, N <= 64."""
    rep = check_lemma4(64, 64)
    ok = rep.passed and not rep.violations and rep.details["indecisive"] == []
    _line("04 volume brackets", ok, f"{rep.cells_tested} cells, all decisive")
    assert rep.passed
    assert rep.violations == []
    assert rep.details["indecisive"] == []


def test_criterion_05_hypergeometric_tails_exact():
    """The exact hypergeometric tail bound holds for every population size
    d <= 50 and every admissible draw count and marked-set size."""
    rep = check_lemma6(limit_d=50)
    ok = rep.passed and not rep.violations
    _line("05 hypergeometric tails", ok, f"{rep.cells_tested} cells, exact")
    assert rep.passed
    assert rep.violations == []


def test_criterion_06_permutation_averages_bounded():
    """The exact permutation average of exp(-sum of sampled weights) stays
    below its product bound on a 500-case randomized grid with d <= 40."""
    rep = check_lemma7_suite({"cases": 500, "d_max": 40})
    ok = rep.passed and not rep.violations and rep.cells_tested >= 500
    _line("06 permutation averages", ok, f"{rep.cells_tested} cases, exact")
    assert rep.passed
    assert rep.violations == []
    assert rep.cells_tested >= 500


def test_criterion_07_sign_coordinate_concentration():
    """The exact 2^(1-k) concentration bound for points with few +-1
    coordinates holds at the admissible large cell (d = 13500, N = 23) and
    there are no admissible small cells below it; under 10 minutes."""
    t0 = time.monotonic()
    rep = run_suite("lemma15", None)
    elapsed = time.monotonic() - t0
    ok = (
        rep.passed
        and not rep.violations
        and rep.cells_tested >= 1
        and rep.hypothesis_skips >= 1
        and rep.details["admissible_small_cells"] == []
        and elapsed < 600.0
    )
    _line(
        "07 sign-coordinate concentration",
        ok,
        f"large cell exact, k=1024 above n so skipped, {elapsed:.0f}s",
    )
    assert rep.passed
    assert rep.violations == []
    assert rep.cells_tested >= 1
    # k = 1024 exceeds n = 529, so that branch cannot meet its hypotheses
    assert rep.hypothesis_skips >= 1
    assert rep.details["admissible_small_cells"] == []
    assert elapsed < 600.0


def test_criterion_08_krawtchouk_identities_and_calibration():
    """Krawtchouk symmetry, reflection, and orthogonality hold exactly up to
    n = 60 (orthogonality to n = 30), the sign-root pattern holds for
    k <= n/2, and the calibrated decay rate c-hat lies in (0, 1] with the
    uniform bound re-verified at that rate with zero violations."""
    baselines = load_baselines()
    rep = run_suite(
        "kraw", {"n_max": 60, "orthogonality_limit": 30, "calibration_n_max": 200}
    )
    c_hat = rep.calibrated_constant
    ok = rep.passed and not rep.violations and 0.0 < c_hat <= 1.0
    _line(
        "08 krawtchouk identities",
        ok,
        f"c_hat {c_hat}, raw min rate {rep.details['raw_min_rate']:.6f}",
    )
    assert rep.passed
    assert rep.violations == []
    assert 0.0 < c_hat <= 1.0
    assert rep.details["raw_min_rate"] == pytest.approx(math.log(3.0), abs=1e-12)
    # regression pin: the committed baseline may not drift upward
    assert c_hat <= baselines["kraw_c_hat"] * 1.01


def test_criterion_09_two_term_approximation_calibrated():
    """With the calibrated Krawtchouk rate, the two-term eigenvalue
    approximation (constant 17) and the pure decay bound (constant 8) hold
    with zero violations on 50 stratified frequencies at each of
    (d, N) = (13500, 23) and (16000, 25), in under 30 minutes total."""
    t0 = time.monotonic()
    c_hat = default_c_hat(200)
    grid = SweepGrid.from_params(
        {"cells": [[13500, 23], [16000, 25]], "samples_per_cell": 50}
    )
    rep4 = check_prop4(grid, c_hat)
    rep5 = check_prop5(grid, c_hat)
    elapsed = time.monotonic() - t0
    ok = (
        rep4.passed
        and rep5.passed
        and not rep4.violations
        and not rep5.violations
        and rep4.hypothesis_skips == 0
        and rep5.hypothesis_skips == 0
        and elapsed < 1800.0
    )
    _line(
        "09 calibrated approximation",
        ok,
        f"2 cells x 50 samples x 2 bounds, c_hat {c_hat}, {elapsed:.0f}s",
    )
    assert rep4.passed and rep4.violations == [] and rep4.hypothesis_skips == 0
    assert rep5.passed and rep5.violations == [] and rep5.hypothesis_skips == 0
    assert rep4.cells_tested == 2 and rep5.cells_tested == 2
    assert elapsed < 1800.0


def test_criterion_10_decay_constant_within_baseline_gates():
    """The calibrated decay constant C-hat on the kappa = 10 line and the
    square-sum calibration stay within a factor of two of their committed
    baselines, per dimension, and the cross-dimension spread is at most 2."""
    baselines = load_baselines()
    grid = SweepGrid.from_params(
        {
            "cells": [[4, 20], [9, 30], [16, 40], [25, 50], [36, 60], [64, 80]],
            "samples_per_cell": 500,
        }
    )
    rep = check_prop2(grid)
    per_d = rep.details["per_dimension"]
    spread = rep.details["cross_dimension_spread"]
    gate_fail = []
    for key, base in baselines["prop2_chat_per_d"].items():
        val = per_d[key]
        if not base / 2.0 <= val <= base * 2.0:
            gate_fail.append(("decay", key, val, base))
    sq = run_suite("square-sum", {"dims": [16, 36, 64], "samples_per_cell": 200})
    sq_per_d = sq.details["max_per_dimension"]
    for key, base in baselines["square_sum_max_per_d"].items():
        val = sq_per_d[key]
        if not base / 2.0 <= val <= base * 2.0:
            gate_fail.append(("square-sum", key, val, base))
    ok = (
        not gate_fail
        and spread <= 2.0
        and sq.details["cross_dimension_spread"] <= 2.0
        and rep.passed
        and sq.passed
    )
    _line(
        "10 calibration gates",
        ok,
        f"C_hat {rep.calibrated_constant:.6f}, spread {spread:.4f}",
    )
    assert rep.passed and sq.passed
    assert gate_fail == []
    assert spread <= 2.0
    assert sq.details["cross_dimension_spread"] <= 2.0
    # regression pin: recalibration on the committed grid may not drift up
    assert rep.calibrated_constant <= baselines["prop2_chat"] * 1.01


def test_criterion_11_averaging_operator_consistency():
    """The spectral route for the averaging operator matches direct shift
    summation to 1e-10 on every grid with d <= 3, N <= 4, M <= 32; the delta
    witness reproduces its closed-form norm to 1e-12; and the seeded norm
    probes stay within a factor of two of the committed baselines."""
    worst = 0.0
    for d in (1, 2, 3):
        for N in (1, 2, 3, 4):
            for M in (8, 16, 32):
                f = GridFunction.random(d, M, seed=DEFAULT_SEED, trial=100 * d + 10 * N)
                got = apply_avg(f, N)
                ref = apply_avg_direct(f, N)
                worst = max(worst, float(np.max(np.abs(got.values - ref.values))))
    delta1 = operator_norm_probe(1, 8, [1], trials=0).ratios["delta"]
    delta2 = operator_norm_probe(2, 16, [2], trials=0).ratios["delta"]
    baselines = load_baselines()
    probe_fail = []
    for d in (1, 2, 3):
        rep = operator_norm_probe(d, 32, [1, 2, 4, 8], trials=200, seed=DEFAULT_SEED)
        base = baselines["probe_best_ratio_per_d"][str(d)]
        if not base / 2.0 <= rep.best_ratio <= base * 2.0:
            probe_fail.append((d, rep.best_ratio, base))
    ok = (
        worst <= 1e-10
        and abs(delta1 - 1.0 / math.sqrt(3.0)) <= 1e-12
        and abs(delta2 - 1.0 / math.sqrt(13.0)) <= 1e-12
        and not probe_fail
    )
    _line(
        "11 averaging operator",
        ok,
        f"spectral-direct gap {worst:.2e}, delta norms exact",
    )
    assert worst <= 1e-10
    assert abs(delta1 - 1.0 / math.sqrt(3.0)) <= 1e-12
    assert abs(delta2 - 1.0 / math.sqrt(13.0)) <= 1e-12
    assert probe_fail == []


def test_criterion_12_reports_identical_across_thread_counts():
    """Two full verification runs with identical manifests produce
    byte-identical canonical report payloads under thread counts 1 and 8."""

    def run_all() -> tuple[dict, dict]:
        payloads = {}
        digests = {}
        for suite in sorted(SUITES):
            rep = run_suite(suite, None)
            payloads[suite] = canonical_json(rep.payload()).encode("ascii")
            digests[suite] = rep.digest()
        return payloads, digests

    saved = os.environ.get("MAXLAT_THREADS")
    try:
        os.environ["MAXLAT_THREADS"] = "1"
        manifest_one = make_manifest("verify", {"suites": sorted(SUITES)}).payload()
        payloads_one, digests_one = run_all()
        os.environ["MAXLAT_THREADS"] = "8"
        manifest_eight = make_manifest("verify", {"suites": sorted(SUITES)}).payload()
        payloads_eight, digests_eight = run_all()
    finally:
        if saved is None:
            os.environ.pop("MAXLAT_THREADS", None)
        else:
            os.environ["MAXLAT_THREADS"] = saved
    ok = (
        manifest_one == manifest_eight
        and payloads_one == payloads_eight
        and digests_one == digests_eight
    )
    _line("12 thread determinism", ok, f"{len(payloads_one)} suites byte-identical")
    assert manifest_one == manifest_eight
    assert payloads_one == payloads_eight
    assert digests_one == digests_eight
