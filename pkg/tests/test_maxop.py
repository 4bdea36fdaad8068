"""Periodic averaging operators: spectral route vs direct shifts, probes, IO."""

import json
import math

import numpy as np
import pytest

from maxlat.budget import EnumerationCapError
from maxlat.lattice import BallSpec, ball_count
from maxlat.maxop import (
    EllipsoidSpec,
    GridFunction,
    WraparoundError,
    apply_avg,
    apply_avg_direct,
    dyadic_maximal,
    ellipsoid_apply,
    ellipsoid_points,
    ellipsoid_probe,
    load_grid,
    operator_norm_probe,
    save_grid,
    semigroup_apply,
    square_function_apply,
    square_function_norm_spectral,
)
from maxlat.multiplier import TorusPoint, semigroup_multiplier

from oracles import averaging_apply_naive, shifted_points_naive


def test_grid_function_shapes_and_norm():
    f = GridFunction.delta(2, 8)
    assert f.values.shape == (8, 8)
    assert f.norm == 1.0
    assert f.values[0, 0] == 1.0 + 0.0j
    g = GridFunction.ball_indicator(2, 16, 2)
    assert g.norm == pytest.approx(math.sqrt(13))
    assert g.support_diameter() == 4


def test_grid_function_dimension_guard():
    with pytest.raises(ValueError):
        GridFunction.delta(6, 4)
    with pytest.raises(ValueError):
        GridFunction(2, 4, np.zeros(5))


def test_alternating_ball_needs_even_period():
    with pytest.raises(ValueError):
        GridFunction.alternating_ball(2, 9, 2)
    f = GridFunction.alternating_ball(1, 8, 2)
    # signs (-1)^x on {-2..2}: +1 at 0 and +-2, -1 at +-1
    assert f.values[0].real == 1.0
    assert f.values[1].real == -1.0
    assert f.values[2].real == 1.0


def test_random_fields_reproducible():
    a = GridFunction.random(2, 8, seed=5, trial=3)
    b = GridFunction.random(2, 8, seed=5, trial=3)
    c = GridFunction.random(2, 8, seed=5, trial=4)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


@pytest.mark.parametrize("d,N,M", [(1, 1, 8), (1, 3, 16), (2, 2, 8), (3, 2, 8)])
def test_spectral_average_matches_direct(d, N, M):
    f = GridFunction.random(d, M, seed=11, trial=d)
    got = apply_avg(f, N)
    ref = apply_avg_direct(f, N)
    assert np.max(np.abs(got.values - ref.values)) <= 1e-12


def test_spectral_average_matches_naive_shifts():
    f = GridFunction.random(2, 8, seed=2)
    got = apply_avg(f, 2)
    ref = averaging_apply_naive(f.values.tolist(), 2, 8)
    assert np.max(np.abs(got.values - np.asarray(ref))) <= 1e-12


def test_average_preserves_constants():
    f = GridFunction(2, 8, np.full((8, 8), 2.5 + 0j))
    out = apply_avg(f, 3)
    assert np.max(np.abs(out.values - 2.5)) <= 1e-13


def test_delta_average_is_normalized_indicator():
    f = GridFunction.delta(2, 16)
    out = apply_avg(f, 2)
    count = ball_count(BallSpec(2, 2))
    on = np.abs(out.values) > 1e-14
    assert int(on.sum()) == count
    assert out.values[0, 0] == pytest.approx(1.0 / count)


def test_faithful_guard_raises_on_wraparound():
    f = GridFunction.ball_indicator(1, 8, 2)
    with pytest.raises(WraparoundError):
        apply_avg(f, 3, faithful=True)
    # large enough period passes
    g = GridFunction.ball_indicator(1, 16, 2)
    apply_avg(g, 3, faithful=True)


def test_semigroup_apply_matches_symbol_on_delta():
    M = 16
    f = GridFunction.delta(1, M)
    out = semigroup_apply(f, 1.7)
    freqs = np.fft.fft(out.values)
    for k in range(M):
        want = semigroup_multiplier(1.7, TorusPoint([k / M]))
        assert abs(freqs[k].real - want) <= 1e-12
    with pytest.raises(ValueError):
        semigroup_apply(f, -0.1)


def test_semigroup_identity_at_zero():
    f = GridFunction.random(2, 8, seed=9)
    out = semigroup_apply(f, 0.0)
    assert np.max(np.abs(out.values - f.values)) <= 1e-13


def test_dyadic_maximal_known_delta_value():
    f = GridFunction.delta(1, 16)
    out = dyadic_maximal(f, [1, 2, 4])
    assert out.values[0].real == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_dyadic_maximal_dominates_each_radius():
    f = GridFunction.random(2, 16, seed=4)
    out = dyadic_maximal(f, [1, 2, 4])
    for N in (1, 2, 4):
        single = np.abs(apply_avg(f, N).values)
        assert np.all(out.values.real >= single - 1e-12)


def test_square_function_spatial_vs_spectral_norm():
    for trial in range(3):
        f = GridFunction.random(2, 16, seed=21, trial=trial)
        spatial = square_function_apply(f).norm
        spectral = square_function_norm_spectral(f)
        assert abs(spatial - spectral) <= 1e-10 * max(1.0, spatial)


def test_square_function_window_assembled_by_hand():
    # with C1 = C2 = 1 and d = 4 the dyadic window is {2, 4}
    f = GridFunction.random(4, 8, seed=13)
    sq = square_function_apply(f)
    acc = np.zeros((8,) * 4)
    for N in (2, 4):
        gap = apply_avg(f, N).values - semigroup_apply(f, N * N / 4.0).values
        acc += np.abs(gap) ** 2
    assert np.max(np.abs(sq.values - np.sqrt(acc))) <= 1e-12


def test_probe_delta_closed_form():
    rep = operator_norm_probe(1, 8, [1], trials=0)
    assert rep.ratios["delta"] == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-12)
    assert rep.best_ratio >= rep.ratios["delta"]


def test_probe_delta_two_dim_closed_form():
    rep = operator_norm_probe(2, 16, [2], trials=0)
    assert rep.ratios["delta"] == pytest.approx(1.0 / math.sqrt(13.0), abs=1e-12)


def test_probe_deterministic_and_ordered():
    a = operator_norm_probe(2, 8, [1, 2], trials=3, seed=42)
    b = operator_norm_probe(2, 8, [1, 2], trials=3, seed=42)
    assert a.payload() == b.payload()
    assert list(a.ratios) == ["delta", "indicator-2", "alternating-2", "random-000", "random-001", "random-002"]
    assert a.best_ratio == max(a.ratios.values())


def test_probe_input_validation():
    with pytest.raises(ValueError):
        operator_norm_probe(6, 8, [1])
    with pytest.raises(ValueError):
        operator_norm_probe(2, 8, [])


def test_ellipsoid_points_known_case():
    spec = EllipsoidSpec(d=1, lambdas=(1.2,), t=2.0)
    assert ellipsoid_points(spec) == [(-1,), (0,), (1,)]


def test_ellipsoid_points_against_sphere():
    # unit weights degenerate to the plain ball
    spec = EllipsoidSpec(d=2, lambdas=(1.0, 1.3), t=3.0)
    pts = ellipsoid_points(spec)
    want = {
        (x, y)
        for (x, y) in shifted_points_naive(2, 3, (0, 0))
        if x * x + (1.3 * y) ** 2 <= 9.0
    }
    assert set(pts) == want
    assert pts == sorted(pts)


def test_ellipsoid_spec_validation():
    with pytest.raises(ValueError):
        EllipsoidSpec(d=5, lambdas=(1.0, 1.1, 1.2, 1.3, 1.35), t=1.0)
    with pytest.raises(ValueError):
        EllipsoidSpec(d=2, lambdas=(1.3, 1.1), t=1.0)
    with pytest.raises(ValueError):
        EllipsoidSpec(d=1, lambdas=(1.5,), t=1.0)
    with pytest.raises(ValueError):
        EllipsoidSpec(d=1, lambdas=(1.2,), t=-1.0)


def test_ellipsoid_enum_cap():
    spec = EllipsoidSpec(d=2, lambdas=(1.0, 1.2), t=400.0)
    with pytest.raises(EnumerationCapError):
        ellipsoid_points(spec, enum_cap=100)


def test_ellipsoid_apply_averages_support():
    spec = EllipsoidSpec(d=1, lambdas=(1.2,), t=2.0)
    f = GridFunction.delta(1, 8)
    out = ellipsoid_apply(f, spec)
    assert out.values[0].real == pytest.approx(1.0 / 3.0)
    assert out.values[1].real == pytest.approx(1.0 / 3.0)
    assert abs(out.values[2]) <= 1e-15


def test_ellipsoid_probe_reports_ratios():
    spec = EllipsoidSpec(d=2, lambdas=(1.0, 1.2), t=2.0)
    rep = ellipsoid_probe(spec, t_set=[1.0, 2.0], M=16)
    assert 0.0 < rep.best_ratio <= 1.0 + 1e-12
    assert rep.witness in rep.ratios


def test_container_round_trip(tmp_path):
    f = GridFunction.random(3, 8, seed=77)
    path = tmp_path / "field.maxlat"
    save_grid(f, path)
    g = load_grid(path)
    assert g.d == 3 and g.M == 8
    assert np.array_equal(g.values, f.values)
    with open(str(path) + ".json") as fh:
        sidecar = json.load(fh)
    assert sidecar["d"] == 3 and sidecar["M"] == 8


def test_container_rejects_corrupt_magic(tmp_path):
    f = GridFunction.delta(1, 4)
    path = tmp_path / "field.maxlat"
    save_grid(f, path)
    raw = bytearray(path.read_bytes())
    raw[:2] = b"ZZ"
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        load_grid(path)


def test_container_rejects_truncated_payload(tmp_path):
    f = GridFunction.delta(2, 4)
    path = tmp_path / "field.maxlat"
    save_grid(f, path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        load_grid(path)


def test_container_detects_sidecar_norm_mismatch(tmp_path):
    f = GridFunction.delta(1, 4)
    path = tmp_path / "field.maxlat"
    save_grid(f, path)
    side = json.loads(open(str(path) + ".json").read())
    side["l2_norm"] = 99.0
    with open(str(path) + ".json", "w") as fh:
        json.dump(side, fh)
    with pytest.raises(ValueError):
        load_grid(path)
