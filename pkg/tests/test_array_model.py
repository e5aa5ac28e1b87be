import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseadj.array_model import (ArrayGeometry, build_preassigned_weight,
                                  power_response, sample_pattern,
                                  steering_vector, to_db)
from phaseadj.errors import DegenerateMainBeam, LengthMismatch

THREE = ArrayGeometry([0.0, 0.5, 1.0])


def test_steering_broadside_is_all_ones():
    np.testing.assert_allclose(steering_vector(THREE, 0.0), [1, 1, 1])


def test_steering_endfire_alternates():
    np.testing.assert_allclose(steering_vector(THREE, math.pi / 2), [1, -1, 1], atol=1e-15)


def test_steering_at_minus30(ref_array):
    x = ref_array["geom"].positions
    a = steering_vector(ref_array["geom"], math.radians(-30))
    # sin(-30 deg) = -1/2, so each entry is exp(-j pi x_n)
    np.testing.assert_allclose(a, np.exp(-1j * np.pi * x), atol=1e-14)
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-14)


def test_steering_many_angles_shape():
    a = steering_vector(THREE, np.linspace(-1, 1, 7))
    assert a.shape == (7, 3)


def test_power_response_at_main_axis_is_one(ref_array):
    w = ref_array["w_pub"]
    assert power_response(w, ref_array["geom"], 0.3, 0.3) == 1.0


def test_published_weights_reach_minus30db(ref_array):
    level = power_response(ref_array["w_pub"], ref_array["geom"],
                           math.radians(52), math.radians(-30))
    assert abs(to_db(level) + 30.0) <= 0.1


def test_preassigned_weight_is_normalized(ref_array):
    w = ref_array["w_pre"]
    th = math.radians(-30)
    assert power_response(w, ref_array["geom"], th, th) == pytest.approx(1.0, abs=1e-15)


def test_degenerate_main_beam():
    geom = ArrayGeometry([0.0, 0.5])
    # two elements half a wavelength apart in antiphase: broadside null
    with pytest.raises(DegenerateMainBeam):
        power_response([1.0, -1.0], geom, 0.5, 0.0)


def test_sample_pattern_single_point(ref_array):
    th0 = math.radians(-30)
    grid, db = sample_pattern(ref_array["w_pre"], ref_array["geom"], th0, [th0])
    assert grid.tolist() == [th0]
    assert db.tolist() == [0.0]


def test_sample_pattern_matches_power_response(ref_array):
    geom, w = ref_array["geom"], ref_array["w_pub"]
    th0 = math.radians(-30)
    grid = np.radians(np.linspace(-90, 90, 37))
    _, db = sample_pattern(w, geom, th0, grid)
    direct = [to_db(power_response(w, geom, t, th0)) for t in grid]
    np.testing.assert_allclose(db, direct, rtol=1e-10, atol=1e-10)


def test_sample_pattern_published_52deg(ref_array):
    grid = np.radians([-30.0, 0.0, 52.0])
    _, db = sample_pattern(ref_array["w_pub"], ref_array["geom"], grid[0], grid)
    assert abs(db[2] + 30.0) <= 0.1


def test_sample_pattern_rejects_empty_grid(ref_array):
    with pytest.raises(ValueError):
        sample_pattern(ref_array["w_pub"], ref_array["geom"], 0.0, [])


def test_build_preassigned_all_ones():
    np.testing.assert_allclose(build_preassigned_weight(THREE, [1, 1, 1], 0.0), [1, 1, 1])


def test_build_preassigned_length_mismatch():
    with pytest.raises(LengthMismatch):
        build_preassigned_weight(THREE, [1, 1], 0.0)


def test_build_preassigned_magnitudes(ref_array):
    g = ref_array["gains"]
    np.testing.assert_allclose(np.abs(ref_array["w_pre"]), g, rtol=1e-15)


def test_weight_length_checked():
    with pytest.raises(LengthMismatch):
        power_response([1, 1], THREE, 0.1, 0.0)


positions = st.lists(st.floats(-10, 10), min_size=1, max_size=16)
angles = st.floats(-math.pi / 2, math.pi / 2)


@settings(max_examples=100, deadline=None)
@given(positions, angles)
def test_unit_modulus(x, theta):
    a = steering_vector(ArrayGeometry(x), theta)
    assert np.max(np.abs(np.abs(a) - 1.0)) <= 1e-14


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi), angles, angles)
def test_global_phase_invariance(seed, c, th_c, th_0):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 12))
    geom = ArrayGeometry(rng.uniform(0, 5, n))
    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    try:
        base = power_response(w, geom, th_c, th_0)
    except DegenerateMainBeam:
        return
    rotated = power_response(np.exp(1j * c) * w, geom, th_c, th_0)
    assert rotated == pytest.approx(base, rel=1e-12, abs=1e-300)
    _, p1 = sample_pattern(w, geom, th_0, [th_c, th_0])
    _, p2 = sample_pattern(np.exp(1j * c) * w, geom, th_0, [th_c, th_0])
    np.testing.assert_allclose(p1, p2, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), angles)
def test_magnitude_law(seed, th0):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 40))
    geom = ArrayGeometry(rng.uniform(0, 10, n))
    g = rng.uniform(0.1, 3, n)
    w = build_preassigned_weight(geom, g, th0)
    assert np.max(np.abs(np.abs(w) - g) / g) <= 1e-15
