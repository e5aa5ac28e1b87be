import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseadj.adjuster import (AdjustmentSpec, adjust, choose_psi, compose_h,
                               compose_rotation_problem, distortion_metric,
                               reference_weight, select_phase, sort_edges,
                               triangle_adjust, _candidate_weights)
from phaseadj.array_model import (ArrayGeometry, build_preassigned_weight,
                                  power_response, steering_vector, to_db)
from phaseadj.errors import (InfeasibleEdges, InvalidSpec, NoFeasiblePsi,
                             TooFewActiveEdges)
from phaseadj.polygon import PhaseArcSet, is_polygon_feasible

TH0 = math.radians(-30)


def level_spec(**kw):
    return AdjustmentSpec.from_degrees(-30, 52, -30, **kw)


def null_spec():
    return AdjustmentSpec.from_degrees(-30, 35, None)


# ---------------------------------------------------------------- spec

def test_spec_rejects_contradiction():
    with pytest.raises(InvalidSpec):
        AdjustmentSpec(0.1, 0.1, 0.5)


def test_spec_rejects_angle_out_of_range():
    with pytest.raises(InvalidSpec):
        AdjustmentSpec.from_degrees(-30, 95, -20)


def test_spec_reduces_psi():
    assert AdjustmentSpec(0.0, 0.2, 0.1, 2 * math.pi + 0.5).psiC == pytest.approx(0.5)


# ---------------------------------------------------------------- h and v

def test_h_without_level_is_steering(ref_array):
    geom = ref_array["geom"]
    spec = AdjustmentSpec(TH0, 0.4, 0.0)
    for psi in (0.0, 1.0, 4.0):
        np.testing.assert_array_equal(compose_h(geom, spec, psi),
                                      steering_vector(geom, 0.4))


def test_h_vanishes_at_unit_level_same_angle(ref_array):
    spec = AdjustmentSpec(TH0, TH0, 1.0)
    assert np.all(compose_h(ref_array["geom"], spec, 0.0) == 0)


def test_h_level_scenario_nonzero(ref_array):
    geom = ref_array["geom"]
    spec = level_spec()
    norms = np.linalg.norm(compose_h(geom, spec, np.linspace(0, 6, 13)), axis=1)
    # ||a_c - c a_0|| >= ||a_c|| - |c| ||a_0|| = sqrt(N) (1 - sqrt(rho))
    assert np.all(norms >= math.sqrt(11) * (1 - math.sqrt(1e-3)))


def test_h_batch_rows_match_scalar(ref_array):
    geom, spec = ref_array["geom"], level_spec()
    rows = compose_h(geom, spec, [0.3, 2.0])
    np.testing.assert_array_equal(rows[1], compose_h(geom, spec, 2.0))


def test_rotation_problem_trivial():
    rp = compose_rotation_problem(np.zeros(4), [1, 2, 3, 4])
    assert rp.trivially_satisfied


def test_rotation_problem_magnitudes(ref_array):
    h = compose_h(ref_array["geom"], level_spec(), 1.1)
    rp = compose_rotation_problem(h, ref_array["w_pre"])
    np.testing.assert_allclose(rp.magnitudes, np.abs(h) * ref_array["gains"], rtol=1e-15)
    np.testing.assert_allclose(rp.phases, np.angle(h), atol=1e-15)
    assert rp.active.all()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_orthogonality_bridge(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 20))
    h = rng.normal(size=n) + 1j * rng.normal(size=n)
    w_pre = rng.normal(size=n) + 1j * rng.normal(size=n)
    phi = rng.uniform(0, 2 * np.pi, n)
    w_new = np.abs(w_pre) * np.exp(1j * phi)
    rp = compose_rotation_problem(h, w_pre)
    lhs = np.sum(rp.magnitudes * np.exp(1j * (rp.phases - phi)))
    assert abs(lhs - np.vdot(w_new, h)) <= 1e-12 * np.sum(rp.magnitudes)


def test_sort_edges_example():
    rp = compose_rotation_problem(np.ones(3), [2, 5, 3])
    d, perm = sort_edges(rp)
    assert d.tolist() == [5, 3, 2]
    assert (perm.forward + 1).tolist() == [2, 3, 1]


def test_sort_edges_identity():
    rp = compose_rotation_problem(np.ones(4), [4, 3, 2, 1])
    _, perm = sort_edges(rp)
    assert perm.forward.tolist() == [0, 1, 2, 3]


def test_sort_edges_roundtrip():
    mags = np.array([0.3, 2.0, 1.1, 0.9, 1.1])
    rp = compose_rotation_problem(np.ones(5), mags)
    d, perm = sort_edges(rp)
    np.testing.assert_array_equal(perm.to_original(d, 0.0, 5), mags)
    assert all(perm.forward[perm.inverse[n]] == n for n in range(5))


def test_sort_edges_skips_inactive():
    rp = compose_rotation_problem(np.ones(4), [1, 0, 3, 2])
    d, perm = sort_edges(rp)
    assert d.tolist() == [3, 2, 1]
    assert 1 not in perm.forward


@pytest.mark.parametrize("mags", [[1, 0, 0], [2, 1, 0]])
def test_sort_edges_too_few(mags):
    with pytest.raises(TooFewActiveEdges):
        sort_edges(compose_rotation_problem(np.ones(3), mags))


def test_sort_edges_two_equal_pass():
    d, _ = sort_edges(compose_rotation_problem(np.ones(3), [1.5, 0, 1.5]))
    assert d.tolist() == [1.5, 1.5]


# ---------------------------------------------------------------- reference

def test_reference_weight_already_orthogonal():
    h = np.array([1, 1j, 0])
    w = np.array([1j, 1, 5])  # h^H w = 1j + (-1j) = 0
    assert abs(np.vdot(h, w)) == 0
    np.testing.assert_array_equal(reference_weight(w, h), w)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reference_weight_orthogonal(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    h = rng.normal(size=n) + 1j * rng.normal(size=n)
    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    wbar = reference_weight(w, h)
    assert abs(np.vdot(h, wbar)) <= 1e-12 * np.linalg.norm(h) * np.linalg.norm(wbar)


def test_reference_weight_locally_optimal():
    rng = np.random.default_rng(11)
    n = 9
    h = rng.normal(size=n) + 1j * rng.normal(size=n)
    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    wbar = reference_weight(w, h)
    base = np.linalg.norm(wbar - w)
    for _ in range(100):
        u = rng.normal(size=n) + 1j * rng.normal(size=n)
        u -= h * np.vdot(h, u) / np.vdot(h, h)
        u /= np.linalg.norm(u)
        assert abs(np.vdot(h, u)) <= 1e-12
        assert base <= np.linalg.norm(wbar + 1e-3 * u - w)


def test_select_phase_reexported():
    arcs = PhaseArcSet.from_bounds((0.0, math.pi / 4), (math.pi / 2, 3 * math.pi / 4))
    assert select_phase(arcs, 3 * math.pi / 8) == pytest.approx(math.pi / 4)


# ---------------------------------------------------------------- psi choice

def test_choose_psi_explicit_bypass(ref_array):
    spec = level_spec(psiC=1.234)
    assert choose_psi(ref_array["geom"], spec, ref_array["w_pre"]) == 1.234


def test_level_psi_scan_has_feasible(ref_array):
    geom, w = ref_array["geom"], ref_array["w_pre"]
    spec = level_spec()
    psis = 2 * np.pi * np.arange(64) / 64
    feasible = []
    for psi in psis:
        rp = compose_rotation_problem(compose_h(geom, spec, psi), w)
        d, _ = sort_edges(rp)
        feasible.append(is_polygon_feasible(d))
    assert any(feasible)
    psi = choose_psi(geom, spec, w)
    k = int(round(psi / (2 * np.pi / 64)))
    assert feasible[k]


def test_choose_psi_minimizes_distortion(ref_array):
    geom, w = ref_array["geom"], ref_array["w_pre"]
    spec = level_spec()
    best = adjust(geom, w, spec)
    for psi in 2 * np.pi * np.arange(0, 64, 7) / 64:
        try:
            other = adjust(geom, w, level_spec(psiC=psi))
        except InfeasibleEdges:
            continue
        assert best.distortion <= other.distortion + 1e-12


def test_psi_grid_env(ref_array, monkeypatch):
    monkeypatch.setenv("PHASEADJ_PSI_GRID", "8")
    psi = choose_psi(ref_array["geom"], level_spec(), ref_array["w_pre"])
    assert (psi / (2 * np.pi / 8)) == pytest.approx(round(psi / (2 * np.pi / 8)))


# ---------------------------------------------------------------- adjust

def _check_report(report, geom, w_pre, spec):
    assert np.max(np.abs(np.abs(report.w_new) - np.abs(w_pre))) <= 1e-15 * np.abs(w_pre).max()
    h = compose_h(geom, spec, report.psi_used)
    assert report.residual <= 1e-9 * np.linalg.norm(report.w_new) * np.linalg.norm(h)
    level = power_response(report.w_new, geom, spec.thetaC, spec.theta0)
    assert level == report.level
    if spec.rhoC > 0:
        assert abs(level / spec.rhoC - 1) <= 1e-6
    else:
        assert level <= 1e-8


def test_adjust_level_scenario(ref_array):
    geom, w = ref_array["geom"], ref_array["w_pre"]
    spec = level_spec()
    report = adjust(geom, w, spec)
    _check_report(report, geom, w, spec)
    assert abs(report.level_db + 30) <= 1e-6
    np.testing.assert_allclose(np.abs(report.w_new), ref_array["gains"], rtol=1e-12)


def test_adjust_null_scenario(ref_array):
    geom, w = ref_array["geom"], ref_array["w_pre"]
    spec = null_spec()
    report = adjust(geom, w, spec)
    _check_report(report, geom, w, spec)
    assert report.psi_used == 0.0
    assert report.level_db <= -80


def test_adjust_already_satisfied_is_identity(ref_array):
    geom, w = ref_array["geom"], ref_array["w_pre"]
    thc = math.radians(20)
    level = power_response(w, geom, thc, TH0)
    a0, ac = steering_vector(geom, TH0), steering_vector(geom, thc)
    psi = (np.angle(np.vdot(w, ac)) - np.angle(np.vdot(w, a0))) % (2 * np.pi)
    report = adjust(geom, w, AdjustmentSpec(TH0, thc, level, psi))
    ratio = report.w_new / w
    assert np.ptp(np.angle(ratio * np.conj(ratio[0]))) <= 1e-12
    assert report.distortion <= 1e-10


def test_adjust_trivial_h(ref_array):
    report = adjust(ref_array["geom"], ref_array["w_pre"], AdjustmentSpec(TH0, TH0, 1.0, 0.0))
    np.testing.assert_array_equal(report.w_new, ref_array["w_pre"])
    assert report.residual == 0.0


def test_adjust_inactive_entry_keeps_phase():
    # rho = 1, psi = 0: h_n = 0 for the element at the origin
    geom = ArrayGeometry([0.0, 0.4, 0.9, 1.7, 2.2])
    w = build_preassigned_weight(geom, [1.0, 0.9, 1.1, 1.0, 0.8], 0.0) * np.exp(0.3j)
    spec = AdjustmentSpec(0.0, math.radians(25), 1.0, 0.0)
    rp = compose_rotation_problem(compose_h(geom, spec), w)
    assert rp.active.tolist() == [False, True, True, True, True]
    report = adjust(geom, w, spec)
    assert report.w_new[0] == w[0]
    _check_report(report, geom, w, spec)


def test_adjust_two_equal_edges():
    geom = ArrayGeometry([0.0, 0.35, 0.8])
    w = np.array([1.0, 0.0, 1.0j])
    spec = AdjustmentSpec(0.0, math.radians(30), 0.0)
    report = adjust(geom, w, spec)
    assert report.level <= 1e-20
    assert report.w_new[1] == 0


def test_adjust_infeasible_explicit_psi():
    geom = ArrayGeometry([0.0, 0.5, 1.0])
    w = build_preassigned_weight(geom, [100.0, 1.0, 1.0], 0.0)
    with pytest.raises(InfeasibleEdges):
        adjust(geom, w, AdjustmentSpec.from_degrees(0, 40, -30, psiC=0.0))


def test_adjust_no_feasible_psi():
    geom = ArrayGeometry([0.0, 0.5, 1.0])
    w = build_preassigned_weight(geom, [100.0, 1.0, 1.0], 0.0)
    with pytest.raises(NoFeasiblePsi):
        adjust(geom, w, AdjustmentSpec.from_degrees(0, 40, -30))


def test_adjust_single_active_edge():
    geom = ArrayGeometry([0.0, 0.5, 1.0])
    with pytest.raises(TooFewActiveEdges):
        adjust(geom, [1.0, 0.0, 0.0], AdjustmentSpec(0.0, 0.5, 0.0))


def test_adjust_deterministic(ref_array):
    a = adjust(ref_array["geom"], ref_array["w_pre"], level_spec())
    b = adjust(ref_array["geom"], ref_array["w_pre"], level_spec())
    np.testing.assert_array_equal(a.w_new, b.w_new)
    assert (a.psi_used, a.distortion) == (b.psi_used, b.distortion)


def test_recovery_roundtrip(ref_array):
    # recovered element phases, re-sorted, give back the polygon directions
    geom, w = ref_array["geom"], ref_array["w_pre"]
    spec = level_spec(psiC=1.4726215563702154)
    report = adjust(geom, w, spec)
    rp = compose_rotation_problem(compose_h(geom, spec), w)
    d, perm = sort_edges(rp)
    varphi = rp.phases[perm.forward] - np.angle(report.w_new[perm.forward])
    assert abs(np.sum(d * np.exp(1j * varphi))) <= 1e-10 * d.sum()


def test_triangle_adjust_contracts(ref_array):
    geom, w = ref_array["geom"], ref_array["w_pre"]
    for spec in (level_spec(), null_spec()):
        report = triangle_adjust(geom, w, spec)
        _check_report(report, geom, w, spec)
    assert abs(triangle_adjust(geom, w, level_spec()).level_db + 30) <= 1e-6


def test_batch_weights_agree_with_single(ref_array):
    geom, w = ref_array["geom"], ref_array["w_pre"]
    spec = level_spec()
    psis = np.array([0.2, 1.4726215563702154, 3.0])
    batch, ok, _ = _candidate_weights(w, compose_h(geom, spec, psis), "polygon")
    for k, psi in enumerate(psis):
        single, ok1, _ = _candidate_weights(w, compose_h(geom, spec, [psi]), "polygon")
        assert ok[k] == ok1[0]
        if ok[k]:
            np.testing.assert_allclose(batch[k], single[0], atol=1e-12)


def test_distortion_metric_zero_for_same_weights(ref_array):
    w = ref_array["w_pre"]
    assert distortion_metric(ref_array["geom"], w, w, TH0, 0.9) == 0.0
    assert distortion_metric(ref_array["geom"], w, w * 1j, TH0, 0.9) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adjust_random_instances(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 33))
    geom = ArrayGeometry(rng.uniform(0, 10, n))
    th0 = rng.uniform(-1.4, 1.4)
    thc = rng.uniform(-1.5, 1.5)
    if abs(thc - th0) < 1e-3:
        return
    w = build_preassigned_weight(geom, rng.uniform(0.5, 1.5, n), th0)
    spec = AdjustmentSpec(th0, thc, float(10 ** rng.uniform(-5, -1)))
    try:
        report = adjust(geom, w, spec, psi_grid=16)
    except NoFeasiblePsi:
        return
    _check_report(report, geom, w, spec)
