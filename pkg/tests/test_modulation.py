import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from ssbtma.errors import InvalidArgument, UnsupportedSteering
from ssbtma.geometry import ArrayGeometry, ArrayKind, linear_uniform
from ssbtma.modulation import (BeamMode, BeamTask, Branch, ElementSchedule, ModulationSchedule,
                               branch_coefficient, joint_coefficients, joint_harmonic_coefficient,
                               overlap_matrices, overlap_tau, overlap_tau_prime, solve_steering,
                               waveform_value)
from ssbtma.oracle import OracleConfig, sampled_coefficient, time_domain_coefficients

starts = st.floats(-2.0, 3.0, allow_nan=False)
duties = st.floats(0.0, 0.5, allow_nan=False)
schedules = st.builds(lambda on, tau: ElementSchedule(on, on + tau), starts, duties)


def test_in_phase_coefficient_quarter_duty():
    e = ElementSchedule(0.0, 0.25)
    assert_allclose(branch_coefficient(e, Branch.I, 1), (1 - 1j) / math.pi, atol=1e-15)


def test_joint_coefficient_quarter_duty():
    e = ElementSchedule(0.0, 0.25)
    assert_allclose(joint_harmonic_coefficient(e, 1), 2 * (1 - 1j) / math.pi, atol=1e-15)
    assert abs(joint_harmonic_coefficient(e, -1)) == 0.0
    assert abs(joint_harmonic_coefficient(e, 3)) == 0.0


def test_even_harmonics_vanish():
    e = ElementSchedule(0.13, 0.41)
    for k in (-4, -2, 0, 2, 6):
        assert branch_coefficient(e, Branch.I, k) == 0
        assert branch_coefficient(e, Branch.Q, k) == 0


def test_quadrature_is_quarter_period_advance():
    e = ElementSchedule(0.2, 0.45)
    t = np.linspace(0, 1, 1001, endpoint=False) + 1e-7
    assert_allclose(waveform_value(e, Branch.Q, t), waveform_value(e, Branch.I, t + 0.25))


def test_waveform_is_half_wave_antisymmetric():
    e = ElementSchedule(-0.3, -0.05)
    t = np.linspace(0, 1, 997, endpoint=False) + 1e-7
    assert_allclose(waveform_value(e, Branch.I, t + 0.5), -waveform_value(e, Branch.I, t))


@settings(max_examples=200, deadline=None)
@given(schedules, st.integers(-12, 12))
def test_closed_form_matches_time_domain(e, k):
    for br in (Branch.I, Branch.Q):
        exact = time_domain_coefficients(e, br, np.array([k]))[0]
        assert abs(branch_coefficient(e, br, k) - exact) < 1e-12


@settings(max_examples=200, deadline=None)
@given(schedules, st.integers(-40, 40))
def test_selection_rule(e, k):
    value = abs(joint_harmonic_coefficient(e, k))
    if k % 4 != 1:
        assert value <= 1e-12
    assert abs(joint_coefficients(e.xi_on, e.xi_off, k) - joint_harmonic_coefficient(e, k)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(schedules, schedules)
def test_overlap_symmetries(a, b):
    assert overlap_tau(a, b) == pytest.approx(overlap_tau(b, a), abs=1e-12)
    assert overlap_tau_prime(a, b) == pytest.approx(-overlap_tau_prime(b, a), abs=1e-12)
    assert abs(overlap_tau(a, b)) <= 2 * min(a.tau, b.tau) + 1e-12


@settings(max_examples=100, deadline=None)
@given(schedules)
def test_overlap_self_terms(e):
    assert overlap_tau(e, e) == pytest.approx(2 * e.tau, abs=1e-12)
    assert abs(overlap_tau_prime(e, e)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(schedules, schedules)
def test_overlap_matches_sampled_product(a, b):
    m = 2 ** 15
    t = (np.arange(m) + 0.5) / m
    ua = waveform_value(a, Branch.I, t)
    expected_t = np.mean(ua * waveform_value(b, Branch.I, t))
    expected_tp = np.mean(ua * waveform_value(b, Branch.Q, t))
    # Each pulse edge can misplace at most one sample.
    assert abs(overlap_tau(a, b) - expected_t) <= 8.0 / m
    assert abs(overlap_tau_prime(a, b) - expected_tp) <= 8.0 / m


def test_overlap_matrices_agree_with_pairwise():
    s = ModulationSchedule.from_arrays([0.1, -0.4, 0.9], [0.35, -0.1, 1.2])
    tnm, tpnm = overlap_matrices(s)
    for i, a in enumerate(s.entries):
        for j, b in enumerate(s.entries):
            assert tnm[i, j] == pytest.approx(overlap_tau(a, b), abs=1e-15)
            assert tpnm[i, j] == pytest.approx(overlap_tau_prime(a, b), abs=1e-15)


@pytest.mark.parametrize("m", [2 ** 10, 2 ** 14, 2 ** 16])
def test_sampled_coefficient_error_is_first_order(m):
    e = ElementSchedule(0.1234, 0.4321)
    for br in (Branch.I, Branch.Q):
        for k in (1, -3, 5):
            err = abs(sampled_coefficient(e, br, k, OracleConfig(waveform_samples=m))
                      - branch_coefficient(e, br, k))
            # Four jumps, each misplacing at most one sample of height 1.
            assert err <= 4.0 / m


@pytest.mark.parametrize("on, off", [(0.0, 0.6), (0.3, 0.2)])
def test_schedule_rejects_bad_duty(on, off):
    with pytest.raises(InvalidArgument):
        ElementSchedule(on, off)


def test_schedule_accepts_boundaries():
    assert ElementSchedule(0.2, 0.2).tau == 0.0
    assert ElementSchedule(0.2, 0.7).tau == pytest.approx(0.5)


@pytest.mark.parametrize("angles", [(0.0, 120.0), (80.0, 180.0), (-10.0, 90.0)])
def test_task_rejects_endfire(angles):
    with pytest.raises(InvalidArgument):
        BeamTask(*angles)


def _phase_residual(values):
    """Spread of a phase sequence after removing its mean, wrapped to (-pi, pi]."""
    d = np.angle(np.exp(1j * (values - values[0])))
    return np.max(np.abs(d))


@settings(max_examples=50, deadline=None)
@given(st.floats(5, 175), st.floats(5, 175), st.lists(st.floats(0.05, 1.0), min_size=8, max_size=8))
def test_steering_aligns_both_harmonics(th1, th3, sigma):
    g = linear_uniform(8, 0.5)
    phases, sched = solve_steering(g, BeamTask(th1, th3), sigma)
    z = g.z
    s = sched.xi_on + sched.xi_off
    # Co-phased at the target angle means arg(A_n alpha_n,k) + beta z_n cos(theta) is constant.
    plus1 = phases - math.pi * s + 2 * math.pi * z * math.cos(math.radians(th1))
    minus3 = phases + 3 * math.pi * s + 2 * math.pi * z * math.cos(math.radians(th3))
    assert _phase_residual(plus1) < 1e-9
    assert _phase_residual(minus3) < 1e-9
    assert_allclose(np.sin(math.pi * sched.tau), sigma, atol=1e-12)


def test_steering_requires_z_axis():
    g = ArrayGeometry([[0, 0, 0], [0.5, 0, 0]], ArrayKind.PLANAR)
    with pytest.raises(UnsupportedSteering):
        solve_steering(g, BeamTask(80, 120), [1, 1])


def test_steering_validates_sigma():
    g = linear_uniform(3, 0.5)
    with pytest.raises(InvalidArgument):
        solve_steering(g, BeamTask(80, 120), [1, 1])
    with pytest.raises(InvalidArgument):
        solve_steering(g, BeamTask(80, 120), [1, 1.2, 0.3])


def test_single_mode_keeps_default_minus3_direction():
    assert BeamTask(80.0, mode=BeamMode.SINGLE).theta_minus3 == 120.0
