import numpy as np
import pytest

from larche.potential import DoubleWell
from larche.profile import (BridgingFunction, Profiles, check_orthogonality, cutoff_zeta, fit_decay_rate,
                            make_eta, ode_residual_theta0, ode_residual_theta1, sigma, solve_theta0,
                            solve_theta1, zero_profile)

SIGMA = 2 * np.sqrt(2) / 3


def test_theta0_matches_tanh(profiles):
    t0 = profiles.theta0
    assert np.max(np.abs(t0.values - np.tanh(np.sqrt(2) * t0.z))) <= 1e-8
    assert t0.values[t0.center_index] == 0.0
    assert t0(1.0) == pytest.approx(0.888385561895, abs=1e-9)


def test_theta0_monotone_and_ode(profiles):
    t0 = profiles.theta0
    assert np.all(np.diff(t0.values) >= 0)
    assert np.max(np.abs(ode_residual_theta0(t0))) <= 1e-7


def test_decay_rate(quartic, profiles):
    alpha = fit_decay_rate(profiles.theta0)
    amax = min(np.sqrt(quartic.df(-1.0)), np.sqrt(quartic.df(1.0)))
    assert alpha >= 0.9 * amax
    assert profiles.theta0.decay_alpha < amax


def test_sigma_value(profiles):
    s = sigma(profiles.theta0)
    assert abs(s.value - SIGMA) <= 1e-7
    assert s.tail_bound < 1e-20


def test_sigma_quadratic_scaling(profiles):
    doubled = profiles.theta0.with_derivative_scaled(2.0)
    assert sigma(doubled).value == pytest.approx(4 * sigma(profiles.theta0).value, rel=1e-14)


def test_sigma_truncation_and_refinement(quartic):
    a = sigma(solve_theta0(quartic, 8.0, 0.005)).value
    b = sigma(solve_theta0(quartic, 12.0, 0.005)).value
    c = sigma(solve_theta0(quartic, 10.0, 0.0025)).value
    d = sigma(solve_theta0(quartic, 10.0, 0.005)).value
    assert abs(a - b) <= 1e-9
    assert abs(c - d) <= 1e-9


def test_theta0_preconditions(quartic):
    with pytest.raises(ValueError):
        solve_theta0(quartic, 10.0, 0.003)  # Z/h not an integer


def test_theta1_far_field_and_center(profiles):
    t1 = profiles.theta1
    # bounded solution tends to -sigma / f'(±1)
    assert t1.limits == pytest.approx((-SIGMA / 8, -SIGMA / 8), abs=1e-7)
    assert t1.values[0] == pytest.approx(-0.117851, abs=1e-6)
    assert t1.values[t1.center_index] == 0.0
    assert t1(0.0) == 0.0


def test_theta1_residual(profiles):
    res = ode_residual_theta1(profiles.theta0, profiles.theta1, profiles.sigma)
    assert np.max(np.abs(res)) <= 1e-7


def test_orthogonality(quartic, profiles):
    t0, t1 = profiles.theta0, profiles.theta1
    assert abs(check_orthogonality(t0, t1, quartic)) <= 1e-7
    assert check_orthogonality(t0, zero_profile(t0), quartic) == 0.0
    fake = type(t1)(t0.z, t0.derivative, t0.derivative, (0.0, 0.0), t0.decay_alpha, "fake", quartic)
    assert abs(check_orthogonality(t0, fake, quartic)) <= 1e-9


def test_orthogonality_grid_mismatch(quartic, profiles):
    other = solve_theta0(quartic, 8.0, 0.005)
    with pytest.raises(ValueError):
        check_orthogonality(profiles.theta0, other, quartic)


def test_eta_properties(profiles):
    eta = profiles.eta
    assert eta(-1.0) == 0.0 and eta(1.0) == 1.0
    assert eta(-3.0) == 0.0 and eta(2.5) == 1.0
    assert eta.min_derivative() >= 0.0
    assert max(abs(m) for m in eta.moment_defect) <= 1e-12
    z = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(eta(z) - 0.5, -(eta(-z) - 0.5), atol=1e-15)
    assert eta.eta0 > 0
    # 1/2 int eta' theta0' by an independent fine quadrature
    zz = np.linspace(-1, 1, 200001)
    ref = 0.5 * np.trapezoid(eta.deriv(zz) * np.sqrt(2) / np.cosh(np.sqrt(2) * zz) ** 2, zz)
    assert eta.eta0 == pytest.approx(ref, rel=1e-6)


def test_eta_for_asymmetric_scaled_well():
    # a symmetric quartic times 2 keeps a = b = 0; exercise the non-symmetric branch explicitly
    P = DoubleWell.from_coefficients([1.0, 0.0, -2.0, 0.0, 1.0])
    t0 = solve_theta0(P, 10.0, 0.005)
    eta = make_eta(t0)
    assert max(abs(m) for m in eta.moment_defect) <= 1e-10


def test_bridging_representation():
    rep = BridgingFunction().representation()
    assert rep["left"] == 0.0 and rep["right"] == 1.0


def test_cutoff_zeta():
    z = np.array([-2.0, -1.0, -0.5, 0.0, 0.3, 0.5, 0.75, 1.0, 3.0])
    v = cutoff_zeta(z)
    np.testing.assert_array_equal(v[[2, 3, 4, 5]], 1.0)
    np.testing.assert_array_equal(v[[0, 1, 7, 8]], 0.0)
    assert 0.0 < v[6] < 1.0
    zz = np.linspace(-2, 2, 4001)
    dz = np.gradient(cutoff_zeta(zz), zz)
    assert np.all(zz * dz <= 1e-12)


def test_profiles_bundle(profiles):
    assert profiles.sigma == pytest.approx(SIGMA, abs=1e-7)
    assert profiles.theta0.same_grid(profiles.theta1)
