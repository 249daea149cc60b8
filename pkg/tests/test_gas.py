"""Tests for Bessel eigenmodes, heat expansions, and the potential solve."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import brentq
from scipy.special import spherical_jn

from bubblemodes import equilibrium_from_mass, kappa_bar
from bubblemodes.errors import (
    BoundaryNonzero,
    CompatibilityViolated,
    IndexInvalid,
    NotDecayingError,
    TruncationInsufficient,
)
from bubblemodes.gas import (
    bessel_zero,
    mode_norm,
    mode_table,
    solve_gas_potential,
    solve_heat_mode,
    spherical_bessel_j,
    spherical_bessel_j_derivative,
    temperature_flux,
    uniform_decay_certificate,
)
from bubblemodes.thermal import radial_grid
from tests.test_params import unit_params

UNIT_MASS = 4.0 * math.pi


def oracle_zero(ell, k):
    """Independent zero of j_ell via a scan plus brentq on scipy's evaluator."""
    xs = np.linspace(1e-3, (k + ell) * math.pi + 5.0, 4000)
    vals = spherical_jn(ell, xs)
    crossings = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    assert len(crossings) >= k
    i = crossings[k - 1]
    return brentq(lambda x: spherical_jn(ell, x), xs[i], xs[i + 1], xtol=1e-14)


def test_bessel_matches_scipy():
    x = np.linspace(0.0, 35.0, 701)
    for ell in range(11):
        assert_allclose(spherical_bessel_j(ell, x), spherical_jn(ell, x),
                        rtol=1e-11, atol=1e-14, err_msg=f"ell={ell}")


def test_bessel_small_argument_accuracy():
    for ell in (2, 5, 8):
        for x in (1e-6, 1e-3, 0.1, 0.5 * ell):
            assert_allclose(spherical_bessel_j(ell, x), spherical_jn(ell, x),
                            rtol=1e-10, err_msg=f"ell={ell}, x={x}")
    assert spherical_bessel_j(0, 0.0) == 1.0
    assert spherical_bessel_j(3, 0.0) == 0.0


def test_bessel_derivative_matches_scipy():
    x = np.linspace(0.3, 25.0, 300)
    for ell in range(6):
        assert_allclose(spherical_bessel_j_derivative(ell, x),
                        spherical_jn(ell, x, derivative=True),
                        rtol=1e-10, atol=1e-13)


def test_level_zero_zeros_are_multiples_of_pi():
    for k in (1, 2, 7):
        assert bessel_zero(0, k) == k * math.pi


def test_zeros_match_independent_bisection():
    for ell in range(1, 6):
        for k in range(1, 5):
            z = bessel_zero(ell, k)
            ref = oracle_zero(ell, k)
            assert abs(z - ref) <= 1e-12 * ref, f"ell={ell}, k={k}"
            assert abs(spherical_bessel_j(ell, z)) <= 1e-13


def test_first_zeros_against_recorded_values():
    assert abs(bessel_zero(1, 1) - 4.493409457909) <= 1e-11
    assert abs(bessel_zero(2, 1) - 5.763459196) <= 1e-8


def test_zeros_interlace():
    for ell in range(1, 5):
        for k in range(1, 6):
            assert bessel_zero(ell - 1, k) < bessel_zero(ell, k) < bessel_zero(ell - 1, k + 1)


def test_zero_index_validation():
    with pytest.raises(IndexInvalid):
        bessel_zero(-1, 1)
    with pytest.raises(IndexInvalid):
        bessel_zero(2, 0)
    with pytest.raises(IndexInvalid):
        spherical_bessel_j(-2, 1.0)


def test_mode_norm_matches_quadrature():
    x, w = np.polynomial.legendre.leggauss(200)
    r = 0.5 * (x + 1.0)
    wr = 0.5 * w * r**2
    for ell, k in [(0, 1), (0, 3), (2, 1), (3, 2)]:
        z = bessel_zero(ell, k)
        num = math.sqrt(float(wr @ spherical_jn(ell, z * r) ** 2))
        assert_allclose(mode_norm(ell, k), num, rtol=1e-12)


def test_mode_table_shape():
    rows = mode_table(2, 5)
    assert len(rows) == 5
    assert rows[0][:2] == (2, 1)
    assert rows[0][2] == bessel_zero(2, 1)


def test_heat_mode_single_mode_roundtrip():
    n = 200
    r = radial_grid(n).r
    z1 = bessel_zero(0, 1)
    samples = spherical_jn(0, z1 * r)
    sol = solve_heat_mode(samples, ell=0, kappa=0.25)
    assert abs(sol.coeffs[0] - mode_norm(0, 1)) <= 1e-8
    assert np.max(np.abs(sol.coeffs[1:])) <= 1e-8
    # Evolution is a pure exponential of the slowest rate.
    t = 0.3
    expected = samples * math.exp(-0.25 * z1**2 * t)
    assert_allclose(sol.evaluate(r, t), expected, rtol=0, atol=1e-8)
    assert_allclose(sol.time_derivative(r, t), -0.25 * z1**2 * expected,
                    rtol=0, atol=1e-7)


def test_heat_mode_mixed_profile():
    n = 240
    r = radial_grid(n).r
    z1, z2 = bessel_zero(2, 1), bessel_zero(2, 2)
    samples = 0.7 * spherical_jn(2, z1 * r) - 0.3 * spherical_jn(2, z2 * r)
    sol = solve_heat_mode(samples, ell=2, kappa=1.0 / 9.0)
    assert abs(sol.coeffs[0] - 0.7 * mode_norm(2, 1)) <= 1e-8
    assert abs(sol.coeffs[1] + 0.3 * mode_norm(2, 2)) <= 1e-8
    assert sol.tail_energy <= 1e-10


def test_heat_mode_boundary_gradient():
    n = 200
    r = radial_grid(n).r
    z1 = bessel_zero(0, 1)
    sol = solve_heat_mode(spherical_jn(0, z1 * r), ell=0, kappa=0.5)
    # d/dr j0(z r) at r=1 equals z*j0'(z) = cos(z); z1 = pi gives -1.
    for t in (0.0, 0.2):
        expected = math.cos(z1) * math.exp(-0.5 * z1**2 * t)
        assert abs(sol.boundary_gradient(t) - expected) <= 1e-8
    grads = sol.boundary_gradient(np.array([0.0, 0.2]))
    assert grads.shape == (2,)


def test_heat_mode_rejects_nonzero_boundary():
    n = 50
    r = radial_grid(n).r
    with pytest.raises(BoundaryNonzero):
        solve_heat_mode(np.cos(r), ell=0, kappa=1.0)


def test_heat_mode_truncation_guard():
    n = 200
    r = radial_grid(n).r
    z3 = bessel_zero(0, 3)
    with pytest.raises(TruncationInsufficient):
        solve_heat_mode(spherical_jn(0, z3 * r), ell=0, kappa=1.0, n_terms=2)


def test_heat_mode_zero_profile():
    sol = solve_heat_mode(np.zeros(60), ell=1, kappa=1.0, n_terms=4)
    assert np.all(sol.coeffs == 0.0)
    assert sol.tail_energy == 0.0


def test_gas_potential_quadratic_monopole():
    # source = c with psi'(1) = -c/3 admits psi = -c r^2/6 + K; the gauge
    # pins the discrete volume mean, which fixes K through the quadrature
    # weights. Every stencil is exact on quadratics, so the check is tight.
    n = 80
    c = 3.0
    grid = radial_grid(n)
    r, w = grid.r, grid.weights
    sol = solve_gas_potential(np.full(n, c), ell=0, adot=-c / 3.0)
    K = (c / 6.0) * (w @ r**2) / w.sum()
    assert_allclose(sol.psi, -c * r**2 / 6.0 + K, rtol=0, atol=1e-10)
    assert abs(sol.residual) <= 1e-12
    assert abs(sol.multiplier) <= 1e-10


def test_gas_potential_linear_dipole():
    # Zero source with unit boundary slope gives psi = r exactly at ell = 1.
    n = 60
    r = radial_grid(n).r
    sol = solve_gas_potential(np.zeros(n), ell=1, adot=1.0)
    assert_allclose(sol.psi, r, rtol=0, atol=1e-10)


def test_gas_potential_compatibility_violation():
    n = 50
    with pytest.raises(CompatibilityViolated) as info:
        solve_gas_potential(np.full(n, 1.0), ell=0, adot=1.0)
    # integral(source dV) + 4*pi*adot = 4*pi/3 + 4*pi
    expected = 4.0 * math.pi / 3.0 + 4.0 * math.pi
    assert abs(info.value.residual - expected) <= 1e-10
    assert info.value.tol == 1e-8


def test_gas_potential_no_check_for_higher_degrees():
    # The flux-balance precondition applies to the monopole only.
    sol = solve_gas_potential(np.full(40, 1.0), ell=2, adot=1.0)
    assert sol.residual == 0.0
    assert np.isfinite(sol.psi).all()


def test_temperature_flux_monopole_value():
    p = unit_params()
    eq = equilibrium_from_mass(UNIT_MASS, p)
    grad = -0.8
    flux = temperature_flux(grad, (0, 0), p, eq)
    expected = -(p.T_inf / eq.rho_star) * grad * 2.0 * math.sqrt(math.pi)
    assert abs(flux - expected) <= 1e-12 * abs(expected)


def test_temperature_flux_vanishes_for_shape_modes():
    p = unit_params()
    eq = equilibrium_from_mass(UNIT_MASS, p)
    for idx in [(1, 0), (2, 0), (2, 2), (4, -1)]:
        flux = temperature_flux(1.0, idx, p, eq)
        assert abs(flux) <= 1e-12


def test_decay_certificate_unit_grid():
    p = unit_params()
    cert = uniform_decay_certificate(
        p, UNIT_MASS, sigma_values=[0.5, 1.0, 2.0], kappa_values=[0.5, 1.0, 2.0], n=60
    )
    assert cert.abscissas.shape == (3, 3)
    assert np.all(cert.abscissas < 0.0)
    assert cert.worst == cert.abscissas.max()


def test_decay_certificate_failure_path():
    p = unit_params()
    with pytest.raises(NotDecayingError):
        uniform_decay_certificate(
            p, UNIT_MASS, sigma_values=[1.0], kappa_values=[1.0], n=50,
            require_below=-10.0,
        )
