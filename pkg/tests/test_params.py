"""Tests for parameter validation and the equilibrium family."""

import math

import numpy as np
import pytest

from bubblemodes import (
    PhysicalParams,
    equilibrium_from_mass,
    solve_equilibrium_radius,
    validate_params,
)
from bubblemodes.errors import GammaInconsistent, NonPositive, SigmaZero
from bubblemodes.params import cubic_residual, kappa_bar, mass_of


def unit_params(**overrides):
    """Order-unity parameter set with gamma = 1.5, used across the test suite."""
    base = dict(
        rho_l=1.0,
        mu_l=0.0,
        kappa_g=1.0,
        sigma=1.0,
        T_inf=1.0,
        R_gas=1.0,
        c_v=2.0,
        gamma=1.5,
        p_inf=1.0,
    )
    base.update(overrides)
    return PhysicalParams(**base)


def oracle_root(mass, p):
    """Independent root of the equilibrium cubic via numpy's companion solver."""
    c0 = 3.0 * p.R_gas * p.T_inf * mass / (4.0 * math.pi)
    roots = np.roots([p.p_inf, 2.0 * p.sigma, 0.0, -c0])
    real = [r.real for r in roots if abs(r.imag) < 1e-9 * (1 + abs(r)) and r.real > 0]
    assert len(real) == 1
    return real[0]


def test_validate_accepts_unit_params():
    p = validate_params(unit_params())
    assert p.gamma == 1.5


def test_validate_accepts_mapping():
    d = dict(rho_l=1.0, mu_l=0.0, kappa_g=1.0, sigma=1.0, T_inf=1.0,
             R_gas=1.0, c_v=2.0, gamma=1.5, p_inf=1.0)
    p = validate_params(d)
    assert isinstance(p, PhysicalParams)


@pytest.mark.parametrize("field", ["rho_l", "T_inf", "R_gas", "c_v", "p_inf"])
def test_validate_rejects_nonpositive(field):
    with pytest.raises(NonPositive):
        validate_params(unit_params(**{field: 0.0}))


@pytest.mark.parametrize("field", ["mu_l", "kappa_g", "sigma"])
def test_validate_rejects_negative(field):
    with pytest.raises(NonPositive):
        validate_params(unit_params(**{field: -1e-3}))


def test_validate_rejects_inconsistent_gamma():
    with pytest.raises(GammaInconsistent):
        validate_params(unit_params(gamma=1.4))


def test_validate_tolerates_gamma_roundoff():
    validate_params(unit_params(gamma=1.5 * (1 + 5e-13)))


def test_exact_unit_radius():
    # p_inf=1, sigma=1 and mass = 4*pi make the cubic R^3 + 2R^2 - 3,
    # whose positive root is exactly R = 1.
    p = unit_params()
    mass = 4.0 * math.pi
    R = solve_equilibrium_radius(mass, p)
    assert abs(R - 1.0) <= 1e-14

    eq = equilibrium_from_mass(mass, p)
    assert abs(eq.p_star - 3.0) <= 1e-14
    assert abs(eq.rho_star - 3.0) <= 1e-14


def test_vanishing_tension_limit():
    # As sigma -> 0+ with p_inf=1, T_inf=1, R_gas=1 and mass = 32*pi/3,
    # the cubic tends to R^3 = 8, so the root approaches 2.
    p = unit_params(sigma=1e-15, c_v=2.0)
    R = solve_equilibrium_radius(32.0 * math.pi / 3.0, p)
    assert abs(R - 2.0) <= 1e-9


def test_sigma_zero_rejected():
    p = unit_params(sigma=0.0)
    with pytest.raises(SigmaZero):
        solve_equilibrium_radius(4.0 * math.pi, p)


def test_nonpositive_mass_rejected():
    with pytest.raises(NonPositive):
        solve_equilibrium_radius(0.0, unit_params())


def test_random_draws_match_oracle():
    rng = np.random.default_rng(20260822)
    for _ in range(100):
        R_gas = rng.uniform(0.1, 10.0)
        c_v = rng.uniform(0.1, 10.0)
        p = unit_params(
            rho_l=rng.uniform(0.1, 10.0),
            sigma=rng.uniform(1e-3, 10.0),
            T_inf=rng.uniform(0.1, 10.0),
            R_gas=R_gas,
            c_v=c_v,
            gamma=1.0 + R_gas / c_v,
            p_inf=rng.uniform(0.1, 10.0),
        )
        validate_params(p)
        mass = rng.uniform(1e-3, 100.0)
        R = solve_equilibrium_radius(mass, p)
        assert abs(cubic_residual(R, mass, p)) <= 1e-12
        assert abs(R - oracle_root(mass, p)) <= 1e-10 * oracle_root(mass, p)


def test_radius_monotone_in_mass():
    p = unit_params()
    masses = np.geomspace(1e-2, 1e2, 30)
    radii = [solve_equilibrium_radius(m, p) for m in masses]
    assert all(r2 > r1 for r1, r2 in zip(radii, radii[1:]))


def test_equilibrium_round_trip():
    p = unit_params(sigma=0.7, p_inf=2.3)
    mass = 5.0
    eq = equilibrium_from_mass(mass, p)
    assert abs(mass_of(eq) - mass) <= 1e-12 * mass
    assert abs(eq.p_star - (p.p_inf + 2.0 * p.sigma / eq.R_star)) <= 1e-14
    assert abs(eq.rho_star - eq.p_star / (p.R_gas * p.T_inf)) <= 1e-14


def test_kappa_bar_unit_value():
    p = unit_params()
    eq = equilibrium_from_mass(4.0 * math.pi, p)
    # kappa_g / (gamma * c_v * rho_star * R_star^2) = 1 / (1.5 * 2 * 3) = 1/9.
    assert abs(kappa_bar(p, eq) - 1.0 / 9.0) <= 1e-14
