"""Physical parameters and the spherical equilibrium family.

The equilibrium radius for a bubble of mass M in a liquid at far-field
pressure p_inf with surface tension sigma is the unique positive root of

    p_inf * R^3 + 2*sigma * R^2 - 3*R_gas*T_inf*M / (4*pi) = 0.

The gas pressure then follows from the Laplace-Young jump and the density
from the ideal-gas law at the far-field temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    ConvergenceFailure,
    GammaInconsistent,
    NonPositive,
    NoPositiveRoot,
    SigmaZero,
)

_GAMMA_RTOL = 1e-12


@dataclass(frozen=True)
class PhysicalParams:
    """Material constants of the model, in any self-consistent unit system.

    Fields
    ------
    rho_l : liquid density, > 0
    mu_l : liquid dynamic viscosity, >= 0
    kappa_g : gas thermal conductivity, >= 0
    sigma : surface tension (nonzero required for equilibrium construction)
    T_inf : far-field temperature, > 0
    R_gas : specific gas constant, > 0
    c_v : heat capacity at constant volume, > 0
    gamma : adiabatic index, must equal 1 + R_gas/c_v
    p_inf : far-field liquid pressure, > 0
    """

    rho_l: float
    mu_l: float
    kappa_g: float
    sigma: float
    T_inf: float
    R_gas: float
    c_v: float
    gamma: float
    p_inf: float


@dataclass(frozen=True)
class EquilibriumState:
    """A spherical equilibrium: radius, gas density/pressure, bubble mass."""

    R_star: float
    rho_star: float
    p_star: float
    mass: float


def validate_params(raw) -> PhysicalParams:
    """Validate a parameter record (mapping or PhysicalParams) and return it.

    Checks positivity/nonnegativity of every field and the thermodynamic
    consistency gamma == 1 + R_gas/c_v to relative tolerance 1e-12.

    Raises
    ------
    NonPositive, GammaInconsistent
    """
    if isinstance(raw, PhysicalParams):
        values = {k: getattr(raw, k) for k in PhysicalParams.__dataclass_fields__}
    else:
        values = dict(raw)

    p = PhysicalParams(**{k: float(values[k]) for k in PhysicalParams.__dataclass_fields__})

    for field in ("rho_l", "T_inf", "R_gas", "c_v", "p_inf"):
        if not getattr(p, field) > 0.0:
            raise NonPositive(field, getattr(p, field))
    for field in ("mu_l", "kappa_g", "sigma"):
        if getattr(p, field) < 0.0:
            raise NonPositive(field, getattr(p, field))
    if not p.gamma > 1.0:
        raise NonPositive("gamma", p.gamma)

    expected = 1.0 + p.R_gas / p.c_v
    if abs(p.gamma - expected) > _GAMMA_RTOL * abs(expected):
        raise GammaInconsistent(p.gamma, expected)
    return p


def cubic_residual(R: float, mass: float, params: PhysicalParams) -> float:
    """Residual of the equilibrium cubic, relative to its largest monomial."""
    c0 = 3.0 * params.R_gas * params.T_inf * mass / (4.0 * math.pi)
    terms = (params.p_inf * R**3, 2.0 * params.sigma * R**2, -c0)
    scale = max(abs(t) for t in terms)
    return sum(terms) / scale


def solve_equilibrium_radius(mass: float, params: PhysicalParams) -> float:
    """Unique positive root of the equilibrium cubic for bubble mass M.

    Brackets on [eps, R_hi], bisects to 1e-14 relative width, then applies a
    single Newton polish. The cubic is strictly increasing on (0, inf) for
    p_inf > 0, sigma >= 0, so the bracket is guaranteed once the endpoint
    signs differ.

    Raises
    ------
    NonPositive : mass <= 0
    SigmaZero : sigma == 0 (equilibrium results assume nonzero tension)
    NoPositiveRoot, ConvergenceFailure
    """
    if mass <= 0.0:
        raise NonPositive("mass", mass)
    if params.sigma == 0.0:
        raise SigmaZero("equilibrium construction requires sigma != 0")

    c0 = 3.0 * params.R_gas * params.T_inf * mass / (4.0 * math.pi)

    def f(R):
        return params.p_inf * R**3 + 2.0 * params.sigma * R**2 - c0

    def fprime(R):
        return 3.0 * params.p_inf * R**2 + 4.0 * params.sigma * R

    lo = 1e-300
    hi = max(1.0, 2.0 * (c0 / params.p_inf) ** (1.0 / 3.0))
    if f(hi) < 0.0:
        # c0 > 0 guarantees a sign change at large R; widen until found.
        for _ in range(200):
            hi *= 2.0
            if f(hi) > 0.0:
                break
        else:
            raise NoPositiveRoot("no sign change found while widening bracket")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * hi:
            break
    else:
        raise ConvergenceFailure("bisection failed to reach tolerance")

    R = 0.5 * (lo + hi)
    dfdR = fprime(R)
    if dfdR > 0.0:
        R -= f(R) / dfdR
    if R <= 0.0:
        raise NoPositiveRoot(f"solver produced nonpositive radius {R!r}")
    return R


def equilibrium_from_mass(mass: float, params: PhysicalParams) -> EquilibriumState:
    """Construct the spherical equilibrium for bubble mass M.

    Returns an EquilibriumState satisfying the Laplace-Young jump
    p_star = p_inf + 2*sigma/R_star, the ideal-gas relation
    rho_star = p_star/(R_gas*T_inf), and the mass identity
    mass = (4*pi/3)*R_star^3*rho_star.
    """
    R = solve_equilibrium_radius(mass, params)
    p_star = params.p_inf + 2.0 * params.sigma / R
    rho_star = p_star / (params.R_gas * params.T_inf)
    return EquilibriumState(R_star=R, rho_star=rho_star, p_star=p_star, mass=mass)


def mass_of(eq: EquilibriumState) -> float:
    """Bubble mass recomputed from radius and density."""
    return (4.0 * math.pi / 3.0) * eq.R_star**3 * eq.rho_star


def kappa_bar(params: PhysicalParams, eq: EquilibriumState) -> float:
    """Nondimensional thermal diffusivity kappa_g/(gamma*c_v*rho_star*R_star^2).

    This is the diffusion coefficient of the interior heat problems once
    lengths are rescaled by the equilibrium radius.
    """
    return params.kappa_g / (params.gamma * params.c_v * eq.rho_star * eq.R_star**2)
