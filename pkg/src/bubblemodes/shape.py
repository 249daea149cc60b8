"""Per-mode surface dynamics of the linearized bubble.

Each surface harmonic carries a displacement coefficient a and a velocity
coefficient b, kinematically locked by da/dt = -(ell+1) b. Shape modes
(ell >= 2) oscillate at the capillary frequency; the degree-1 pair is pure
translation and is kept frozen in the centroid frame unless explicitly
allowed to drift; the monopole couples to the gas pressure.

The inviscid steppers advance each mode with its exact one-step propagator
(a rotation in (a, da/dt) for shape modes, a hyperbolic affine map for the
monopole with the gas pressure held over the step), so the only time error
in a mode simulation is the piecewise-constant pressure approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import IndexInvalid, ModeNotOscillatory, ViscosityNonzero
from .harmonics import check_mode_index, eval_Y_gradient, grid_for_band_limit
from .params import EquilibriumState, PhysicalParams

TWO_SQRT_PI = 2.0 * math.sqrt(math.pi)


@dataclass(frozen=True)
class ModeState:
    """State of one surface mode: displacement a and velocity coefficient b."""

    ell: int
    m: int
    a: complex
    b: complex

    @property
    def adot(self) -> complex:
        """Time derivative of a implied by the kinematic lock."""
        return -(self.ell + 1) * self.b

    @classmethod
    def from_displacement(cls, ell: int, m: int, a: complex, adot: complex) -> "ModeState":
        check_mode_index(ell, m)
        return cls(ell=ell, m=m, a=a, b=-adot / (ell + 1))


def lamb_frequency(ell: int, params: PhysicalParams, eq: EquilibriumState) -> float:
    """Capillary oscillation frequency of shape mode ell >= 2.

    omega_ell = sqrt(sigma*(ell+2)*(ell+1)*(ell-1) / (rho_l * R_star^3)).
    Degrees 0 and 1 are not free oscillators in this model and raise
    ModeNotOscillatory.
    """
    if ell < 2:
        raise ModeNotOscillatory(
            f"degree {ell} is not an oscillatory shape mode (need ell >= 2)"
        )
    return math.sqrt(
        params.sigma * (ell + 2.0) * (ell + 1.0) * (ell - 1.0)
        / (params.rho_l * eq.R_star**3)
    )


def mode_energy(state: ModeState, params: PhysicalParams, eq: EquilibriumState) -> float:
    """Conserved energy of an inviscid shape mode (ell >= 2)."""
    if state.ell < 2:
        raise ModeNotOscillatory(
            f"mode energy is defined for shape modes, got ell={state.ell}"
        )
    stiffness = (params.sigma / eq.R_star**2) * (state.ell + 2.0) * (state.ell + 1.0) * (state.ell - 1.0)
    return (
        params.rho_l * eq.R_star * abs(state.adot) ** 2
        + stiffness * abs(state.a) ** 2
    )


def analytic_shape_solution(ell, a0, adot0, t, params, eq):
    """Closed-form shape-mode trajectory (a(t), adot(t)) for ell >= 2.

    Parameters
    ----------
    ell : mode degree, >= 2
    a0, adot0 : initial displacement and velocity coefficients
    t : scalar or array of times
    """
    omega = lamb_frequency(ell, params, eq)
    t = np.asarray(t, dtype=float)
    a = a0 * np.cos(omega * t) + (adot0 / omega) * np.sin(omega * t)
    adot = -a0 * omega * np.sin(omega * t) + adot0 * np.cos(omega * t)
    return a, adot


def step_inviscid(
    state: ModeState,
    dt: float,
    params: PhysicalParams,
    eq: EquilibriumState,
    P_g: float = 0.0,
    allow_dipole: bool = False,
) -> ModeState:
    """Advance one mode by dt with zero liquid viscosity.

    Shape modes rotate exactly in the (a, adot) plane. The monopole is
    advanced with its exact affine map under gas pressure held at P_g for
    the step. Degree 1 is frozen unless allow_dipole, in which case it
    drifts linearly (no restoring force at this degree).

    Raises
    ------
    ViscosityNonzero : params.mu_l != 0
    """
    if params.mu_l != 0.0:
        raise ViscosityNonzero(
            f"inviscid stepper called with mu_l={params.mu_l:g}; "
            "use step_viscous or zero the viscosity"
        )
    ell = state.ell
    a, adot = state.a, state.adot

    if ell == 0:
        mu2 = 2.0 * params.sigma / (params.rho_l * eq.R_star**3)
        c = TWO_SQRT_PI * P_g / (params.rho_l * eq.R_star)
        if mu2 == 0.0:
            a_new = a + adot * dt + 0.5 * c * dt * dt
            adot_new = adot + c * dt
        else:
            mu = math.sqrt(mu2)
            z = a + c / mu2
            ch, sh = math.cosh(mu * dt), math.sinh(mu * dt)
            z_new = z * ch + (adot / mu) * sh
            adot_new = z * mu * sh + adot * ch
            a_new = z_new - c / mu2
        return ModeState.from_displacement(0, 0, a_new, adot_new)

    if ell == 1:
        if not allow_dipole:
            return state
        return ModeState.from_displacement(1, state.m, a + adot * dt, adot)

    omega = lamb_frequency(ell, params, eq)
    if omega == 0.0:
        return ModeState.from_displacement(ell, state.m, a + adot * dt, adot)
    c, s = math.cos(omega * dt), math.sin(omega * dt)
    a_new = a * c + (adot / omega) * s
    adot_new = -a * omega * s + adot * c
    return ModeState.from_displacement(ell, state.m, a_new, adot_new)


@lru_cache(maxsize=256)
def _viscous_propagator(ell: int, dt: float, sig_t: float, nu_t: float):
    """exp(dt * A) for the damped (a, b) system of one shape degree."""
    A = np.array(
        [
            [0.0, -(ell + 1.0)],
            [sig_t * (ell + 2.0) * (ell - 1.0), -nu_t * (ell + 1.0) * (ell + 2.0)],
        ]
    )
    return scipy.linalg.expm(dt * A)


def step_viscous(
    state: ModeState,
    dt: float,
    params: PhysicalParams,
    eq: EquilibriumState,
) -> ModeState:
    """Advance a surface mode (ell >= 1) by dt with liquid viscosity.

    Uses the exact matrix exponential of the constant-coefficient (a, b)
    system, cached per (degree, dt). The damping rate of the underlying
    oscillator is mu_l*(ell+1)*(ell+2)/(rho_l*R_star^2).
    """
    if state.ell < 1:
        raise IndexInvalid(
            "viscous stepper handles surface modes ell >= 1; "
            "the monopole is advanced by the thermal system"
        )
    sig_t = params.sigma / (params.rho_l * eq.R_star**3)
    nu_t = 2.0 * params.mu_l / (params.rho_l * eq.R_star**2)
    prop = _viscous_propagator(state.ell, float(dt), sig_t, nu_t)
    a_new = prop[0, 0] * state.a + prop[0, 1] * state.b
    b_new = prop[1, 0] * state.a + prop[1, 1] * state.b
    return replace(state, a=a_new, b=b_new)


@dataclass(frozen=True)
class CompatibilityEntry:
    """Tangential-stress residual of one populated surface mode."""

    ell: int
    m: int
    coefficient: complex
    residual_norm: float
    compatible: bool


@dataclass(frozen=True)
class CompatibilityReport:
    """Per-mode viscous compatibility residuals for a set of initial data."""

    entries: tuple

    @property
    def compatible(self) -> bool:
        return all(e.compatible for e in self.entries)

    def summary_lines(self):
        lines = []
        for e in self.entries:
            verdict = "ok" if e.compatible else "INCOMPATIBLE"
            lines.append(
                f"  mode (ell={e.ell}, m={e.m}): |coeff|={abs(e.coefficient):.6g}, "
                f"stress residual norm={e.residual_norm:.6g} [{verdict}]"
            )
        return lines


def residual_norm_unit(ell: int, m: int) -> float:
    """Tangential stress residual of a unit-amplitude mode.

    The potential-flow velocity of mode (ell, m) leaves an unbalanced
    tangential traction of (ell+2) times the surface gradient of Y; its
    L2 norm over the sphere is computed by quadrature (exact for the
    band-limited integrand), giving (ell+2)*sqrt(ell*(ell+1)).
    """
    check_mode_index(ell, m)
    if ell == 0:
        return 0.0
    grid = grid_for_band_limit(ell)
    theta_g, phi_g = grid.mesh()
    _, g_t, g_p, _ = eval_Y_gradient(ell, m, theta_g, phi_g)
    grad_sq = float(np.sum(grid.weights * (np.abs(g_t) ** 2 + np.abs(g_p) ** 2)))
    return (ell + 2.0) * math.sqrt(grad_sq)


def check_viscous_compatibility(
    b_coeffs: dict[tuple[int, int], complex],
    tol: float = 1e-12,
) -> CompatibilityReport:
    """Viscous compatibility of potential-flow initial data.

    Parameters
    ----------
    b_coeffs : mapping (ell, m) -> velocity coefficient
    tol : absolute threshold below which a residual counts as zero

    A mode is compatible when its stress residual |coeff| * (ell+2) *
    ||grad_S Y|| does not exceed tol; the monopole is always compatible
    (purely radial motion has no tangential traction). General data is
    compatible only when every ell >= 1 coefficient vanishes.
    """
    entries = []
    for (ell, m), coeff in sorted(b_coeffs.items()):
        unit = residual_norm_unit(ell, m)
        residual = abs(coeff) * unit
        entries.append(
            CompatibilityEntry(
                ell=ell,
                m=m,
                coefficient=complex(coeff),
                residual_norm=residual,
                compatible=(ell == 0) or residual <= tol,
            )
        )
    return CompatibilityReport(entries=tuple(entries))
