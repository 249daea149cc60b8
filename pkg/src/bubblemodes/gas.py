"""Interior gas solvers: Bessel eigenmodes, heat expansion, potential BVP.

The interior heat problem with a clamped boundary separates into spherical
Bessel modes j_ell(z_{ell,n} r) whose decay rates are kappa * z^2. Zeros
are found from scratch: level 0 zeros are n*pi, and each deeper level is
bracketed between consecutive zeros of the previous level (they interlace),
then polished by bisection plus Newton. The gas velocity potential solves a
radial Neumann problem that is only solvable when the volume integral of
the source matches the boundary flux; for the monopole the solve is gauged
by a bordered system pinning the volume mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.interpolate
import scipy.linalg

from .errors import (
    BoundaryNonzero,
    CompatibilityViolated,
    ConvergenceFailure,
    IndexInvalid,
    LinearSolveFailure,
    NotDecayingError,
    TruncationInsufficient,
)
from .harmonics import eval_Y, grid_for_band_limit
from .params import PhysicalParams, equilibrium_from_mass, validate_params
from .thermal import (
    assemble_monopole_operator,
    radial_grid,
    radial_laplacian,
    spectral_abscissa,
)


def _double_factorial(n: int) -> float:
    out = 1.0
    for k in range(n, 0, -2):
        out *= k
    return out


def _jl_series(ell: int, x: np.ndarray) -> np.ndarray:
    """Power series for j_ell, accurate at small and moderate arguments."""
    pref = x**ell / _double_factorial(2 * ell + 1)
    term = np.ones_like(x)
    total = np.ones_like(x)
    half_x2 = 0.5 * x * x
    for k in range(1, 80):
        term = term * (-half_x2) / (k * (2.0 * ell + 2.0 * k + 1.0))
        total += term
        if np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(total)), 1e-300):
            break
    return pref * total


def _jl_upward(ell: int, x: np.ndarray) -> np.ndarray:
    """Upward recurrence for j_ell; stable for x not far below ell."""
    j_prev = np.sin(x) / x
    if ell == 0:
        return j_prev
    j_cur = np.sin(x) / x**2 - np.cos(x) / x
    for k in range(1, ell):
        j_prev, j_cur = j_cur, ((2.0 * k + 1.0) / x) * j_cur - j_prev
    return j_cur


def spherical_bessel_j(ell: int, x):
    """Spherical Bessel function of the first kind, degree ell >= 0.

    Uses the power series below x = max(ell, 0.5) (where the upward
    recurrence would amplify roundoff) and the recurrence above it.
    """
    if ell < 0 or ell != int(ell):
        raise IndexInvalid(f"Bessel degree must be a nonnegative integer, got {ell!r}")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x_arr)
    zero = x_arr == 0.0
    out[zero] = 1.0 if ell == 0 else 0.0
    switch = max(float(ell), 0.5)
    small = (~zero) & (x_arr < switch)
    large = (~zero) & ~small
    if np.any(small):
        out[small] = _jl_series(ell, x_arr[small])
    if np.any(large):
        out[large] = _jl_upward(ell, x_arr[large])
    return float(out[0]) if np.ndim(x) == 0 else out


def spherical_bessel_j_derivative(ell: int, x):
    """d/dx of j_ell, via j_{ell-1}(x) - ((ell+1)/x) * j_ell(x)."""
    x_arr = np.asarray(x, dtype=float)
    if ell == 0:
        return -spherical_bessel_j(1, x)
    return spherical_bessel_j(ell - 1, x) - ((ell + 1.0) / x_arr) * spherical_bessel_j(ell, x)


@lru_cache(maxsize=4096)
def bessel_zero(ell: int, k: int) -> float:
    """k-th positive zero of j_ell (k starts at 1).

    Level 0 zeros are k*pi. Deeper levels are bracketed by consecutive
    zeros of the previous level, bisected to near machine precision, and
    polished with two Newton steps.
    """
    if ell != int(ell) or k != int(k) or ell < 0 or k < 1:
        raise IndexInvalid(f"invalid zero index: ell={ell!r}, k={k!r}")
    if ell == 0:
        return k * math.pi
    lo = bessel_zero(ell - 1, k)
    hi = bessel_zero(ell - 1, k + 1)
    f_lo = spherical_bessel_j(ell, lo)
    f_hi = spherical_bessel_j(ell, hi)
    if f_lo == 0.0:
        return lo
    if f_lo * f_hi > 0.0:
        raise ConvergenceFailure(
            f"interlacing bracket lost a sign change for ell={ell}, k={k}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = spherical_bessel_j(ell, mid)
        if f_mid == 0.0:
            lo = hi = mid
            break
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo <= 1e-13 * hi:
            break
    z = 0.5 * (lo + hi)
    for _ in range(2):
        dz = spherical_bessel_j(ell, z) / spherical_bessel_j_derivative(ell, z)
        z -= dz
    return z


def mode_norm(ell: int, k: int) -> float:
    """L2([0,1], r^2 dr) norm of the unnormalized mode j_ell(z_{ell,k} r)."""
    z = bessel_zero(ell, k)
    return abs(spherical_bessel_j(ell + 1, z)) / math.sqrt(2.0)


def mode_table(ell: int, n_terms: int):
    """Rows (ell, k, zero, norm) for the first n_terms modes of degree ell."""
    return [(ell, k, bessel_zero(ell, k), mode_norm(ell, k)) for k in range(1, n_terms + 1)]


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(256)
_QUAD_R = 0.5 * (_GL_NODES + 1.0)
_QUAD_W = 0.5 * _GL_WEIGHTS * _QUAD_R**2


@dataclass(frozen=True)
class HeatModeSolution:
    """Eigenmode expansion of a clamped-boundary interior heat profile."""

    ell: int
    kappa: float
    zeros: np.ndarray
    coeffs: np.ndarray
    norms: np.ndarray
    tail_energy: float

    def _phi(self, k: int, r):
        return spherical_bessel_j(self.ell, self.zeros[k] * np.asarray(r, float)) / self.norms[k]

    def evaluate(self, r, t: float):
        """Profile at radius r and time t."""
        r = np.asarray(r, dtype=float)
        decay = self.coeffs * np.exp(-self.kappa * self.zeros**2 * t)
        out = np.zeros(r.shape if r.shape else (1,))
        for k in range(self.zeros.size):
            out = out + decay[k] * self._phi(k, r)
        return float(out[0]) if r.shape == () else out

    def time_derivative(self, r, t: float):
        """Time derivative of the profile at radius r and time t."""
        r = np.asarray(r, dtype=float)
        rates = -self.kappa * self.zeros**2
        decay = self.coeffs * rates * np.exp(rates * t)
        out = np.zeros(r.shape if r.shape else (1,))
        for k in range(self.zeros.size):
            out = out + decay[k] * self._phi(k, r)
        return float(out[0]) if r.shape == () else out

    def boundary_gradient(self, t):
        """Radial derivative of the profile at r = 1.

        At its zeros, j_ell' coincides with j_{ell-1}, so the gradient of
        each mode at the boundary is z * j_{ell-1}(z) / norm.
        """
        t = np.asarray(t, dtype=float)
        if self.ell == 0:
            # z * j_{-1}(z) with j_{-1}(x) = cos(x)/x.
            edge = np.cos(self.zeros) / self.norms
        else:
            edge = np.array([z * spherical_bessel_j(self.ell - 1, z) / self.norms[k]
                             for k, z in enumerate(self.zeros)])
        rates = -self.kappa * self.zeros**2
        out = (self.coeffs * edge) @ np.exp(np.outer(rates, np.atleast_1d(t)))
        return float(out[0]) if t.shape == () else out


def solve_heat_mode(
    samples, ell: int, kappa: float, n_terms: int = 32, tail_tol: float = 1e-8
) -> HeatModeSolution:
    """Expand boundary-clamped initial data in interior heat eigenmodes.

    Parameters
    ----------
    samples : initial profile on the uniform radial grid over [0, 1]
    ell : harmonic degree of the profile
    kappa : diffusivity multiplying the radial Laplacian
    n_terms : number of eigenmodes kept
    tail_tol : relative energy the truncated tail may hold

    The samples are interpolated with a cubic spline and projected on each
    mode with a 256-node Gauss-Legendre rule, so coefficient accuracy is
    limited by the spline, not the quadrature.

    Raises
    ------
    BoundaryNonzero : data does not vanish at r = 1
    TruncationInsufficient : the kept modes miss more than tail_tol of
        the profile energy
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    scale = max(1.0, float(np.max(np.abs(samples))))
    if abs(samples[-1]) > 1e-12 * scale:
        raise BoundaryNonzero(
            f"initial profile must vanish at r=1, got {samples[-1]:.3e}"
        )
    grid = radial_grid(n)
    spline = scipy.interpolate.CubicSpline(grid.r, samples)
    f_q = spline(_QUAD_R)

    zeros = np.array([bessel_zero(ell, k) for k in range(1, n_terms + 1)])
    norms = np.array([mode_norm(ell, k) for k in range(1, n_terms + 1)])
    coeffs = np.empty(n_terms)
    recon = np.zeros_like(f_q)
    for k in range(n_terms):
        phi_q = spherical_bessel_j(ell, zeros[k] * _QUAD_R) / norms[k]
        coeffs[k] = float(_QUAD_W @ (f_q * phi_q))
        recon += coeffs[k] * phi_q

    total = float(_QUAD_W @ f_q**2)
    tail = float(_QUAD_W @ (f_q - recon) ** 2)
    if total > 0.0 and tail / total > tail_tol:
        raise TruncationInsufficient(
            f"{n_terms} modes leave {tail / total:.3e} of the profile energy "
            f"unresolved (limit {tail_tol:.1e})"
        )
    return HeatModeSolution(
        ell=ell,
        kappa=kappa,
        zeros=zeros,
        coeffs=coeffs,
        norms=norms,
        tail_energy=tail / total if total > 0.0 else 0.0,
    )


@dataclass(frozen=True)
class GasPotentialSolution:
    """Radial velocity potential of one mode of the interior gas."""

    r: np.ndarray
    psi: np.ndarray
    ell: int
    residual: float
    multiplier: float


def solve_gas_potential(
    source, ell: int, adot: float, compat_tol: float = 1e-8
) -> GasPotentialSolution:
    """Solve the radial Neumann problem Laplacian(psi) = -source, psi'(1) = adot.

    For the monopole the problem is solvable only when the volume integral
    of the source balances the boundary flux: integral(source dV) + 4*pi*adot
    must vanish. That residual is checked (and reported) before any solve;
    the singular monopole system is then gauged by a bordered solve that
    pins the volume mean of psi to zero. Degrees ell >= 1 pin psi(0) = 0
    and are nonsingular.

    Raises
    ------
    CompatibilityViolated : monopole data violates the flux balance
    LinearSolveFailure : the assembled system is singular
    """
    source = np.asarray(source, dtype=float)
    n = source.size
    grid = radial_grid(n)
    L = radial_laplacian(n, ell)
    h = grid.h

    if ell == 0:
        residual = float(grid.weights @ source + 4.0 * math.pi * adot)
        if abs(residual) > compat_tol:
            raise CompatibilityViolated(residual, compat_tol)
    else:
        residual = 0.0

    A = L.copy()
    rhs = -source.copy()
    # Neumann row at r = 1: one-sided three-point first derivative.
    A[n - 1, :] = 0.0
    A[n - 1, n - 1] = 3.0 / (2.0 * h)
    A[n - 1, n - 2] = -4.0 / (2.0 * h)
    A[n - 1, n - 3] = 1.0 / (2.0 * h)
    rhs[n - 1] = adot

    if ell == 0:
        bordered = np.zeros((n + 1, n + 1))
        bordered[:n, :n] = A
        bordered[:n, n] = grid.weights
        bordered[n, :n] = grid.weights
        full_rhs = np.concatenate([rhs, [0.0]])
        try:
            sol = np.linalg.solve(bordered, full_rhs)
        except np.linalg.LinAlgError as exc:
            raise LinearSolveFailure("bordered monopole potential solve failed") from exc
        psi, multiplier = sol[:n], float(sol[n])
    else:
        A[0, :] = 0.0
        A[0, 0] = 1.0
        rhs[0] = 0.0
        try:
            psi = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise LinearSolveFailure(f"potential solve failed for ell={ell}") from exc
        multiplier = 0.0

    return GasPotentialSolution(
        r=grid.r, psi=psi, ell=ell, residual=residual, multiplier=multiplier
    )


def temperature_flux(boundary_grad, idx, params, eq, grid=None):
    """Area-integrated boundary temperature flux carried by one mode.

    Parameters
    ----------
    boundary_grad : radial derivative of the mode's density profile at
        r = 1 (scalar or array over times)
    idx : (ell, m) of the surface harmonic multiplying the profile
    grid : optional SurfaceGrid for the integral of Y over the sphere;
        a band-limit-exact grid is built when omitted

    The spatially uniform pressure part of the gas state carries no
    boundary gradient, so only the profile term contributes. The surface
    integral of Y vanishes for ell >= 1, which is what makes every
    non-monopole flux vanish; it is still evaluated by quadrature rather
    than replaced by its closed form.
    """
    ell, m = idx
    if grid is None:
        grid = grid_for_band_limit(max(ell, 1))
    theta_g, phi_g = grid.mesh()
    surface_integral = complex(np.sum(grid.weights * eval_Y(ell, m, theta_g, phi_g)))
    return -(params.T_inf / eq.rho_star) * np.asarray(boundary_grad) * surface_integral


@dataclass(frozen=True)
class DecayCertificate:
    """Spectral abscissas of the monopole system over a parameter grid."""

    sigma_values: np.ndarray
    kappa_values: np.ndarray
    abscissas: np.ndarray
    worst: float
    n: int


def uniform_decay_certificate(
    base_params: PhysicalParams,
    mass: float,
    sigma_values,
    kappa_values,
    n: int = 120,
    require_below: float = 0.0,
) -> DecayCertificate:
    """Certify strict spectral decay over a (sigma, kappa_g) parameter grid.

    For every combination the equilibrium is rebuilt, the coupled monopole
    operator assembled, and its admissible spectral abscissa computed. The
    certificate holds when every abscissa lies strictly below
    require_below (default 0: strict decay).

    Raises
    ------
    NotDecayingError : some grid cell fails the bound; the message lists
        the offending cells.
    """
    sigma_values = np.asarray(sigma_values, dtype=float)
    kappa_values = np.asarray(kappa_values, dtype=float)
    abscissas = np.empty((sigma_values.size, kappa_values.size))
    failures = []
    for i, sig in enumerate(sigma_values):
        for j, kap in enumerate(kappa_values):
            p = validate_params(replace(base_params, sigma=float(sig), kappa_g=float(kap)))
            eq = equilibrium_from_mass(mass, p)
            op = assemble_monopole_operator(n, p, eq)
            abscissas[i, j] = spectral_abscissa(op)
            if not abscissas[i, j] < require_below:
                failures.append((float(sig), float(kap), abscissas[i, j]))
    if failures:
        cells = ", ".join(
            f"(sigma={s:g}, kappa_g={k:g}: {a:.3e})" for s, k, a in failures
        )
        raise NotDecayingError(
            f"spectral abscissa not below {require_below:g} at {cells}"
        )
    return DecayCertificate(
        sigma_values=sigma_values,
        kappa_values=kappa_values,
        abscissas=abscissas,
        worst=float(abscissas.max()),
        n=n,
    )
