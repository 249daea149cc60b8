"""Orthonormal complex spherical harmonics, surface quadrature, multipoles.

Harmonics follow the Condon-Shortley convention and are normalized so that
the surface integral of |Y|^2 over the unit sphere equals 1 (in particular
Y_0^0 = 1/(2*sqrt(pi))). Associated Legendre values are generated with the
fully normalized upward recurrence, which is stable for all degrees used
here.

The quadrature grid is Gauss-Legendre in cos(theta) crossed with a uniform
azimuthal grid, so projections of band-limited fields are exact up to
roundoff once the grid resolves the band limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, IndexInvalid, RadiusInsideBubble

_POLE_SIN_TOL = 1e-12


def check_mode_index(ell: int, m: int) -> None:
    """Raise IndexInvalid unless (ell, m) is a valid mode index."""
    if ell != int(ell) or m != int(m):
        raise IndexInvalid(f"mode index must be integer, got ({ell!r}, {m!r})")
    if ell < 0 or abs(m) > ell:
        raise IndexInvalid(f"mode index out of range: ell={ell}, m={m}")


def mode_indices(l_max: int) -> list[tuple[int, int]]:
    """All (ell, m) with 0 <= ell <= l_max, -ell <= m <= ell, sorted."""
    return [(ell, m) for ell in range(l_max + 1) for m in range(-ell, ell + 1)]


def _legendre_pair(ell, m, x, sin_t):
    """Normalized associated Legendre values (Pbar_ell^m, Pbar_{ell-1}^m).

    Both arrays share the broadcast shape of x and sin_t. The second entry
    is zero when ell - 1 < m. Requires 0 <= m <= ell.
    """
    pmm = np.full(np.broadcast(x, sin_t).shape, 1.0 / math.sqrt(4.0 * math.pi))
    for k in range(1, m + 1):
        pmm = -math.sqrt((2.0 * k + 1.0) / (2.0 * k)) * sin_t * pmm
    if ell == m:
        return pmm, np.zeros_like(pmm)
    pm1 = math.sqrt(2.0 * m + 3.0) * x * pmm
    if ell == m + 1:
        return pm1, pmm
    prev2, prev1 = pmm, pm1
    for k in range(m + 2, ell + 1):
        a = math.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
        b = math.sqrt(((k - 1.0) ** 2 - m * m) / (4.0 * (k - 1.0) ** 2 - 1.0))
        prev2, prev1 = prev1, a * (x * prev1 - b * prev2)
    return prev1, prev2


def eval_Y(ell: int, m: int, theta, phi):
    """Evaluate Y_ell^m at polar angle theta, azimuth phi (broadcasting)."""
    check_mode_index(ell, m)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    am = abs(m)
    p, _ = _legendre_pair(ell, am, np.cos(theta), np.sin(theta))
    sign = (-1.0) ** am if m < 0 else 1.0
    out = sign * p * np.exp(1j * m * phi)
    return complex(out) if out.shape == () else out


def eval_Y_gradient(ell: int, m: int, theta, phi):
    """Y_ell^m and its physical surface gradient on the unit sphere.

    Returns
    -------
    (Y, g_theta, g_phi, at_pole) where g_theta = dY/dtheta and
    g_phi = (1/sin(theta)) dY/dphi. Where sin(theta) vanishes the angular
    components are individually singular for m != 0; there both are
    returned as 0 and at_pole is True.
    """
    check_mode_index(ell, m)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.asarray(phi, dtype=float)
    x = np.cos(theta)
    sin_t = np.sin(theta)
    at_pole = sin_t < _POLE_SIN_TOL
    safe_sin = np.where(at_pole, 1.0, sin_t)

    am = abs(m)
    p, p_lower = _legendre_pair(ell, am, x, sin_t)
    c = math.sqrt(float(ell * ell - am * am)) * math.sqrt(
        (2.0 * ell + 1.0) / (2.0 * ell - 1.0)
    ) if ell > 0 else 0.0
    dp_dtheta = (ell * x * p - c * p_lower) / safe_sin

    sign = (-1.0) ** am if m < 0 else 1.0
    azim = np.exp(1j * m * phi)
    Y = sign * p * azim
    g_theta = sign * dp_dtheta * azim
    g_phi = 1j * m * Y / safe_sin

    at_pole_b = np.broadcast_to(at_pole, np.broadcast(Y, at_pole).shape)
    g_theta = np.where(at_pole_b, 0.0, g_theta)
    g_phi = np.where(at_pole_b, 0.0, g_phi)
    Y = np.broadcast_to(Y, at_pole_b.shape)
    return Y, g_theta, g_phi, at_pole_b


@dataclass(frozen=True)
class SurfaceGrid:
    """Quadrature grid on the unit sphere.

    theta and phi are 1-D node arrays; weights has shape
    (theta.size, phi.size) and sums to 4*pi.
    """

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray

    @property
    def n_theta(self) -> int:
        return self.theta.size

    @property
    def n_phi(self) -> int:
        return self.phi.size

    def mesh(self):
        """Meshgrid views (Theta, Phi) with shape (n_theta, n_phi)."""
        return np.meshgrid(self.theta, self.phi, indexing="ij")


def quadrature_grid(n_theta: int, n_phi: int) -> SurfaceGrid:
    """Gauss-Legendre x uniform-azimuth surface grid with total weight 4*pi."""
    if n_theta < 1 or n_phi < 1:
        raise GridTooCoarse(f"need at least one node per direction, got {n_theta}x{n_phi}")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    # leggauss orders nodes ascending in x = cos(theta); theta then descends.
    theta = np.arccos(x)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    weights = np.outer(w * (2.0 * math.pi / n_phi), np.ones(n_phi))
    return SurfaceGrid(theta=theta, phi=phi, weights=weights)


def grid_for_band_limit(l_max: int) -> SurfaceGrid:
    """Smallest grid on which projections up to degree l_max are exact."""
    return quadrature_grid(l_max + 1, 2 * l_max + 1)


def _check_band_limit(grid: SurfaceGrid, ell: int) -> None:
    if grid.n_theta < ell + 1 or grid.n_phi < 2 * ell + 1:
        raise GridTooCoarse(
            f"grid {grid.n_theta}x{grid.n_phi} cannot resolve degree {ell}; "
            f"need at least {ell + 1}x{2 * ell + 1}"
        )


def project(field, idx: tuple[int, int], grid: SurfaceGrid) -> complex:
    """Quadrature projection of a surface field onto Y_idx.

    Parameters
    ----------
    field : array (n_theta, n_phi)
        Samples of the field on grid.mesh().
    idx : (ell, m)
    grid : SurfaceGrid

    Returns the coefficient <field, Y_idx>; exact to roundoff when field is
    band-limited within the grid's resolution.
    """
    ell, m = idx
    check_mode_index(ell, m)
    _check_band_limit(grid, ell)
    field = np.asarray(field)
    if field.shape != grid.weights.shape:
        raise IndexInvalid(
            f"field shape {field.shape} does not match grid {grid.weights.shape}"
        )
    theta_g, phi_g = grid.mesh()
    Y = eval_Y(ell, m, theta_g, phi_g)
    return complex(np.sum(grid.weights * field * np.conj(Y)))


def synthesize(coeffs: dict[tuple[int, int], complex], grid: SurfaceGrid):
    """Sum of coeff * Y_idx over the grid, shape (n_theta, n_phi)."""
    theta_g, phi_g = grid.mesh()
    out = np.zeros(grid.weights.shape, dtype=complex)
    for (ell, m), c in coeffs.items():
        if c == 0:
            continue
        out += c * eval_Y(ell, m, theta_g, phi_g)
    return out


def _check_exterior_radius(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0):
        bad = float(np.min(r))
        raise RadiusInsideBubble(
            f"exterior multipole expansion evaluated at r={bad:g} < 1"
        )
    return r


def eval_multipole_potential(coeffs: dict[tuple[int, int], complex], r, theta, phi):
    """Exterior harmonic sum of coeff * r^-(ell+1) * Y_ell^m.

    Valid for r >= 1 (the nondimensional bubble surface); smaller radii
    raise RadiusInsideBubble.
    """
    r = _check_exterior_radius(r)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast(r, theta, phi).shape
    out = np.zeros(shape, dtype=complex)
    for (ell, m), c in coeffs.items():
        check_mode_index(ell, m)
        if c == 0:
            continue
        out = out + c * r ** (-(ell + 1.0)) * eval_Y(ell, m, theta, phi)
    return complex(out) if out.shape == () else out


def eval_multipole_gradient(coeffs: dict[tuple[int, int], complex], r, theta, phi):
    """Physical spherical gradient components of the exterior multipole sum.

    Returns
    -------
    (g_r, g_theta, g_phi, at_pole) with g_r = d(Phi)/dr,
    g_theta = (1/r) d(Phi)/dtheta, g_phi = (1/(r sin)) d(Phi)/dphi.
    Angular components are zeroed (and flagged) on the polar axis.
    """
    r = _check_exterior_radius(r)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast(r, theta, phi, 0.0).shape
    g_r = np.zeros(shape, dtype=complex)
    g_t = np.zeros(shape, dtype=complex)
    g_p = np.zeros(shape, dtype=complex)
    at_pole = np.broadcast_to(np.sin(theta) < _POLE_SIN_TOL, shape)
    for (ell, m), c in coeffs.items():
        check_mode_index(ell, m)
        if c == 0:
            continue
        Y, dY_t, dY_p, _ = eval_Y_gradient(ell, m, theta, phi)
        radial_part = c * r ** (-(ell + 2.0))
        g_r = g_r - (ell + 1.0) * radial_part * Y
        g_t = g_t + radial_part * dY_t
        g_p = g_p + radial_part * dY_p
    return g_r, g_t, g_p, at_pole
