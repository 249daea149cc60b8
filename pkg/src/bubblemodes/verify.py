"""Far-field, centroid, and volume verifications.

The far-field checks probe the exterior multipole sum at several radii and
fit log-log slopes: the velocity (gradient) magnitude must fall off like
r^-2, second derivatives like r^-3, and the pressure-series magnitude like
r^-(lowest populated degree + 1). Slopes are fitted on the supremum over a
fixed angular probe grid so the checks see the worst direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientRadii, SeriesEmpty
from .harmonics import (
    eval_multipole_gradient,
    eval_multipole_potential,
    quadrature_grid,
)

HESSIAN_STEP_FRACTION = 2.5e-3


@dataclass(frozen=True)
class FarFieldCheck:
    """One fitted decay slope with its target window."""

    name: str
    slope: float | None
    target: float
    tol: float
    passed: bool
    values: tuple


@dataclass(frozen=True)
class FarFieldReport:
    checks: tuple
    radii: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _cartesian(r, theta, phi):
    s = np.sin(theta)
    return np.stack(
        [r * s * np.cos(phi), r * s * np.sin(phi), r * np.cos(theta)], axis=-1
    )


def _spherical(points):
    x, y, z = points[..., 0], points[..., 1], points[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    theta = np.arccos(np.clip(z / r, -1.0, 1.0))
    phi = np.arctan2(y, x)
    return r, theta, phi


def _hessian_frobenius(coeffs, r, theta, phi):
    """Frobenius norm of the Cartesian Hessian at each probe point.

    Second derivatives come from central differences with step
    proportional to the radius, so a pure power-law field keeps an exact
    power law in the differenced values and the slope fit is unbiased.
    """
    base = _cartesian(r, theta, phi)
    flat = base.reshape(-1, 3)
    h = HESSIAN_STEP_FRACTION * r.reshape(-1)

    pairs = [(0, 1), (0, 2), (1, 2)]
    stencil = [np.zeros(3)]
    for i in range(3):
        for s in (+1, -1):
            e = np.zeros(3)
            e[i] = s
            stencil.append(e)
    for i, j in pairs:
        for si in (+1, -1):
            for sj in (+1, -1):
                e = np.zeros(3)
                e[i], e[j] = si, sj
                stencil.append(e)
    stencil = np.array(stencil)

    points = flat[:, None, :] + h[:, None, None] * stencil[None, :, :]
    rr, tt, pp = _spherical(points)
    values = eval_multipole_potential(coeffs, rr, tt, pp)

    h2 = h * h
    center = values[:, 0]
    frob_sq = np.zeros(flat.shape[0])
    for i in range(3):
        plus, minus = values[:, 1 + 2 * i], values[:, 2 + 2 * i]
        frob_sq += np.abs((plus - 2.0 * center + minus) / h2) ** 2
    for k in range(3):
        base_col = 7 + 4 * k
        pp_, pm, mp, mm = (values[:, base_col + j] for j in range(4))
        cross = (pp_ - pm - mp + mm) / (4.0 * h2)
        frob_sq += 2.0 * np.abs(cross) ** 2
    return np.sqrt(frob_sq)


def _fit_slope(radii, values):
    return float(np.polyfit(np.log(radii), np.log(values), 1)[0])


def verify_far_field(
    coeffs,
    radii=(8.0, 16.0, 32.0),
    n_theta: int = 8,
    n_phi: int = 16,
) -> FarFieldReport:
    """Fit far-field decay slopes of the exterior multipole sum.

    Parameters
    ----------
    coeffs : mapping (ell, m) -> coefficient of r^-(ell+1) Y_ell^m
    radii : at least three probe radii, each >= 4

    A data set with no nonzero coefficient passes vacuously (there is no
    field whose decay could be wrong); the slopes are then reported as
    None.

    Raises
    ------
    InsufficientRadii
    """
    radii = tuple(float(r) for r in radii)
    if len(radii) < 3:
        raise InsufficientRadii(f"need at least 3 radii, got {len(radii)}")
    if any(r < 4.0 for r in radii):
        raise InsufficientRadii(f"all radii must be >= 4, got {min(radii):g}")

    grid = quadrature_grid(n_theta, n_phi)
    theta_g, phi_g = grid.mesh()
    theta_f, phi_f = theta_g.reshape(-1), phi_g.reshape(-1)

    grad_sup, hess_sup, press_sup = [], [], []
    for r in radii:
        r_arr = np.full(theta_f.shape, r)
        g_r, g_t, g_p, _ = eval_multipole_gradient(coeffs, r_arr, theta_f, phi_f)
        grad_mag = np.sqrt(np.abs(g_r) ** 2 + np.abs(g_t) ** 2 + np.abs(g_p) ** 2)
        grad_sup.append(float(np.max(grad_mag)))
        hess_sup.append(float(np.max(_hessian_frobenius(coeffs, r_arr, theta_f, phi_f))))
        press_sup.append(float(np.max(np.abs(
            eval_multipole_potential(coeffs, r_arr, theta_f, phi_f)
        ))))

    populated = sorted(ell for (ell, _), c in coeffs.items() if c != 0)
    vacuous = not populated
    pressure_target = -1.0 if vacuous else -(populated[0] + 1.0)

    specs = [
        ("gradient_decay", grad_sup, -2.0, 0.05),
        ("second_derivative_decay", hess_sup, -3.0, 0.1),
        ("pressure_series_decay", press_sup, pressure_target, 0.05),
    ]
    checks = []
    for name, values, target, tol in specs:
        if vacuous or min(values) == 0.0:
            checks.append(FarFieldCheck(name, None, target, tol, True, tuple(values)))
            continue
        slope = _fit_slope(radii, values)
        checks.append(
            FarFieldCheck(name, slope, target, tol, abs(slope - target) <= tol, tuple(values))
        )
    return FarFieldReport(checks=tuple(checks), radii=radii)


@dataclass(frozen=True)
class CentroidReport:
    """Largest translation-mode amplitude seen over a run."""

    max_amplitude: float
    tolerance: float
    passed: bool


def verify_centroid(times, series, tol: float = 1e-10) -> CentroidReport:
    """Check that the degree-1 modes stayed at zero throughout a run.

    Parameters
    ----------
    times : saved time stamps (must be nonempty)
    series : mapping (ell, m) -> complex displacement history

    Raises
    ------
    SeriesEmpty : no saved samples
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise SeriesEmpty("centroid check received an empty time series")
    worst = 0.0
    for (ell, _), values in series.items():
        if ell != 1:
            continue
        values = np.asarray(values)
        if values.size:
            worst = max(worst, float(np.max(np.abs(values))))
    return CentroidReport(max_amplitude=worst, tolerance=tol, passed=worst <= tol)


@dataclass(frozen=True)
class VolumeReport:
    """Kinematic consistency of the monopole pair, plus the volume drift.

    The drift is the time integral of the outward volume rate implied by
    the b coefficient; it is informational only (a uniformly valid bound
    on it is not part of the model's guarantees) and never gates a run.
    """

    kinematic_residual: float
    tolerance: float
    passed: bool
    volume_drift: float


def verify_volume_conservation(times, adot, b, tol: float = 1e-12) -> VolumeReport:
    """Check adot == -b for the monopole history; integrate the drift.

    Raises
    ------
    SeriesEmpty : empty history
    """
    times = np.asarray(times, dtype=float)
    adot = np.asarray(adot)
    b = np.asarray(b)
    if times.size == 0:
        raise SeriesEmpty("volume check received an empty time series")
    residual = float(np.max(np.abs(adot + b)))
    drift = -4.0 * math.pi * float(np.trapezoid(np.real(b), times))
    return VolumeReport(
        kinematic_residual=residual,
        tolerance=tol,
        passed=residual <= tol,
        volume_drift=drift,
    )


def conjugate_pairing_defect(coeffs) -> float:
    """How far a coefficient set is from describing a real surface field.

    Returns the largest |a_{ell,-m} - (-1)^m * conj(a_{ell,m})| over the
    populated modes (0 for data that synthesizes a real field).
    """
    worst = 0.0
    for (ell, m), c in coeffs.items():
        partner = coeffs.get((ell, -m), 0.0)
        worst = max(worst, abs(partner - (-1.0) ** m * np.conj(c)))
    return worst


def realness_defect(coeffs, grid) -> float:
    """Relative imaginary content of the synthesized surface field."""
    from .harmonics import synthesize

    field = synthesize(coeffs, grid)
    total = float(np.sqrt(np.sum(grid.weights * np.abs(field) ** 2)))
    if total == 0.0:
        return 0.0
    imag = float(np.sqrt(np.sum(grid.weights * field.imag**2)))
    return imag / total
