"""Radial discretization and the coupled monopole thermal system.

The interior gas is discretized on a uniform radial grid over [0, 1] (radius
in units of the equilibrium radius). Volume quadrature weights come from
integrating r^2 against the hat function of each node, so they sum to the
unit-ball volume 4*pi/3 exactly and integrate piecewise-linear profiles
exactly.

The monopole system couples the radial density perturbation f(r) to the
surface displacement a through a spatially uniform pressure-rate source:
the source is chosen so that the total gas mass

    sum_i w_i f_i + 4*pi*(rho_star/R_star) * a

is a linear invariant of the semi-discrete operator by construction. The
implicit trapezoidal stepper then preserves that invariant to solver
roundoff regardless of step size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    GridTooCoarse,
    LinearSolveFailure,
    SeriesTooShort,
    StabilityViolation,
)
from .params import EquilibriumState, PhysicalParams, kappa_bar

TWO_SQRT_PI = 2.0 * math.sqrt(math.pi)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid on [0, 1] with hat-function volume weights."""

    r: np.ndarray
    h: float
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.r.size


def radial_grid(n: int) -> RadialGrid:
    """Uniform n-node grid with volume weights summing to 4*pi/3."""
    if n < 3:
        raise GridTooCoarse(f"radial grid needs at least 3 nodes, got {n}")
    h = 1.0 / (n - 1)
    r = np.arange(n) * h
    w = np.empty(n)
    w[0] = 4.0 * math.pi * h**3 / 12.0
    w[1:-1] = 4.0 * math.pi * h * (r[1:-1] ** 2 + h**2 / 6.0)
    w[-1] = 4.0 * math.pi * (
        (1.0 - h) ** 2 * h / 2.0 + 2.0 * (1.0 - h) * h**2 / 3.0 + h**3 / 4.0
    )
    return RadialGrid(r=r, h=h, weights=w)


def radial_laplacian(n: int, ell: int) -> np.ndarray:
    """Second-order radial Laplacian for harmonic degree ell on n nodes.

    Rows discretize f'' + (2/r) f' - ell*(ell+1)/r^2 f. The origin row for
    ell = 0 uses the regularity limit 6*(f_1 - f_0)/h^2; for ell >= 1 the
    origin row is zero (the value there is pinned by a boundary condition
    in any solve). The r = 1 row uses one-sided differences: a four-point
    second derivative (three-point fallback at n = 3) and a three-point
    first derivative, both exact on quadratics.
    """
    if n < 3:
        raise GridTooCoarse(f"radial Laplacian needs at least 3 nodes, got {n}")
    h = 1.0 / (n - 1)
    r = np.arange(n) * h
    L = np.zeros((n, n))

    if ell == 0:
        L[0, 0] = -6.0 / h**2
        L[0, 1] = 6.0 / h**2

    for i in range(1, n - 1):
        L[i, i - 1] = 1.0 / h**2 - 1.0 / (r[i] * h)
        L[i, i] = -2.0 / h**2 - ell * (ell + 1.0) / r[i] ** 2
        L[i, i + 1] = 1.0 / h**2 + 1.0 / (r[i] * h)

    i = n - 1
    if n >= 4:
        L[i, i] += 2.0 / h**2
        L[i, i - 1] += -5.0 / h**2
        L[i, i - 2] += 4.0 / h**2
        L[i, i - 3] += -1.0 / h**2
    else:
        L[i, i] += 1.0 / h**2
        L[i, i - 1] += -2.0 / h**2
        L[i, i - 2] += 1.0 / h**2
    # 2*f'(1) with the one-sided three-point first derivative.
    L[i, i] += 3.0 / h
    L[i, i - 1] += -4.0 / h
    L[i, i - 2] += 1.0 / h
    L[i, i] += -ell * (ell + 1.0)
    return L


@dataclass
class MonopoleOperator:
    """Semi-discrete monopole system d/dt (f, a, adot) = A (f, a, adot)."""

    grid: RadialGrid
    params: PhysicalParams
    eq: EquilibriumState
    kappa: float
    matrix: np.ndarray
    null_left: np.ndarray
    _steppers: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def size(self) -> int:
        return self.grid.n + 2


def assemble_monopole_operator(
    n: int, params: PhysicalParams, eq: EquilibriumState
) -> MonopoleOperator:
    """Assemble the coupled density/surface operator on n radial nodes.

    State layout: x = (f_0 .. f_{n-1}, a, adot). Interior nodes diffuse with
    a uniform pressure-rate source divided by gamma; the boundary node
    carries the source directly; the surface pair closes the loop through
    the interface force balance. The uniform source is eliminated through
    the mass constraint, which makes

        v = (w_0 .. w_{n-1}, 4*pi*rho_star/R_star, 0)

    an exact left null vector of the assembled matrix.
    """
    grid = radial_grid(n)
    kap = kappa_bar(params, eq)
    L = radial_laplacian(n, 0)
    w = grid.weights
    gam = params.gamma

    # Source elimination: the uniform source rate s multiplies 1/gamma on
    # interior rows and 1 on the boundary row; solving the differentiated
    # mass constraint for s gives linear functionals of f and adot.
    w_int = w.copy()
    w_int[-1] = 0.0
    W_s = w_int.sum() / gam + w[-1]
    s_from_f = -kap * (w_int @ L) / W_s
    s_from_adot = -4.0 * math.pi * (eq.rho_star / eq.R_star) / W_s

    size = n + 2
    A = np.zeros((size, size))
    A[: n - 1, :n] = kap * L[: n - 1, :] + np.outer(np.ones(n - 1), s_from_f) / gam
    A[: n - 1, n + 1] = s_from_adot / gam
    A[n - 1, :n] = s_from_f
    A[n - 1, n + 1] = s_from_adot
    A[n, n + 1] = 1.0
    A[n + 1, n - 1] = params.R_gas * params.T_inf / (params.rho_l * eq.R_star)
    A[n + 1, n] = 2.0 * params.sigma / (params.rho_l * eq.R_star**3)

    v = np.zeros(size)
    v[:n] = w
    v[n] = 4.0 * math.pi * eq.rho_star / eq.R_star
    return MonopoleOperator(
        grid=grid, params=params, eq=eq, kappa=kap, matrix=A, null_left=v
    )


def split_state(x: np.ndarray, op: MonopoleOperator):
    """Split a state vector into (f, a, adot)."""
    n = op.n
    return x[:n], x[n], x[n + 1]


def join_state(f: np.ndarray, a: float, adot: float) -> np.ndarray:
    """Assemble (f, a, adot) into one state vector."""
    return np.concatenate([np.asarray(f, dtype=float), [a, adot]])


def invert_interface(f_at_1: float, a: float, params: PhysicalParams, eq: EquilibriumState):
    """Gas pressure and surface acceleration implied by boundary data.

    Returns (P_g, a_ddot): the uniform gas pressure coefficient carried by
    the boundary density value, and the surface acceleration from the
    interface force balance.
    """
    P_g = params.R_gas * params.T_inf * f_at_1 / TWO_SQRT_PI
    a_ddot = (
        params.R_gas * params.T_inf * f_at_1
        + 2.0 * params.sigma / eq.R_star**2 * a
    ) / (params.rho_l * eq.R_star)
    return P_g, a_ddot


def boundary_gradient(x: np.ndarray, op: MonopoleOperator) -> float:
    """One-sided estimate of df/dr at r = 1 from a state vector."""
    f = x[: op.n]
    h = op.grid.h
    return float((3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h))


def make_admissible(f: np.ndarray, a: float, op: MonopoleOperator):
    """Project initial data onto the zero-mass-defect hyperplane.

    Subtracts the uniform density shift that cancels the mass defect
    sum(w*f) + 4*pi*(rho_star/R_star)*a. Returns (f_new, defect).
    """
    f = np.asarray(f, dtype=float)
    defect = float(op.grid.weights @ f) + 4.0 * math.pi * (
        op.eq.rho_star / op.eq.R_star
    ) * a
    shift = 3.0 * defect / (4.0 * math.pi)
    return f - shift, defect


class TrapezoidalStepper:
    """Implicit trapezoidal step x -> (I - dt/2 A)^{-1} (I + dt/2 A) x.

    The factorization of the implicit matrix is done once per instance.
    Exactly preserves every left null vector of A up to solver roundoff.
    """

    def __init__(self, A: np.ndarray, dt: float):
        size = A.shape[0]
        eye = np.eye(size)
        self.dt = dt
        self._forward = eye + 0.5 * dt * A
        lu, piv = scipy.linalg.lu_factor(eye - 0.5 * dt * A, check_finite=False)
        if not np.all(np.isfinite(lu)) or np.any(np.diag(lu) == 0.0):
            raise LinearSolveFailure(f"trapezoidal matrix singular at dt={dt:g}")
        self._lu = (lu, piv)

    def step(self, x: np.ndarray) -> np.ndarray:
        rhs = self._forward @ x
        if np.iscomplexobj(rhs):
            y = scipy.linalg.lu_solve(self._lu, rhs.real) + 1j * scipy.linalg.lu_solve(
                self._lu, rhs.imag
            )
        else:
            y = scipy.linalg.lu_solve(self._lu, rhs)
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        if ny > 10.0 * nx:
            raise StabilityViolation(
                f"step amplified the state norm from {nx:.3e} to {ny:.3e}"
            )
        return y


def step_monopole(x: np.ndarray, dt: float, op: MonopoleOperator) -> np.ndarray:
    """Advance the monopole state by one trapezoidal step of size dt.

    Steppers are cached on the operator per step size, so repeated calls
    with the same dt reuse one LU factorization.
    """
    stepper = op._steppers.get(dt)
    if stepper is None:
        stepper = TrapezoidalStepper(op.matrix, dt)
        op._steppers[dt] = stepper
    return stepper.step(x)


def heat_operator(n: int, ell: int, kappa: float):
    """Dirichlet-restricted heat operator kappa*Laplacian for degree ell.

    Returns (M, free) where free is the slice of grid nodes that remain
    unknowns: the boundary value is pinned to zero for every degree, and
    the origin value is additionally pinned for ell >= 1 (regular profiles
    vanish there).
    """
    L = radial_laplacian(n, ell)
    free = slice(0, n - 1) if ell == 0 else slice(1, n - 1)
    return kappa * L[free, free], free


@dataclass(frozen=True)
class DecayFit:
    """Least-squares decay diagnosis of a norm history."""

    rate: float
    decaying: bool


def measure_decay_rate(times, norms) -> DecayFit:
    """Fit the late-time exponential rate of a norm history.

    Fits a straight line to log(norms) versus time over the second half of
    the series and reports the slope (negative when decaying).

    Raises
    ------
    SeriesTooShort : fewer than 50 samples, a vanishing tail norm, or a
        decaying series whose fit window spans fewer than 3 e-folds (the
        slope would not be trustworthy).
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if times.size != norms.size:
        raise SeriesTooShort("times and norms must have equal length")
    if times.size < 50:
        raise SeriesTooShort(f"need at least 50 samples, got {times.size}")
    tail = slice(times.size // 2, None)
    t, v = times[tail], norms[tail]
    if np.any(v <= 0.0):
        raise SeriesTooShort("norm history vanishes inside the fit window")
    span = math.log(v[0] / v[-1])
    if abs(span) < 1e-9:
        return DecayFit(rate=0.0, decaying=False)
    slope = np.polyfit(t, np.log(v), 1)[0]
    if slope < 0.0 and span < 3.0:
        raise SeriesTooShort(
            f"fit window spans {span:.2f} e-folds; need 3 for a decay estimate"
        )
    return DecayFit(rate=float(slope), decaying=slope < 0.0)


def admissible_basis(op: MonopoleOperator) -> np.ndarray:
    """Orthonormal basis (columns) of the hyperplane with zero mass defect."""
    v = op.null_left / np.linalg.norm(op.null_left)
    return scipy.linalg.null_space(v[None, :])


def admissible_spectrum(op: MonopoleOperator) -> np.ndarray:
    """Eigenvalues of the operator restricted to the admissible hyperplane.

    The restriction removes the equilibrium-family zero mode, so the
    decay of every admissible state is governed by these eigenvalues.
    """
    Q = admissible_basis(op)
    return np.linalg.eigvals(Q.T @ op.matrix @ Q)


def spectral_abscissa(op: MonopoleOperator) -> float:
    """Largest real part over the admissible spectrum."""
    return float(np.max(admissible_spectrum(op).real))


def slowest_eigenvalues(op: MonopoleOperator, k: int = 3) -> np.ndarray:
    """The k admissible eigenvalues with largest real part.

    Ties are broken by ascending |imag|, then nonnegative imaginary part
    first, so refinements of the same operator list matching members of
    conjugate pairs in the same positions.
    """
    lam = admissible_spectrum(op)
    order = np.lexsort((lam.imag < 0, np.abs(lam.imag), -lam.real))
    return lam[order][:k]
