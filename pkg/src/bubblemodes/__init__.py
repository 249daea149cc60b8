"""Mode-by-mode spectral simulation of a linearized gas bubble.

The package splits into parameter/equilibrium handling, spherical-harmonic
utilities, per-mode surface dynamics, the coupled monopole thermal problem,
interior heat/potential solvers, and a driver with delimited output and a
small CLI.
"""

from .gas import (
    solve_gas_potential,
    solve_heat_mode,
    temperature_flux,
    uniform_decay_certificate,
)
from .harmonics import (
    eval_Y,
    eval_multipole_potential,
    grid_for_band_limit,
    project,
    quadrature_grid,
    synthesize,
)
from .io import RunConfig, load_config
from .params import (
    EquilibriumState,
    PhysicalParams,
    equilibrium_from_mass,
    kappa_bar,
    solve_equilibrium_radius,
    validate_params,
)
from .shape import (
    ModeState,
    analytic_shape_solution,
    check_viscous_compatibility,
    lamb_frequency,
    step_inviscid,
    step_viscous,
)
from .simulate import RunReport, run_simulation
from .thermal import (
    assemble_monopole_operator,
    slowest_eigenvalues,
    spectral_abscissa,
    step_monopole,
)
from .verify import verify_centroid, verify_far_field, verify_volume_conservation

__all__ = [
    "PhysicalParams",
    "EquilibriumState",
    "validate_params",
    "solve_equilibrium_radius",
    "equilibrium_from_mass",
    "kappa_bar",
    "eval_Y",
    "quadrature_grid",
    "grid_for_band_limit",
    "project",
    "synthesize",
    "eval_multipole_potential",
    "ModeState",
    "lamb_frequency",
    "analytic_shape_solution",
    "step_inviscid",
    "step_viscous",
    "check_viscous_compatibility",
    "assemble_monopole_operator",
    "step_monopole",
    "spectral_abscissa",
    "slowest_eigenvalues",
    "solve_heat_mode",
    "solve_gas_potential",
    "temperature_flux",
    "uniform_decay_certificate",
    "RunConfig",
    "load_config",
    "RunReport",
    "run_simulation",
    "verify_far_field",
    "verify_centroid",
    "verify_volume_conservation",
]

__version__ = "0.1.0"
