"""Command line entry points.

Exit codes: 0 on success, 2 when a verification or compatibility check
fails (including rejected viscous initial data), 1 on configuration or
runtime errors.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile

import numpy as np

from .errors import BubbleModelError, ConfigInvalid, ViscousGeneralDataRejected
from .io import load_config, read_mode_series, read_monopole_series
from .params import equilibrium_from_mass, kappa_bar
from .shape import ModeState, check_viscous_compatibility, lamb_frequency
from .simulate import (
    CENTROID_TOL,
    KINEMATIC_TOL,
    MASS_DRIFT_TOL,
    VerificationEntry,
    far_field_entry,
    format_entry,
    run_simulation,
)
from .thermal import assemble_monopole_operator, slowest_eigenvalues, spectral_abscissa

TWO_PI = 6.283185307179586


def _add_config(parser):
    parser.add_argument("--config", required=True, help="path to a run configuration (INI)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bubblemodes",
        description="Linearized dynamics of a gas bubble near spherical equilibrium",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibrium", help="solve and print the equilibrium state")
    _add_config(p)
    p.add_argument("--mass", type=float, default=None, help="override the configured gas mass")

    p = sub.add_parser("frequencies", help="print surface mode frequencies and periods")
    _add_config(p)
    p.add_argument("--l-max", type=int, default=None, help="highest degree to print")
    p.add_argument(
        "--l",
        dest="l_range",
        default=None,
        metavar="LO..HI",
        help="degree range to print, e.g. 2..5 (takes precedence over --l-max)",
    )

    p = sub.add_parser("simulate", help="run a configured evolution and write outputs")
    _add_config(p)
    p.add_argument("--out", default=None, help="override the configured output directory")
    p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p.add_argument(
        "--project-radial",
        action="store_true",
        help="drop surface modes a viscous run would otherwise reject",
    )

    p = sub.add_parser("spectrum", help="print the slow end of the monopole spectrum")
    _add_config(p)
    p.add_argument("--n", type=int, default=None, help="override the radial grid size")
    p.add_argument("--k", type=int, default=4, help="how many slow eigenvalues to print")

    p = sub.add_parser("check-viscous", help="check initial data against the viscous gate")
    _add_config(p)

    p = sub.add_parser(
        "verify",
        help="re-run the checks from a config, or audit a finished run directory",
    )
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="path to a run configuration (INI)")
    group.add_argument("--run-dir", help="output directory of a finished run to audit")
    return parser


def _initial_velocity_coeffs(cfg):
    coeffs = {}
    for idx in sorted(set(cfg.initial_a) | set(cfg.initial_adot)):
        if idx == (0, 0):
            continue
        state = ModeState.from_displacement(
            idx[0], idx[1],
            complex(cfg.initial_a.get(idx, 0.0)),
            complex(cfg.initial_adot.get(idx, 0.0)),
        )
        coeffs[idx] = state.b if state.b != 0.0 else state.a
    return coeffs


def cmd_equilibrium(args) -> int:
    cfg = load_config(args.config)
    mass = cfg.mass if args.mass is None else args.mass
    eq = equilibrium_from_mass(mass, cfg.params)
    print(f"equilibrium radius   R* = {eq.R_star:.12g}")
    print(f"gas pressure         p* = {eq.p_star:.12g}")
    print(f"gas density        rho* = {eq.rho_star:.12g}")
    print(f"gas mass                = {eq.mass:.12g}")
    print(f"thermal diffusivity     = {kappa_bar(cfg.params, eq):.12g}")
    return 0


def _parse_degree_range(text):
    """Parse '2..5' into (2, 5); a bare '3' means (3, 3)."""
    parts = text.split("..")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
        elif len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
        else:
            raise ValueError(text)
    except ValueError:
        raise ConfigInvalid(
            f"degree range must look like LO..HI or a single degree, got {text!r}"
        ) from None
    if lo > hi:
        raise ConfigInvalid(f"empty degree range {text!r}")
    return lo, hi


def cmd_frequencies(args) -> int:
    cfg = load_config(args.config)
    eq = equilibrium_from_mass(cfg.mass, cfg.params)
    if args.l_range is not None:
        lo, hi = _parse_degree_range(args.l_range)
    else:
        lo, hi = 2, (cfg.l_max if args.l_max is None else args.l_max)
    if lo < 2:
        print("degrees 0 and 1 are not free oscillators; starting at 2")
        lo = 2
    if hi < lo:
        print("no oscillatory surface modes in the requested range")
        return 0
    print(f"{'ell':>4}  {'omega':>18}  {'period':>18}")
    for ell in range(lo, hi + 1):
        omega = lamb_frequency(ell, cfg.params, eq)
        period = TWO_PI / omega if omega > 0 else float("inf")
        print(f"{ell:>4}  {omega:>18.12g}  {period:>18.12g}")
    return 0


def _print_report(report) -> None:
    print(f"steps: {report.n_steps}  saved: {report.n_saved}  "
          f"wall: {report.wall_time_s:.2f}s")
    print("checks:")
    for line in report.summary_lines():
        print(line)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.out_dir = args.out
    if args.no_plots:
        cfg.plots = False
    if args.project_radial:
        cfg.project_radial = True
    report = run_simulation(cfg)
    _print_report(report)
    print(f"outputs in {report.out_dir}:")
    for name in report.outputs:
        print(f"  {name}")
    return 0 if report.passed else 2


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    eq = equilibrium_from_mass(cfg.mass, cfg.params)
    n = cfg.grid_n if args.n is None else args.n
    op = assemble_monopole_operator(n, cfg.params, eq)
    print(f"radial grid points: {n}")
    print(f"spectral abscissa (admissible subspace): {spectral_abscissa(op):.12g}")
    print("slowest eigenvalues:")
    for lam in slowest_eigenvalues(op, k=args.k):
        print(f"  {lam.real:+.12g} {lam.imag:+.12g}j")
    return 0


def cmd_check_viscous(args) -> int:
    cfg = load_config(args.config)
    coeffs = _initial_velocity_coeffs(cfg)
    if cfg.params.mu_l == 0.0:
        print("liquid viscosity is zero; all initial data is admissible")
        return 0
    report = check_viscous_compatibility(coeffs)
    if not report.entries:
        print("no surface modes populated; purely radial data is compatible")
        return 0
    for line in report.summary_lines():
        print(line)
    if report.compatible:
        print("initial data is compatible with the viscous stress balance")
        return 0
    print("initial data is INCOMPATIBLE with the viscous stress balance")
    return 2


MODE_FILE = re.compile(r"mode_l(\d+)_m(-?\d+)\.csv")


def _verify_run_dir(run_dir: str) -> int:
    """Audit the CSV outputs of a finished run without re-running it.

    Re-derives what the files alone can support: the kinematic link
    between each mode's displacement velocity and its flow strength,
    the dipole lock, the recorded mass drift, and the decay of the
    final exterior field.
    """
    if not os.path.isdir(run_dir):
        raise ConfigInvalid(f"{run_dir} is not a directory")
    mono_path = os.path.join(run_dir, "monopole.csv")
    if not os.path.isfile(mono_path):
        raise ConfigInvalid(f"{run_dir} has no monopole.csv; not a run directory")

    try:
        mono = read_monopole_series(mono_path)
        modes = {}
        for name in sorted(os.listdir(run_dir)):
            match = MODE_FILE.fullmatch(name)
            if match:
                idx = (int(match.group(1)), int(match.group(2)))
                modes[idx] = read_mode_series(os.path.join(run_dir, name))
    except ValueError as exc:
        raise ConfigInvalid(f"unreadable run output: {exc}") from None
    required = ("t", "a", "a_dot", "mass_residual", "l2_norm_f")
    missing = [c for c in required if c not in mono]
    if missing:
        raise ConfigInvalid(f"monopole.csv is missing columns {missing}")

    allow_dipole = False
    report_path = os.path.join(run_dir, "report.json")
    if os.path.isfile(report_path):
        with open(report_path) as fh:
            allow_dipole = bool(json.load(fh).get("run", {}).get("allow_dipole", False))

    entries = []
    if modes:
        worst = 0.0
        scale = 1.0
        for (ell, _), (_, _, adot, b) in modes.items():
            worst = max(worst, float(np.max(np.abs(adot + (ell + 1) * b))))
            scale = max(scale, float(np.max(np.abs(adot))))
        entries.append(
            VerificationEntry(
                name="mode_kinematics",
                value=worst,
                tolerance=KINEMATIC_TOL * scale,
                passed=worst <= KINEMATIC_TOL * scale,
                note=f"{len(modes)} surface mode series",
            )
        )

    dipole_max = max(
        (float(np.max(np.abs(series[1]))) for idx, series in modes.items() if idx[0] == 1),
        default=0.0,
    )
    has_dipole = any(idx[0] == 1 for idx in modes)
    entries.append(
        VerificationEntry(
            name="centroid_lock",
            value=dipole_max,
            tolerance=CENTROID_TOL,
            passed=True if allow_dipole else dipole_max <= CENTROID_TOL,
            note=(
                "dipole drift enabled by configuration"
                if allow_dipole
                else ("" if has_dipole else "no dipole series saved")
            ),
        )
    )

    drift = float(np.max(np.abs(mono["mass_residual"])))
    mass_scale = max(1.0, float(np.max(np.abs(mono["l2_norm_f"]))))
    entries.append(
        VerificationEntry(
            name="mass_conservation",
            value=drift,
            tolerance=MASS_DRIFT_TOL * mass_scale,
            passed=drift <= MASS_DRIFT_TOL * mass_scale,
            note="recorded drift of the discrete mass functional",
        )
    )

    closure = float(
        abs(np.trapezoid(mono["a_dot"], mono["t"]) - (mono["a"][-1] - mono["a"][0]))
    )
    entries.append(
        VerificationEntry(
            name="volume_closure",
            value=closure,
            tolerance=None,
            passed=None,
            note="integral of saved a_dot vs net change in a; exact only when every step is saved",
        )
    )

    final_b = {idx: complex(series[3][-1]) for idx, series in modes.items()}
    final_b[(0, 0)] = complex(-mono["a_dot"][-1])
    entries.append(far_field_entry(final_b))

    print(
        f"auditing {run_dir}: {len(mono['t'])} saved samples, "
        f"{len(modes)} surface mode series"
    )
    print("checks:")
    for e in entries:
        print(format_entry(e))
    return 0 if all(e.passed is not False for e in entries) else 2


def cmd_verify(args) -> int:
    if args.run_dir is not None:
        return _verify_run_dir(args.run_dir)
    cfg = load_config(args.config)
    cfg.plots = False
    with tempfile.TemporaryDirectory() as tmp:
        cfg.out_dir = tmp
        report = run_simulation(cfg)
        _print_report(report)
    return 0 if report.passed else 2


COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "frequencies": cmd_frequencies,
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "check-viscous": cmd_check_viscous,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ViscousGeneralDataRejected as exc:
        print("viscous gate rejected the configured initial data:", file=sys.stderr)
        for line in exc.report.summary_lines():
            print(line, file=sys.stderr)
        print(
            "set project_radial or viscous_demo in [flags] to proceed",
            file=sys.stderr,
        )
        return 2
    except BubbleModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
