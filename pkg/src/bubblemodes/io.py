"""Run configuration parsing and delimited output writers.

Configs are INI files. Mode coefficients are keyed a_{ell}_{m} and
adot_{ell}_{m} (m may be negative) and parsed as Python complex literals;
radial profiles are space-separated polynomial coefficients in powers of
r^2. All delimited output uses RFC 4180 quoting, '.' as the decimal mark,
and 17 significant digits, and is written in sorted mode order with no
timestamps, so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import configparser
import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid
from .params import PhysicalParams, validate_params

PARAM_KEYS = ("rho_l", "mu_l", "kappa_g", "sigma", "T_inf", "R_gas", "c_v", "gamma", "p_inf")


@dataclass
class RunConfig:
    """Everything a simulation run needs, as parsed from one INI file."""

    params: PhysicalParams
    mass: float
    l_max: int = 4
    grid_n: int = 120
    dt: float = 1e-3
    t_end: float = 1.0
    save_every: int = 1
    file_cap_kb: float | None = None
    out_dir: str = "out"
    initial_a: dict = field(default_factory=dict)
    initial_adot: dict = field(default_factory=dict)
    f_poly: tuple = ()
    rho_polys: dict = field(default_factory=dict)
    allow_dipole: bool = False
    project_radial: bool = False
    viscous_demo: bool = False
    plots: bool = True


def _parse_mode_key(key: str, prefix: str):
    parts = key.split("_")
    if len(parts) != 3 or parts[0] != prefix:
        return None
    try:
        ell, m = int(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigInvalid(f"cannot parse mode index from key {key!r}") from exc
    if ell < 0 or abs(m) > ell:
        raise ConfigInvalid(f"mode index out of range in key {key!r}")
    return ell, m


def _parse_complex(text: str, key: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise ConfigInvalid(f"cannot parse {key!r} as a complex literal: {text!r}") from exc


def _parse_poly(text: str, key: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split())
    except ValueError as exc:
        raise ConfigInvalid(f"cannot parse {key!r} as polynomial coefficients: {text!r}") from exc


def load_config(path: str) -> RunConfig:
    """Parse one INI run configuration.

    Raises ConfigInvalid on missing sections/keys or unparseable values;
    physical-parameter validation errors propagate from validate_params.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigInvalid(f"config file not found or empty: {path}")

    if "params" not in parser:
        raise ConfigInvalid("config is missing the [params] section")
    missing = [k for k in PARAM_KEYS if k not in parser["params"]]
    if missing:
        raise ConfigInvalid(f"[params] is missing keys: {', '.join(missing)}")
    try:
        raw = {k: float(parser["params"][k]) for k in PARAM_KEYS}
    except ValueError as exc:
        raise ConfigInvalid(f"non-numeric value in [params]: {exc}") from exc
    params = validate_params(raw)

    if "equilibrium" not in parser or "mass" not in parser["equilibrium"]:
        raise ConfigInvalid("config needs [equilibrium] with a mass key")
    mass = float(parser["equilibrium"]["mass"])

    cfg = RunConfig(params=params, mass=mass)

    run = parser["run"] if "run" in parser else {}
    cfg.l_max = int(run.get("l_max", cfg.l_max))
    cfg.grid_n = int(run.get("grid_n", cfg.grid_n))
    cfg.dt = float(run.get("dt", cfg.dt))
    cfg.t_end = float(run.get("t_end", cfg.t_end))
    cfg.save_every = int(run.get("save_every", cfg.save_every))
    if "file_cap_kb" in run:
        cfg.file_cap_kb = float(run["file_cap_kb"])
    cfg.out_dir = run.get("out_dir", cfg.out_dir)
    if cfg.dt <= 0 or cfg.t_end <= 0:
        raise ConfigInvalid("dt and t_end must be positive")
    if cfg.save_every < 1:
        raise ConfigInvalid("save_every must be at least 1")
    if cfg.file_cap_kb is not None and cfg.file_cap_kb <= 0:
        raise ConfigInvalid("file_cap_kb must be positive")
    if cfg.l_max < 0:
        raise ConfigInvalid("l_max must be nonnegative")

    if "initial" in parser:
        for key, value in parser["initial"].items():
            idx = _parse_mode_key(key, "a")
            if idx is not None:
                cfg.initial_a[idx] = _parse_complex(value, key)
                continue
            idx = _parse_mode_key(key, "adot")
            if idx is not None:
                cfg.initial_adot[idx] = _parse_complex(value, key)
                continue
            if key == "f_poly":
                cfg.f_poly = _parse_poly(value, key)
                continue
            if key.startswith("rho_") and key.endswith("_poly"):
                parts = key.split("_")
                if len(parts) != 4:
                    raise ConfigInvalid(f"unrecognized [initial] key {key!r}")
                try:
                    ell, m = int(parts[1]), int(parts[2])
                except ValueError as exc:
                    raise ConfigInvalid(f"unrecognized [initial] key {key!r}") from exc
                if ell < 0 or abs(m) > ell:
                    raise ConfigInvalid(f"mode index out of range in key {key!r}")
                cfg.rho_polys[(ell, m)] = _parse_poly(value, key)
                continue
            raise ConfigInvalid(f"unrecognized [initial] key {key!r}")

    for idx in list(cfg.initial_a) + list(cfg.initial_adot):
        if idx[0] > cfg.l_max:
            raise ConfigInvalid(
                f"initial data for mode {idx} exceeds l_max={cfg.l_max}"
            )

    if "flags" in parser:
        flags = parser["flags"]
        cfg.allow_dipole = flags.getboolean("allow_dipole", cfg.allow_dipole)
        cfg.project_radial = flags.getboolean("project_radial", cfg.project_radial)
        cfg.viscous_demo = flags.getboolean("viscous_demo", cfg.viscous_demo)
        cfg.plots = flags.getboolean("plots", cfg.plots)
    return cfg


def eval_even_poly(coeffs, r):
    """Polynomial in r^2: coeffs[k] multiplies r^(2k)."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    for c in reversed(coeffs):
        out = out * r**2 + c
    return out


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_mode_series(path, times, a, adot, b) -> None:
    """Per-mode CSV: t, re/im of the displacement, velocity, and b."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "re_a", "im_a", "re_adot", "im_adot", "re_b", "im_b"])
        for t, av, dv, bv in zip(times, a, adot, b):
            writer.writerow([
                _fmt(t),
                _fmt(av.real), _fmt(av.imag),
                _fmt(dv.real), _fmt(dv.imag),
                _fmt(bv.real), _fmt(bv.imag),
            ])


def write_monopole_series(path, rows) -> None:
    """Monopole CSV: t, a, a_dot, f_at_1, P_g, mass_residual, l2_norm_f."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "a", "a_dot", "f_at_1", "P_g", "mass_residual", "l2_norm_f"])
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_eigen_table(path, rows) -> None:
    """Eigenbasis CSV: ell, n, zero, norm."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ell", "n", "zero", "norm"])
        for ell, k, zero, norm in rows:
            writer.writerow([str(ell), str(k), _fmt(zero), _fmt(norm)])


def write_diagnostic_series(path, times, norms, fluxes) -> None:
    """Interior-profile diagnostic CSV: t, profile norm, flux components."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "norm", "re_flux", "im_flux"])
        for t, nv, fv in zip(times, norms, fluxes):
            fv = complex(fv)
            writer.writerow([_fmt(t), _fmt(nv), _fmt(fv.real), _fmt(fv.imag)])


def write_surface_field(path, grid, values, quantity: str) -> None:
    """Surface-field CSV (theta, phi, re, im) plus a JSON shape sidecar."""
    theta_g, phi_g = grid.mesh()
    values = np.asarray(values, dtype=complex)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "phi", "re", "im"])
        for i in range(grid.n_theta):
            for j in range(grid.n_phi):
                writer.writerow([
                    _fmt(theta_g[i, j]), _fmt(phi_g[i, j]),
                    _fmt(values[i, j].real), _fmt(values[i, j].imag),
                ])
    sidecar = {
        "quantity": quantity,
        "n_theta": grid.n_theta,
        "n_phi": grid.n_phi,
        "layout": "theta-major, matching the CSV row order",
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_mode_series(path):
    """Read one per-mode CSV back as (times, a, adot, b) arrays."""
    times, a, adot, b = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:1] != ["t"] or len(header) != 7:
            raise ValueError(f"unexpected mode-series header {header!r} in {path}")
        for row in reader:
            values = [float(v) for v in row]
            times.append(values[0])
            a.append(complex(values[1], values[2]))
            adot.append(complex(values[3], values[4]))
            b.append(complex(values[5], values[6]))
    return (np.asarray(times), np.asarray(a), np.asarray(adot), np.asarray(b))


def read_monopole_series(path):
    """Read the monopole CSV back as a dict of column name -> array."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                columns[name].append(float(value))
    return {name: np.asarray(values) for name, values in columns.items()}


def read_surface_field(path):
    """Read a surface-field CSV and its JSON sidecar back into arrays.

    Returns (grid, values, quantity). The quadrature grid is rebuilt from
    the sidecar's shape and cross-checked against the stored angle
    columns.
    """
    with open(str(path) + ".json") as fh:
        sidecar = json.load(fh)
    n_theta, n_phi = sidecar["n_theta"], sidecar["n_phi"]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["theta", "phi", "re", "im"]:
            raise ValueError(f"unexpected surface-field header {header!r} in {path}")
        rows = list(reader)
    if len(rows) != n_theta * n_phi:
        raise ValueError(
            f"{path} holds {len(rows)} rows, sidecar promises {n_theta}x{n_phi}"
        )
    from .harmonics import quadrature_grid

    grid = quadrature_grid(n_theta, n_phi)
    theta_g, phi_g = grid.mesh()
    values = np.empty((n_theta, n_phi), dtype=complex)
    for k, row in enumerate(rows):
        i, j = divmod(k, n_phi)
        if abs(float(row[0]) - theta_g[i, j]) > 1e-12 or abs(float(row[1]) - phi_g[i, j]) > 1e-12:
            raise ValueError(f"row {k} of {path} does not sit on the quadrature grid")
        values[i, j] = complex(float(row[2]), float(row[3]))
    return grid, values, sidecar["quantity"]


def write_operator_matrix(path, matrix) -> None:
    """Dense operator dump for debugging: one CSV row per matrix row."""
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in matrix:
            writer.writerow([_fmt(v) for v in row])


def write_mode_solution_grid(path, solution, r, times) -> None:
    """Evaluation grid of one interior heat mode: columns r, t, value.

    Rows are time-major (all radii for the first time, then the next), so
    the file streams in evaluation order.
    """
    r = np.asarray(r, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "t", "value"])
        for t in times:
            profile = solution.evaluate(r, float(t))
            for rv, fv in zip(r, profile):
                writer.writerow([_fmt(rv), _fmt(float(t)), _fmt(fv)])


def write_report_json(path, report_dict) -> None:
    """Write the run report (schema 1) as stable, sorted JSON."""
    with open(path, "w") as fh:
        json.dump(report_dict, fh, indent=2, sort_keys=True)
        fh.write("\n")
