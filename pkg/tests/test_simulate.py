import json
import math

import numpy as np
import pytest

from bubblemodes.errors import ConfigInvalid, ViscousGeneralDataRejected
from bubblemodes.io import RunConfig
from bubblemodes.params import equilibrium_from_mass
from bubblemodes.shape import analytic_shape_solution
from bubblemodes.simulate import far_field_entry, run_simulation
from bubblemodes.thermal import (
    assemble_monopole_operator,
    invert_interface,
    measure_decay_rate,
    slowest_eigenvalues,
)
from tests.test_params import unit_params

UNIT_MASS = 4.0 * math.pi


def make_config(tmp_path, name="out", **overrides):
    params_over = overrides.pop("params_over", {})
    cfg = RunConfig(
        params=unit_params(**params_over),
        mass=UNIT_MASS,
        l_max=4,
        grid_n=60,
        dt=1e-3,
        t_end=0.05,
        out_dir=str(tmp_path / name),
        plots=False,
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


def entry(report, name):
    matches = [e for e in report.verifications if e.name == name]
    assert matches, f"no verification entry named {name}"
    return matches[0]


def test_quiet_run_produces_outputs(tmp_path):
    cfg = make_config(tmp_path)
    report = run_simulation(cfg)
    assert report.passed
    assert report.n_saved == report.n_steps + 1
    out = tmp_path / "out"
    assert (out / "monopole.csv").exists()
    assert (out / "report.json").exists()
    for name in report.outputs:
        assert (out / name).exists()
    payload = json.loads((out / "report.json").read_text())
    assert payload["schema_version"] == 1
    assert payload["passed"] is True
    assert payload["equilibrium"]["R_star"] == pytest.approx(1.0, rel=1e-12)
    names = {e["name"] for e in payload["verifications"]}
    assert {"centroid_lock", "volume_kinematics", "mass_conservation"} <= names


def test_shape_mode_matches_analytic_solution(tmp_path):
    cfg = make_config(tmp_path, initial_a={(2, 0): 0.01}, t_end=0.2)
    report = run_simulation(cfg)
    assert report.passed
    a_hist = report.mode_series[(2, 0)]["a"]
    expected, expected_dot = analytic_shape_solution(
        2, 0.01, 0.0, report.times, cfg.params, report.equilibrium
    )
    np.testing.assert_allclose(a_hist, expected, rtol=0, atol=1e-12)
    np.testing.assert_allclose(
        report.mode_series[(2, 0)]["adot"], expected_dot, rtol=0, atol=1e-11
    )
    assert (tmp_path / "out" / "mode_l2_m0.csv").exists()


def test_monopole_run_mass_and_interface(tmp_path):
    cfg = make_config(
        tmp_path,
        initial_a={(0, 0): 0.01},
        f_poly=(0.02, -0.01),
        t_end=0.1,
    )
    report = run_simulation(cfg)
    assert report.passed
    assert entry(report, "mass_conservation").passed
    assert entry(report, "volume_kinematics").value == 0.0
    # the recorded gas pressure must be the interface inversion of the
    # recorded boundary density at every saved time
    for row in report.monopole_rows:
        P_g, _ = invert_interface(row[3], row[1], cfg.params, report.equilibrium)
        assert row[4] == pytest.approx(P_g, rel=1e-14, abs=1e-300)
    proj = entry(report, "initial_mass_projection")
    assert proj.passed is None and proj.value > 0.0


def test_realness_entry_for_paired_and_unpaired_data(tmp_path):
    c = 0.01 - 0.005j
    cfg = make_config(
        tmp_path, "paired", initial_a={(2, 1): c, (2, -1): -np.conj(c)}
    )
    report = run_simulation(cfg)
    real_entry = entry(report, "surface_realness")
    assert real_entry.passed is True
    assert real_entry.value <= 1e-10

    cfg = make_config(tmp_path, "unpaired", initial_a={(2, 1): c})
    report = run_simulation(cfg)
    real_entry = entry(report, "surface_realness")
    assert real_entry.passed is None
    assert report.passed


def test_dipole_freezes_and_fails_centroid(tmp_path):
    cfg = make_config(tmp_path, initial_a={(1, 0): 1e-3})
    report = run_simulation(cfg)
    assert not report.passed
    lock = entry(report, "centroid_lock")
    assert lock.passed is False
    assert lock.value == pytest.approx(1e-3)
    # frozen: the displacement never moves
    np.testing.assert_array_equal(
        report.mode_series[(1, 0)]["a"], np.full(report.n_saved, 1e-3 + 0j)
    )


def test_dipole_drift_when_allowed(tmp_path):
    cfg = make_config(
        tmp_path,
        initial_adot={(1, 0): 1e-3},
        allow_dipole=True,
        t_end=0.1,
    )
    report = run_simulation(cfg)
    lock = entry(report, "centroid_lock")
    assert lock.passed is True
    assert "enabled" in lock.note
    a_hist = report.mode_series[(1, 0)]["a"]
    np.testing.assert_allclose(
        a_hist, 1e-3 * report.times, rtol=1e-12, atol=1e-18
    )


def test_viscous_general_data_rejected(tmp_path):
    cfg = make_config(
        tmp_path,
        params_over={"mu_l": 0.1},
        initial_a={(2, 0): 0.01, (3, 1): 0.01j},
    )
    with pytest.raises(ViscousGeneralDataRejected) as excinfo:
        run_simulation(cfg)
    report = excinfo.value.report
    assert not report.compatible
    assert len(report.entries) == 2


def test_viscous_projection_runs_radial_only(tmp_path):
    cfg = make_config(
        tmp_path,
        params_over={"mu_l": 0.1},
        initial_a={(2, 0): 0.01, (0, 0): 0.005},
        project_radial=True,
    )
    report = run_simulation(cfg)
    assert report.passed
    assert report.mode_series == {}
    proj = entry(report, "projected_surface_energy")
    assert proj.passed is None
    assert proj.value > 0.0
    assert not (tmp_path / "out" / "mode_l2_m0.csv").exists()


def test_viscous_demo_decays(tmp_path):
    cfg = make_config(
        tmp_path,
        params_over={"mu_l": 0.1},
        initial_adot={(2, 0): 0.05},
        viscous_demo=True,
        t_end=0.5,
        dt=2e-3,
    )
    report = run_simulation(cfg)
    compat = entry(report, "viscous_compatibility")
    assert compat.passed is None
    assert compat.value > 0.0
    b_hist = np.abs(report.mode_series[(2, 0)]["b"])
    # envelope shrinks over a half period of the damped oscillator
    assert b_hist[-1] < b_hist[0]


def test_monopole_initial_data_must_be_real(tmp_path):
    cfg = make_config(tmp_path, initial_a={(0, 0): 0.01j})
    with pytest.raises(ConfigInvalid):
        run_simulation(cfg)


def test_interior_diagnostics_written(tmp_path):
    cfg = make_config(
        tmp_path,
        rho_polys={(0, 0): (1.0, -1.0), (2, 0): (0.0, 1.0, -1.0)},
        t_end=0.05,
    )
    report = run_simulation(cfg)
    out = tmp_path / "out"
    assert (out / "interior_l0_m0.csv").exists()
    assert (out / "interior_l2_m0.csv").exists()
    rows0 = (out / "interior_l0_m0.csv").read_text().strip().splitlines()
    header = rows0[0].split(",")
    assert header == ["t", "norm", "re_flux", "im_flux"]
    first = rows0[1].split(",")
    last = rows0[-1].split(",")
    assert float(last[1]) < float(first[1])
    assert abs(float(first[2])) > 0.0
    rows2 = (out / "interior_l2_m0.csv").read_text().strip().splitlines()
    assert abs(float(rows2[1][rows2[1].index(",") + 1 :].split(",")[1])) < 1e-12


def test_reruns_are_byte_identical(tmp_path):
    kwargs = dict(
        initial_a={(2, 0): 0.01, (0, 0): 0.002},
        f_poly=(0.01, -0.005),
        rho_polys={(0, 0): (1.0, -1.0)},
        t_end=0.05,
    )
    first = run_simulation(make_config(tmp_path, "one", **kwargs))
    second = run_simulation(make_config(tmp_path, "two", **kwargs))
    for name in first.outputs:
        if not name.endswith(".csv"):
            continue
        a = (tmp_path / "one" / name).read_bytes()
        b = (tmp_path / "two" / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"


def test_figures_rendered_when_enabled(tmp_path):
    cfg = make_config(tmp_path, initial_a={(2, 0): 0.01}, plots=True)
    report = run_simulation(cfg)
    assert "mode_amplitudes.png" in report.outputs
    assert "monopole.png" in report.outputs
    assert (tmp_path / "out" / "mode_amplitudes.png").exists()
    assert (tmp_path / "out" / "monopole.png").exists()


def test_report_mode_and_monopole_summaries(tmp_path):
    cfg = make_config(tmp_path, initial_a={(2, 0): 0.01, (0, 0): 0.005})
    report = run_simulation(cfg)
    summary = report.mode_summary["l2_m0"]
    assert summary["regime"] == "oscillatory"
    assert summary["omega"] == pytest.approx(math.sqrt(12.0), rel=1e-12)
    assert summary["period"] == pytest.approx(
        2.0 * math.pi / math.sqrt(12.0), rel=1e-12
    )
    assert report.monopole_summary["grid_n"] == 60
    assert report.monopole_summary["spectral_abscissa"] == pytest.approx(
        -0.2389, abs=2e-3
    )
    payload = json.loads((tmp_path / "out" / "report.json").read_text())
    assert payload["modes"]["l2_m0"]["regime"] == "oscillatory"
    assert payload["monopole"]["grid_n"] == 60


def test_report_damped_and_frozen_summaries(tmp_path):
    cfg = make_config(
        tmp_path,
        params_over={"mu_l": 0.05},
        viscous_demo=True,
        initial_a={(2, 0): 0.01},
        initial_adot={(1, 0): 1e-3},
    )
    report = run_simulation(cfg)
    assert report.mode_summary["l2_m0"]["regime"] == "damped"
    assert report.mode_summary["l2_m0"]["damping_rate"] == pytest.approx(
        0.6, rel=1e-12
    )
    assert report.mode_summary["l1_m0"]["regime"] == "frozen"


def test_report_drift_summary(tmp_path):
    cfg = make_config(
        tmp_path, allow_dipole=True, initial_adot={(1, 0): 1e-3}, t_end=0.01
    )
    report = run_simulation(cfg)
    assert report.mode_summary["l1_m0"]["regime"] == "drift"


def test_far_field_entry_judged_for_breathing_runs(tmp_path):
    cfg = make_config(tmp_path, initial_a={(0, 0): 0.01})
    report = run_simulation(cfg)
    far = entry(report, "far_field_decay")
    assert far.passed is True
    assert far.value < 1.0
    assert far.tolerance == 1.0


def test_far_field_entry_informational_for_shape_runs(tmp_path):
    cfg = make_config(tmp_path, initial_a={(2, 0): 0.01})
    report = run_simulation(cfg)
    far = entry(report, "far_field_decay")
    assert far.passed is None
    assert far.note.startswith("no dominant breathing mode")
    assert report.passed


def test_far_field_entry_vacuous_for_quiet_runs(tmp_path):
    cfg = make_config(tmp_path)
    report = run_simulation(cfg)
    far = entry(report, "far_field_decay")
    assert far.passed is None
    assert far.value is None


def test_file_cap_thins_save_cadence(tmp_path):
    cfg = make_config(tmp_path, initial_a={(2, 0): 0.01}, file_cap_kb=1.0)
    report = run_simulation(cfg)
    assert report.n_steps == 50
    assert cfg.save_every >= 25
    assert report.n_saved == 3
    cap_bytes = 1024
    for name in ("monopole.csv", "mode_l2_m0.csv"):
        assert (tmp_path / "out" / name).stat().st_size <= cap_bytes
    payload = json.loads((tmp_path / "out" / "report.json").read_text())
    assert payload["run"]["save_every"] == cfg.save_every


def test_monopole_run_decay_matches_spectral_abscissa(tmp_path):
    params = unit_params()
    eq = equilibrium_from_mass(UNIT_MASS, params)
    op = assemble_monopole_operator(60, params, eq)
    slow = slowest_eigenvalues(op, k=1)[0]

    # the slowest eigenvalue is a complex pair, so log-norm histories ripple
    # with period pi/|Im|; fitting over whole ripple periods keeps the
    # least-squares slope unbiased (second half of 3072 steps = 24 periods)
    ripple = math.pi / abs(slow.imag)
    dt = ripple / 64.0
    cfg = make_config(
        tmp_path,
        initial_a={(0, 0): 0.01},
        dt=dt,
        t_end=3072 * dt,
        save_every=1,
    )
    report = run_simulation(cfg)
    assert report.n_steps == 3072

    rows = np.asarray(report.monopole_rows)
    norms = np.sqrt(rows[:, 1] ** 2 + rows[:, 2] ** 2 + rows[:, 6] ** 2)
    fit = measure_decay_rate(rows[:, 0], norms)
    assert fit.decaying
    assert fit.rate == pytest.approx(slow.real, rel=0.02)
    assert fit.rate == pytest.approx(
        report.monopole_summary["spectral_abscissa"], rel=0.02
    )


def test_far_field_entry_gating_rules():
    judged = far_field_entry({(0, 0): 0.01, (2, 0): 0.002})
    assert judged.passed is True

    dipole = far_field_entry({(0, 0): 0.01, (1, 0): 0.001})
    assert dipole.passed is None

    crowded = far_field_entry({(0, 0): 0.01, (2, 0): 0.002, (3, 0): 0.002})
    assert crowded.passed is None
