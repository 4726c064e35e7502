import filecmp
import time
from pathlib import Path

import numpy as np
import pytest

from nhgwp.cli import main, run
from nhgwp.scenario import load_scenario, parse_scenario

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = sorted((ROOT / "scenarios").glob("*.ini"))


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("alpha0 = 4i+\n")
    assert main(["gwd", "--scenario", str(bad), "--out", str(tmp_path / "o")]) == 1
    bad.write_text("alpha0 = 4i\nbogus = 1\n")
    assert main(["gwd", "--scenario", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert main(["gwd", "--scenario", str(tmp_path / "missing.ini"), "--out", str(tmp_path / "o")]) == 1
    # RK4 blows up with an oversized step
    num = tmp_path / "num.ini"
    num.write_text("alpha0 = 4i\nb.offset = 1\ndt = 0.2\nt_final = 2\n")
    assert main(["gwd", "--scenario", str(num), "--out", str(tmp_path / "o")]) == 2


def test_overrides_and_env(tmp_path, monkeypatch):
    scn = tmp_path / "s.ini"
    scn.write_text("alpha0 = 4i\nb.offset = 1\npotential.coeffs = 0,0,0.5\n")
    monkeypatch.setenv("NHGWP_OUT", str(tmp_path / "env"))
    assert main(["gwd", "--scenario", str(scn), "--t-final", "0.5", "--dt", "0.01"]) == 0
    data = read_csv(tmp_path / "env" / "trajectory.csv")
    assert data["t"][-1] == 0.5 and len(data) == 6
    assert main(["gwd", "--scenario", str(scn), "--t-final", "0.5", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "trajectory.csv").exists()


def test_trajectory_header(tmp_path):
    scn = tmp_path / "s.ini"
    scn.write_text("dim = 2\nalpha0 = 4i\nb.offset = 1\nt_final = 0.1\n")
    assert main(["gwd", "--scenario", str(scn), "--out", str(tmp_path)]) == 0
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == (
        "t,Re_q_1,Im_q_1,Re_q_2,Im_q_2,Re_p_1,Im_p_1,Re_p_2,Im_p_2,Q_1,Q_2,P_1,P_2,"
        "Re_alpha_11,Im_alpha_11,Re_alpha_12,Im_alpha_12,Re_alpha_22,Im_alpha_22,"
        "Re_gamma,Im_gamma,norm2,sigma2_1,sigma2_2"
    )


def test_deterministic_output(tmp_path):
    scn = ROOT / "scenarios" / "compare_harmonic_k1.ini"
    for d in ("a", "b"):
        assert main(["compare", "--scenario", str(scn), "--out", str(tmp_path / d), "--t-final", "0.5"]) == 0
    for name in ("trajectory.csv", "grid_trajectory.csv", "density.csv", "report.csv"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)


def test_seventeen_digits_round_trip(tmp_path):
    scn = parse_scenario("alpha0 = 4i\nb.offset = 1\nt_final = 0.05\nsample_stride = 1\n")
    run("gwd", scn, tmp_path)
    row = (tmp_path / "trajectory.csv").read_text().splitlines()[-1].split(",")
    from nhgwp.cli import run_gwd

    final = run_gwd(scn).final
    assert float(row[1]) == final.q[0].real


def test_fig1a_compare_against_closed_form(tmp_path):
    scn = load_scenario(ROOT / "scenarios" / "fig1a_free_p0.ini")
    report = run("compare", scn, tmp_path)
    m = report.metrics
    # absolute Q reaches 800 at t = 10
    for name in ("Q", "P", "q_guide", "alpha"):
        assert m[f"max_rel_d{name}_oracle"] < 1e-8
    short = run("compare", scn.with_overrides(t_final=2.0), tmp_path / "short").metrics
    assert max(short[f"max_abs_d{n}_oracle"] for n in ("Q", "P", "q_guide", "alpha")) < 1e-8


def test_analytic_k0_center_equals_guide(tmp_path):
    scn = parse_scenario("alpha0 = 4i\np0 = 1\npotential.coeffs = 0,0,0.5\nt_final = 2\n")
    run("analytic", scn, tmp_path)
    data = read_csv(tmp_path / "analytic.csv")
    # without b there is no guiding shift: Q is the real q
    np.testing.assert_allclose(data["Q"], data["oracle_Q"], atol=1e-9)
    assert "q_guide" not in data.dtype.names


def test_analytic_needs_closed_form(tmp_path):
    assert main(["analytic", "--scenario", str(ROOT / "scenarios" / "fig5a_quartic_p0.ini"), "--out", str(tmp_path)]) == 1


def test_grid_mode_outputs(tmp_path):
    scn = ROOT / "scenarios" / "compare_harmonic_k1.ini"
    assert main(["grid", "--scenario", str(scn), "--out", str(tmp_path), "--t-final", "0.2", "--grid-n", "1024", "--grid-L", "20"]) == 0
    data = read_csv(tmp_path / "grid_trajectory.csv")
    assert data["t"][-1] == pytest.approx(0.2)
    dens = read_csv(tmp_path / "density.csv")
    assert dens["psi2_normalized"].max() == 1.0
    assert not (tmp_path / "trajectory.csv").exists()


@pytest.mark.parametrize("path", SCENARIOS, ids=[p.stem for p in SCENARIOS])
def test_figure_scenarios_run(tmp_path, path):
    start = time.perf_counter()
    scn = load_scenario(path)
    report = run(scn.mode, scn, tmp_path)
    assert time.perf_counter() - start < 60
    assert not report.flags
    assert (tmp_path / "trajectory.csv").exists()
