import os

import numpy as np
import pytest

from ddgmps.cli import main, parse_config_file
from ddgmps.driver import RunConfig, convergence_study, run, write_report_csv
from ddgmps.errors import BlowUpError, ConfigError


def heat_cfg(**kw):
    base = dict(problem="heat_weighted_1d", nx=16, dt=0.1 * (2 / 16) ** 2,
                t_final=0.02, gamma=0.1, snap_every=8)
    base.update(kw)
    return RunConfig(**base)


def test_run_rows_monotone_and_final_time():
    rep = run(heat_cfg())
    ts = [r.t for r in rep.rows]
    assert ts == sorted(ts)
    assert len(set(ts)) == len(ts)
    assert rep.rows[-1].t == pytest.approx(0.02)
    assert rep.rows[-1].e2 > 0
    assert rep.cfl.binding == "user"


def test_run_auto_dt_uses_cfl():
    rep = run(heat_cfg(dt="auto", t_final=1e-4))
    assert rep.cfl.binding == "diffusion"
    assert rep.cfl.tau == pytest.approx(0.9 * rep.cfl.mu0 * (2 / 16) ** 2)


def test_limiter_rows_within_bounds_dirichlet():
    cfg = RunConfig(problem="porous_medium_m2", nx=64, dt=2e-4, t_final=0.05,
                    gamma=0.1, snap_every=20)
    rep = run(cfg)
    for r in rep.rows:
        assert r.einf <= 1e-12
        assert r.min_u >= -1e-12
        assert r.max_u <= 1 + 1e-12


def test_periodic_2d_conservation_and_einf():
    cfg = RunConfig(problem="aniso_2d_case1", nx=24, dt=5e-6, t_final=5e-4,
                    gamma=0.1, snap_every=20)
    rep = run(cfg)
    for r in rep.rows:
        assert abs(r.mass_drift) <= 1e-11
        assert r.einf <= 1e-12


def test_blowup_raises_with_partial_report():
    cfg = RunConfig(problem="porous_medium_m2", nx=200, dt=1e-4, t_final=3.0,
                    gamma=0.1, limiter=False, snap_every=100)
    with pytest.raises(BlowUpError) as exc:
        run(cfg)
    assert exc.value.last_t < 3.0
    assert exc.value.report.rows


def test_unknown_problem_is_config_error():
    with pytest.raises(ConfigError):
        run(heat_cfg(problem="not_a_problem"))


def test_gamma_rejection_is_config_error():
    with pytest.raises(ConfigError):
        run(heat_cfg(gamma=0.5))


def test_report_csv_format_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run(heat_cfg(out_dir=str(out1)))
    run(heat_cfg(out_dir=str(out2)))
    r1 = (out1 / "report.csv").read_bytes()
    r2 = (out2 / "report.csv").read_bytes()
    assert r1 == r2
    lines = r1.decode().splitlines()
    assert lines[0] == "t,e1,e2,einf,min_u,max_u,mass_drift"
    assert len(lines) >= 3
    sol = (out1 / "solution_t0.02.csv").read_text().splitlines()
    assert sol[0] == "x,u"
    assert len(sol) == 1 + 16 * 4  # default 4 samples per cell


def test_solution_csv_2d_header(tmp_path):
    cfg = RunConfig(problem="aniso_2d_case1", nx=8, dt=1e-5, t_final=2e-5,
                    gamma=0.1, out_dir=str(tmp_path), samples=1)
    run(cfg)
    sol = (tmp_path / "solution_t2e-05.csv").read_text().splitlines()
    assert sol[0] == "x,y,u"
    assert len(sol) == 1 + 64


def test_convergence_study_orders_and_csv(tmp_path):
    cfg = heat_cfg(dt=0.1 * (2 / 64) ** 2, t_final=0.05, out_dir=str(tmp_path),
                   snap_every=None)
    rep = convergence_study(cfg, [16, 32, 64])
    assert [r.n for r in rep.rows] == [16, 32, 64]
    assert np.isnan(rep.rows[0].order2)
    assert rep.rows[-1].order2 > 2.5
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert lines[0] == "N,e1,order1,e2,order2"
    assert len(lines) == 4


def test_convergence_study_requires_nesting():
    with pytest.raises(ConfigError):
        convergence_study(heat_cfg(), [16, 48])
    with pytest.raises(ConfigError):
        convergence_study(heat_cfg(), [16])


def test_convergence_study_consecutive_mode():
    cfg = RunConfig(problem="buckley_leverett", nx=16, dt="auto", safety=0.6,
                    t_final=0.02, gamma=0.1)
    rep = convergence_study(cfg, [16, 32, 64])
    assert len(rep.rows) == 2  # consecutive errors attach to the coarser mesh
    assert rep.rows[0].e1 > rep.rows[1].e1


def test_row_at_lookup():
    rep = run(heat_cfg())
    assert rep.row_at(0.0).t == 0.0
    with pytest.raises(KeyError):
        rep.row_at(0.5)


def test_cli_run_and_exit_codes(tmp_path, capsys):
    rc = main(["--problem", "heat_weighted_1d", "--nx", "16",
               "--dt", str(0.1 * (2 / 16) ** 2), "--t-final", "0.01",
               "--gamma", "0.1", "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "heat_weighted_1d" in out
    assert (tmp_path / "report.csv").exists()

    rc = main(["--problem", "heat_weighted_1d", "--nx", "16", "--gamma", "0.9",
               "--t-final", "0.01", "--dt", "1e-4"])
    assert rc == 2

    rc = main(["--problem", "porous_medium_m2", "--nx", "200", "--dt", "1e-4",
               "--t-final", "3", "--gamma", "0.1", "--limiter", "off"])
    assert rc == 3


def test_cli_list_problems(capsys):
    assert main(["--list-problems"]) == 0
    out = capsys.readouterr().out
    assert "buckley_leverett" in out


def test_cli_config_file_and_override(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "# sample configuration\n"
        "problem = heat_weighted_1d\n"
        "nx = 16\n"
        "dt = 1e-4   # fixed step\n"
        "t-final = 0.01\n"
        "gamma = 0.1\n"
        "limiter = on\n")
    parsed = parse_config_file(str(cfgfile))
    assert parsed["problem"] == "heat_weighted_1d"
    assert parsed["t_final"] == "0.01"
    rc = main(["--config", str(cfgfile), "--nx", "32"])  # flag wins
    assert rc == 0
    assert "heat_weighted_1d" in capsys.readouterr().out


def test_cli_study(capsys):
    rc = main(["--problem", "heat_weighted_1d", "--nx", "16",
               "--dt", str(0.1 * (2 / 32) ** 2), "--t-final", "0.01",
               "--gamma", "0.1", "--study", "16,32"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("N,e1,order1,e2,order2")
