import json

import numpy as np
import pytest

from bogospec import desk
from bogospec.cli import (
    RunConfig,
    dumps,
    emit_plot_data,
    load_config,
    load_manifest,
    main,
    read_bgkm,
    read_bgps,
    run_pipeline,
    with_dependencies,
)
from bogospec.errors import UsageError, ValidationError


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = RunConfig(out=str(out), binary=True, N_list=(25.0, 50.0))
    return cfg, run_pipeline(cfg, ["scatter", "gp", "spectrum", "kernels", "ebog"])


def test_scatter_stage_records_a0(tmp_path):
    man = run_pipeline(RunConfig(out=str(tmp_path)), "scatter")
    d = json.loads((tmp_path / "scatter.json").read_text())
    assert d["a0"] == pytest.approx(0.37182, abs=5e-6)
    assert man.files == ["scatter.json"]
    assert man.passed


def test_determinism(tmp_path):
    cfg = RunConfig()
    m1 = run_pipeline(cfg.replace(out=str(tmp_path / "a")), ["scatter", "gp", "spectrum"])
    m2 = run_pipeline(cfg.replace(out=str(tmp_path / "b")), ["scatter", "gp", "spectrum"])
    assert m1.config_hash == m2.config_hash
    for f in m1.files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    m3 = run_pipeline(cfg.replace(out=str(tmp_path / "c"), seed=3), ["scatter"])
    assert m3.config_hash != m1.config_hash


def test_manifest_lists_every_file(full_run):
    cfg, man = full_run
    from pathlib import Path

    on_disk = sorted(p.name for p in Path(cfg.out).iterdir() if p.name != "manifest.json")
    assert on_disk == man.files
    assert man.passed, man.failures
    assert set(man.timings) == {"scatter", "gp", "spectrum", "kernels", "ebog"}


def test_stage_outputs(full_run):
    cfg, man = full_run
    gp = json.loads(man.path("gp.json").read_text())
    assert {"E_GP", "eps_GP", "norm4", "residual", "phi0"} <= set(gp)
    sp = json.loads(man.path("spectrum.json").read_text())
    assert {"eigenvalues", "levels", "zeta"} <= set(sp)
    eb = json.loads(man.path("ebog.json").read_text())
    assert {"kappa", "terms", "total", "mollified", "E_N"} <= set(eb)
    assert eb["total"] == pytest.approx(0.0664018, rel=1e-5)
    vals, spacing = read_bgps(man.path("gp_phi0.bin"))
    np.testing.assert_array_equal(vals, np.array(gp["phi0"])[:, 1])
    assert spacing[0] == pytest.approx(gp["basis"]["spacing"])
    eta = read_bgkm(man.path("kernels_eta_N25.bin"))
    assert eta.shape == (96, 96) and np.allclose(eta, eta.T)


def test_plot_data(full_run):
    cfg, man = full_run
    m = load_manifest(cfg.out)
    rows = emit_plot_data(m, "dispersion").read_text().splitlines()
    assert rows[0] == "index,e_j" and len(rows) > 10
    rows = emit_plot_data(m, "ebog-terms").read_text().splitlines()
    assert rows[0] == "term,value" and len(rows) == 9
    rows = emit_plot_data(m, "neumann-asymptotics").read_text().splitlines()
    assert rows[0] == "ellN,lambda_scaled"
    last = float(rows[-1].split(",")[1])
    assert last == pytest.approx(3 * desk.scattering().a0, rel=2e-3)
    emit_plot_data(m, "phi0")
    assert "plot_phi0.csv" in load_manifest(cfg.out).files
    with pytest.raises(UsageError):
        emit_plot_data(m, "nope")


def test_missing_dependency_is_usage_error(tmp_path, capsys):
    with pytest.raises(UsageError, match="stage dependencies"):
        run_pipeline(RunConfig(out=str(tmp_path)), ["ebog"])
    assert main(["run", "--stages", "spectrum", "--out", str(tmp_path)]) == 2
    assert "stage dependencies" in capsys.readouterr().err


def test_a0_override_removes_scatter_dependency(tmp_path):
    cfg = RunConfig(out=str(tmp_path), a0=0.0)
    man = run_pipeline(cfg, ["gp", "spectrum", "ebog"])
    eb = json.loads(man.path("ebog.json").read_text())
    assert eb["total"] == 0.0 and eb["mollified"]["extrapolated"] == 0.0
    assert with_dependencies(["ebog"], cfg) == ["gp", "spectrum", "ebog"]
    assert with_dependencies(["kernels"], RunConfig()) == ["scatter", "gp", "kernels"]


def test_config_file(tmp_path):
    pot = tmp_path / "pot.txt"
    r = np.linspace(0, 2, 201)
    np.savetxt(pot, np.column_stack([r, 4.0 * (r < 1)]))
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[potential]\nkind = file\npath = pot.txt\n"
        "[physics]\nN_list = 25, 50\nell = 0.3\n"
        "[basis]\npoints = 64\nr_max = 7\nl_max = 2\n"
        "[ebog]\nkappa = 6\ndelta_list = 0.5 0.4 0.3\n"
        "[run]\nout = results\nseed = 9\n"
    )
    cfg = load_config(ini)
    assert cfg.potential == ("file", str(pot.resolve()))
    assert cfg.N_list == (25.0, 50.0) and cfg.ell == 0.3 and cfg.points == 64
    assert cfg.delta_list == (0.5, 0.4, 0.3) and cfg.seed == 9
    assert cfg.out == str(tmp_path / "results")
    (tmp_path / "bad.ini").write_text("[mystery]\nx = 1\n")
    with pytest.raises(UsageError):
        load_config(tmp_path / "bad.ini")


def test_config_validation():
    with pytest.raises(ValidationError):
        RunConfig(ell=0.0)
    with pytest.raises(ValidationError):
        RunConfig(potential=("file", "/no/such/file"))
    with pytest.raises(ValidationError):
        RunConfig(kappa=-1.0)
    assert main(["gp", "--out", "/tmp/never", "--kappa", "-2"]) == 3


def test_dumps_round_trips_floats():
    x = [0.1, 1 / 3, 1e-300, 2.0**60, -0.0]
    assert json.loads(dumps({"x": x}))["x"] == x
    assert json.loads(dumps({"y": float("nan")}))["y"] is None


def test_cli_subcommands(tmp_path, capsys):
    assert main(["scatter", "--out", str(tmp_path), "-q"]) == 0
    assert main(["oracle", "--out", str(tmp_path), "--count", "3", "-q"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert main(["--stages", "scatter", "--out", str(tmp_path), "-q"]) == 0
    assert main(["plot", "neumann-asymptotics", "--out", str(tmp_path)]) == 0
    assert main(["plot", "ebog-terms", "--out", str(tmp_path)]) == 2


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("BOGOSPEC_THREADS", "1")
    assert main(["scatter", "--out", str(tmp_path), "-q"]) == 0
    monkeypatch.setenv("BOGOSPEC_THREADS", "many")
    assert main(["scatter", "--out", str(tmp_path), "-q"]) == 2
