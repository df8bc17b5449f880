import os
from dataclasses import replace

import numpy as np
import pytest

from maser_ldp import cli, validation
from maser_ldp.cli import (RunConfig, build_config, config_hash, config_lines,
                           load_config_file, main)

GRID_ARGS = ["grid", "--set", "nex=10", "--set", "alpha_min=1.0",
             "--set", "alpha_max=3.0", "--set", "alpha_steps=3",
             "--set", "s_min=-0.1", "--set", "s_max=0.1", "--set", "s_steps=3"]


def _read(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def test_grid_shape_contract(tmp_path):
    assert main(GRID_ARGS + ["--out", str(tmp_path)]) == 0
    text = _read(tmp_path / "grid.csv")
    lines = text.splitlines()
    assert lines[0] == "alpha,s,lambda,dlambda_ds,gap,dim_used,converged"
    assert len(lines) == 1 + 9 + 1
    assert lines[-1].startswith("# complete=true version=0.1.0 config_hash=")
    for row in lines[1:-1]:
        cells = row.split(",")
        assert len(cells) == 7
        assert cells[6] == "true"
        assert float(cells[4]) > 0  # gap positive on the toy grid
    assert text.endswith("\n") and "\r" not in text


def test_grid_deterministic_including_threads(tmp_path):
    main(GRID_ARGS + ["--out", str(tmp_path / "a")])
    main(GRID_ARGS + ["--out", str(tmp_path / "b")])
    assert _read(tmp_path / "a" / "grid.csv") == _read(tmp_path / "b" / "grid.csv")
    # same data rows under a different thread hint
    main(GRID_ARGS + ["--threads", "3", "--out", str(tmp_path / "c")])
    rows = lambda p: _read(p).splitlines()[1:-1]
    assert rows(tmp_path / "a" / "grid.csv") == rows(tmp_path / "c" / "grid.csv")


def test_golden_grid_regression(tmp_path):
    golden = os.path.join(os.path.dirname(__file__), "data", "golden_grid.csv")
    assert main(GRID_ARGS + ["--out", str(tmp_path)]) == 0
    assert _read(tmp_path / "grid.csv") == _read(golden)


def test_config_round_trip(tmp_path):
    cfg = replace(RunConfig(command="grid"), nex=37.5, tail_tol=3.25e-11,
                  nex_list=(12.0, 13.5), seed=99)
    path = tmp_path / "run.cfg"
    path.write_text("\n".join(config_lines(cfg)) + "\n", encoding="utf-8")
    loaded = load_config_file(path)
    rebuilt = replace(RunConfig(command="grid"), **loaded)
    assert config_lines(rebuilt) == config_lines(cfg)
    assert config_hash(rebuilt) == config_hash(cfg)


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment line\nnex=20\nalpha=2.5\n", encoding="utf-8")
    cfg = build_config(cli._build_parser().parse_args(
        ["potential", "--config", str(path), "--set", "alpha=3.5", "--seed", "4"]))
    assert cfg.nex == 20.0
    assert cfg.alpha == 3.5
    assert cfg.seed == 4


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main(["not-a-command"]) == 1
    assert main(["grid", "--set", "bogus_key=1"]) == 1
    assert main(["grid", "--set", "alpha_steps=0"]) == 1
    assert main(["grid", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_nonconvergence_exit_2_with_partial_output(tmp_path, monkeypatch):
    calls = {"n": 0}
    real = cli.spectral_bound

    def flaky(params, s, rel_tol=1e-10, **kw):
        calls["n"] += 1
        if calls["n"] > 3:
            raise RuntimeError("synthetic non-convergence")
        return real(params, s, rel_tol, **kw)

    monkeypatch.setattr(cli, "spectral_bound", flaky)
    code = main(GRID_ARGS + ["--out", str(tmp_path)])
    assert code == 2
    lines = _read(tmp_path / "grid.csv").splitlines()
    assert lines[-1].startswith("# complete=false")
    assert 1 <= len(lines) - 2 < 9


def test_validate_wiring(tmp_path, monkeypatch, capsys):
    fake = ((1, "always-passes", lambda: (True, "ok")),
            (2, "always-passes-too", lambda: (True, "ok")))
    monkeypatch.setattr(validation, "CHECKS", fake)
    assert main(["validate", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "[ 1] PASS" in out and "[ 2] PASS" in out
    lines = _read(tmp_path / "validate.csv").splitlines()
    assert lines[0] == "criterion,name,passed,detail"
    assert lines[-1].startswith("# complete=true")

    failing = ((1, "boom", lambda: (False, "nope")),)
    monkeypatch.setattr(validation, "CHECKS", failing)
    assert main(["validate", "--out", str(tmp_path / "f")]) == 2
    lines = _read(tmp_path / "f" / "validate.csv").splitlines()
    assert lines[-1].startswith("# complete=false")


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("MASER_LDP_THREADS", "2")
    assert cli._thread_count(RunConfig(command="grid")) == 2
    monkeypatch.setenv("MASER_LDP_THREADS", "junk")
    assert cli._thread_count(RunConfig(command="grid")) == 1
    assert cli._thread_count(replace(RunConfig(command="grid"), threads=4)) == 4


def test_stationary_sweep_shows_both_transitions(tmp_path):
    args = ["stationary", "--set", "nex=150", "--set", "alpha_min=0.5",
            "--set", "alpha_max=12.0", "--set", "alpha_steps=24",
            "--out", str(tmp_path)]
    assert main(args) == 0
    lines = _read(tmp_path / "stationary_mean.csv").splitlines()
    rows = [r.split(",") for r in lines[1:-1]]
    assert len(rows) == 24
    alphas = np.array([float(r[0]) for r in rows])
    means = np.array([float(r[1]) for r in rows])
    # steep rise across the alpha = 1 threshold
    assert means[alphas == 1.5][0] > 100 * means[alphas == 0.5][0]
    # jump-like step near alpha = 6.66
    window = (alphas[1:] >= 6.0) & (alphas[1:] <= 7.5)
    assert np.max(np.diff(means)[window]) > 30
    dist = _read(tmp_path / "stationary_dist.csv").splitlines()
    assert dist[0] == "alpha,n,prob"


def test_trajectory_output(tmp_path):
    args = ["trajectory", "--set", "nex=10", "--set", "alpha=2.0",
            "--set", "t_max=5.0", "--set", "n_traj=2", "--seed", "9",
            "--out", str(tmp_path)]
    assert main(args) == 0
    lines = _read(tmp_path / "trajectory.csv").splitlines()
    assert lines[0] == "traj_id,seed,time,jump_type,level,count"
    rows = [r.split(",") for r in lines[1:-1]]
    assert {r[0] for r in rows} == {"0", "1"}
    counts = [int(r[5]) for r in rows if r[0] == "0"]
    assert counts == sorted(counts)


def test_small_commands_smoke(tmp_path):
    base = ["--set", "nex=10", "--set", "alpha=2.0", "--out", str(tmp_path)]
    assert main(["potential"] + base) == 0
    assert main(["spectrum"] + base) == 0
    assert main(["zoom"] + base + ["--set", "nex_list=10",
                                   "--set", "zoom_steps=3",
                                   "--set", "zoom_halfwidth=1e-4"]) == 0
    assert main(["cumulants"] + base + ["--set", "nex_list=10",
                                        "--set", "alpha_min=1.5",
                                        "--set", "alpha_max=2.5",
                                        "--set", "alpha_steps=2"]) == 0
    assert main(["ldp"] + base + ["--set", "x_steps=5",
                                  "--set", "ldp_s_max=1.0"]) == 0
    for name in ("potential.csv", "potential_limit.csv", "spectrum.csv",
                 "zoom.csv", "cumulants.csv", "ldp.csv"):
        lines = _read(tmp_path / name).splitlines()
        assert lines[-1].startswith("# complete=true")
        assert len(lines) > 2

    spec = [r.split(",") for r in _read(tmp_path / "spectrum.csv").splitlines()[1:-1]]
    eigs = [float(r[1]) for r in spec]
    assert abs(eigs[0]) < 1e-9 and all(b <= a for a, b in zip(eigs, eigs[1:]))

    ldp_rows = [r.split(",") for r in _read(tmp_path / "ldp.csv").splitlines()[1:-1]]
    assert all(r[3] == "true" for r in ldp_rows)
    assert min(float(r[1]) for r in ldp_rows) >= 0.0
