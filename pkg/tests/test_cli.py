import json

import pytest

from scfv.cli import main

SMALL = """
mesh: {cells: 6}
run: {T_final: 0.03, output_times: [0.0, 0.03]}
collocation: {cells_per_axis: 2}
study:
  levels:
    - {cells_per_axis: 1, cells: 4}
    - {cells_per_axis: 2, cells: 8}
"""


@pytest.fixture
def cfg_file(tmp_path, monkeypatch):
    monkeypatch.setenv("SCFV_OUTPUT_DIR", str(tmp_path / "out"))
    path = tmp_path / "run.yaml"
    path.write_text(SMALL)
    return path


def test_verify_default_passes(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SCFV_OUTPUT_DIR", str(tmp_path))
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") >= 8 and "[FAIL]" not in out


def test_solve_writes_artifacts(cfg_file, tmp_path, capsys):
    assert main(["solve", "--config", str(cfg_file)]) == 0
    out = tmp_path / "out" / "solve"
    steps = json.loads(capsys.readouterr().out)["steps"]
    assert steps == 2  # ceil(0.03 / (0.1 / 6))
    # header plus N_T + 1 rows
    assert (out / "ledger.csv").read_text().count("\n") == steps + 2
    assert (out / "rho_t0p030000.txt").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert "ledger.csv" in manifest["files"]


def test_solve_negative_density_exits_with_validation_error(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SCFV_OUTPUT_DIR", str(tmp_path / "out"))
    path = tmp_path / "neg.yaml"
    path.write_text("mesh: {cells: 6}\ndata: {rho_mean: 0.1, rho_amp: 0.5}\n")
    assert main(["solve", "--config", str(path)]) == 1
    err = capsys.readouterr().err
    assert "admissible" in err
    summary = json.loads(err.strip().splitlines()[-1])
    assert summary["kind"] == "admissibility" and summary["exit_code"] == 1


def test_bad_config_exit_code_and_problem_list(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("gas: {gamma: 0.9}\nscheme: {eps: -2}\n")
    assert main(["ensemble", "--config", str(path)]) == 1
    summary = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert len(summary["problems"]) == 2


def test_solver_failure_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SCFV_OUTPUT_DIR", str(tmp_path / "out"))
    path = tmp_path / "hard.yaml"
    path.write_text("mesh: {cells: 6}\nscheme: {cfl: 5, picard_max_iter: 1}\ndata: {u_amp: 3.0}\n")
    assert main(["solve", "--config", str(path)]) == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["step"] == 1


def test_ensemble_outputs(cfg_file, tmp_path):
    assert main(["ensemble", "--config", str(cfg_file)]) == 0
    out = tmp_path / "out" / "ensemble"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["nu"] == 4 and summary["Lambda"] > 1
    assert (out / "nodes.csv").read_text().count("\n") == 5
    assert (out / "u_var_t0p030000.txt").exists()


def test_study_table(cfg_file, tmp_path, capsys):
    assert main(["study", "--config", str(cfg_file), "--levels", "2"]) == 0
    lines = (tmp_path / "out" / "study" / "study.csv").read_text().splitlines()
    assert lines[0].startswith("level,cells_per_axis")
    assert len(lines) == 3
    assert main(["study", "--config", str(cfg_file), "--levels", "5"]) == 1


def test_output_identical_across_worker_counts(cfg_file, tmp_path, monkeypatch):
    dirs = []
    for w in ("1", "2"):
        monkeypatch.setenv("SCFV_OUTPUT_DIR", str(tmp_path / f"w{w}"))
        assert main(["ensemble", "--config", str(cfg_file), "--workers", w]) == 0
        dirs.append(tmp_path / f"w{w}" / "ensemble")
    files = sorted(p.name for p in dirs[0].iterdir())
    assert files == sorted(p.name for p in dirs[1].iterdir())
    for name in files:
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
