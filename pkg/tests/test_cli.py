import json

import pytest

from bvm.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main, parse_pairs


def test_parse_pairs():
    assert parse_pairs("200:8000000, 400:6.4e7") == [(200, 8_000_000), (400, 64_000_000)]


def test_bounds_stdout(tmp_path, capsys):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"delta": 0.1, "x": 5, "p": 1}))
    assert main(["bounds", "--config", str(path)]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["mean_bound"] == pytest.approx(0.5078, abs=1e-4)


def test_bounds_out_file(tmp_path):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"delta": 0.1, "x": 5, "p": 1}))
    assert main(["bounds", "--config", str(path), "--out", str(tmp_path / "o.json")]) == EXIT_OK
    assert "mean_bound" in json.loads((tmp_path / "o.json").read_text())


def test_bounds_missing_field(tmp_path, capsys):
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"delta": 0.1, "p": 1}))
    assert main(["bounds", "--config", str(path)]) == EXIT_CONFIG
    assert "field: x" in capsys.readouterr().err


def test_numerical_failure_exit(tmp_path, capsys):
    # omega this large makes the radius condition unsolvable
    path = tmp_path / "b.json"
    path.write_text(json.dumps({"nu0": 1, "omega": 1e6, "g": 1, "b": 0.5, "p_star": 2, "delta_coeff": 0,
                                "trace_B": 2, "lambda_B": 1, "x": 1, "p": 1, "r0": 1, "solve_outer": True}))
    assert main(["bounds", "--config", str(path)]) == EXIT_NUMERIC
    assert "numerical failure" in capsys.readouterr().err


def test_argparse_error_exit():
    with pytest.raises(SystemExit) as info:
        main(["critdim", "--regime", "bogus"])
    assert info.value.code == 2


def test_config_error_exit(capsys):
    assert main(["critdim", "--p", "10", "--reps", "1", "--draws", "10"]) == EXIT_CONFIG


def test_critdim_run(tmp_path, capsys):
    code = main(["critdim", "--p", "20", "--regime", "unit", "--reps", "10", "--draws", "100",
                 "--seed", "1", "--out", str(tmp_path), "--threads", "2", "--keep-draws"])
    assert code == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert "provenance" not in printed
    assert printed["draw_count"] == 1000
    assert {p.name for p in tmp_path.iterdir()} == {"summary.json", "hist.csv", "draws.csv"}


def test_sweep_run(capsys):
    assert main(["sweep", "--pairs", "20:8000,40:64000", "--reps", "10", "--draws", "100"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert [r["p"] for r in out["pairs"]] == [20, 40]


def test_glm_check_run(capsys):
    assert main(["glm-check", "--family", "gaussian", "--n", "100", "--sampler-draws", "0"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["diagnostic_oracle"]["cov_err"] <= 1e-8


def test_console_script_installed():
    from importlib.metadata import entry_points
    names = {ep.name: ep.value for ep in entry_points(group="console_scripts")}
    assert names.get("bvm") == "bvm.cli:main"
