import csv
import hashlib
import json

import pytest

from ditherdac import cli
from ditherdac.harness import ExperimentConfig


def run(tmp_path, *argv):
    return cli.main([*argv, "--output-dir", str(tmp_path)])


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_parse_config_defaults():
    assert cli.parse_config() == ExperimentConfig()


def test_flags_override_file(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("bits = 5\nsamples = 200\n[scene]\nantennas = 16\n"
                    "[dither]\nfamily = 'gaussian'\nparam = 0.5\n")
    cfg = cli.parse_config(str(path), {"bits": 7, "scene": {"antennas": None}})
    assert cfg.bits == 7
    assert cfg.samples == 200
    assert cfg.scene.antennas == 16
    assert cfg.dither.family.value == "gaussian" and cfg.dither.param == 0.5


@pytest.mark.parametrize("text", ["bogus = 1\n", "[scene]\nfoo = 2\n", "samples = 0\n",
                                  "bits = 'six'\n", "scene = 3\n", "not toml ===\n"])
def test_bad_config(tmp_path, text):
    path = tmp_path / "c.toml"
    path.write_text(text)
    with pytest.raises(cli.ConfigError):
        cli.parse_config(str(path))
    assert run(tmp_path, "validate", "--config", str(path)) == cli.EXIT_USAGE


def test_grid_parsing():
    assert cli._parse_grid("-90:90:3") == [float(v) for v in range(-90, 91, 3)]
    assert cli._parse_grid("2:8:1", int) == [2, 3, 4, 5, 6, 7, 8]
    assert cli._parse_grid("1,10,100", int) == [1, 10, 100]
    with pytest.raises(cli.ConfigError):
        cli._parse_grid("0:1:0")


def test_angle_sweep_outputs(tmp_path):
    code = run(tmp_path, "angle-sweep", "--antennas", "8", "--samples", "200", "--workers", "2")
    assert code == cli.EXIT_OK
    table = (tmp_path / "angle_sweep.csv").read_text()
    rows = read_rows(tmp_path / "angle_sweep.csv")
    assert len(rows) == 61
    assert set(cli.SWEEP_COLUMNS) <= set(rows[0])
    manifest = json.loads((tmp_path / "angle_sweep.manifest.json").read_text())
    assert manifest["outputs"]["table_sha256"] == hashlib.sha256(table.encode()).hexdigest()
    assert manifest["config"]["samples"] == 200
    assert manifest["workers"] == 2


def test_resolution_sweep_outputs(tmp_path):
    code = run(tmp_path, "resolution-sweep", "--m-grid", "1,4", "--n-grid", "3:5:1",
               "--samples", "300")
    assert code == cli.EXIT_OK
    rows = read_rows(tmp_path / "resolution_sweep.csv")
    assert [(int(r["antennas"]), int(r["bits"])) for r in rows] == [
        (m, n) for m in (1, 4) for n in (3, 4, 5)]


def test_transfer_function_two_bits(tmp_path):
    assert run(tmp_path, "transfer-function", "--bits", "2", "--points", "9") == cli.EXIT_OK
    rows = read_rows(tmp_path / "transfer_function.csv")
    assert len(rows) == 9
    assert [float(r["staircase"]) for r in rows][:3] == [-1.5, -1.5, -1.5]
    for r in rows:
        closed = float(r["transfer_closed_form"])
        if closed == closed:  # NaN outside the linear range
            assert closed == pytest.approx(float(r["x"]), abs=1e-12)
            assert float(r["transfer_numeric"]) == pytest.approx(closed, abs=1e-9)


def test_noise_stats(tmp_path):
    assert run(tmp_path, "noise-stats", "--samples", "20000") == cli.EXIT_OK
    row = read_rows(tmp_path / "noise_stats.csv")[0]
    assert float(row["variance_over_step2"]) == pytest.approx(1 / 3, rel=0.03)
    assert float(row["variance_ratio_db"]) == pytest.approx(3.01, abs=0.2)


def test_validate_exit_codes(tmp_path):
    assert run(tmp_path, "validate") == cli.EXIT_OK
    rows = read_rows(tmp_path / "validate.csv")
    assert all(r["passed"] == "1" for r in rows)
    assert run(tmp_path, "validate", "--shared-dither") == cli.EXIT_FAILED


@pytest.mark.parametrize("argv", [["validate", "--samples", "0"], ["validate", "--workers", "0"],
                                  ["transfer-function", "--step", "-1"],
                                  ["angle-sweep", "--angles", "120"]])
def test_usage_errors(tmp_path, argv):
    assert run(tmp_path, *argv) == cli.EXIT_USAGE


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "out"))
    monkeypatch.chdir(tmp_path)
    assert cli.main(["transfer-function", "--points", "5"]) == cli.EXIT_OK
    assert (tmp_path / "out" / "transfer_function.csv").exists()


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["transfer-function", "--points", "5", "--output-dir",
                     str(blocker / "sub")]) == cli.EXIT_USAGE
