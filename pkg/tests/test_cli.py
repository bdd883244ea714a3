"""CLI contract: exit codes, envelope, determinism, subcommand behavior."""

import csv
import io
import json
import re

import numpy as np
import pytest

from tverberg_lab import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def strip_wall_time(text: str) -> str:
    return re.sub(r'"wall_time_ms": [0-9.]+', '"wall_time_ms": X', text)


@pytest.fixture
def two_cluster_csv(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "clusters.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "label"])
        for p in rng.normal(size=(8, 2)):
            w.writerow([*p, "red"])
        for p in rng.normal(size=(8, 2)) + [8.0, 0.0]:
            w.writerow([*p, "blue"])
    return str(path)


@pytest.fixture
def cloud_csv(tmp_path):
    rng = np.random.default_rng(1)
    path = tmp_path / "cloud.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2"])
        for p in rng.normal(size=(60, 2)):
            w.writerow(list(p))
    return str(path)


class TestBounds:
    def test_cover(self, capsys):
        doc = run_json(capsys, "bounds", "cover", "--n", "6", "--d", "2")
        assert doc["value"] == 0.5 and doc["side"] == "exact"
        for key in ("version", "seed", "config", "wall_time_ms"):
            assert key in doc

    def test_tverberg_upper(self, capsys):
        doc = run_json(capsys, "bounds", "tverberg-upper",
                       "--m", "2", "--n", "3", "--d", "2")
        assert doc["value"] == pytest.approx(0.93848, abs=1e-5)

    def test_urn(self, capsys):
        doc = run_json(capsys, "bounds", "urn", "--m", "3", "--n", "1", "--k", "5")
        assert doc["value"] == pytest.approx(150 / 243, abs=1e-9)

    def test_bad_params_exit_2(self, capsys):
        code, _, err = run(capsys, "bounds", "cover", "--n", "0", "--d", "2")
        assert code == 2 and "input error" in err

    def test_missing_params_exit_2(self, capsys):
        code, _, _ = run(capsys, "bounds", "cover", "--d", "2")
        assert code == 2

    def test_printed_sum_flag(self, capsys):
        doc = run_json(capsys, "bounds", "tverberg-tolerance-lower",
                       "--m", "3", "--n", "10", "--d", "1", "--t", "0",
                       "--printed-sum")
        assert doc["value"] == 1.0  # vacuous as printed
        assert doc["params"]["corrected"] is False

    def test_threshold_size(self, capsys):
        doc = run_json(capsys, "bounds", "threshold-size", "--m", "16",
                       "--epsilon", "0", "--model", "allocation")
        assert doc["value"] == 66


class TestSimulate:
    def test_radon_json(self, capsys):
        doc = run_json(capsys, "simulate", "radon", "--model", "allocation",
                       "--m", "2", "--k", "6", "--d", "2",
                       "--trials", "8000", "--seed", "5")
        est = doc["estimate"]
        assert abs(est["estimate"] - 0.5) < 0.02
        assert doc["model_spec"]["k"] == 6

    def test_csv_format(self, capsys):
        code, out, _ = run(capsys, "simulate", "tverberg", "--m", "2", "--n", "3",
                           "--d", "1", "--trials", "500", "--format", "csv",
                           "--seed", "5")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0][0] == "event_id" and len(rows) == 2

    def test_tolerance_guard_exit_3(self, capsys):
        code, _, err = run(capsys, "simulate", "tverberg_tolerance",
                           "--m", "2", "--n", "20", "--d", "2", "--t", "5",
                           "--trials", "10")
        assert code == 3 and "guard" in err

    def test_determinism_modulo_wall_time(self, capsys):
        argv = ("simulate", "tverberg", "--m", "2", "--n", "4", "--d", "2",
                "--trials", "2000", "--seed", "7")
        _, out1, _ = run(capsys, *argv)
        _, out2, _ = run(capsys, *argv)
        assert strip_wall_time(out1) == strip_wall_time(out2)
        _, out3, _ = run(capsys, *argv[:-1], "8")
        assert strip_wall_time(out1) != strip_wall_time(out3)


class TestDataset:
    def test_mle_pairs_separated(self, capsys, two_cluster_csv):
        doc = run_json(capsys, "dataset", "mle-pairs", "--csv", two_cluster_csv)
        assert doc["labels"] == ["red", "blue"]
        assert doc["matrix"][0][1] is False
        assert doc["all_pairs_mle_exists"] is False

    def test_single_label_warning(self, capsys, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("x1,label\n0.0,a\n1.0,a\n", encoding="utf-8")
        doc = run_json(capsys, "dataset", "mle-pairs", "--csv", str(path))
        assert doc["matrix"] == [] and "warning" in doc

    def test_pertsep0_interleaved(self, capsys, tmp_path):
        path = tmp_path / "inter.csv"
        rows = "\n".join(f"{x}.0,{l}" for x, l in
                         zip((1, 3, 5, 7, 2, 4, 6, 8), "aaaabbbb"))
        path.write_text("x1,label\n" + rows + "\n", encoding="utf-8")
        doc = run_json(capsys, "dataset", "pertsep0", "--csv", str(path))
        assert doc["report"]["pertsep0"] == 0.375

    def test_malformed_csv_exit_2_with_line(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,label\n1.0,a\nnope,b,extra\n", encoding="utf-8")
        code, _, err = run(capsys, "dataset", "pertsep0", "--csv", str(path))
        assert code == 2 and "line 3" in err

    def test_missing_file_exit_2(self, capsys):
        code, _, _ = run(capsys, "dataset", "pertsep0", "--csv", "/nonexistent.csv")
        assert code == 2

    def test_tolerance_check(self, capsys, tmp_path):
        path = tmp_path / "tol.csv"
        rows = ["x1,label"] + [f"{v}.0,a" for v in (-2, -1, 1, 2)] + \
            [f"{v}.0,b" for v in (-3, 0, 3)]
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        doc = run_json(capsys, "dataset", "tolerance", "--csv", str(path))
        assert doc["result"]["tolerance"] == 1

    def test_degnsep_low_dim(self, capsys, tmp_path):
        path = tmp_path / "d1.csv"
        path.write_text("x1,label\n1.0,a\n2.0,b\n3.0,a\n", encoding="utf-8")
        doc = run_json(capsys, "dataset", "degnsep", "--csv", str(path))
        assert doc["method"] == "exact"
        assert doc["value"] == pytest.approx(2 / 3, abs=1e-12)

    def test_guard_exit_3(self, capsys, tmp_path):
        rng = np.random.default_rng(2)
        path = tmp_path / "big.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x1", "x2", "x3", "x4", "x5", "label"])
            for p in rng.normal(size=(12, 5)):
                w.writerow([*p, rng.choice(["a", "b"])])
        code, _, _ = run(capsys, "dataset", "pertsep0", "--csv", str(path))
        assert code == 3


class TestCenterpoint:
    def test_auto_colors_and_success(self, capsys, cloud_csv):
        doc = run_json(capsys, "centerpoint", "--csv", cloud_csv, "--seed", "3")
        assert doc["m"] == 10
        if doc["success"]:
            assert doc["result"]["measured_depth"] >= doc["m"]
            assert len(doc["result"]["point"]) == 2

    def test_explicit_m(self, capsys, cloud_csv):
        doc = run_json(capsys, "centerpoint", "--csv", cloud_csv, "--m", "2",
                       "--seed", "1")
        assert doc["m"] == 2 and doc["success"]


class TestSweep:
    def test_empty_grid_header_only(self, capsys, tmp_path):
        cfg = tmp_path / "empty.json"
        cfg.write_text(json.dumps({"experiment": "sandwich", "grid": [],
                                   "trials": 10, "seed": 1}), encoding="utf-8")
        code, out, _ = run(capsys, "sweep", "--config", str(cfg),
                           "--format", "csv")
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 1 and lines[0].startswith("event_id")

    def test_bundled_config_resolves(self, capsys, tmp_path):
        # bundled name, small override via file copy is avoided: run the
        # sandwich config at its stored trials but a tiny grid via file
        cfg = tmp_path / "mini.json"
        cfg.write_text(json.dumps({"experiment": "sandwich",
                                   "grid": [[2, 3, 1]], "trials": 300,
                                   "seed": 5}), encoding="utf-8")
        code, out, _ = run(capsys, "sweep", "--config", str(cfg),
                           "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[1][rows[0].index("violation")] == "False"

    def test_unknown_config_exit_2(self, capsys):
        code, _, _ = run(capsys, "sweep", "--config", "missing.json")
        assert code == 2

    def test_json_format_envelope(self, capsys, tmp_path):
        cfg = tmp_path / "mini.json"
        cfg.write_text(json.dumps({"experiment": "threshold", "d": 1,
                                   "m_list": [2], "c_list": [1.0],
                                   "trials": 100, "seed": 2}), encoding="utf-8")
        doc = run_json(capsys, "sweep", "--config", str(cfg))
        assert doc["rows"][0]["m"] == 2 and "version" in doc


class TestSeedPlumbing:
    def test_env_var_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV_VAR, "123")
        doc = run_json(capsys, "bounds", "cover", "--n", "4", "--d", "1")
        assert doc["seed"] == 123

    def test_flag_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV_VAR, "123")
        doc = run_json(capsys, "bounds", "cover", "--n", "4", "--d", "1",
                       "--seed", "77")
        assert doc["seed"] == 77

    def test_default_seed(self, capsys, monkeypatch):
        monkeypatch.delenv(cli.SEED_ENV_VAR, raising=False)
        doc = run_json(capsys, "bounds", "cover", "--n", "4", "--d", "1")
        assert doc["seed"] == 0xC0FFEE

    def test_out_file(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        code, stdout, _ = run(capsys, "bounds", "cover", "--n", "4", "--d", "1",
                              "--out", str(out))
        assert code == 0 and stdout == ""
        assert json.loads(out.read_text())["value"] == 0.5
