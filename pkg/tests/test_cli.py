import json
import os

import numpy as np
import pytest

from pacbound.cli import main
from pacbound.data import save_dataset
from pacbound.verify import two_cluster_dataset


@pytest.fixture(scope="module")
def data_csv(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "clusters.csv"
    save_dataset(two_cluster_dataset(0, 160, separation=3.0), p, "csv")
    return str(p)


def run(args):
    return main(args)


class TestTrain:
    def test_separable_data_zero_train_error(self, tmp_path):
        p = tmp_path / "separable.csv"
        save_dataset(two_cluster_dataset(0, 160, separation=10.0), p, "csv")
        out = str(tmp_path / "run")
        rc = run(["train", "--data", str(p), "--seed", "1", "--out", out,
                  "--c", "50.0"])
        assert rc == 0
        summary = json.load(open(os.path.join(out, "train_summary.json")))
        assert summary["train"]["err01"] == 0.0
        assert summary["format_version"] == 1
        assert summary["config"]["seed"] == 1
        assert os.path.exists(os.path.join(out, "model.json"))

    def test_rerun_byte_identical(self, data_csv, tmp_path):
        out = str(tmp_path / "same")
        args = ["train", "--data", data_csv, "--seed", "2", "--out", out]
        assert run(args) == 0
        first = (open(os.path.join(out, "model.json"), "rb").read(),
                 open(os.path.join(out, "train_summary.json"), "rb").read())
        assert run(args) == 0
        second = (open(os.path.join(out, "model.json"), "rb").read(),
                  open(os.path.join(out, "train_summary.json"), "rb").read())
        assert first == second

    def test_missing_file_exits_2(self, tmp_path, capsys):
        rc = run(["train", "--data", "/nonexistent/foo.csv", "--out", str(tmp_path)])
        assert rc == 2
        assert "/nonexistent/foo.csv" in capsys.readouterr().err

    def test_env_seed_override(self, data_csv, tmp_path, monkeypatch):
        out1, out2 = str(tmp_path / "x"), str(tmp_path / "y")
        monkeypatch.setenv("PACBOUND_SEED", "9")
        assert run(["train", "--data", data_csv, "--seed", "1", "--out", out1]) == 0
        monkeypatch.delenv("PACBOUND_SEED")
        assert run(["train", "--data", data_csv, "--seed", "9", "--out", out2]) == 0
        a = json.load(open(os.path.join(out1, "train_summary.json")))
        b = json.load(open(os.path.join(out2, "train_summary.json")))
        assert a["config"]["seed"] == 9
        assert a["train"] == b["train"]


@pytest.fixture(scope="module")
def trained(data_csv, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("trained"))
    assert run(["train", "--data", data_csv, "--seed", "3", "--out", out]) == 0
    return out


class TestCertify:
    def test_reports_and_delta_convention(self, data_csv, trained, tmp_path):
        out = str(tmp_path / "cert")
        rc = run(["certify", "--data", data_csv, "--seed", "3", "--model",
                  os.path.join(trained, "model.json"), "--out", out,
                  "--tau", "15", "--delta", "0.05"])
        assert rc == 0
        doc = json.load(open(os.path.join(out, "certificates.json")))
        pew = doc["bounds"]["PEW"]
        assert pew["inputs"]["delta_before_tau_adjustment"] == 0.025
        assert pew["confidence"] == pytest.approx(0.95)
        assert doc["bounds"]["PO"]["delta_nominal"] == 0.05
        for name in ("PEW", "PO"):
            assert doc["bounds"][name]["risk_bound"] >= doc["rand_train_risk"][name] - 1e-12
        assert doc["bounds"]["LIU"]["confidence"] == pytest.approx(0.95)
        assert 0 < doc["union_penalty_kl"] < 1.0

    def test_missing_model_is_usage_error(self, data_csv, tmp_path):
        rc = run(["certify", "--data", data_csv, "--seed", "3", "--model",
                  "/nonexistent/model.json", "--out", str(tmp_path)])
        assert rc == 2


class TestGrid:
    def test_small_grid_row_count(self, data_csv, tmp_path):
        out = str(tmp_path / "g")
        rc = run(["grid", "--data", data_csv, "--seed", "1", "--out", out,
                  "--grid", "3x3", "--tau", "11"])
        assert rc == 0
        lines = open(os.path.join(out, "grid.csv")).read().strip().split("\n")
        assert len(lines) == 10  # header + 9 cells
        doc = json.load(open(os.path.join(out, "grid.json")))
        assert len(doc["cells"]) == 9

    def test_default_grid_is_7x7(self, tmp_path):
        # tiny dataset keeps the 49 fits fast
        p = tmp_path / "small.csv"
        save_dataset(two_cluster_dataset(1, 60, separation=2.0), p, "csv")
        out = str(tmp_path / "g7")
        rc = run(["grid", "--data", str(p), "--seed", "0", "--out", out,
                  "--tau", "11"])
        assert rc == 0
        lines = open(os.path.join(out, "grid.csv")).read().strip().split("\n")
        assert len(lines) == 50

    def test_bad_grid_spec_exits_2(self, data_csv, tmp_path):
        assert run(["grid", "--data", data_csv, "--grid", "3by3",
                    "--out", str(tmp_path)]) == 2


class TestVerify:
    def test_insufficient_trials_is_usage_error(self, tmp_path, capsys):
        rc = run(["verify", "--trials", "10", "--out", str(tmp_path)])
        assert rc == 2
        assert "trials" in capsys.readouterr().err

    def test_small_verify_run(self, tmp_path):
        out = str(tmp_path / "v")
        rc = run(["verify", "--trials", "200", "--seed", "0", "--out", out])
        assert rc == 0
        doc = json.load(open(os.path.join(out, "verify.json")))
        assert len(doc["checks"]) == 3
        assert all(c["pass"] for c in doc["checks"])
        assert doc["config"]["seed"] == 0


class TestInvertKl:
    def test_prints_value(self, capsys):
        assert run(["invert-kl", "--p", "0.0", "--budget", "0.6931471805599453"]) == 0
        out = capsys.readouterr().out.strip()
        assert abs(float(out) - 0.5) < 1e-10
