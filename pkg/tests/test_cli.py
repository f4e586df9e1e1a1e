import csv
import json

import numpy as np
import pytest

import toepcov as tc
from toepcov.harness import io
from toepcov.harness.cli import main
from toepcov.harness.config import ExperimentConfig, write_config


@pytest.fixture
def files(tmp_path, clutter):
    x = tc.draw_snapshots(clutter, 85, (7, 0))
    io.write_complex_matrix(x.data, tmp_path / "snap.txt")
    io.write_matrix(clutter, tmp_path / "truth.txt")
    return tmp_path


def test_model_matches_library(tmp_path):
    assert main(["model", "--scenario", "clutter", "--spacing-ratio", "0.45",
                 "--out", str(tmp_path / "m.txt")]) == 0
    expect = tc.clutter_covariance(tc.ClutterScenario(spacing_ratio=0.45))
    np.testing.assert_array_equal(io.read_matrix(tmp_path / "m.txt"), expect)


def test_model_to_stdout(capsys):
    assert main(["model", "--scenario", "identity", "--n", "3"]) == 0
    assert np.array_equal(io.parse_matrix(capsys.readouterr().out), np.eye(3))


def test_simulate(tmp_path, capsys):
    cfg = ExperimentConfig(n=5, t=25, trials=4, chain="ra+loading", spiked_noise_dim=2,
                           reference_trials=50)
    write_config(cfg, tmp_path / "c.json")
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(tmp_path / "c.json"), "--trials", "3",
                 "--out", str(out)]) == 0
    assert "negative lambda_min fraction" in capsys.readouterr().out
    summary = json.loads((out / "summary.json").read_text())
    assert summary["trials"] == 3
    with open(out / "trials.csv") as fh:
        assert len(list(csv.reader(fh))) == 4
    assert (out / "histograms" / "hist_log_lr.csv").exists()


@pytest.mark.parametrize("chain", ["ra", "me", "me+replace(true)"])
def test_estimate(files, chain):
    out = files / "est.txt"
    argv = ["estimate", str(files / "snap.txt"), "--chain", chain, "--out", str(out),
            "--truth", str(files / "truth.txt")]
    assert main(argv) == 0
    est = io.read_matrix(out)
    assert est.shape == (17, 17)


def test_estimate_sample_matrix_needs_t(files, clutter):
    io.write_matrix(clutter, files / "r.txt")
    with pytest.raises(SystemExit):
        main(["estimate", str(files / "r.txt")])
    assert main(["estimate", str(files / "r.txt"), "--t", "85", "--chain", "ra",
                 "--out", str(files / "o.txt")]) == 0
    np.testing.assert_array_equal(io.read_matrix(files / "o.txt"), clutter)


def test_reconstruct(files, clutter):
    assert main(["reconstruct", str(files / "truth.txt"), "--out", str(files / "rec.txt")]) == 0
    rec = io.read_matrix(files / "rec.txt")
    assert np.max(np.abs(rec - clutter)) <= 1e-6 * np.max(np.abs(clutter))


def test_toiep(files, capsys):
    assert main(["toiep", str(files / "snap.txt"), "--iterations", "30", "--noise-dim", "6",
                 "--out", str(files / "h.csv"), "--matrix-out", str(files / "x.txt"),
                 "--truth", str(files / "truth.txt")]) == 0
    assert "eigen_distance" in capsys.readouterr().out
    with open(files / "h.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and rows[0]["spectral_norm_error"]
    assert io.read_matrix(files / "x.txt").shape == (17, 17)


def test_lr(files, capsys):
    assert main(["lr", str(files / "truth.txt"), str(files / "snap.txt"),
                 "--truth", str(files / "truth.txt")]) == 0
    out = capsys.readouterr().out
    assert "regular: log_lr=" in out and "spiked:" in out
    assert "spectral_norm_error: 0" in out


def test_refpdf(tmp_path, capsys):
    assert main(["refpdf", "--n", "4", "--t", "20", "--trials", "30",
                 "--cache-dir", str(tmp_path / "cache"), "--out", str(tmp_path / "r.txt")]) == 0
    assert "median_lr" in capsys.readouterr().out
    assert tc.ReferencePdf.load(tmp_path / "r.txt").trials == 30
    assert len(list((tmp_path / "cache").iterdir())) == 1


def test_errors_return_2(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("hermitian_matrix n=3\n1 0\n")
    assert main(["reconstruct", str(bad)]) == 2
    assert "field 'n'" in capsys.readouterr().err
    assert main(["reconstruct", str(tmp_path / "missing.txt")]) == 2


def test_verbose_after_subcommand(files):
    assert main(["reconstruct", str(files / "truth.txt"), "-v",
                 "--out", str(files / "r.txt")]) == 0
