# tests/test_cli.py
import json

import numpy as np
import pytest

from app.cli.app import cli_app
from app.cli.commands.training import correlation_table
from app.const.enum import Metric, SamplingVariant
from app.core.benchmark import make_blobs_corpus
from app.core.noise import uniform_noise
from app.core.training import CorrelationReport
from app.core.utils import child_rng
from app.dto.rows import CorrelationRow
from app.storage.corpus_files import write_tsv_corpus


def _invoke(runner, *args):
    return runner.invoke(cli_app, [str(a) for a in args])


@pytest.fixture
def pairs_file(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("0\t0\n0\t1\n0\t1\n1\t1\n", encoding="utf-8")
    return path


@pytest.fixture
def blobs_files(tmp_path):
    m = uniform_noise(3, 0.3)
    train = write_tsv_corpus(make_blobs_corpus(300, m, child_rng(5, 0)), tmp_path / "train.tsv")
    test = write_tsv_corpus(make_blobs_corpus(90, m, child_rng(5, 1)), tmp_path / "test.tsv")
    return train, test


# --- Noise and estimation commands ---

def test_gen_noise_writes_matrix(runner, tmp_path):
    result = _invoke(runner, "--out-dir", tmp_path, "gen-noise", "--kind", "uniform", "--k", 3, "--epsilon", 0.3)
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "matrix.json").read_text())
    assert payload["k"] == 3
    np.testing.assert_allclose(np.diag(payload["rows"]), 0.7)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["subcommand"] == "gen-noise"


def test_gen_noise_rejects_bad_epsilon(runner, tmp_path):
    result = _invoke(runner, "--out-dir", tmp_path, "gen-noise", "--k", 3, "--epsilon", 1.5)
    assert result.exit_code == 2


def test_gen_noise_needs_epsilon(runner, tmp_path):
    result = _invoke(runner, "--out-dir", tmp_path, "gen-noise", "--k", 3)
    assert result.exit_code == 2
    assert "--epsilon" in result.output


def test_gen_noise_single_flip(runner, tmp_path):
    result = _invoke(
        runner, "--out-dir", tmp_path, "gen-noise", "--kind", "single-flip", "--k", 3, "--epsilon", 0.3, "--flip", "0:2",
    )
    assert result.exit_code == 0, result.output
    rows = json.loads((tmp_path / "matrix.json").read_text())["rows"]
    np.testing.assert_allclose(rows[0], [0.7, 0.0, 0.3])


def test_manifest_rerun_is_byte_identical(runner, tmp_path):
    assert _invoke(runner, "--out-dir", tmp_path, "gen-noise", "--k", 4, "--epsilon", 0.2).exit_code == 0
    first = (tmp_path / "matrix.json").read_bytes()
    (tmp_path / "matrix.json").unlink()
    result = _invoke(runner, "--manifest", tmp_path / "manifest.json", "gen-noise")
    assert result.exit_code == 0, result.output
    assert (tmp_path / "matrix.json").read_bytes() == first


def test_manifest_for_other_command_is_rejected(runner, tmp_path, pairs_file):
    assert _invoke(runner, "--out-dir", tmp_path, "gen-noise", "--k", 4, "--epsilon", 0.2).exit_code == 0
    result = _invoke(runner, "--manifest", tmp_path / "manifest.json", "estimate", "--pairs", pairs_file)
    assert result.exit_code == 2


def test_corrupt_needs_seed(runner, tmp_path):
    labels = tmp_path / "labels.txt"
    labels.write_text("0\n1\n2\n", encoding="utf-8")
    args = ("--out-dir", tmp_path / "out", "corrupt", "--labels", labels, "--k", 3, "--epsilon", 0.5)
    assert _invoke(runner, *args).exit_code == 2
    result = _invoke(runner, "--seed", 3, *args)
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "out" / "pairs.tsv").read_text().splitlines()
    assert lines[0] == "clean\tnoisy"
    assert [line.split("\t")[0] for line in lines[1:]] == ["0", "1", "2"]


def test_estimate_four_pairs(runner, tmp_path, pairs_file):
    result = _invoke(runner, "--out-dir", tmp_path / "out", "estimate", "--pairs", pairs_file)
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "out" / "estimate.json").read_text())
    np.testing.assert_allclose(payload["rows"], [[1 / 3, 2 / 3], [0.0, 1.0]])
    assert payload["empty_rows"] == []
    assert payload["counts"] == [[1, 2], [0, 1]]


def test_estimate_empty_file_flags_every_row(runner, tmp_path):
    empty = tmp_path / "empty.tsv"
    empty.write_text("", encoding="utf-8")
    result = _invoke(runner, "--out-dir", tmp_path / "out", "estimate", "--pairs", empty, "--k", 2)
    assert result.exit_code == 0, result.output
    assert json.loads((tmp_path / "out" / "estimate.json").read_text())["empty_rows"] == [0, 1]


def test_estimate_label_out_of_range(runner, tmp_path, pairs_file):
    result = _invoke(runner, "--out-dir", tmp_path, "estimate", "--pairs", pairs_file, "--k", 1)
    assert result.exit_code == 2
    assert "line 2" in result.output


def test_estimate_missing_file(runner, tmp_path):
    result = _invoke(runner, "--out-dir", tmp_path, "estimate", "--pairs", tmp_path / "missing.tsv")
    assert result.exit_code == 2


def test_expected_error_identity_is_zero(runner, tmp_path):
    result = _invoke(runner, "--out-dir", tmp_path, "expected-error", "--k", 3, "--epsilon", 0.0, "--n", 5)
    assert result.exit_code == 0, result.output
    assert (tmp_path / "expected_error.csv").read_text() == "grid_value,expected_se\n5.0,0.0\n"
    assert json.loads((tmp_path / "expected_error.json").read_text())["total"] == 0.0


def test_expected_error_grid(runner, tmp_path):
    result = _invoke(
        runner, "--out-dir", tmp_path, "expected-error", "--k", 10, "--epsilon", 0.5, "--grid", "10,20",
    )
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "expected_error.csv").read_text().splitlines()
    assert len(lines) == 3
    assert float(lines[1].split(",")[1]) == pytest.approx(13 / 18)


# --- Simulation commands ---

SIMULATE_ARGS = ("simulate", "--k", 4, "--epsilon", 0.4, "--n", 6, "--repetitions", 40)


def test_simulate_needs_seed(runner, tmp_path):
    result = _invoke(runner, "--out-dir", tmp_path, *SIMULATE_ARGS)
    assert result.exit_code == 2
    assert "seed" in result.output


@pytest.mark.parametrize("files, args", [
    (("simulation.json", "repetitions.csv"), SIMULATE_ARGS),
    (("sweep.csv",), ("sweep", "--k", 3, "--epsilon", 0.3, "--grid", "2,4,8", "--repetitions", 25)),
])
def test_outputs_do_not_depend_on_threads(runner, tmp_path, files, args):
    for threads in (1, 8):
        out = tmp_path / f"t{threads}"
        result = _invoke(runner, "--seed", 77, "--threads", threads, "--out-dir", out, *args)
        assert result.exit_code == 0, result.output
    for name in files:
        assert (tmp_path / "t1" / name).read_bytes() == (tmp_path / "t8" / name).read_bytes()


def test_simulate_reports_theory(runner, tmp_path):
    result = _invoke(runner, "--seed", 1, "--out-dir", tmp_path, *SIMULATE_ARGS)
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "simulation.json").read_text())
    assert payload["repetitions"] == 40
    assert payload["theory_se"] > 0
    assert "per_repetition_se" not in payload
    assert len((tmp_path / "repetitions.csv").read_text().splitlines()) == 41


def test_simulate_from_corpus(runner, tmp_path, ner_tsv):
    result = _invoke(
        runner, "--seed", 2, "--out-dir", tmp_path, "simulate", "--corpus", ner_tsv, "--n", 2, "--repetitions", 5,
    )
    assert result.exit_code == 0, result.output
    assert json.loads((tmp_path / "simulation.json").read_text())["ground_truth_is_approximation"] is True


def test_sweep_needs_grid(runner, tmp_path):
    result = _invoke(runner, "--seed", 1, "--out-dir", tmp_path, "sweep", "--k", 3, "--epsilon", 0.3)
    assert result.exit_code == 2


def test_noise_level_sweep(runner, tmp_path):
    result = _invoke(
        runner, "--seed", 4, "--out-dir", tmp_path, "sweep", "--k", 3, "--axis", "noise-level",
        "--grid", "0.0,0.5", "--n", 5, "--repetitions", 10,
    )
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "grid_value,theory_se,empirical_mean_se,empirical_std_se,empty_row_rate"
    assert lines[1].startswith("0.0,0.0,0.0,")


# --- Corpus and training commands ---

def test_quality(runner, tmp_path, ner_tsv):
    result = _invoke(runner, "--out-dir", tmp_path, "quality", "--corpus", ner_tsv, "--non-entity", "O")
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "quality.json").read_text())
    assert payload["f1"] == pytest.approx(2 / 3)


def test_quality_unknown_label_set(runner, tmp_path, ner_tsv):
    result = _invoke(runner, "--out-dir", tmp_path, "quality", "--corpus", ner_tsv, "--label-set", "gazetteer")
    assert result.exit_code == 2


def test_train_then_eval(runner, tmp_path, blobs_files):
    train_file, test_file = blobs_files
    out = tmp_path / "run"
    result = _invoke(
        runner, "--seed", 9, "--out-dir", out, "train", "--corpus", train_file, "--dev", test_file,
        "--clean-per-class", 10, "--epochs", 3,
    )
    assert result.exit_code == 0, result.output
    assert (out / "estimate.json").exists()
    assert len((out / "trace.csv").read_text().splitlines()) == 4
    assert json.loads((out / "model.json").read_text())["k"] == 3

    result = _invoke(runner, "--seed", 9, "--out-dir", tmp_path / "eval", "eval", "--model", out / "model.json", "--test", test_file)
    assert result.exit_code == 0, result.output
    metrics = json.loads((tmp_path / "eval" / "metrics.json").read_text())
    assert 0.0 <= metrics["accuracy"] <= 1.0
    assert len(metrics["per_class_f1"]) == 3


def test_train_rerun_from_manifest(runner, tmp_path, blobs_files):
    train_file, _ = blobs_files
    out = tmp_path / "run"
    args = ("train", "--corpus", train_file, "--clean-per-class", 5, "--epochs", 2, "--arm", "naive")
    assert _invoke(runner, "--seed", 3, "--out-dir", out, *args).exit_code == 0
    first = (out / "model.json").read_bytes()
    assert not (out / "estimate.json").exists()
    assert _invoke(runner, "--manifest", out / "manifest.json", "train").exit_code == 0
    assert (out / "model.json").read_bytes() == first


def test_train_needs_features(runner, tmp_path, ner_tsv):
    result = _invoke(runner, "--seed", 1, "--out-dir", tmp_path, "train", "--corpus", ner_tsv, "--clean-per-class", 1)
    assert result.exit_code == 2


def test_correlate_on_benchmark(runner, tmp_path):
    result = _invoke(
        runner, "--seed", 5, "--out-dir", tmp_path, "correlate", "--grid", "2,4", "--repetitions", 2, "--epochs", 1,
    )
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "correlation.csv").read_text().splitlines()
    assert lines[0] == "grid,expected_se,mean_metric,std_metric"
    assert len(lines) == 4
    report = json.loads((tmp_path / "correlation.json").read_text())
    assert report["scheme"] == "fixed"
    assert "rows" not in report
    pearson = "" if report["pearson"] is None else repr(report["pearson"])
    assert lines[-1] == f"pearson,{pearson},,"


def test_correlation_table_ends_with_pearson_row():
    row = CorrelationRow(grid=5.0, expected_se=0.1, mean_metric=0.8, std_metric=0.01)
    report = CorrelationReport(metric=Metric.ACCURACY, scheme=SamplingVariant.FIXED, rows=[row], pearson=None)
    assert correlation_table(report) == [[5.0, 0.1, 0.8, 0.01], ["pearson", None, None, None]]
