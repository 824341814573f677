from __future__ import annotations

import pytest
from click.testing import CliRunner

from main import cli

TINY_RUN = """
classes = 3
dim = 6
n_per_class = 20
n_test_per_class = 10
ood_count = 30
ood_test_count = 20
hidden_dims = 12, 8
epochs = 2
warmup_epochs = 2
id_batch = 16
ood_batch = 16
seed = 4
"""


@pytest.fixture
def runner(monkeypatch) -> CliRunner:
    monkeypatch.delenv("NCOOD_OUTPUT_DIR", raising=False)
    return CliRunner()


@pytest.fixture
def run_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(TINY_RUN + f"data_dir = {tmp_path / 'data'}\noutput_dir = {tmp_path / 'runs'}\n", encoding="utf-8")
    return path


def test_gen_data_writes_four_files(runner, run_file, tmp_path):
    result = runner.invoke(cli, ["gen-data", "--config", str(run_file)])
    assert result.exit_code == 0, result.output
    names = sorted(p.name for p in (tmp_path / "data").iterdir())
    assert names == ["id_test.csv", "id_train.csv", "ood_aux.csv", "ood_test.csv"]


def test_gen_data_is_reproducible(runner, run_file, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for target in (first, second):
        result = runner.invoke(cli, ["gen-data", "--config", str(run_file), "--out-dir", str(target)])
        assert result.exit_code == 0, result.output
    for name in ("id_train.csv", "id_test.csv", "ood_aux.csv", "ood_test.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_feature_width_not_above_classes_exits_2(runner, tmp_path):
    result = runner.invoke(cli, ["gen-data", "-C", "4", "-d", "4", "--out-dir", str(tmp_path)])
    assert result.exit_code == 2


def test_unknown_config_key_exits_2(runner, tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("epochs = 3\nlearning_rate = 1\n", encoding="utf-8")
    result = runner.invoke(cli, ["train", "--config", str(path)])
    assert result.exit_code == 2


def test_missing_data_exits_3(runner, run_file):
    result = runner.invoke(cli, ["train", "--config", str(run_file)])
    assert result.exit_code == 3


def test_gradcheck_passes(runner, tmp_path):
    result = runner.invoke(cli, ["gradcheck", "--out-dir", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "FAIL" not in result.output
    assert (tmp_path / "gradcheck.csv").is_file()


def test_train_then_evaluate(runner, run_file, tmp_path):
    config = ["--config", str(run_file)]
    assert runner.invoke(cli, ["gen-data", *config]).exit_code == 0

    trained = runner.invoke(cli, ["train", *config])
    assert trained.exit_code == 0, trained.output
    runs = tmp_path / "runs"
    assert (runs / "checkpoint.bin").is_file()
    assert len((runs / "train_log.csv").read_text(encoding="utf-8").splitlines()) == 3

    evaluated = runner.invoke(cli, ["eval", *config])
    assert evaluated.exit_code == 0, evaluated.output
    assert "msp" in evaluated.output and "combined" in evaluated.output

    separated = runner.invoke(cli, ["separation", *config])
    assert separated.exit_code == 0, separated.output
    assert "reconstruction_error" in separated.output

    projected = runner.invoke(cli, ["project", *config, "--dims", "3"])
    assert projected.exit_code == 0, projected.output
    assert (runs / "projection_3d.csv").is_file()


def test_eval_without_checkpoint_exits_3(runner, run_file, tmp_path):
    assert runner.invoke(cli, ["gen-data", "--config", str(run_file)]).exit_code == 0
    result = runner.invoke(cli, ["eval", "--config", str(run_file), "--checkpoint", str(tmp_path / "none.bin")])
    assert result.exit_code == 3


def test_shared_auxiliary_and_test_mode_exits_2(runner, run_file):
    result = runner.invoke(
        cli, ["gen-data", "--config", str(run_file), "--ood-mode", "uniform-shell", "--test-mode", "uniform-shell"]
    )
    assert result.exit_code == 2
    assert "different modes" in result.output


def test_identical_runs_write_identical_files(runner, run_file, tmp_path):
    config = ["--config", str(run_file)]
    assert runner.invoke(cli, ["gen-data", *config]).exit_code == 0
    first, second = tmp_path / "first", tmp_path / "second"
    for target in (first, second):
        result = runner.invoke(cli, ["train", *config, "--out-dir", str(target)])
        assert result.exit_code == 0, result.output
    for name in ("train_log.csv", "checkpoint.bin", "warmup_log.csv", "warmup_checkpoint.bin"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_eval_averages_over_test_sets(runner, tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        TINY_RUN
        + "extra_test_modes = near-id, shifted-gaussian\n"
        + f"data_dir = {tmp_path / 'data'}\noutput_dir = {tmp_path / 'runs'}\n",
        encoding="utf-8",
    )
    config = ["--config", str(path)]
    generated = runner.invoke(cli, ["gen-data", *config])
    assert generated.exit_code == 0, generated.output
    assert (tmp_path / "data" / "ood_test_near-id.csv").is_file()
    assert (tmp_path / "data" / "ood_test_shifted-gaussian.csv").is_file()
    assert runner.invoke(cli, ["train", *config]).exit_code == 0

    evaluated = runner.invoke(cli, ["eval", *config])
    assert evaluated.exit_code == 0, evaluated.output
    lines = (tmp_path / "runs" / "detection.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "score_kind,dataset,fpr95,auroc,threshold"
    datasets = [line.split(",")[1] for line in lines[1:]]
    assert datasets.count("average") == 2
    assert len(datasets) == 3 * 2 + 2

    single = runner.invoke(cli, ["eval", *config, "--ood-test", str(tmp_path / "data" / "ood_test.csv")])
    assert single.exit_code == 0, single.output
    assert "average" not in single.output
