from __future__ import annotations

from pathlib import Path

import pytest

from app.config.env_config import Config
from app.config.run_config import load_run_config, parse_run_config
from app.exceptions import ConfigurationError
from app.types.train_types import LossVariant


def test_defaults():
    config = load_run_config(None)
    assert config.epochs == 50
    assert config.lam == 0.5
    assert config.hidden_dims == [64, 16]
    assert config.aux_mode is not config.test_mode
    assert config.test_set_paths() == [Path("data") / "ood_test.csv"]
    assert config.to_train_config().switch_epoch == 25


def test_parse_file_with_comments_and_lambda():
    text = """
    # tiny run
    epochs = 6
    lambda = 0.25   # OE weight
    loss_variant = v3
    hidden_dims = 12, 8
    """
    config = parse_run_config(text)
    assert config.epochs == 6
    assert config.lam == 0.25
    assert config.loss_variant is LossVariant.V3
    assert config.hidden_dims == [12, 8]
    assert config.layer_dims(5) == [5, 12, 8]
    assert config.to_train_config().weights.lam == 0.25


def test_overrides_win_and_none_is_ignored():
    config = parse_run_config("epochs = 6\nseed = 1\n", epochs=9, seed=None)
    assert (config.epochs, config.seed) == (9, 1)


@pytest.mark.parametrize(
    "text, match",
    [
        ("epochs = 5\nlearning_rate = 0.1\n", r"<config>:2: learning_rate"),
        ("epochs = 5\n\nepochs = 6\n", r"<config>:3: duplicate key 'epochs' \(first set on line 1\)"),
        ("epochs 5\n", r"<config>:1: expected"),
        ("seed = 0\nepochs = -1\n", r"<config>:2: epochs"),
        ("= 3\n", r"<config>:1: missing key"),
        ("hidden_dims = 0, 4\n", r"<config>:1: hidden_dims"),
    ],
)
def test_bad_lines_cite_their_line(text, match):
    with pytest.raises(ConfigurationError, match=match):
        parse_run_config(text)


def test_inconsistent_training_fields():
    config = parse_run_config("epochs = 4\nswitch_epoch = 9\n")
    with pytest.raises(ConfigurationError):
        config.to_train_config()


def test_load_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("classes = 3\ndim = 6\n", encoding="utf-8")
    config = load_run_config(path)
    assert (config.classes, config.dim) == (3, 6)
    with pytest.raises(ConfigurationError):
        load_run_config(tmp_path / "missing.cfg")


def test_data_paths_resolve_under_data_dir(tmp_path):
    config = parse_run_config(f"data_dir = {tmp_path}\nood_test = /abs/shell.csv\n")
    assert config.data_path("id_train") == tmp_path / "id_train.csv"
    assert config.data_path("ood_test") == Path("/abs/shell.csv")


def test_environment_output_dir_wins(monkeypatch, tmp_path):
    config = parse_run_config("output_dir = runs\n")
    monkeypatch.delenv("NCOOD_OUTPUT_DIR", raising=False)
    assert config.resolve_output_dir() == Path("runs")
    monkeypatch.setenv("NCOOD_OUTPUT_DIR", str(tmp_path))
    assert config.resolve_output_dir() == tmp_path


def test_bad_log_level(monkeypatch):
    monkeypatch.setenv("NCOOD_LOG_LEVEL", "chatty")
    with pytest.raises(EnvironmentError):
        Config()
    monkeypatch.setenv("NCOOD_LOG_LEVEL", "debug")
    assert Config().LOG_LEVEL == "DEBUG"
