"""Unit tests for YAML run configuration loading."""

from pathlib import Path

import numpy as np
import pytest

from metaquant.config import Stage, apply_overrides, dump_config, load_config
from metaquant.constants import OUTPUT_DIR_ENV
from metaquant.datasets import write_idx
from metaquant.errors import ConfigError
from metaquant.trainer import TrainMode


def test_loads_sections_into_typed_configs(write_config):
    """Test that each YAML section becomes its typed dataclass."""
    config = load_config(write_config("full-pipeline"))
    assert config.stage is Stage.FULL_PIPELINE
    assert config.train.epochs == 2
    assert config.retrain.mode is TrainMode.RETRAIN
    assert config.constraint.target_ratio == 16.0
    assert config.search.resolved_bit_range(config.constraint) == (1, 5)


def test_dotted_overrides(write_config):
    """Test that dotted flags replace values in nested sections."""
    overrides = ["--train.epochs", "5", "--train.bit_range=[2, 6]", "--target", "cnn-5"]
    config = load_config(write_config("train"), overrides)
    assert config.train.epochs == 5
    assert config.train.bit_range == (2, 6)
    assert config.target == "cnn-5"


def test_override_without_value():
    """Test that a trailing flag without a value is rejected."""
    with pytest.raises(ConfigError, match="missing a value"):
        apply_overrides({}, ["--train.epochs"])


def test_environment_overrides_output_dir(write_config, monkeypatch, tmp_path):
    """Test that the output directory variable replaces output_dir."""
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "elsewhere"))
    assert load_config(write_config("train")).output_dir == tmp_path / "elsewhere"


def test_unknown_key_names_the_field(write_config):
    """Test that a misspelt key is reported with its dotted name."""
    with pytest.raises(ConfigError, match=r"train\.epoch:"):
        load_config(write_config("train", train={"epoch": 3}))


def test_wrong_type_names_the_field(write_config):
    """Test that a string where an integer belongs is reported with its dotted name."""
    with pytest.raises(ConfigError, match=r"train\.epochs: expected an integer"):
        load_config(write_config("train", train={"epochs": "many"}))


def test_invalid_value_is_reported_under_the_written_section(write_config):
    """Test that retrain errors are named under retrain, not train."""
    with pytest.raises(ConfigError, match=r"retrain\.momentum"):
        load_config(write_config("train", retrain={"momentum": 2.0}))


def test_unknown_stage(write_config):
    """Test that an unknown stage name is rejected."""
    with pytest.raises(ConfigError, match="stage"):
        load_config(write_config("evaluate"))


def test_search_stage_needs_a_checkpoint(write_config):
    """Test that the search stage requires a checkpoint path."""
    with pytest.raises(ConfigError, match="checkpoint"):
        load_config(write_config("search"))


def test_missing_checkpoint_file(write_config):
    """Test that a checkpoint path that does not exist is rejected at load time."""
    with pytest.raises(ConfigError, match="does not exist"):
        load_config(write_config("search", checkpoint="missing.ckpt"))


def test_retrain_stage_needs_a_policy(write_config):
    """Test that retrain needs a policy or a search report."""
    with pytest.raises(ConfigError, match="policy"):
        load_config(write_config("retrain"))


def test_resolved_config_round_trips(write_config, tmp_path):
    """Test that dumping and reloading a config gives an equal config."""
    config = load_config(write_config("retrain", policy=[2, 2, 2]))
    copy = dump_config(config, tmp_path / "resolved.yaml")
    again = load_config(copy)
    assert again == config


def test_unreadable_file():
    """Test that a missing YAML file raises ConfigError."""
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(Path("/nonexistent/run.yaml"))


def test_idx_dataset_infers_its_class_count(write_config, tmp_path):
    """Test that an IDX dataset without a class count takes it from the labels."""
    labels = np.arange(30, dtype=np.uint8) % 10
    write_idx(np.zeros((30, 8, 8), dtype=np.uint8), labels, tmp_path / "img.idx", tmp_path / "lbl.idx")
    dataset = {
        "kind": "idx",
        "classes": None,
        "images_path": str(tmp_path / "img.idx"),
        "labels_path": str(tmp_path / "lbl.idx"),
    }
    config = load_config(write_config("train", dataset=dataset))
    assert config.dataset.classes is None
    assert config.dataset.build().class_count == 10


def test_synthetic_dataset_defaults_to_four_classes(write_config):
    """Test that a synthetic dataset without a class count uses four classes."""
    config = load_config(write_config("train", dataset={"classes": None}))
    assert config.dataset.build().class_count == 4


def test_optional_fields_are_type_checked(write_config):
    """Test that a nullable integer still rejects a string."""
    with pytest.raises(ConfigError, match=r"dataset\.classes: expected an integer"):
        load_config(write_config("train", dataset={"classes": "ten"}))
