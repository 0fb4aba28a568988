"""Tests for configuration loading and run-document validation."""

import pytest

from mifair.config import get_config, load_run_config
from mifair.exceptions import ConfigError, SchemaError
from mifair.models import CoveragePolicy, FairnessNotion, Notion, SchemaConfig, SweepConfig, TrainConfig
from mifair.utils import log_grid, validate_sweep_config, validate_train_config


def test_config_is_singleton():
    assert get_config() is get_config()


def test_defaults_follow_adult_setup():
    config = get_config()
    assert config.training["hidden_sizes"] == [16]
    assert config.get("training.momentum") == 0.8
    assert config.get("training.weight_decay") == 0.1
    assert config.get("training.epochs") == 500
    assert config.get("training.learning_rate.eta_switch") == 1.0
    assert config.get("sweep.threshold") == 0.2
    assert config.get("no.such.key", "fallback") == "fallback"


def test_jobs_default_to_one_without_env(jobs_env, monkeypatch):
    monkeypatch.delenv("MIFAIR_JOBS", raising=False)
    get_config().reload()
    assert get_config().jobs == 1


def test_jobs_read_from_environment(jobs_env):
    jobs_env("3")
    assert get_config().jobs == 3


@pytest.mark.parametrize("raw", ["0", "many"])
def test_invalid_jobs_rejected(jobs_env, raw):
    jobs_env(raw)
    with pytest.raises(ConfigError):
        get_config().jobs


def test_run_document_fills_defaults(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("train:\n  notion: EO\n  eta: 0.5\n", encoding="utf-8")
    document = load_run_config(path)
    assert document["train"]["notion"] == "EO"
    assert document["train"]["eta"] == 0.5
    assert document["train"]["epochs"] == 500
    assert document["sweep"]["seeds"] == [0, 1, 2, 3, 4]
    assert document["output"] == {}


def test_run_document_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("train: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(broken)
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("42\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(scalar)


def test_train_config_from_dict():
    cfg = TrainConfig.from_dict({
        "notion": "EOdds", "lambdas": [1.0, 2.0], "eta": 1.5, "epochs": 10,
        "batch_size": 32, "coverage_policy": "error", "seed": 4
    })
    assert cfg.notion.tag == Notion.EODDS
    assert cfg.notion.lambdas == (1.0, 2.0)
    assert cfg.batch_size == 32
    assert cfg.coverage_policy == CoveragePolicy.ERROR


def test_train_config_reports_every_error():
    with pytest.raises(ConfigError) as info:
        TrainConfig.from_dict({"notion": "XX", "eta": -1, "epochs": 0})
    assert len(info.value.errors) == 3


def test_validate_train_config_flags_bad_schedule():
    is_valid, errors = validate_train_config({"epochs": 5, "lr_schedule": [[0, -0.1]]})
    assert not is_valid
    assert any("lr_schedule" in e for e in errors)


def test_learning_rate_rule():
    assert TrainConfig(eta=0.0).learning_rate(0) == 0.1
    assert TrainConfig(eta=0.99).learning_rate(0) == 0.1
    assert TrainConfig(eta=1.0).learning_rate(0) == 0.01
    scheduled = TrainConfig(eta=5.0, lr_schedule=[(10, 0.01), (0, 0.5)])
    assert scheduled.learning_rate(0) == 0.5
    assert scheduled.learning_rate(9) == 0.5
    assert scheduled.learning_rate(10) == 0.01


def test_sweep_config_adds_vanilla_and_sorts():
    cfg = SweepConfig(base=TrainConfig(), etas=[10.0, 0.1, 1.0], seeds=[1])
    assert cfg.etas == [0.0, 0.1, 1.0, 10.0]
    assert cfg.n_trials == 4


def test_sweep_config_rejects_bad_threshold():
    with pytest.raises(ConfigError):
        SweepConfig(base=TrainConfig(), etas=[1.0], threshold=0.0)
    is_valid, errors = validate_sweep_config({"seeds": [], "threshold": 2})
    assert not is_valid
    assert len(errors) == 2


def test_log_grid_matches_decades():
    grid = log_grid(-2, 2, 5)
    assert grid == pytest.approx([0.01, 0.1, 1.0, 10.0, 100.0])
    assert log_grid(1, 3, 1) == [10.0]


def test_conditional_notion_needs_class_index_on_multiclass():
    with pytest.raises(ConfigError):
        FairnessNotion(tag=Notion.EO).conditions(3)
    assert FairnessNotion(tag=Notion.EO, class_index=2).conditions(3) == [(2, 1.0)]
    assert FairnessNotion(tag=Notion.PE).conditions(2) == [(0, 1.0)]
    assert FairnessNotion(tag=Notion.EODDS).conditions(3) == [(0, 1.0), (1, 1.0), (2, 1.0)]


def test_schema_rejects_overlapping_roles(schema_dict):
    schema_dict["features"].append({"name": "sex", "kind": "categorical"})
    with pytest.raises(SchemaError):
        SchemaConfig.from_dict(schema_dict)


def test_schema_rejects_single_category(schema_dict):
    schema_dict["sensitive"][1]["categories"] = ["Male"]
    with pytest.raises(SchemaError):
        SchemaConfig.from_dict(schema_dict)


def test_schema_binarize_needs_two_buckets(schema_dict):
    schema_dict["binarize"]["race"] = {"White": ["White"]}
    with pytest.raises(SchemaError):
        SchemaConfig.from_dict(schema_dict)
