import json

import pytest

from config import DEFAULT_CONFIG, Config, PipelineConfig
from utils.errors import ConfigError


def test_defaults_match_default_config():
    assert PipelineConfig().to_mapping() == DEFAULT_CONFIG
    assert PipelineConfig.from_mapping(DEFAULT_CONFIG) == PipelineConfig()


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as info:
        PipelineConfig.from_mapping({"tile-size": 4})
    assert "tile-size" in str(info.value)


@pytest.mark.parametrize("key, value", [
    ("filter-window", 4),
    ("filter-window", 1),
    ("noise-mode", "median"),
    ("cluster-backend", "dbscan"),
    ("binarize", "mean"),
    ("fixed-threshold", 1.5),
    ("fuzzifier", 1.0),
    ("noise-patch", 0),
    ("energy-window", 0),
])
def test_invalid_values(key, value):
    with pytest.raises(ConfigError):
        PipelineConfig.from_mapping({key: value})


def test_file_values_override_defaults(tmp_path):
    path = tmp_path / "pipeline.json"
    path.write_text(json.dumps({"binarize": "fixed", "fixed-threshold": 0.9}))
    config = Config(str(path))
    assert config.get("binarize") == "fixed"
    pipeline = config.pipeline()
    assert pipeline.binarize == "fixed"
    assert pipeline.fixed_threshold == 0.9
    assert pipeline.noise_patch == 8


def test_missing_file_uses_defaults(tmp_path):
    assert Config(str(tmp_path / "absent.json")).pipeline() == PipelineConfig()


def test_environment_names_the_file(tmp_path, monkeypatch):
    path = tmp_path / "env.json"
    path.write_text(json.dumps({"suspicion-threshold": 0.3}))
    monkeypatch.setenv("INPAINT_FORENSICS_CONFIG", str(path))
    assert Config().pipeline().suspicion_threshold == 0.3


def test_bad_files_report_their_path(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError) as info:
        Config(str(broken))
    assert str(broken) in str(info.value)

    listing = tmp_path / "list.json"
    listing.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        Config(str(listing))

    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({"filter-window": 2}))
    with pytest.raises(ConfigError) as info:
        Config(str(invalid)).pipeline()
    assert str(invalid) in str(info.value)


def test_set_then_pipeline(tmp_path):
    config = Config(str(tmp_path / "absent.json"))
    config.set("min-heat", 0.5)
    assert config.pipeline().min_heat == 0.5


def test_with_overrides_skips_none():
    base = PipelineConfig()
    assert base.with_overrides(min_heat=None) is base
    changed = base.with_overrides(min_heat=0.3, cluster_backend="cmeans")
    assert changed.min_heat == 0.3
    assert changed.cluster_backend == "cmeans"
    with pytest.raises(ConfigError):
        base.with_overrides(filter_window=6)
