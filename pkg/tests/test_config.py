import json
import logging

import pytest

from cayleywalk.config import CONFIG_ENV_VAR, DEFAULT_CONFIG_FILE, EngineConfig, load_config, setup_logging
from cayleywalk.errors import (
    BallCapExceededError,
    CayleyWalkError,
    ExtendabilityUnknownError,
    PresentationSyntaxError,
    ValidationError,
)


def test_defaults(isolated):
    config = load_config()
    assert config == EngineConfig()
    assert config.family_cap == 8
    assert config.order_cap == 65536
    assert config.log_file is None


def test_explicit_json_file(isolated):
    path = isolated / "engine.json"
    path.write_text(json.dumps({"vertex_cap": 1000, "workers": 4}))
    config = load_config(path)
    assert config.vertex_cap == 1000
    assert config.workers == 4


def test_yaml_file_and_overrides(isolated):
    path = isolated / "engine.yaml"
    path.write_text("family_cap: 3\nexact_limit: 10\n")
    config = load_config(path, exact_limit=20, workers=None)
    assert config.family_cap == 3
    assert config.exact_limit == 20
    assert config.workers == 1


def test_environment_variable(isolated, monkeypatch):
    path = isolated / "from_env.json"
    path.write_text(json.dumps({"theorem_constant": 2.5}))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    assert load_config().theorem_constant == 2.5


def test_default_file_in_working_directory(isolated):
    (isolated / DEFAULT_CONFIG_FILE).write_text(json.dumps({"phi_budget": 99}))
    assert load_config().phi_budget == 99


def test_empty_yaml_gives_defaults(isolated):
    path = isolated / "empty.yml"
    path.write_text("")
    assert load_config(path) == EngineConfig()


@pytest.mark.parametrize("content", [
    '{"no_such_key": 1}',
    '{"workers": 0}',
    '{"log_level": "LOUD"}',
    '[1, 2]',
    '{not json',
])
def test_rejected_config_files(isolated, content):
    path = isolated / "bad.json"
    path.write_text(content)
    with pytest.raises(ValidationError):
        load_config(path)


def test_missing_file(isolated):
    with pytest.raises(ValidationError):
        load_config(isolated / "missing.json")


def test_validate():
    assert EngineConfig().validate()
    assert not EngineConfig(theorem_constant=0).validate()
    assert not EngineConfig(saw_prefix_depth=0).validate()


def test_setup_logging_writes_file(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    setup_logging("DEBUG", str(log_file), tag="TEST")
    logging.getLogger("cayleywalk.test").info("hello")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "TEST - INFO - hello" in log_file.read_text()
    setup_logging("WARNING")


def test_error_exit_codes():
    assert ValidationError("x").exit_code == 2
    assert BallCapExceededError("x").exit_code == 3
    assert ExtendabilityUnknownError("x").exit_code == 3
    assert CayleyWalkError("x").exit_code == 1


def test_error_to_dict_is_json_ready():
    err = PresentationSyntaxError("bad token", 2, 7, {"extra": (1, object)})
    data = err.to_dict()
    assert data["type"] == "PresentationSyntaxError"
    assert data["message"].startswith("line 2, column 7")
    assert data["context"]["line"] == 2
    assert data["context"]["extra"][0] == 1
    json.dumps(data)
