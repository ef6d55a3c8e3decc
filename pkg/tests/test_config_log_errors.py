import json
import logging

import pytest
import structlog
from pydantic import ValidationError

from src.core import ConfigError, PfqError, Settings, fixture_path, setup_logging
from src.core.config import CvaModeName, Environment, LogLevel, OutputFormat
from src.core.errors import IRSyntaxError, SortError
from src.ir import MachineConfig, UndefPolicy, default_machine


def test_defaults():
    config = Settings(_env_file=None)
    assert config.machine.bit_width == 32
    assert config.analysis.passes == ["constprop", "sccp-undef", "dce", "dse"]
    assert config.analysis.cva_mode is CvaModeName.CONSERVATIVE
    assert config.bench.reps == 5
    assert config.log_level is LogLevel.WARNING


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("PFQ_ENVIRONMENT", "Production")
    monkeypatch.setenv("PFQ_LOG_LEVEL", "debug")
    monkeypatch.setenv("PFQ_MACHINE_BIT_WIDTH", "8")
    monkeypatch.setenv("PFQ_ANALYSIS_CVA_MODE", "aggressive")
    config = Settings(_env_file=None)
    assert config.environment is Environment.PRODUCTION
    assert config.is_production
    assert config.log_level is LogLevel.DEBUG
    assert config.machine.bit_width == 8
    assert config.analysis.cva_mode is CvaModeName.AGGRESSIVE


def test_dotenv_file(tmp_path, monkeypatch):
    env = tmp_path / ".env"
    env.write_text("PFQ_LOG_JSON=true\nPFQ_APP_NAME=pfq-test\n")
    monkeypatch.delenv("PFQ_LOG_JSON", raising=False)
    config = Settings(_env_file=str(env))
    assert config.log_json is True
    assert config.app_name == "pfq-test"


def test_invalid_width_rejected(monkeypatch):
    monkeypatch.setenv("PFQ_MACHINE_BIT_WIDTH", "1")
    with pytest.raises(ValidationError):
        Settings(_env_file=None)


def test_fixture_path_points_at_bundled_files():
    assert fixture_path("paper_example_ssa.mir").is_file()
    assert fixture_path("paper_query.stp").is_file()


def test_default_machine_follows_settings(mocker):
    machine_settings = mocker.patch("src.ir.machine.settings")
    machine_settings.machine.bit_width = 16
    machine_settings.machine.undef_seed = 7
    machine = default_machine()
    assert machine.bit_width == 16
    assert machine.undef_policy == UndefPolicy.seeded(7)


def test_seeded_policy_needs_seed():
    with pytest.raises(ValidationError):
        UndefPolicy(kind="seeded-random")


def test_machine_config_is_frozen():
    machine = MachineConfig(bit_width=8)
    with pytest.raises(ValidationError):
        machine.bit_width = 4


def test_error_location_formatting():
    error = IRSyntaxError("unexpected token", source="a.mir", line=3, column=7)
    assert str(error) == "a.mir:3:7: unexpected token"
    assert error.location() == "a.mir:3:7"
    assert str(SortError("bad sort")) == "bad sort"
    assert isinstance(ConfigError("x"), PfqError)


def test_json_logging(capsys):
    config = Settings(_env_file=None, log_json=True, log_level="INFO")
    setup_logging(config)
    try:
        structlog.get_logger("pfq.test").info("query emitted", conjuncts=3)
        line = capsys.readouterr().err.strip().splitlines()[-1]
        event = json.loads(line)
        assert event["event"] == "query emitted"
        assert event["conjuncts"] == 3
        assert event["level"] == "info"
    finally:
        setup_logging(Settings(_env_file=None, environment="testing"))


def test_log_level_filters(capsys):
    setup_logging(Settings(_env_file=None, log_level="ERROR"))
    try:
        structlog.get_logger("pfq.test").info("hidden")
        assert "hidden" not in capsys.readouterr().err
        assert logging.getLogger().level == logging.ERROR
    finally:
        setup_logging(Settings(_env_file=None, environment="testing"))


def test_output_format_values():
    assert OutputFormat("smt2") is OutputFormat.SMTLIB2
    assert OutputFormat("stp") is OutputFormat.STP
