# Configuration tests
# Process settings (WORKBENCH_* env) and experiment configs (TOML, env, overrides)

import pytest
from pydantic import ValidationError

from workbench.config import Settings, get_settings_dev
from workbench.errors import DomainError
from workbench.schemas.experiment import ExperimentKind, load_experiment_config

TOML = """
experiment = "diagnose"
seed = 7

[cocycle]
kind = "example2"
alpha = "sqrt3-1"

[numerics]
n = 5000
starts = 8

[thresholds]
a_lo = 0.04
"""


@pytest.fixture
def clean_env(monkeypatch):
    for key in ("WORKBENCH_NUMERICS__N", "WORKBENCH_SEED", "WORKBENCH_OUT", "WORKBENCH_THREADS",
                "WORKBENCH_NUMERICS__LYAPUNOV_METHOD", "WORKBENCH_INDUCING__ORIENTATION"):
        monkeypatch.delenv(key, raising=False)
    return monkeypatch


@pytest.fixture
def toml_file(tmp_path):
    path = tmp_path / "experiment.toml"
    path.write_text(TOML, encoding="utf-8")
    return path


# =============================================================================
# SETTINGS
# =============================================================================

def test_default_settings(settings):
    assert settings is not None
    assert settings.log_level == "INFO"
    assert settings.record_wall_time is True


def test_log_level_is_normalized():
    assert Settings(log_level="debug").log_level == "DEBUG"
    with pytest.raises(ValidationError):
        Settings(log_level="LOUD")


def test_caps_and_annulus_are_checked():
    with pytest.raises(ValidationError):
        Settings(product_cap=0)
    with pytest.raises(ValidationError):
        Settings(iota_annulus=0.1)


def test_settings_read_the_environment(settings, monkeypatch):
    monkeypatch.setenv("WORKBENCH_RETURN_CAP", "500")
    assert get_settings_dev().return_cap == 500


def test_invalid_environment_gives_no_dev_settings(settings, monkeypatch):
    monkeypatch.setenv("WORKBENCH_PRODUCT_CAP", "0")
    assert get_settings_dev() is None


# =============================================================================
# EXPERIMENT CONFIG
# =============================================================================

def test_defaults(clean_env):
    config = load_experiment_config()
    assert config.experiment == ExperimentKind.DIAGNOSE
    assert config.cocycle.kind == "example1"
    assert config.base.kind == "rotation"
    assert config.base.eta == "sqrt2-1"
    assert config.numerics.starts == 16
    assert config.numerics.lyapunov_method == "matrix"
    assert config.inducing.orientation == "reversing"


def test_base_kind_follows_the_cocycle(clean_env):
    assert load_experiment_config(overrides={"cocycle": {"kind": "cex2"}}).base.kind == "bernoulli"


def test_unknown_keys_are_rejected(clean_env):
    with pytest.raises(DomainError):
        load_experiment_config(overrides={"bogus": 1})
    with pytest.raises(DomainError):
        load_experiment_config(overrides={"numerics": {"steps": 10}})


def test_toml_file_is_loaded(clean_env, toml_file):
    config = load_experiment_config(str(toml_file))
    assert config.seed == 7
    assert config.cocycle.kind == "example2"
    assert config.numerics.n == 5000
    assert config.numerics.starts == 8
    assert config.thresholds.a_lo == 0.04
    assert config.echo()["base"]["kind"] == "rotation"


def test_environment_beats_the_file_and_overrides_beat_both(clean_env, toml_file):
    clean_env.setenv("WORKBENCH_NUMERICS__N", "123")
    assert load_experiment_config(str(toml_file)).numerics.n == 123
    config = load_experiment_config(str(toml_file), {"numerics": {"n": 9}})
    assert config.numerics.n == 9
    assert config.numerics.starts == 8


def test_missing_file(clean_env, tmp_path):
    with pytest.raises(DomainError):
        load_experiment_config(str(tmp_path / "absent.toml"))


def test_float_literals_keep_their_text(clean_env):
    assert load_experiment_config(overrides={"base": {"eta": 0.7}}).base.eta == "0.7"


@pytest.mark.parametrize("overrides", [
    {"numerics": {"starts": 0}},
    {"numerics": {"starts": 7}},
    {"base": {"eta": "pi"}},
    {"base": {"kind": "rotation"}, "cocycle": {"kind": "example3"}},
    {"experiment": "induce", "cocycle": {"kind": "cex2"}},
    {"cocycle": {"kind": "table"}},
    {"ulam": {"grid": [1, 10]}},
    {"thresholds": {"rho": 0.0}},
])
def test_invalid_configs(clean_env, overrides):
    with pytest.raises(DomainError):
        load_experiment_config(overrides=overrides)


def test_suite_commands_skip_the_base_check(clean_env):
    config = load_experiment_config(overrides={
        "experiment": "verify-counterexamples",
        "base": {"kind": "bernoulli"},
    })
    assert config.experiment == ExperimentKind.VERIFY_COUNTEREXAMPLES
