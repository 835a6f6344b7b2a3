"""设置、回归常数与扫描配置"""
import json

import pytest

from src.config.settings import RegressionStore, SettingsManager, storage_dir, worker_count
from src.config.sweep import DEFAULT_SWEEP_FILE, SweepConfig, bundled_config, load_sweep_config
from src.constants import WORKERS_ENV
from src.core.errors import DomainError


def test_storage_dir_follows_environment(isolated_storage):
    assert storage_dir() == str(isolated_storage)


def test_settings_defaults_and_persistence(isolated_storage):
    settings = SettingsManager()
    assert settings.get('lambda') == 1.0
    assert settings.get('quick') is True
    assert settings.set('lambda', 0.5)
    assert SettingsManager().get('lambda') == 0.5
    assert SettingsManager().get_all()['workers'] == 1
    data = json.loads((isolated_storage / "settings.json").read_text(encoding="utf-8"))
    assert data == {'lambda': 0.5}


def test_regression_store_round_trip(tmp_path):
    path = tmp_path / "constants.json"
    store = RegressionStore(str(path))
    assert store.get("suite/q/p") is None
    store.record("suite/q/p", 1.5)
    assert store.save()
    reloaded = RegressionStore(str(path))
    assert reloaded.get("suite/q/p") == 1.5
    assert reloaded.keys() == ["suite/q/p"]


def test_worker_count(monkeypatch):
    assert worker_count() == 1
    monkeypatch.setenv(WORKERS_ENV, "4")
    assert worker_count() == 4
    monkeypatch.setenv(WORKERS_ENV, "many")
    assert worker_count(3) == 3


@pytest.mark.parametrize("quick", [True, False])
def test_bundled_configs_load(quick):
    config = bundled_config(quick)
    assert config.lambdas
    assert config.ladder().values[0] == config.ladder_start
    assert config.cz_etas().size == config.cz_eta_count


def test_quick_config_values():
    config = bundled_config(True)
    assert config.lambdas == (1.0,)
    assert config.rho_values == (3.0,)
    assert 'steps(0.5,1,1.5)' in config.functions
    assert config.grid().n == 24


def test_overrides_apply():
    config = bundled_config(True, lambdas=(0.5, 2.0), random_cases=None)
    assert config.lambdas == (0.5, 2.0)
    assert config.random_cases == 40


def test_unknown_section_is_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[sweep]\nlambdas = 1\n\n[extras]\nfoo = 1\n", encoding="utf-8")
    with pytest.raises(DomainError):
        load_sweep_config(str(path))


def test_unknown_key_is_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[sweep]\nlambda = 1\n", encoding="utf-8")
    with pytest.raises(DomainError):
        load_sweep_config(str(path))


def test_unparsable_value_is_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[ladder]\nlength = twelve\n", encoding="utf-8")
    with pytest.raises(DomainError):
        load_sweep_config(str(path))


def test_missing_file():
    with pytest.raises(DomainError):
        load_sweep_config("/nonexistent/sweep.ini")


def test_small_rho_requires_opt_in():
    with pytest.raises(DomainError):
        SweepConfig(rho_values=(2.0,))
    assert SweepConfig(rho_values=(2.0,), allow_small_rho=True).rho_values == (2.0,)


def test_config_validation():
    with pytest.raises(DomainError):
        SweepConfig(alpha=1.0, gamma=0.5)
    with pytest.raises(DomainError):
        SweepConfig(functions=('nope(1)',))
    with pytest.raises(DomainError):
        SweepConfig(lambdas=())


def test_default_file_exists():
    config = load_sweep_config(DEFAULT_SWEEP_FILE)
    assert config.to_dict()['lambdas'] == config.lambdas


def test_regime_grid_loads(tmp_path):
    config = bundled_config(True)
    assert config.regime_k1 == (5.0, 10.0, 50.0)
    assert config.regime_k2 == (0.8, 0.9, 0.99)
    path = tmp_path / "regimes.ini"
    path.write_text("[regimes]\nk1_values = 3, 100\nk2_values = 0.75\n", encoding="utf-8")
    custom = load_sweep_config(str(path))
    assert custom.regime_k1 == (3.0, 100.0)
    assert custom.regime_k2 == (0.75,)


@pytest.mark.parametrize("overrides", [{'regime_k2': (0.4,)}, {'regime_k2': (1.0,)}, {'regime_k1': (2.0,)},
                                       {'regime_k1': ()}])
def test_regime_grid_validation(overrides):
    with pytest.raises(DomainError):
        SweepConfig(**overrides)
