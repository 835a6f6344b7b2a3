"""配置模块"""
from src.config.settings import ConfigManager, RegressionStore, SettingsManager, app_settings
from src.config.sweep import SweepConfig, bundled_config, load_sweep_config

__all__ = ['ConfigManager', 'RegressionStore', 'SettingsManager', 'app_settings',
           'SweepConfig', 'bundled_config', 'load_sweep_config']
