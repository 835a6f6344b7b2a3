"""
配置管理模块
负责界面设置和回归常数的加载与保存
"""
import os
import json
import logging
from typing import Any, Dict, Optional

from src.constants import DEFAULT_LAMBDA, DEFAULT_QUICK, DEFAULT_WORKERS, STORAGE_ENV, TRANSFORM_REL_TOL, WORKERS_ENV

logger = logging.getLogger(__name__)

# 默认存储目录，可由环境变量覆盖
DEFAULT_STORAGE_DIR = os.path.join(os.path.dirname(__file__), "../../storage")
SETTINGS_FILENAME = "settings.json"
REGRESSION_FILENAME = "regression_constants.json"


def storage_dir() -> str:
    """当前存储目录"""
    return os.environ.get(STORAGE_ENV) or DEFAULT_STORAGE_DIR


def worker_count(default: int = DEFAULT_WORKERS) -> int:
    """从环境变量读取工作进程数，非法值回退到默认值"""
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"环境变量 {WORKERS_ENV}={raw!r} 不是整数，使用默认值 {default}")
        return default


class ConfigManager:
    """配置管理器"""

    @staticmethod
    def ensure_storage_dir() -> None:
        """确保存储目录存在"""
        directory = storage_dir()
        if not os.path.exists(directory):
            os.makedirs(directory)
            logger.info(f"创建存储目录: {directory}")

    @staticmethod
    def load_json_file(file_path: str, default: Any = None) -> Any:
        """加载 JSON 文件"""
        try:
            if os.path.exists(file_path):
                with open(file_path, 'r', encoding='utf-8') as f:
                    return json.load(f)
            return default
        except Exception as e:
            logger.error(f"加载文件失败 {file_path}: {e}")
            return default

    @staticmethod
    def save_json_file(file_path: str, data: Any, secure: bool = False) -> bool:
        """保存 JSON 文件，键排序保证输出可复现"""
        try:
            ConfigManager.ensure_storage_dir()
            with open(file_path, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=2, ensure_ascii=False, sort_keys=True)
                f.write('\n')

            if secure:
                os.chmod(file_path, 0o600)

            return True
        except Exception as e:
            logger.error(f"保存文件失败 {file_path}: {e}")
            return False


class SettingsManager:
    """界面设置管理器"""

    DEFAULTS = {
        'lambda': DEFAULT_LAMBDA,
        'rel_tol': TRANSFORM_REL_TOL,
        'workers': DEFAULT_WORKERS,
        'quick': DEFAULT_QUICK,
    }

    def __init__(self, file_path: Optional[str] = None):
        self._file_path = file_path
        self._settings = self._load()

    @property
    def file_path(self) -> str:
        return self._file_path or os.path.join(storage_dir(), SETTINGS_FILENAME)

    def _load(self) -> dict:
        """加载设置"""
        return ConfigManager.load_json_file(self.file_path, {}) or {}

    def save(self) -> bool:
        """保存设置"""
        return ConfigManager.save_json_file(self.file_path, self._settings, secure=True)

    def get(self, key: str, default: Any = None) -> Any:
        """获取设置值，未设置时回退到内置默认值"""
        if default is None:
            default = self.DEFAULTS.get(key)
        return self._settings.get(key, default)

    def set(self, key: str, value: Any) -> bool:
        """设置值"""
        self._settings[key] = value
        return self.save()

    def get_all(self) -> dict:
        """获取所有设置（含默认值）"""
        merged = dict(self.DEFAULTS)
        merged.update(self._settings)
        return merged


class RegressionStore:
    """
    回归常数存储

    定理只给出存在性的常数在首次标定时写入，之后的运行与之比较。
    键形如 "lp_ratio/V3/lambda=1/p=2"。
    """

    def __init__(self, file_path: Optional[str] = None):
        self._file_path = file_path
        self._constants: Dict[str, float] = self.load()
        self._dirty = False

    @property
    def file_path(self) -> str:
        return self._file_path or os.path.join(storage_dir(), REGRESSION_FILENAME)

    def load(self) -> Dict[str, float]:
        """加载已记录的常数"""
        data = ConfigManager.load_json_file(self.file_path, {}) or {}
        return {str(k): float(v) for k, v in data.items()}

    def get(self, key: str) -> Optional[float]:
        return self._constants.get(key)

    def record(self, key: str, value: float) -> None:
        """记录（或覆盖）一个常数，调用 save 后落盘"""
        if self._constants.get(key) != value:
            self._constants[key] = float(value)
            self._dirty = True
            logger.info(f"记录回归常数 {key} = {value:.6g}")

    def save(self) -> bool:
        """有改动时写回文件"""
        if not self._dirty:
            return True
        saved = ConfigManager.save_json_file(self.file_path, self._constants)
        self._dirty = not saved
        return saved

    def keys(self):
        return sorted(self._constants)


# 全局设置实例
app_settings = SettingsManager()
