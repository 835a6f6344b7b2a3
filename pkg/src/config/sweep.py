"""
扫描配置模块
解析带分节的纯文本键值配置（INI 语法），未知分节或键一律报错
"""
import configparser
import logging
import os
from dataclasses import dataclass, fields
from typing import Dict, Optional, Tuple

import numpy as np

from src.core.errors import DomainError
from src.core.functions import function_from_id
from src.core.kernel import RegimeConstants
from src.core.measure import EpsilonLadder, RadialGrid

logger = logging.getLogger(__name__)

CONFIG_DIR = os.path.dirname(__file__)
DEFAULT_SWEEP_FILE = os.path.join(CONFIG_DIR, "default_sweep.ini")
QUICK_SWEEP_FILE = os.path.join(CONFIG_DIR, "quick_sweep.ini")

# 分节 -> 键 -> (字段名, 类型)
_SCHEMA: Dict[str, Dict[str, Tuple[str, str]]] = {
    'sweep': {
        'lambdas': ('lambdas', 'floats'),
        'functions': ('functions', 'ids'),
        'p_values': ('p_values', 'floats'),
        'rho_values': ('rho_values', 'floats'),
        'allow_small_rho': ('allow_small_rho', 'bool'),
        'seed': ('seed', 'int'),
        'refine_check': ('refine_check', 'bool'),
        'random_cases': ('random_cases', 'int'),
        'random_profiles': ('random_profiles', 'int'),
    },
    'ladder': {
        'start': ('ladder_start', 'float'),
        'ratio': ('ladder_ratio', 'float'),
        'length': ('ladder_length', 'int'),
        'subsamples': ('ladder_subsamples', 'int'),
    },
    'thresholds': {
        'eta_min': ('eta_min', 'float'),
        'eta_max': ('eta_max', 'float'),
        'eta_count': ('eta_count', 'int'),
        'betas': ('betas', 'floats'),
        'alpha': ('alpha', 'float'),
        'gamma': ('gamma', 'float'),
    },
    'grid': {
        'lower': ('grid_lower', 'float'),
        'upper': ('grid_upper', 'float'),
        'cells': ('grid_cells', 'int'),
        'norm_cells': ('norm_cells', 'int'),
        'norm_order': ('norm_order', 'int'),
    },
    'cz': {
        'lambdas': ('cz_lambdas', 'floats'),
        'functions': ('cz_functions', 'ids'),
        'eta_min': ('cz_eta_min', 'float'),
        'eta_max': ('cz_eta_max', 'float'),
        'eta_count': ('cz_eta_count', 'int'),
    },
    'regimes': {
        'k1_values': ('regime_k1', 'floats'),
        'k2_values': ('regime_k2', 'floats'),
    },
    'bmo': {
        'functions': ('bmo_functions', 'ids'),
        'centers': ('bmo_centers', 'int'),
        'radii': ('bmo_radii', 'int'),
    },
    'tolerances': {
        'rel_tol': ('rel_tol', 'float'),
        'tail_tol': ('tail_tol', 'float'),
        'kernel_rel_tol': ('kernel_rel_tol', 'float'),
    },
    'output': {
        'directory': ('output_dir', 'str'),
        'report_csv': ('report_csv', 'str'),
        'report_json': ('report_json', 'str'),
    },
}


@dataclass(frozen=True)
class SweepConfig:
    """验证扫描参数，默认值即桌面规模的配置"""
    lambdas: Tuple[float, ...] = (0.5, 1.0)
    functions: Tuple[str, ...] = (
        'indicator(0,1)', 'indicator(1,2)', 'indicator(0.5,3)', 'power(1,2)',
        'power(2,1)', 'bump(1,0.5)', 'bump(3,1)', 'steps(0.5,1,1.5)',
    )
    p_values: Tuple[float, ...] = (2.0, 4.0)
    rho_values: Tuple[float, ...] = (3.0,)
    allow_small_rho: bool = False
    seed: int = 20240601
    refine_check: bool = True
    random_cases: int = 200
    random_profiles: int = 10_000
    ladder_start: float = 1.0
    ladder_ratio: float = 2.0
    ladder_length: int = 12
    ladder_subsamples: int = 4
    eta_min: float = 0.01
    eta_max: float = 10.0
    eta_count: int = 13
    betas: Tuple[float, ...] = (0.5, 1.0, 2.0)
    alpha: float = 0.0
    gamma: float = 0.5
    grid_lower: float = 0.01
    grid_upper: float = 100.0
    grid_cells: int = 64
    norm_cells: int = 2048
    norm_order: int = 4
    cz_lambdas: Tuple[float, ...] = (0.5, 1.0)
    cz_functions: Tuple[str, ...] = ('indicator(0,1)', 'indicator(0.5,3)', 'power(2,1)', 'bump(1,0.5)')
    cz_eta_min: float = 0.01
    cz_eta_max: float = 10.0
    cz_eta_count: int = 7
    regime_k1: Tuple[float, ...] = (5.0, 10.0, 50.0)
    regime_k2: Tuple[float, ...] = (0.8, 0.9, 0.99)
    bmo_functions: Tuple[str, ...] = ('sign(1)', 'indicator(0,1)', 'steps(0.5,1,1.5)')
    bmo_centers: int = 64
    bmo_radii: int = 64
    rel_tol: float = 1e-8
    tail_tol: float = 1e-9
    kernel_rel_tol: float = 1e-10
    output_dir: str = 'output'
    report_csv: str = 'report.csv'
    report_json: str = 'report.json'

    def __post_init__(self):
        for name in ('lambdas', 'functions', 'p_values', 'rho_values', 'betas', 'cz_lambdas',
                     'cz_functions', 'bmo_functions', 'regime_k1', 'regime_k2'):
            if not getattr(self, name):
                raise DomainError(f"配置项 {name} 不能为空")
        if any(lam <= 0 for lam in self.lambdas + self.cz_lambdas):
            raise DomainError("λ 必须为正数")
        if any(p < 1 for p in self.p_values):
            raise DomainError("p 必须 >= 1")
        if any(rho < 1 for rho in self.rho_values):
            raise DomainError("ρ 必须 >= 1")
        if not self.allow_small_rho and any(rho <= 2 for rho in self.rho_values):
            raise DomainError("ρ 必须大于 2（如需 ρ <= 2 请设置 allow_small_rho = true）")
        if any(beta <= 0 for beta in self.betas):
            raise DomainError("β 必须为正数")
        if self.random_cases < 1 or self.random_profiles < 1:
            raise DomainError("随机样例数必须 >= 1")
        if not self.alpha < self.gamma:
            raise DomainError(f"要求 α < γ，收到 α={self.alpha}, γ={self.gamma}")
        if not (0 < self.eta_min < self.eta_max) or self.eta_count < 2:
            raise DomainError("η 网格无效")
        if not (0 < self.cz_eta_min <= self.cz_eta_max) or self.cz_eta_count < 1:
            raise DomainError("CZ 的 η 网格无效")
        for identifier in self.functions + self.cz_functions + self.bmo_functions:
            function_from_id(identifier)
        for k1 in self.regime_k1:
            for k2 in self.regime_k2:
                RegimeConstants(k1, k2)
        # 构造一次以触发校验
        self.ladder()
        self.grid()
        self.norm_grid()

    def ladder(self) -> EpsilonLadder:
        return EpsilonLadder.geometric(self.ladder_start, self.ladder_ratio, self.ladder_length)

    def grid(self) -> RadialGrid:
        """算子场的取值网格"""
        return RadialGrid(self.grid_lower, self.grid_upper, self.grid_cells)

    def norm_grid(self, upper: Optional[float] = None) -> RadialGrid:
        """计算 ‖f‖_p 的细网格"""
        return RadialGrid(min(self.grid_lower, 1e-4), upper or self.grid_upper, self.norm_cells, order=self.norm_order)

    def etas(self) -> np.ndarray:
        return np.geomspace(self.eta_min, self.eta_max, self.eta_count)

    def cz_etas(self) -> np.ndarray:
        return np.geomspace(self.cz_eta_min, self.cz_eta_max, self.cz_eta_count)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _parse_value(kind: str, raw: str, where: str):
    try:
        if kind == 'float':
            return float(raw)
        if kind == 'int':
            return int(raw)
        if kind == 'bool':
            lowered = raw.strip().lower()
            if lowered not in ('true', 'false', 'yes', 'no', '1', '0', 'on', 'off'):
                raise ValueError(raw)
            return lowered in ('true', 'yes', '1', 'on')
        if kind == 'floats':
            return tuple(float(part) for part in raw.split(',') if part.strip())
        if kind == 'ids':
            # 函数标识内部含逗号，用分号分隔
            return tuple(part.strip() for part in raw.split(';') if part.strip())
        return raw.strip()
    except ValueError as e:
        raise DomainError(f"配置项 {where} 的值无法解析: {raw!r}") from e


def load_sweep_config(path: str, **overrides) -> SweepConfig:
    """
    读取扫描配置文件

    Args:
        path: INI 文件路径
        overrides: 覆盖文件中的字段（如命令行给出的 lambdas）

    Raises:
        DomainError: 文件不存在、分节或键未知、数值无法解析
    """
    if not os.path.exists(path):
        raise DomainError(f"配置文件不存在: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#',))
    try:
        with open(path, 'r', encoding='utf-8') as f:
            parser.read_file(f)
    except configparser.Error as e:
        raise DomainError(f"配置文件格式错误 {path}: {e}") from e

    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise DomainError(f"未知的配置分节 [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise DomainError(f"未知的配置项 [{section}] {key}")
            name, kind = _SCHEMA[section][key]
            values[name] = _parse_value(kind, raw, f"[{section}] {key}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    config = SweepConfig(**values)
    logger.info(f"加载扫描配置: {path}")
    return config


def bundled_config(quick: bool = False, **overrides) -> SweepConfig:
    """随包附带的配置，quick 为快速版本"""
    return load_sweep_config(QUICK_SWEEP_FILE if quick else DEFAULT_SWEEP_FILE, **overrides)
