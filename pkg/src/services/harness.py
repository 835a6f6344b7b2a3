"""
验证套件服务
把核函数、算子、变差与 CZ 分解组织成可单独运行的验证套件，输出 ReportRow
"""
import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import RegressionStore, worker_count
from src.config.sweep import SweepConfig
from src.constants import KERNEL_DRIFT, REGRESSION_SLACK, ROUNDOFF_SLACK, STABILITY_DRIFT
from src.core.czd import BMOFamily, bmo_norm, cz_decompose, verify_cz
from src.core.errors import DomainError
from src.core.functions import TestFunction, function_from_id, piecewise_constant
from src.core.kernel import (
    KernelEvalConfig,
    RegimeConstants,
    kernel_at_origin,
    kernel_diagonal_defect,
    kernel_far_field_ratio,
    kernel_size_ratio,
    kernel_smoothness_ratio,
    riesz_kernel,
)
from src.core.measure import (
    EpsilonLadder,
    HalfLineInterval,
    RadialGrid,
    as_lambda,
    doubling_ratio,
    lp_norm,
    volume_comparability,
)
from src.core.operators import (
    AnnulusBand,
    TransformConfig,
    TruncationProfile,
    annulus_integral,
    local_band_mass,
    maximal_lambda,
    split_truncation,
    t1,
    t1_norm_constant,
    t1_values,
    t2,
    truncation_profiles,
    weighted_hilbert_defect,
)
from src.core.oscillation import (
    brute_force_jumps,
    brute_force_upcrossings,
    brute_force_variation,
    jump_count,
    oscillation,
    oscillation_prime,
    rho_variation,
    upcross_count,
)

logger = logging.getLogger(__name__)

OPERATORS = ('O', 'Oprime', 'V')
COMPARISONS = ('<=', '<', '==', 'band')
TARGET_KINDS = ('analytic', 'exact', 'tolerance', 'recorded', 'stability')


@dataclass(frozen=True)
class ReportRow:
    """
    一条验证结果

    passed 只由 measured、target（band 时还有 target_low）与 comparison 决定。
    band 要求 target_low <= measured <= target。
    """
    suite: str
    parameters: str
    quantity: str
    measured: float
    target: float
    comparison: str = '<='
    target_kind: str = 'exact'
    target_low: float = float('nan')

    def __post_init__(self):
        if self.comparison not in COMPARISONS:
            raise DomainError(f"未知的比较方式: {self.comparison}")
        if self.comparison == 'band' and float(self.target_low) > float(self.target):
            raise DomainError(f"区间下界 {self.target_low} 大于上界 {self.target}")
        if self.target_kind not in TARGET_KINDS:
            raise DomainError(f"未知的目标类型: {self.target_kind}")

    @property
    def passed(self) -> bool:
        measured, target = float(self.measured), float(self.target)
        if math.isnan(measured) or math.isnan(target):
            return False
        if self.comparison == '<=':
            return measured <= target
        if self.comparison == '<':
            return measured < target
        if self.comparison == 'band':
            return float(self.target_low) <= measured <= target
        return measured == target

    @property
    def key(self) -> Tuple[str, str, str]:
        return self.suite, self.parameters, self.quantity

    def to_record(self) -> dict:
        return {
            'suite': self.suite,
            'parameters': self.parameters,
            'quantity': self.quantity,
            'measured': float(self.measured),
            'target_low': float(self.target_low),
            'target': float(self.target),
            'comparison': self.comparison,
            'target_kind': self.target_kind,
            'passed': self.passed,
        }


def format_parameters(**params) -> str:
    """参数串，按给定顺序以分号连接"""
    parts = []
    for name, value in params.items():
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        parts.append(f"{name}={value}")
    return ';'.join(parts)


@dataclass(frozen=True)
class FieldTask:
    """一个 (λ, f) 在取值网格上的截断轮廓计算任务，可跨进程传递"""
    lam: float
    function_id: str
    xs: Tuple[float, ...]
    ladder: Tuple[float, ...]
    subsamples: int
    rel_tol: float
    tail_tol: float
    kernel_rel_tol: float


def _compute_profiles(task: FieldTask) -> np.ndarray:
    """工作进程入口：返回形状 (点数, 半径数) 的轮廓值"""
    f = function_from_id(task.function_id)
    cfg = TransformConfig(rel_tol=task.rel_tol, tail_tol=task.tail_tol,
                          kernel=KernelEvalConfig(rel_tol=task.kernel_rel_tol), strict=False)
    profiles = truncation_profiles(task.lam, f, task.xs, EpsilonLadder(task.ladder), task.subsamples, cfg)
    return np.array([p.values for p in profiles])


def operator_field(profiles: Sequence[TruncationProfile], operator: str, ladder: EpsilonLadder,
                   rho: float = 3.0) -> np.ndarray:
    """逐点计算 O、O′ 或 V_ρ"""
    if operator == 'O':
        return np.array([oscillation(p, ladder) for p in profiles])
    if operator == 'Oprime':
        return np.array([oscillation_prime(p, ladder) for p in profiles])
    if operator == 'V':
        return np.array([rho_variation(p, rho) for p in profiles])
    raise DomainError(f"未知的算子: {operator}（可选 {', '.join(OPERATORS)}）")


@dataclass(frozen=True, eq=False)
class OperatorFields:
    """一个 (λ, f) 在取值网格各点的截断轮廓，及由此导出的算子场"""
    lam: float
    function_id: str
    grid: RadialGrid
    epsilons: Tuple[float, ...]
    values: np.ndarray

    def profiles(self) -> List[TruncationProfile]:
        return [TruncationProfile(x, self.epsilons, tuple(row)) for x, row in zip(self.grid.points, self.values)]

    def field(self, operator: str, ladder: EpsilonLadder, rho: float = 3.0) -> np.ndarray:
        return operator_field(self.profiles(), operator, ladder, rho)

    def jumps(self, beta: float) -> np.ndarray:
        return np.array([jump_count(row, beta) for row in self.values], dtype=float)

    def upcrossings(self, alpha: float, gamma: float) -> np.ndarray:
        return np.array([upcross_count(row, alpha, gamma) for row in self.values], dtype=float)


def field_norm(lam: float, values: np.ndarray, grid: RadialGrid, p: float) -> float:
    """网格上分段常数场的 L^p(dm_λ) 范数"""
    values = np.abs(np.asarray(values, dtype=float))
    return float(np.sum(values ** p * grid.cell_measures(lam))) ** (1.0 / p)


@dataclass(frozen=True)
class Weak11Table:
    """弱 (1,1) 水平集表：(η, m_λ{Op f > η}, η·测度/‖f‖₁)"""
    etas: Tuple[float, ...]
    measures: Tuple[float, ...]
    ratios: Tuple[float, ...]
    field_l1: float
    norm_l1: float

    @property
    def sup_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    @property
    def markov_ratio(self) -> float:
        """max_η η·m_λ{Op f > η} / ‖Op f‖₁，离散化上不超过 1"""
        if self.field_l1 == 0:
            return 0.0
        return max(eta * m for eta, m in zip(self.etas, self.measures)) / self.field_l1

    def rows(self):
        return list(zip(self.etas, self.measures, self.ratios))


def weak11_from_field(lam: float, values: np.ndarray, grid: RadialGrid, etas: Iterable[float],
                      norm_l1: float) -> Weak11Table:
    """由网格上的算子场计算水平集测度"""
    cells = grid.cell_measures(lam)
    values = np.asarray(values, dtype=float)
    etas = tuple(float(e) for e in etas)
    measures = tuple(float(np.sum(cells[values > eta])) for eta in etas)
    ratios = tuple(eta * m / norm_l1 if norm_l1 > 0 else 0.0 for eta, m in zip(etas, measures))
    return Weak11Table(etas, measures, ratios, float(np.sum(np.abs(values) * cells)), norm_l1)


def weak11_profile(lam, f: TestFunction, ladder: EpsilonLadder, operator: str, etas: Iterable[float],
                   grid: RadialGrid, k: int = 4, rho: float = 3.0, cfg: TransformConfig = None,
                   norm_grid: RadialGrid = None) -> Weak11Table:
    """
    算子 O、O′ 或 V_ρ 的弱 (1,1) 水平集表

    Args:
        grid: 算子场的取值网格，水平集测度按单元测度求和
        k: 每个区段的截断半径细分数
        norm_grid: 计算 ‖f‖₁ 的网格，缺省时覆盖 f 的支撑
    """
    lam = as_lambda(lam)
    cfg = cfg or TransformConfig(strict=False)
    if f.is_zero:
        return weak11_from_field(lam, np.zeros(grid.n), grid, etas, 0.0)
    if norm_grid is None:
        upper = max(grid.upper, f.support.upper if f.support else grid.upper)
        norm_grid = RadialGrid(1e-4, upper, 2048, order=4)
    norm_l1 = lp_norm(lam, f, 1.0, norm_grid)
    profiles = truncation_profiles(lam, f, grid.points, ladder, k, cfg)
    values = operator_field(profiles, operator, ladder, rho)
    return weak11_from_field(lam, values, grid, etas, norm_l1)


@dataclass
class SuiteContext:
    """
    一次验证运行的共享状态：配置、回归常数与算子场缓存

    算子场按 (λ, f, 网格单元数) 缓存，多个套件共用。
    """
    config: SweepConfig
    store: RegressionStore = field(default_factory=RegressionStore)
    calibrate: bool = False
    workers: int = field(default_factory=worker_count)
    frozen: bool = False
    new_keys: List[str] = field(default_factory=list, repr=False)
    _fields: Dict[Tuple[float, str, int], OperatorFields] = field(default_factory=dict, repr=False)
    _norms: Dict[Tuple[float, str, float], float] = field(default_factory=dict, repr=False)

    def transform_config(self, strict: bool = False) -> TransformConfig:
        return TransformConfig(rel_tol=self.config.rel_tol, tail_tol=self.config.tail_tol,
                               kernel=KernelEvalConfig(rel_tol=self.config.kernel_rel_tol), strict=strict)

    def recorded(self, suite: str, parameters: str, quantity: str, measured: float) -> ReportRow:
        """
        与回归常数比较，要求 stored/2 <= measured <= 2·stored

        缺少记录时（或标定时）写入实测值；frozen 模式下缺少记录直接判为未通过。
        """
        key = f"{suite}/{quantity}/{parameters}"
        stored = None if self.calibrate else self.store.get(key)
        if stored is None and np.isfinite(measured) and not self.frozen:
            self.store.record(key, float(measured))
            self.new_keys.append(key)
            stored = float(measured)
        if stored is None:
            low = high = float('nan')
        else:
            low, high = sorted((stored / REGRESSION_SLACK, stored * REGRESSION_SLACK))
        return ReportRow(suite, parameters, quantity, float(measured), high, 'band', 'recorded', low)

    def norm(self, lam: float, function_id: str, p: float) -> float:
        key = (lam, function_id, p)
        if key not in self._norms:
            f = function_from_id(function_id)
            upper = max(self.config.grid_upper, f.support.upper if f.support else self.config.grid_upper)
            self._norms[key] = lp_norm(lam, f, p, self.config.norm_grid(upper))
        return self._norms[key]

    def fields(self, lam: float, function_ids: Sequence[str], grid: RadialGrid = None) -> Dict[str, OperatorFields]:
        """批量取得算子场，缺失的分发到工作进程计算"""
        cfg = self.config
        grid = grid or cfg.grid()
        ladder = cfg.ladder()
        missing = [fid for fid in function_ids if (lam, fid, grid.n) not in self._fields]
        tasks = [FieldTask(lam, fid, tuple(grid.points), ladder.values, cfg.ladder_subsamples,
                           cfg.rel_tol, cfg.tail_tol, cfg.kernel_rel_tol) for fid in missing]
        if tasks:
            logger.info(f"计算算子场: λ={lam}, {len(tasks)} 个函数, {grid.n} 个点, 工作进程 {self.workers}")
            if self.workers > 1 and len(tasks) > 1:
                with Pool(min(self.workers, len(tasks))) as pool:
                    results = pool.map(_compute_profiles, tasks)
            else:
                results = [_compute_profiles(task) for task in tasks]
            epsilons = tuple(ladder.subdivided(cfg.ladder_subsamples))
            for fid, values in zip(missing, results):
                self._fields[(lam, fid, grid.n)] = OperatorFields(lam, fid, grid, epsilons, values)
        return {fid: self._fields[(lam, fid, grid.n)] for fid in function_ids}


def _drift(a: float, b: float) -> float:
    """相对漂移 |a/b - 1|，两者皆为 0 时为 0"""
    if a == b:
        return 0.0
    if b == 0:
        return float('inf')
    return abs(a / b - 1.0)


def _fold(a: float, b: float) -> float:
    """两个正数之间的倍数 max(a/b, b/a)"""
    if a == b:
        return 1.0
    if min(a, b) <= 0:
        return float('inf')
    return max(a / b, b / a)


# ---------------------------------------------------------------- 核函数

def suite_kernel_closed_form(ctx: SuiteContext) -> List[ReportRow]:
    """y = 0 的 Beta 函数闭式值"""
    rows = []
    for lam in (0.3, 0.5, 1.0, 2.0):
        worst = max(abs(riesz_kernel(lam, x, 0.0) / kernel_at_origin(lam, x) - 1.0) for x in (0.1, 1.0, 10.0))
        rows.append(ReportRow('kernel_closed_form', format_parameters(**{'lambda': lam}),
                              'max_relative_error', worst, 1e-8, '<', 'tolerance'))
    return rows


def suite_kernel_homogeneity(ctx: SuiteContext) -> List[ReportRow]:
    """R(cx, cy) c^{2λ+1} = R(x, y)"""
    rng = np.random.default_rng(ctx.config.seed)
    rows = []
    for lam in ctx.config.lambdas:
        worst = 0.0
        count = 0
        while count < 100:
            x, y, c = np.exp(rng.uniform(np.log(0.1), np.log(10.0), 3))
            if abs(x - y) < 1e-3 * x:
                continue
            base = riesz_kernel(lam, x, y)
            scaled = riesz_kernel(lam, c * x, c * y) * c ** (2 * lam + 1)
            worst = max(worst, abs(scaled / base - 1.0))
            count += 1
        rows.append(ReportRow('kernel_homogeneity', format_parameters(**{'lambda': lam}),
                              'max_relative_error', worst, 1e-8, '<', 'tolerance'))
    return rows


def regime_suprema(lam: float, kernel_cfg: KernelEvalConfig, rc: RegimeConstants = None,
                   samples: int = 24) -> Dict[str, float]:
    """四个区域诊断量在稠密扫描上的上确界"""
    rc = rc or RegimeConstants()
    ys = np.geomspace(1e-2, 1e2, samples)
    size = max(kernel_size_ratio(lam, 1.0, y, kernel_cfg) for y in ys if abs(y - 1.0) > 1e-3)
    smooth = 0.0
    for y0 in ys:
        distance = abs(1.0 - y0)
        if distance < 1e-3:
            continue
        for fraction in (0.1, 0.25, 0.45):
            smooth = max(smooth, kernel_smoothness_ratio(lam, 1.0, y0, y0 + fraction * distance, kernel_cfg))
    return {'size': size, 'smoothness': smooth, **threshold_suprema(lam, kernel_cfg, rc, samples)}


def threshold_suprema(lam: float, kernel_cfg: KernelEvalConfig, rc: RegimeConstants,
                      samples: int = 24) -> Dict[str, float]:
    """依赖 K1、K2 的两个区域（远场 z > K1·y，近对角 z/y ∈ (K2, 1)）的上确界"""
    far = max(abs(kernel_far_field_ratio(lam, 1.0, z, rc, kernel_cfg))
              for z in rc.k1 * np.geomspace(1.001, 1e3, samples))
    diag = max(kernel_diagonal_defect(lam, 1.0, z, rc, kernel_cfg)
               for z in 1.0 - (1.0 - rc.k2) * np.geomspace(1e-6, 0.999, samples))
    return {'far_field': far, 'diagonal_defect': diag}


def suite_kernel_regimes(ctx: SuiteContext) -> List[ReportRow]:
    """区域诊断量有限，且容差从 1e-8 收紧到 1e-10 时上确界漂移 < 10%"""
    rows = []
    for lam in ctx.config.lambdas:
        loose = regime_suprema(lam, KernelEvalConfig(rel_tol=1e-8))
        tight = regime_suprema(lam, KernelEvalConfig(rel_tol=1e-10))
        params = format_parameters(**{'lambda': lam})
        for name in loose:
            rows.append(ReportRow('kernel_regimes', params, f"{name}_drift",
                                  _drift(loose[name], tight[name]), KERNEL_DRIFT, '<=', 'stability'))
            rows.append(ctx.recorded('kernel_regimes', params, f"{name}_sup", tight[name]))
    return rows


def suite_kernel_thresholds(ctx: SuiteContext) -> List[ReportRow]:
    """在每组 (K1, K2) 下重算远场与近对角常数，各记一行"""
    cfg = KernelEvalConfig(rel_tol=ctx.config.kernel_rel_tol)
    rows = []
    for lam in ctx.config.lambdas:
        for k1 in ctx.config.regime_k1:
            for k2 in ctx.config.regime_k2:
                suprema = threshold_suprema(lam, cfg, RegimeConstants(k1, k2))
                params = format_parameters(**{'lambda': lam}, K1=k1, K2=k2)
                for name, value in suprema.items():
                    rows.append(ctx.recorded('kernel_thresholds', params, f"{name}_sup", value))
    return rows


def suite_measure_doubling(ctx: SuiteContext) -> List[ReportRow]:
    """m_λ(2I)/m_λ(I) 与体积可比常数"""
    rows = []
    centers = np.geomspace(1e-3, 1e3, 25)
    for lam in ctx.config.lambdas:
        doubling = max(doubling_ratio(lam, HalfLineInterval(x, r)) for x in centers for r in centers)
        ratios = [volume_comparability(lam, x, r) for x in centers for r in centers]
        params = format_parameters(**{'lambda': lam})
        rows.append(ctx.recorded('measure_doubling', params, 'doubling_sup', doubling))
        rows.append(ctx.recorded('measure_doubling', params, 'volume_upper', max(ratios)))
        rows.append(ctx.recorded('measure_doubling', params, 'volume_lower_inverse', 1.0 / min(ratios)))
    return rows


# ---------------------------------------------------------------- 变差与计数

def _random_profile(rng: np.random.Generator, max_length: int) -> TruncationProfile:
    """值为 1/4 整数倍的随机轮廓，差值在浮点下精确"""
    length = int(rng.integers(2, max_length + 1))
    values = rng.integers(-16, 17, length) / 4.0
    return TruncationProfile.from_values(values)


def _inequality_violations(profile: TruncationProfile, ladder: EpsilonLadder, rho: float, alpha: float,
                           gamma: float) -> Tuple[int, int, int]:
    """(O′ ≤ O ≤ 2O′ 违例, N ≤ Λ 违例, βΛ^{1/ρ} ≤ V_ρ 违例)"""
    o = oscillation(profile, ladder)
    o_prime = oscillation_prime(profile, ladder)
    chain = int(not (o_prime <= o <= 2.0 * o_prime))
    beta = gamma - alpha
    crossing = int(upcross_count(profile, alpha, gamma) > jump_count(profile, beta))
    variation = rho_variation(profile, rho)
    jumps = jump_count(profile, beta)
    bound = variation * (1.0 + ROUNDOFF_SLACK)
    jump = int(beta * jumps ** (1.0 / rho) > bound)
    return chain, crossing, jump


def suite_exact_inequalities(ctx: SuiteContext) -> List[ReportRow]:
    """O′ ≤ O ≤ 2O′、N ≤ Λ(γ-α)、βΛ^{1/ρ} ≤ V_ρ 在随机轮廓与计算所得轮廓上逐个成立"""
    cfg = ctx.config
    rng = np.random.default_rng(cfg.seed)
    rho = cfg.rho_values[0]
    totals = np.zeros(3, dtype=int)
    for _ in range(cfg.random_profiles):
        profile = _random_profile(rng, 64)
        stride = int(rng.integers(1, 4))
        if len(profile) <= stride:
            stride = 1
        ladder = EpsilonLadder(profile.epsilons[::stride])
        alpha = float(rng.integers(-12, 12)) / 4.0 + 0.125
        gamma = alpha + float(rng.integers(1, 8)) / 4.0
        totals += _inequality_violations(profile, ladder, rho, alpha, gamma)
    params = format_parameters(profiles=cfg.random_profiles, rho=rho)
    rows = [ReportRow('exact_inequalities', params, name, float(count), 0.0, '==', 'exact')
            for name, count in zip(('oscillation_chain', 'upcross_vs_jumps', 'jumps_vs_variation'), totals)]

    ladder = cfg.ladder()
    for lam in cfg.lambdas:
        computed = np.zeros(3, dtype=int)
        for fields in ctx.fields(lam, cfg.functions).values():
            for profile in fields.profiles():
                computed += _inequality_violations(profile, ladder, rho, cfg.alpha, cfg.gamma)
        params = format_parameters(**{'lambda': lam}, source='transform', rho=rho)
        rows.extend(ReportRow('exact_inequalities', params, name, float(count), 0.0, '==', 'exact')
                    for name, count in zip(('oscillation_chain', 'upcross_vs_jumps', 'jumps_vs_variation'), computed))
    return rows


def suite_oracle_equivalence(ctx: SuiteContext) -> List[ReportRow]:
    """动态规划与贪心计数和穷举结果逐个相等（长度 <= 12）"""
    rng = np.random.default_rng(ctx.config.seed + 1)
    mismatches = {'variation': 0, 'jumps': 0, 'upcrossings': 0}
    instances = 1000
    for _ in range(instances):
        length = int(rng.integers(2, 13))
        if rng.random() < 0.5:
            values = rng.integers(-8, 9, length) / 4.0
        else:
            values = rng.normal(size=length)
        profile = TruncationProfile.from_values(values)
        rho = float(rng.choice([2.5, 3.0, 4.0]))
        beta = float(rng.choice([0.25, 0.5, 1.0]))
        alpha = float(rng.integers(-4, 4)) / 4.0 + 0.125
        gamma = alpha + float(rng.integers(1, 4)) / 4.0
        mismatches['variation'] += rho_variation(profile, rho) != brute_force_variation(profile, rho)
        mismatches['jumps'] += jump_count(profile, beta) != brute_force_jumps(values, beta)
        mismatches['upcrossings'] += upcross_count(profile, alpha, gamma) != brute_force_upcrossings(values[::-1], alpha, gamma)
    params = format_parameters(instances=instances)
    return [ReportRow('oracle_equivalence', params, f"{name}_mismatches", float(count), 0.0, '==', 'exact')
            for name, count in mismatches.items()]


# ---------------------------------------------------------------- 算子

def suite_t1_constant(ctx: SuiteContext) -> List[ReportRow]:
    """‖T1 f‖_p/‖f‖_p <= p·2^{-(2λ+1)/p}/(2λ+1)"""
    cfg = ctx.config
    tcfg = ctx.transform_config()
    rows = []
    for lam in (0.5, 1.0):
        for p in (2.0, 4.0):
            worst = 0.0
            for fid in cfg.functions:
                f = function_from_id(fid)
                grid = RadialGrid(1e-4, f.support.upper, cfg.norm_cells)
                values = t1_values(f, grid.points, tcfg)
                ratio = field_norm(lam, values, grid, p) / lp_norm(lam, f, p, cfg.norm_grid(f.support.upper))
                worst = max(worst, ratio)
            target = t1_norm_constant(lam, p) + 1e-6
            rows.append(ReportRow('t1_constant', format_parameters(**{'lambda': lam}, p=p),
                                  'max_norm_ratio', worst, target, '<=', 'analytic'))
    return rows


def _random_case(rng: np.random.Generator, functions: Sequence[str]):
    f = function_from_id(functions[int(rng.integers(len(functions)))])
    x = float(np.exp(rng.uniform(np.log(0.2), np.log(5.0))))
    inner = float(np.exp(rng.uniform(np.log(1e-3), np.log(0.5)))) * x
    outer = inner * float(np.exp(rng.uniform(np.log(1.5), np.log(50.0))))
    return f, x, AnnulusBand(inner, outer)


def suite_split_identity(ctx: SuiteContext) -> List[ReportRow]:
    """I1+I2+I3+I4 等于直接计算的环带增量，并记录逐点控制常数"""
    cfg = ctx.config
    tcfg = ctx.transform_config()
    rng = np.random.default_rng(cfg.seed + 2)
    rows = []
    for lam in cfg.lambdas:
        worst = 0.0
        constants = {'i1_vs_maximal': 0.0, 'i2_vs_t1': 0.0, 'i4_vs_t2_maximal': 0.0, 'hilbert_weight_defect': 0.0}
        for _ in range(cfg.random_cases):
            f, x, band = _random_case(rng, cfg.functions)
            parts = split_truncation(lam, f, x, band, tcfg)
            direct = annulus_integral(lam, f, x, band.inner, band.outer, tcfg)
            scale = max(abs(direct), parts.magnitude)
            if scale > 0:
                worst = max(worst, abs(parts.total - direct) / scale)

            grid = RadialGrid(1e-4, max(10.0 * x, f.support.upper * 2.0), 1024)
            maximal = maximal_lambda(lam, f, x, grid)
            tail = t1(f, x, tcfg)
            log_term = t2(lam, f, x, tcfg)
            if maximal > 0:
                constants['i1_vs_maximal'] = max(constants['i1_vs_maximal'], abs(parts.i1) / maximal)
            if tail > 0:
                constants['i2_vs_t1'] = max(constants['i2_vs_t1'], abs(parts.i2) / tail)
            if log_term + maximal > 0:
                constants['i4_vs_t2_maximal'] = max(constants['i4_vs_t2_maximal'],
                                                    abs(parts.i4) / (log_term + maximal))
            mass = local_band_mass(f, x, band, tcfg)
            if mass > 0:
                constants['hilbert_weight_defect'] = max(constants['hilbert_weight_defect'],
                                                         weighted_hilbert_defect(lam, f, x, band, tcfg) / mass)
        params = format_parameters(**{'lambda': lam}, cases=cfg.random_cases)
        rows.append(ReportRow('split_identity', params, 'max_relative_gap', worst, 1e-8, '<', 'tolerance'))
        rows.extend(ctx.recorded('split_identity', params, name, value) for name, value in constants.items())
    return rows


# ---------------------------------------------------------------- CZ 分解

def suite_cz_decomposition(ctx: SuiteContext) -> List[ReportRow]:
    """六项分解性质在 η 扫描上全部成立"""
    cfg = ctx.config
    rows = []
    for lam in cfg.cz_lambdas:
        for fid in cfg.cz_functions:
            f = function_from_id(fid)
            grid = RadialGrid(1e-4, max(cfg.grid_upper, 2.0 * f.support.upper), cfg.norm_cells)
            failed = 0
            mean_zero = bad_set = overlap = dilated = 0.0
            for eta in cfg.cz_etas():
                decomposition = cz_decompose(lam, f, float(eta))
                report = verify_cz(decomposition, f, grid)
                failed += sum(not item.passed for item in report.items)
                mean_zero = max(mean_zero, report.item('bad_mean_zero').measured)
                bad_set = max(bad_set, report.item('bad_set').measured)
                overlap = max(overlap, report.item('overlap').measured)
                dilated = max(dilated, report.dilated_ratio)
            params = format_parameters(**{'lambda': lam}, f=fid)
            rows.extend([
                ReportRow('cz_decomposition', params, 'failed_items', float(failed), 0.0, '==', 'exact'),
                ReportRow('cz_decomposition', params, 'mean_zero_residual', mean_zero, 1e-8, '<', 'tolerance'),
                ReportRow('cz_decomposition', params, 'bad_set_ratio', bad_set, 1.0, '<=', 'exact'),
                ReportRow('cz_decomposition', params, 'max_overlap', overlap, 1.0, '<=', 'exact'),
                ctx.recorded('cz_decomposition', params, 'dilated_bad_set', dilated),
            ])
    return rows


# ---------------------------------------------------------------- 弱型与 L^p

def _weak11_lambda(cfg: SweepConfig) -> float:
    return 1.0 if 1.0 in cfg.lambdas else cfg.lambdas[0]


def suite_weak11(ctx: SuiteContext) -> List[ReportRow]:
    """f = χ_(1,2) 的 sup_η η·m_λ{Op f > η}/‖f‖₁ 在网格加密下稳定"""
    cfg = ctx.config
    lam = _weak11_lambda(cfg)
    fid = 'indicator(1,2)'
    ladder = cfg.ladder()
    rho = cfg.rho_values[0]
    norm_l1 = ctx.norm(lam, fid, 1.0)
    coarse_grid = cfg.grid()
    fine_grid = coarse_grid.refine()
    coarse = ctx.fields(lam, [fid], coarse_grid)[fid]
    fine = ctx.fields(lam, [fid], fine_grid)[fid]
    rows = []
    for operator in OPERATORS:
        tables = [weak11_from_field(lam, fields.field(operator, ladder, rho), fields.grid, cfg.etas(), norm_l1)
                  for fields in (coarse, fine)]
        params = format_parameters(**{'lambda': lam}, f=fid, operator=operator)
        rows.append(ctx.recorded('weak11', params, 'sup_markov_ratio', tables[0].sup_ratio))
        rows.append(ReportRow('weak11', params, 'refinement_drift',
                              _drift(tables[1].sup_ratio, tables[0].sup_ratio), STABILITY_DRIFT, '<=', 'stability'))
        rows.append(ReportRow('weak11', params, 'markov_consistency', tables[0].markov_ratio,
                              1.0 + ROUNDOFF_SLACK, '<=', 'exact'))
    return rows


def _operator_label(operator: str, rho: float) -> str:
    return f"V{rho:g}" if operator == 'V' else operator


def lp_ratio_sweep(ctx: SuiteContext, operator: str) -> List[ReportRow]:
    """
    ‖Op f‖_p/‖f‖_p 在整个函数族上的公共上界，与回归常数比较

    refine_check 打开时另比较加密网格上的上界（漂移 < 2 倍）。
    """
    if operator not in OPERATORS:
        raise DomainError(f"未知的算子: {operator}")
    cfg = ctx.config
    ladder = cfg.ladder()
    rhos = cfg.rho_values if operator == 'V' else (cfg.rho_values[0],)
    grids = [cfg.grid()] + ([cfg.grid().refine()] if cfg.refine_check else [])
    rows = []
    for lam in cfg.lambdas:
        per_grid = [ctx.fields(lam, cfg.functions, grid) for grid in grids]
        for rho in rhos:
            label = _operator_label(operator, rho)
            for p in cfg.p_values:
                bounds = []
                for fields_by_f in per_grid:
                    ratios = [field_norm(lam, fields.field(operator, ladder, rho), fields.grid, p)
                              / ctx.norm(lam, fid, p) for fid, fields in fields_by_f.items()]
                    bounds.append(max(ratios))
                params = format_parameters(**{'lambda': lam}, p=p, operator=label)
                rows.append(ctx.recorded('lp_ratio', params, 'common_bound', bounds[0]))
                if len(bounds) > 1:
                    rows.append(ReportRow('lp_ratio', params, 'refinement_fold', _fold(bounds[0], bounds[1]),
                                          REGRESSION_SLACK, '<', 'stability'))
    return rows


def suite_lp_ratio(ctx: SuiteContext) -> List[ReportRow]:
    return lp_ratio_sweep(ctx, 'O') + lp_ratio_sweep(ctx, 'V')


def bmo_ratio_sweep(ctx: SuiteContext) -> List[ReportRow]:
    """bmo_norm(O f)/sup|f|，并比较区间族加密后的漂移"""
    cfg = ctx.config
    ladder = cfg.ladder()
    grid = cfg.grid()
    family = BMOFamily.log_spaced(grid.lower, grid.upper, cfg.bmo_centers, cfg.bmo_radii)
    rows = []
    for lam in cfg.lambdas:
        for fid, fields in ctx.fields(lam, cfg.bmo_functions, grid).items():
            f = function_from_id(fid)
            params = format_parameters(**{'lambda': lam}, f=fid)
            values = fields.field('O', ladder)
            bad = np.flatnonzero(~np.isfinite(values))
            if bad.size:
                x = float(grid.points[bad[0]])
                logger.error(f"O f 在 x={x:.6g} 处不是有限值: {fid}")
                rows.append(ReportRow('bmo_ratio', params, f"non_finite_at_x={x:.6g}", float('nan'), 0.0,
                                      '==', 'exact'))
                continue
            field_function = piecewise_constant(f"O[{fid}]", grid.edges, values)
            estimate = bmo_norm(lam, field_function, family, grid)
            refined = bmo_norm(lam, field_function, family.refine(), grid)
            sup = f.sup_bound or 1.0
            rows.append(ctx.recorded('bmo_ratio', params, 'bmo_over_sup', estimate.value / sup))
            rows.append(ReportRow('bmo_ratio', params, 'family_refinement_drift',
                                  _drift(refined.value, estimate.value), STABILITY_DRIFT, '<=', 'stability'))
    return rows


def corollary_sweep(ctx: SuiteContext) -> List[ReportRow]:
    """
    跳跃数与上穿数的 L^p 界及逐点比较

    逐点：β·Λ^{1/ρ} <= V_ρ、N(α,γ) <= Λ(γ-α)；
    范数：β‖Λ_β^{1/ρ}‖_p/‖f‖_p 与 (γ-α)‖N^{1/ρ}‖_p/‖f‖_p 为回归常数；
    弱型尾部：sup_n β·n^{1/ρ}·m_λ{Λ >= n}/‖f‖₁。
    """
    cfg = ctx.config
    gap = cfg.gamma - cfg.alpha
    rows = []
    for lam in cfg.lambdas:
        fields_by_f = ctx.fields(lam, cfg.functions)
        cells = cfg.grid().cell_measures(lam)
        for rho in cfg.rho_values:
            pointwise_jump = pointwise_cross = 0
            norm_constants = {p: 0.0 for p in cfg.p_values}
            cross_constants = {p: 0.0 for p in cfg.p_values}
            tail_jump = tail_cross = 0.0
            for fid, fields in fields_by_f.items():
                variation = fields.field('V', cfg.ladder(), rho)
                crossings = fields.upcrossings(cfg.alpha, cfg.gamma)
                pointwise_cross += int(np.sum(crossings > fields.jumps(gap)))
                norm_l1 = ctx.norm(lam, fid, 1.0)
                for beta in cfg.betas:
                    jumps = fields.jumps(beta)
                    pointwise_jump += int(np.sum(beta * jumps ** (1.0 / rho) > variation * (1.0 + ROUNDOFF_SLACK)))
                    for p in cfg.p_values:
                        scaled = beta * field_norm(lam, jumps ** (1.0 / rho), fields.grid, p) / ctx.norm(lam, fid, p)
                        norm_constants[p] = max(norm_constants[p], scaled)
                    for n in range(1, int(jumps.max()) + 1 if jumps.size else 1):
                        tail_jump = max(tail_jump, beta * n ** (1.0 / rho) * float(np.sum(cells[jumps >= n])) / norm_l1)
                for p in cfg.p_values:
                    scaled = gap * field_norm(lam, crossings ** (1.0 / rho), fields.grid, p) / ctx.norm(lam, fid, p)
                    cross_constants[p] = max(cross_constants[p], scaled)
                for n in range(1, int(crossings.max()) + 1 if crossings.size else 1):
                    tail_cross = max(tail_cross, gap * n ** (1.0 / rho) * float(np.sum(cells[crossings >= n])) / norm_l1)

            params = format_parameters(**{'lambda': lam}, rho=rho)
            rows.append(ReportRow('corollary', params, 'jumps_vs_variation_violations', float(pointwise_jump),
                                  0.0, '==', 'exact'))
            rows.append(ReportRow('corollary', params, 'upcross_vs_jumps_violations', float(pointwise_cross),
                                  0.0, '==', 'exact'))
            for p in cfg.p_values:
                p_params = format_parameters(**{'lambda': lam}, rho=rho, p=p)
                rows.append(ctx.recorded('corollary', p_params, 'jump_norm_constant', norm_constants[p]))
                rows.append(ctx.recorded('corollary', p_params, 'upcross_norm_constant', cross_constants[p]))
            rows.append(ctx.recorded('corollary', params, 'jump_weak_tail', tail_jump))
            rows.append(ctx.recorded('corollary', params, 'upcross_weak_tail', tail_cross))
    return rows


SUITES: Dict[str, Callable[[SuiteContext], List[ReportRow]]] = {
    'kernel_closed_form': suite_kernel_closed_form,
    'kernel_homogeneity': suite_kernel_homogeneity,
    'kernel_regimes': suite_kernel_regimes,
    'kernel_thresholds': suite_kernel_thresholds,
    'measure_doubling': suite_measure_doubling,
    'exact_inequalities': suite_exact_inequalities,
    'oracle_equivalence': suite_oracle_equivalence,
    't1_constant': suite_t1_constant,
    'split_identity': suite_split_identity,
    'cz_decomposition': suite_cz_decomposition,
    'weak11': suite_weak11,
    'lp_ratio': suite_lp_ratio,
    'bmo_ratio': bmo_ratio_sweep,
    'corollary': corollary_sweep,
}


def run_suites(config: SweepConfig, suites: Optional[Sequence[str]] = None, calibrate: bool = False,
               store: RegressionStore = None, workers: int = None,
               progress: Callable[[str, List[ReportRow]], None] = None, frozen: bool = False) -> List[ReportRow]:
    """
    运行选定的套件，返回按 (suite, parameters, quantity) 排序的结果

    单个套件抛出的异常记为一条失败结果，不影响其他套件。
    frozen 为 True 时不写入新的回归常数，缺少记录的比较判为未通过。
    """
    if frozen and calibrate:
        raise DomainError("标定与冻结模式不能同时使用")
    names = list(suites) if suites else list(SUITES)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise DomainError(f"未知的验证套件: {', '.join(unknown)}")
    ctx = SuiteContext(config, store or RegressionStore(), calibrate, workers or worker_count(), frozen)
    rows: List[ReportRow] = []
    for name in names:
        logger.info(f"运行验证套件: {name}")
        try:
            suite_rows = SUITES[name](ctx)
        except Exception as e:
            logger.error(f"验证套件 {name} 运行失败: {e}")
            suite_rows = [ReportRow(name, '', f"error:{type(e).__name__}", float('nan'), 0.0, '==', 'exact')]
        failed = sum(not row.passed for row in suite_rows)
        logger.info(f"验证套件 {name} 完成: {len(suite_rows)} 条结果, {failed} 条未通过")
        rows.extend(suite_rows)
        if progress is not None:
            progress(name, suite_rows)
    if ctx.new_keys and not calibrate:
        logger.warning(f"{len(ctx.new_keys)} 个回归常数首次记录，这些条目本次只是标定，不构成回归比较")
    ctx.store.save()
    return sorted(rows, key=lambda row: row.key)
