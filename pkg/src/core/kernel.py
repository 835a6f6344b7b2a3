"""
核函数模块
Bessel-Riesz 核 R(x, y) 的求积计算与四个区域诊断量

代换 u = cos θ、om = 1 - u 后，
R(x, y) = x^{-(2λ+1)} R(1, t)，t = y / x，
R(1, t) = -(2λ/π) ∫_0^2 ((1-t) + t·om) / ((1-t)^2 + 2t·om)^{λ+1} · om^{λ-1} (2-om)^{λ-1} d om
"""
import logging
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np
from scipy.special import beta as beta_function

from src.constants import (
    KERNEL_CACHE_SIZE,
    KERNEL_DIAGONAL_RATIO,
    KERNEL_MAX_SUBDIVISIONS,
    KERNEL_ORDER,
    KERNEL_REL_TOL,
    REGIME_K1,
    REGIME_K2,
)
from src.core.errors import ConvergenceError, DomainError, RegimeError, SingularityError
from src.core.measure import HalfLineInterval, LambdaLike, as_lambda, measure_interval
from src.utils.quadrature import integrate_jacobi, panels_from_breakpoints

logger = logging.getLogger(__name__)

KERNEL_CHUNK = 20_000


@dataclass(frozen=True)
class KernelEvalConfig:
    """核函数求积配置"""
    rel_tol: float = KERNEL_REL_TOL
    max_subdivisions: int = KERNEL_MAX_SUBDIVISIONS
    diagonal_ratio: float = KERNEL_DIAGONAL_RATIO
    order: int = KERNEL_ORDER

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-4):
            raise DomainError(f"核函数容差必须在 (0, 1e-4] 内，收到 {self.rel_tol}")
        if self.max_subdivisions < 8:
            raise DomainError(f"细分上限必须 >= 8，收到 {self.max_subdivisions}")
        if self.diagonal_ratio <= 0:
            raise DomainError(f"对角线切换比例必须为正，收到 {self.diagonal_ratio}")
        if self.order < 2:
            raise DomainError(f"面板求积阶数必须 >= 2，收到 {self.order}")


@dataclass(frozen=True)
class RegimeConstants:
    """
    区域常数 K1（远场阈值）、K2（近对角阈值）

    constants 保存实测的各区域界常数，形如 (("size", 1.2), ...)。
    """
    k1: float = REGIME_K1
    k2: float = REGIME_K2
    constants: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        if not self.k1 > 2:
            raise DomainError(f"K1 必须大于 2，收到 {self.k1}")
        if not (0.5 < self.k2 < 1):
            raise DomainError(f"K2 必须在 (1/2, 1) 内，收到 {self.k2}")

    def constant(self, name: str) -> float:
        return dict(self.constants)[name]

    def with_constant(self, name: str, value: float) -> 'RegimeConstants':
        merged = dict(self.constants)
        merged[name] = float(value)
        return RegimeConstants(self.k1, self.k2, tuple(sorted(merged.items())))


class KernelEvaluator:
    """
    固定 (λ, cfg) 的单位核 R(1, t) 计算器

    结果按 t 缓存；缓存可被多个线程并发读写，值是确定的，后写覆盖无害。
    """

    def __init__(self, lam: float, cfg: KernelEvalConfig):
        self.lam = lam
        self.cfg = cfg
        self._cache: Dict[float, Tuple[float, float, bool]] = {}
        self._lock = threading.Lock()

    def _initial_breakpoints(self, t: float) -> np.ndarray:
        """近对角时在 om = w·2^k 处预切分，w = (1-t)^2 / (2t) 为峰宽"""
        gap = 1.0 - t
        if t > 0 and abs(gap) < self.cfg.diagonal_ratio * np.sqrt(t):
            width = gap * gap / (2.0 * t)
            points = [0.0]
            point = width
            while point < 2.0:
                points.append(point)
                point *= 2.0
            points.append(2.0)
            return np.array(points)
        return np.array([0.0, 2.0])

    def _compute(self, ts: np.ndarray):
        if ts.size > KERNEL_CHUNK:
            parts = [self._compute(ts[i:i + KERNEL_CHUNK]) for i in range(0, ts.size, KERNEL_CHUNK)]
            return tuple(np.concatenate(column) for column in zip(*parts))
        lam = self.lam
        gaps = 1.0 - ts

        def integrand(om, op, gid):
            t = ts[gid]
            gap = gaps[gid]
            return (gap + t * om) / (gap * gap + 2.0 * t * om) ** (lam + 1.0)

        lower, upper, groups = panels_from_breakpoints([self._initial_breakpoints(t) for t in ts], ts.size)
        result = integrate_jacobi(
            integrand, lam - 1.0, lam - 1.0, lower, upper, groups, ts.size,
            rel_tol=self.cfg.rel_tol, order=self.cfg.order, max_panels=self.cfg.max_subdivisions,
        )
        factor = -2.0 * lam / np.pi
        return factor * result.values, abs(factor) * result.errors, result.converged

    def unit_kernel(self, t, strict: bool = True) -> np.ndarray:
        """
        R(1, t) 的向量化计算

        Args:
            t: 非负比值 y/x，不能等于 1
            strict: 为 True 时未收敛抛出 ConvergenceError，否则记录警告并返回估计值
        """
        t = np.asarray(t, dtype=float)
        if np.any(t == 1.0):
            raise SingularityError("核函数在 x = y 处无定义")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise DomainError("比值 y/x 必须为有限非负数")
        unique, inverse = np.unique(t.ravel(), return_inverse=True)
        values = np.empty(unique.size)
        errors = np.empty(unique.size)
        converged = np.empty(unique.size, dtype=bool)

        with self._lock:
            hits = [self._cache.get(float(u)) for u in unique]
        missing = np.array([hit is None for hit in hits], dtype=bool)
        for i, hit in enumerate(hits):
            if hit is not None:
                values[i], errors[i], converged[i] = hit

        if missing.any():
            new_values, new_errors, new_converged = self._compute(unique[missing])
            values[missing] = new_values
            errors[missing] = new_errors
            converged[missing] = new_converged
            with self._lock:
                if len(self._cache) > KERNEL_CACHE_SIZE:
                    self._cache.clear()
                for u, v, e, c in zip(unique[missing], new_values, new_errors, new_converged):
                    self._cache[float(u)] = (float(v), float(e), bool(c))

        if not converged.all():
            index = int(np.argmin(converged))
            message = f"核函数求积未收敛: λ={self.lam}, t={unique[index]:.17g}, 误差界 {errors[index]:.3g}"
            if strict:
                raise ConvergenceError(message, float(values[index]), float(errors[index]))
            logger.warning(message)
        return values[inverse].reshape(t.shape)


_evaluators: Dict[Tuple[float, KernelEvalConfig], KernelEvaluator] = {}
_evaluators_lock = threading.Lock()


def get_evaluator(lam: LambdaLike, cfg: KernelEvalConfig = None) -> KernelEvaluator:
    """按 (λ, cfg) 取共享的核计算器"""
    lam = as_lambda(lam)
    cfg = cfg or KernelEvalConfig()
    key = (lam, cfg)
    with _evaluators_lock:
        evaluator = _evaluators.get(key)
        if evaluator is None:
            evaluator = KernelEvaluator(lam, cfg)
            _evaluators[key] = evaluator
        return evaluator


def clear_kernel_cache() -> None:
    with _evaluators_lock:
        _evaluators.clear()


def riesz_kernel(lam: LambdaLike, x: float, y: float, cfg: KernelEvalConfig = None) -> float:
    """
    R(x, y)，x > 0，y >= 0，x != y

    Raises:
        SingularityError: x == y
        ConvergenceError: 细分预算内未达到容差（携带估计值与误差界）
    """
    lam = as_lambda(lam)
    if not (np.isfinite(x) and x > 0):
        raise DomainError(f"x 必须为正数，收到 {x}")
    if not (np.isfinite(y) and y >= 0):
        raise DomainError(f"y 必须为非负数，收到 {y}")
    if x == y:
        raise SingularityError(f"核函数在 x = y = {x} 处无定义")
    scale = x ** -(2 * lam + 1)
    try:
        return float(scale * get_evaluator(lam, cfg).unit_kernel(y / x))
    except ConvergenceError as e:
        raise ConvergenceError(str(e), scale * e.estimate, scale * e.error_bound) from e


def riesz_kernel_many(lam: LambdaLike, x, y, cfg: KernelEvalConfig = None, strict: bool = True) -> np.ndarray:
    """R(x, y) 的逐元素版本"""
    lam = as_lambda(lam)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x <= 0) or np.any(y < 0):
        raise DomainError("要求 x > 0 且 y >= 0")
    if np.any(x == y):
        raise SingularityError("核函数在 x = y 处无定义")
    return x ** -(2 * lam + 1) * get_evaluator(lam, cfg).unit_kernel(y / x, strict=strict)


def kernel_at_origin(lam: LambdaLike, x: float) -> float:
    """y = 0 时的闭式值 -(2λ/π) B(λ, 1/2) x^{-(2λ+1)}"""
    lam = as_lambda(lam)
    return float(-(2 * lam / np.pi) * beta_function(lam, 0.5) * x ** -(2 * lam + 1))


def principal_term(lam: float, x, y):
    """近对角主项 -(1/π)(xy)^{-λ}/(x-y)"""
    return -(x * y) ** -lam / (np.pi * (x - y))


def kernel_size_ratio(lam: LambdaLike, x: float, y: float, cfg: KernelEvalConfig = None) -> float:
    """|R(x, y)| · m_λ(I(x, |x-y|))"""
    lam = as_lambda(lam)
    value = riesz_kernel(lam, x, y, cfg)
    return abs(value) * measure_interval(lam, HalfLineInterval(x, abs(x - y)))


def kernel_smoothness_ratio(lam: LambdaLike, x: float, y0: float, z: float, cfg: KernelEvalConfig = None) -> float:
    """
    (|R(x,y0) - R(x,z)| + |R(y0,x) - R(z,x)|) / ((|y0-z|/|y0-x|) / m_λ(I(x, |y0-x|)))

    要求 |y0 - z| < |x - y0| / 2。
    """
    lam = as_lambda(lam)
    if min(x, y0, z) <= 0:
        raise DomainError("x, y0, z 必须为正数")
    if not abs(y0 - z) < abs(x - y0) / 2:
        raise DomainError(f"要求 |y0-z| < |x-y0|/2: x={x}, y0={y0}, z={z}")
    if z == y0:
        return 0.0
    difference = (abs(riesz_kernel(lam, x, y0, cfg) - riesz_kernel(lam, x, z, cfg))
                  + abs(riesz_kernel(lam, y0, x, cfg) - riesz_kernel(lam, z, x, cfg)))
    distance = abs(y0 - x)
    bound = (abs(y0 - z) / distance) / measure_interval(lam, HalfLineInterval(x, distance))
    return difference / bound


def kernel_far_field_ratio(lam: LambdaLike, y: float, z: float, rc: RegimeConstants = None,
                           cfg: KernelEvalConfig = None) -> float:
    """R(y, z) · z^{2λ+2} / y，要求 z > K1·y"""
    lam = as_lambda(lam)
    rc = rc or RegimeConstants()
    if not (y > 0 and z > rc.k1 * y):
        raise RegimeError(f"远场区域要求 z > K1·y: y={y}, z={z}, K1={rc.k1}")
    return riesz_kernel(lam, y, z, cfg) * z ** (2 * lam + 2) / y


def kernel_diagonal_defect(lam: LambdaLike, y: float, z: float, rc: RegimeConstants = None,
                           cfg: KernelEvalConfig = None) -> float:
    """
    |R(y,z) + (1/π)(yz)^{-λ}/(y-z)| · y^{2λ+1} / (log₊(√(yz)/|y-z|) + 1)，要求 z/y ∈ (K2, 1)
    """
    lam = as_lambda(lam)
    rc = rc or RegimeConstants()
    if not (y > 0 and z > 0 and rc.k2 < z / y < 1):
        raise RegimeError(f"近对角区域要求 z/y ∈ (K2, 1): y={y}, z={z}, K2={rc.k2}")
    defect = abs(riesz_kernel(lam, y, z, cfg) - principal_term(lam, y, z))
    log_plus = max(np.log(np.sqrt(y * z) / abs(y - z)), 0.0)
    return defect * y ** (2 * lam + 1) / (log_plus + 1.0)


@lru_cache(maxsize=128)
def far_field_constant(lam: float, k1: float = REGIME_K1, cfg: KernelEvalConfig = None) -> float:
    """
    远场上界常数 C̃ 的保守估计：2 · max R(1,t)·t^{2λ+2}，t ∈ {K1, 10K1, 100K1, 1000K1}

    用于截断变换的尾部截断点。
    """
    ts = k1 * np.array([1.0, 10.0, 100.0, 1000.0])
    values = get_evaluator(lam, cfg).unit_kernel(ts, strict=False)
    return float(2.0 * np.max(np.abs(values) * ts ** (2 * lam + 2)))
