"""
测度空间模块
半直线 (0, ∞) 上的测度 dm_λ(y) = y^{2λ} dy：区间、网格、测度与 L^p 范数
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional, Tuple, Union

import numpy as np
from scipy.special import roots_legendre

from src.constants import GRID_CELLS, GRID_LOWER, GRID_UPPER
from src.core.errors import DomainError, MissingDecayError
from src.utils.quadrature import integrate_kronrod, panels_from_breakpoints

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BesselParameter:
    """权指数 λ > 0"""
    value: float

    def __post_init__(self):
        value = float(self.value)
        if not np.isfinite(value) or value <= 0:
            raise DomainError(f"λ 必须为正数，收到 {self.value}")
        object.__setattr__(self, 'value', value)

    @property
    def exponent(self) -> float:
        """测度的齐次指数 2λ+1"""
        return 2.0 * self.value + 1.0

    def __float__(self) -> float:
        return self.value


LambdaLike = Union[float, int, BesselParameter]


def as_lambda(lam: LambdaLike) -> float:
    """校验并取出 λ 的数值"""
    if isinstance(lam, BesselParameter):
        return lam.value
    return BesselParameter(lam).value


@dataclass(frozen=True)
class HalfLineInterval:
    """
    区间 I(x, r) = (x - r, x + r) ∩ (0, ∞)

    lower/upper 可由 from_endpoints 精确给定，否则由中心和半径推出。
    """
    center: float
    radius: float
    lower: Optional[float] = field(default=None, compare=False)
    upper: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.center) and self.center > 0):
            raise DomainError(f"区间中心必须为正数，收到 {self.center}")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise DomainError(f"区间半径必须为正数，收到 {self.radius}")
        if self.lower is None:
            object.__setattr__(self, 'lower', max(self.center - self.radius, 0.0))
        if self.upper is None:
            object.__setattr__(self, 'upper', self.center + self.radius)

    @classmethod
    def from_endpoints(cls, lower: float, upper: float) -> 'HalfLineInterval':
        """由端点构造，0 <= lower < upper"""
        lower, upper = float(lower), float(upper)
        if lower < 0 or not upper > lower:
            raise DomainError(f"无效区间端点 ({lower}, {upper})")
        return cls(0.5 * (lower + upper), 0.5 * (upper - lower), lower, upper)

    def dilate(self, k: float) -> 'HalfLineInterval':
        """kI：中心不变，半径乘 k"""
        return HalfLineInterval(self.center, k * self.radius)

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return (y > self.lower) & (y < self.upper)


@dataclass(frozen=True)
class EpsilonLadder:
    """严格递减的正截断半径序列 ε_1 > ε_2 > ... > ε_m"""
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) < 2:
            raise DomainError("截断序列至少需要两个半径")
        if any(not np.isfinite(v) or v <= 0 for v in values):
            raise DomainError("截断半径必须为正数")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise DomainError("截断半径必须严格递减")
        object.__setattr__(self, 'values', values)

    @classmethod
    def geometric(cls, start: float, ratio: float, length: int) -> 'EpsilonLadder':
        """ε_i = start / ratio^(i-1)"""
        if ratio <= 1:
            raise DomainError(f"几何比必须大于 1，收到 {ratio}")
        return cls(tuple(start / ratio ** i for i in range(length)))

    def __len__(self) -> int:
        return len(self.values)

    def bands(self) -> Iterator[Tuple[float, float]]:
        """依次给出 (ε_i, ε_{i+1})"""
        return zip(self.values[:-1], self.values[1:])

    def subdivided(self, k: int) -> np.ndarray:
        """每个区段 [ε_{i+1}, ε_i] 几何细分为 k 段，返回包含全部端点的递减半径"""
        if k < 1:
            raise DomainError(f"细分数必须 >= 1，收到 {k}")
        radii = [self.values[0]]
        for outer, inner in self.bands():
            step = (inner / outer) ** (1.0 / k)
            radii.extend(outer * step ** j for j in range(1, k))
            radii.append(inner)
        return np.array(radii)


@dataclass(frozen=True)
class RadialGrid:
    """
    正半轴上的采样网格

    edges 为 n+1 个单元边界，points 为单元中心；积分时另加原点单元 (0, lower)。
    order 为每个单元的 Gauss-Legendre 阶数，1 即中点公式。
    """
    lower: float = GRID_LOWER
    upper: float = GRID_UPPER
    n: int = GRID_CELLS
    spacing: str = 'log'
    order: int = 1

    def __post_init__(self):
        if not (0 < self.lower < self.upper):
            raise DomainError(f"网格范围无效: [{self.lower}, {self.upper}]")
        if self.n < 1:
            raise DomainError(f"网格单元数必须 >= 1，收到 {self.n}")
        if self.spacing not in ('log', 'uniform'):
            raise DomainError(f"未知的网格间距策略: {self.spacing}")
        if self.order < 1:
            raise DomainError(f"单元求积阶数必须 >= 1，收到 {self.order}")

    @cached_property
    def edges(self) -> np.ndarray:
        if self.spacing == 'log':
            edges = np.geomspace(self.lower, self.upper, self.n + 1)
        else:
            edges = np.linspace(self.lower, self.upper, self.n + 1)
        edges[0], edges[-1] = self.lower, self.upper
        return edges

    @cached_property
    def points(self) -> np.ndarray:
        edges = self.edges
        if self.spacing == 'log':
            return np.sqrt(edges[:-1] * edges[1:])
        return 0.5 * (edges[:-1] + edges[1:])

    def refine(self) -> 'RadialGrid':
        """单元数加倍，新边界包含旧边界"""
        return RadialGrid(self.lower, self.upper, 2 * self.n, self.spacing, self.order)

    def cell_measures(self, lam: LambdaLike) -> np.ndarray:
        """每个单元的精确 dm_λ 测度"""
        return measure_between(as_lambda(lam), self.edges[:-1], self.edges[1:])

    def integration_edges(self, breaks=()) -> np.ndarray:
        """带原点的边界，并在支撑端点和断点处切开单元"""
        edges = np.concatenate([[0.0], self.edges])
        extra = np.asarray([b for b in breaks if 0 < b < self.upper], dtype=float)
        if extra.size:
            edges = np.union1d(edges, extra)
        return edges


def measure_between(lam: float, a, b, exponent: Optional[float] = None) -> np.ndarray:
    """
    ∫_a^b y^{2λ} dy = (b^{2λ+1} - a^{2λ+1}) / (2λ+1)，逐元素计算

    a > 0 时写成 b^e·(1 - (a/b)^e)，用 expm1/log1p 求括号内的值，既无相消误差也不会在 e 很大时溢出；
    exponent 可覆盖 2λ+1（Lebesgue 测度取 1）。
    """
    e = 2.0 * lam + 1.0 if exponent is None else exponent
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    positive = a > 0
    safe_a = np.where(positive, a, 1.0)
    relative = -np.expm1(-e * np.log1p((b - a) / safe_a)) * b ** e
    return np.where(positive, relative, b ** e) / e


def measure_interval(lam: LambdaLike, interval: HalfLineInterval) -> float:
    """m_λ(I) 的闭式值"""
    lam = as_lambda(lam)
    return float(measure_between(lam, interval.lower, interval.upper))


def volume_comparability(lam: LambdaLike, x: float, r: float) -> float:
    """m_λ(I(x, r)) / (x^{2λ} r + r^{2λ+1})"""
    lam = as_lambda(lam)
    interval = HalfLineInterval(x, r)
    return measure_interval(lam, interval) / (x ** (2 * lam) * r + r ** (2 * lam + 1))


def doubling_ratio(lam: LambdaLike, interval: HalfLineInterval) -> float:
    """m_λ(2I) / m_λ(I)"""
    return measure_interval(lam, interval.dilate(2.0)) / measure_interval(lam, interval)


def cell_integrals(func, edges: np.ndarray, weight_exponent: float, order: int = 1,
                   power: Optional[float] = None) -> np.ndarray:
    """
    逐单元计算 ∫ h(y) y^w dy，h = f（power 为 None）或 |f|^power

    Args:
        func: 向量化的被积函数
        edges: 递增边界（可以以 0 开始）
        weight_exponent: 权指数 w（dm_λ 取 2λ，Lebesgue 取 0）
        order: 1 为中点乘精确单元测度，否则为 Gauss-Legendre 节点
    """
    a, b = edges[:-1], edges[1:]

    def shaped(values):
        if power is None:
            return values
        return np.abs(values) ** power

    if order == 1:
        mids = 0.5 * (a + b)
        cell = measure_between(0.0, a, b, exponent=weight_exponent + 1.0)
        return shaped(np.asarray(func(mids), dtype=float)) * cell

    nodes, weights = roots_legendre(order)
    half = 0.5 * (b - a)
    ys = 0.5 * (a + b)[:, None] + half[:, None] * nodes[None, :]
    values = shaped(np.asarray(func(ys), dtype=float)) * ys ** weight_exponent
    return values @ weights * half


def lp_norm(lam: LambdaLike, f, p: float, grid: RadialGrid) -> float:
    """
    (∫ |f|^p dm_λ)^{1/p} 的网格求积

    无界支撑且未声明衰减的函数无法截断尾部，抛出 MissingDecayError。
    """
    lam = as_lambda(lam)
    if not p >= 1:
        raise DomainError(f"p 必须 >= 1，收到 {p}")
    if f.is_zero:
        return 0.0
    if f.support is None:
        if f.decay is None:
            raise MissingDecayError(f"函数 {f.name} 支撑无界且未声明衰减，无法计算 L^{p} 范数")
        if f.decay * p <= 2 * lam + 1:
            raise DomainError(f"函数 {f.name} 的衰减指数 {f.decay} 不足以保证 L^{p}(dm_λ) 可积")
    elif f.support.upper > grid.upper * (1 + 1e-12):
        raise DomainError(f"网格上界 {grid.upper} 未覆盖函数 {f.name} 的支撑")

    edges = grid.integration_edges(f.cut_points)
    if f.support is not None:
        edges = edges[edges <= f.support.upper]
        if edges[-1] < f.support.upper:
            edges = np.append(edges, f.support.upper)
    total = float(np.sum(cell_integrals(f, edges, 2 * lam, grid.order, power=p)))
    logger.debug(f"lp_norm: {f.name}, p={p}, λ={lam}, 积分={total:.6g}")
    return total ** (1.0 / p)


def interval_integrals(lam: LambdaLike, f, lowers, uppers, power: Optional[float] = None,
                       rel_tol: float = 1e-12, max_panels: int = 2000) -> np.ndarray:
    """
    逐区间自适应计算 ∫_{a_i}^{b_i} h dm_λ，h = f（power 为 None）或 |f|^power

    在 f 的支撑端点与断点处切开，未收敛时记录警告并返回估计值。
    """
    lam = as_lambda(lam)
    lowers = np.atleast_1d(np.asarray(lowers, dtype=float))
    uppers = np.atleast_1d(np.asarray(uppers, dtype=float))
    cuts = np.asarray(f.cut_points, dtype=float)
    point_lists = []
    for a, b in zip(lowers, uppers):
        if f.support is not None:
            a, b = max(a, f.support.lower), min(b, f.support.upper)
        if b <= a:
            point_lists.append(np.empty(0))
            continue
        inside = cuts[(cuts > a) & (cuts < b)]
        point_lists.append(np.concatenate([[a], inside, [b]]))
    lower, upper, groups = panels_from_breakpoints(point_lists, lowers.size)

    def integrand(y, gid):
        values = f(y)
        if power is not None:
            values = np.abs(values) ** power
        return values * y ** (2 * lam)

    result = integrate_kronrod(integrand, lower, upper, groups, lowers.size, rel_tol=rel_tol,
                               max_panels=max_panels, mag_tol=rel_tol * 1e-2)
    if not result.converged.all():
        logger.warning(f"区间积分未收敛: 函数 {f.name}, 最大误差界 {result.errors.max():.3g}")
    return result.values
