"""
测试函数模块
可逐点求值的 (0, ∞) 上函数，附带支撑、上界、衰减与断点声明，以及按名称重建的注册表
"""
import logging
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import DomainError
from src.core.measure import HalfLineInterval

logger = logging.getLogger(__name__)

SMOOTHNESS_TAGS = ('piecewise-constant', 'smooth', 'bounded-oscillatory')


@dataclass(frozen=True)
class TestFunction:
    """
    测试函数

    name 同时是注册表标识，工作进程凭它重建函数。
    decay 为 d 时声明 |f(y)| <= sup_bound * y^{-d}（y >= 1）。
    """
    __test__ = False

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)
    support: Optional[HalfLineInterval] = None
    smoothness: str = 'piecewise-constant'
    sup_bound: Optional[float] = None
    decay: Optional[float] = None
    breakpoints: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.smoothness not in SMOOTHNESS_TAGS:
            raise DomainError(f"未知的光滑性标签: {self.smoothness}")

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.asarray(self.evaluator(y), dtype=float) + np.zeros_like(y)

    @property
    def is_zero(self) -> bool:
        return self.sup_bound == 0

    @property
    def cut_points(self) -> Tuple[float, ...]:
        """支撑端点与断点，积分时在这些点切开"""
        points = set(self.breakpoints)
        if self.support is not None:
            points.update((self.support.lower, self.support.upper))
        return tuple(sorted(p for p in points if p > 0))

    def check_support(self, rng: np.random.Generator, samples: int = 64) -> bool:
        """在支撑外随机抽点，确认函数值为 0"""
        if self.support is None:
            return True
        outside = np.concatenate([
            rng.uniform(0.0, self.support.lower, samples) if self.support.lower > 0 else np.empty(0),
            self.support.upper * (1.0 + rng.exponential(1.0, samples)),
        ])
        return bool(np.all(self(outside) == 0.0))


def _fmt(value: float) -> str:
    text = repr(float(value))
    return text[:-2] if text.endswith('.0') else text


def zero() -> TestFunction:
    return TestFunction('zero', lambda y: np.zeros_like(y), None, 'smooth', sup_bound=0.0)


def constant(c: float = 1.0) -> TestFunction:
    """f ≡ c，支撑无界"""
    c = float(c)
    return TestFunction(f"constant({_fmt(c)})", lambda y: np.full_like(y, c), None, 'smooth',
                        sup_bound=abs(c))


def indicator(a: float, b: float) -> TestFunction:
    """χ_{(a,b)}"""
    support = HalfLineInterval.from_endpoints(a, b)
    return TestFunction(
        f"indicator({_fmt(a)},{_fmt(b)})",
        lambda y: ((y > a) & (y < b)).astype(float),
        support, 'piecewise-constant', sup_bound=1.0, breakpoints=(float(a), float(b)),
    )


def power_bump(a: float, b: float) -> TestFunction:
    """y^a χ_{(0,b)}，a >= 0"""
    if a < 0:
        raise DomainError(f"幂指数必须 >= 0，收到 {a}")
    support = HalfLineInterval.from_endpoints(0.0, b)
    return TestFunction(
        f"power({_fmt(a)},{_fmt(b)})",
        lambda y: np.where((y > 0) & (y < b), np.abs(y) ** a, 0.0),
        support, 'smooth', sup_bound=float(b) ** a, breakpoints=(float(b),),
    )


def smooth_bump(c: float, r: float) -> TestFunction:
    """exp(-1/(1-s^2))，s = (y-c)/r，支撑 (c-r, c+r)"""
    if c - r < 0:
        raise DomainError(f"光滑鼓包的支撑必须在正半轴内: c={c}, r={r}")

    def evaluate(y):
        s = (y - c) / r
        inside = np.abs(s) < 1
        safe = np.where(inside, 1.0 - s * s, 1.0)
        return np.where(inside, np.exp(-1.0 / safe), 0.0)

    support = HalfLineInterval.from_endpoints(c - r, c + r)
    return TestFunction(f"bump({_fmt(c)},{_fmt(r)})", evaluate, support, 'smooth', sup_bound=float(np.exp(-1.0)))


def sign_step(c: float = 1.0) -> TestFunction:
    """sign(y - c)，有界但支撑无界"""
    return TestFunction(f"sign({_fmt(c)})", lambda y: np.sign(y - c), None, 'bounded-oscillatory',
                        sup_bound=1.0, breakpoints=(float(c),))


def step_pair(a: float, b: float, c: float) -> TestFunction:
    """χ_{(a,b)} - χ_{(b,c)}"""
    if not (0 <= a < b < c):
        raise DomainError(f"阶梯断点必须满足 0 <= a < b < c: ({a}, {b}, {c})")
    support = HalfLineInterval.from_endpoints(a, c)
    return TestFunction(
        f"steps({_fmt(a)},{_fmt(b)},{_fmt(c)})",
        lambda y: ((y > a) & (y < b)).astype(float) - ((y > b) & (y < c)).astype(float),
        support, 'bounded-oscillatory', sup_bound=1.0, breakpoints=(float(a), float(b), float(c)),
    )


def absolute(f: TestFunction) -> TestFunction:
    """|f|"""
    return TestFunction(f"abs({f.name})", lambda y: np.abs(f(y)), f.support, f.smoothness,
                        f.sup_bound, f.decay, f.breakpoints)


def linear_combination(coefficients: Sequence[float], functions: Sequence[TestFunction]) -> TestFunction:
    """Σ c_i f_i，支撑取凸包，上界取 Σ|c_i| sup|f_i|"""
    if len(coefficients) != len(functions) or not functions:
        raise DomainError("系数与函数数量不一致")
    coefficients = tuple(float(c) for c in coefficients)

    def evaluate(y):
        return sum(c * f(y) for c, f in zip(coefficients, functions))

    supports = [f.support for f in functions]
    support = None
    if all(s is not None for s in supports):
        support = HalfLineInterval.from_endpoints(min(s.lower for s in supports), max(s.upper for s in supports))
    bounds = [f.sup_bound for f in functions]
    sup_bound = None if any(b is None for b in bounds) else sum(abs(c) * b for c, b in zip(coefficients, bounds))
    decays = [f.decay for f in functions if f.support is None]
    decay = None if support is not None or any(d is None for d in decays) else min(decays)
    smoothness = 'smooth' if all(f.smoothness == 'smooth' for f in functions) else 'bounded-oscillatory'
    breakpoints = tuple(sorted({p for f in functions for p in f.cut_points}))
    name = '+'.join(f"{_fmt(c)}*{f.name}" for c, f in zip(coefficients, functions))
    return TestFunction(f"lin[{name}]", evaluate, support, smoothness, sup_bound, decay, breakpoints)


def piecewise_constant(name: str, edges, values) -> TestFunction:
    """
    单元 [edges[k], edges[k+1]) 上取 values[k] 的分段常数函数，单元外为 0

    用于把网格采样得到的算子值当作函数处理。
    """
    edges = np.asarray(edges, dtype=float)
    values = np.asarray(values, dtype=float)
    if edges.size != values.size + 1 or np.any(np.diff(edges) <= 0):
        raise DomainError("分段常数函数的边界必须严格递增且比数值多一个")
    if not np.all(np.isfinite(values)):
        raise DomainError(f"分段常数函数 {name} 含有非有限值")

    def evaluate(y):
        index = np.searchsorted(edges, y, side='right') - 1
        inside = (index >= 0) & (index < values.size)
        return np.where(inside, values[np.clip(index, 0, values.size - 1)], 0.0)

    lower = max(float(edges[0]), 0.0)
    support = HalfLineInterval.from_endpoints(lower, float(edges[-1]))
    return TestFunction(name, evaluate, support, 'piecewise-constant',
                        sup_bound=float(np.max(np.abs(values))) if values.size else 0.0,
                        breakpoints=tuple(float(e) for e in edges if e > 0))


FUNCTION_REGISTRY = {
    'zero': zero,
    'constant': constant,
    'indicator': indicator,
    'power': power_bump,
    'bump': smooth_bump,
    'sign': sign_step,
    'steps': step_pair,
}

_ID_PATTERN = re.compile(r'^\s*([a-z_]+)\s*(?:\(([^()]*)\))?\s*$')


def function_from_id(identifier: str) -> TestFunction:
    """
    由标识重建测试函数，例如 "indicator(0,1)"、"bump(1,0.5)"、"zero"

    Raises:
        DomainError: 无法识别的标识
    """
    match = _ID_PATTERN.match(identifier)
    if not match or match.group(1) not in FUNCTION_REGISTRY:
        raise DomainError(f"无法识别的测试函数: {identifier}")
    factory = FUNCTION_REGISTRY[match.group(1)]
    args_text = match.group(2)
    try:
        args = [float(part) for part in args_text.split(',')] if args_text and args_text.strip() else []
        return factory(*args)
    except (TypeError, ValueError) as e:
        if isinstance(e, DomainError):
            raise
        raise DomainError(f"测试函数参数无效: {identifier} ({e})") from e


def standard_family() -> Tuple[TestFunction, ...]:
    """验证套件使用的 8 个紧支撑测试函数"""
    return (
        indicator(0, 1),
        indicator(1, 2),
        indicator(0.5, 3),
        power_bump(1, 2),
        power_bump(2, 1),
        smooth_bump(1, 0.5),
        smooth_bump(3, 1),
        step_pair(0.5, 1, 1.5),
    )
