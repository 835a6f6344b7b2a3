"""
算子模块
截断 Riesz 变换族及其分解中用到的辅助算子：M_λ、M、T1、T2、局部 Hilbert 变换与四段分解

所有积分在 s = y / x 变量下进行：
∫ R(x,y) f(y) dm_λ(y) = ∫ R(1,s) f(xs) s^{2λ} ds，截断条件 |x-y| > ε 变为 |1-s| > ε/x。
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.constants import TRANSFORM_MAX_PANELS, TRANSFORM_REL_TOL, TRANSFORM_TAIL_TOL
from src.core.errors import ConvergenceError, DomainError, MissingDecayError
from src.core.functions import TestFunction
from src.core.kernel import KernelEvalConfig, RegimeConstants, far_field_constant, get_evaluator
from src.core.measure import EpsilonLadder, LambdaLike, RadialGrid, as_lambda, cell_integrals, measure_between
from src.utils.quadrature import BatchResult, integrate_kronrod, neumaier_cumsum, panels_from_breakpoints

logger = logging.getLogger(__name__)

# 被积函数种类
RIESZ, PRINCIPAL, DEFECT, HILBERT, T2_LOG, T1_TAIL, ABS_MASS = range(7)
_NEEDS_KERNEL = (RIESZ, DEFECT)

# 固定的预切分点：向 0、向 ∞ 以及向奇点 s = 1 的几何序列
_FIXED_POINTS = np.unique(np.concatenate([
    2.0 ** -np.arange(1, 61),
    2.0 ** np.arange(1, 41),
    1.0 - 2.0 ** -np.arange(2, 53),
    1.0 + 2.0 ** -np.arange(2, 53),
    [1.0],
]))


@dataclass(frozen=True)
class TransformConfig:
    """
    截断变换求积配置

    strict 为 False 时未收敛的积分只记录警告并返回估计值（扫描使用）。
    """
    rel_tol: float = TRANSFORM_REL_TOL
    tail_tol: float = TRANSFORM_TAIL_TOL
    max_panels: int = TRANSFORM_MAX_PANELS
    kernel: KernelEvalConfig = field(default_factory=KernelEvalConfig)
    regimes: RegimeConstants = field(default_factory=RegimeConstants)
    strict: bool = True

    def __post_init__(self):
        if not (0 < self.rel_tol < 1):
            raise DomainError(f"变换容差必须在 (0, 1) 内，收到 {self.rel_tol}")
        if not self.tail_tol > 0:
            raise DomainError(f"尾部容差必须为正，收到 {self.tail_tol}")


@dataclass(frozen=True)
class AnnulusBand:
    """环带 B_{δ,t} = {y : t < |x - y| <= δ}"""
    inner: float
    outer: float

    def __post_init__(self):
        if not (0 < self.inner < self.outer):
            raise DomainError(f"环带要求 0 < t < δ，收到 t={self.inner}, δ={self.outer}")

    def contains(self, x: float, y) -> np.ndarray:
        distance = np.abs(x - np.asarray(y, dtype=float))
        return (distance > self.inner) & (distance <= self.outer)


@dataclass(frozen=True)
class TruncationProfile:
    """
    固定点 x 处的截断轮廓 ε_k ↦ R_{ε_k} f(x)，ε 严格递减

    provenance 记录 (λ, 函数名, 配置摘要)，外部导入的轮廓为 None。
    """
    x: float
    epsilons: Tuple[float, ...]
    values: Tuple[float, ...]
    provenance: Optional[Tuple[float, str, str]] = None

    def __post_init__(self):
        epsilons = tuple(float(e) for e in self.epsilons)
        values = tuple(float(v) for v in self.values)
        if len(epsilons) != len(values):
            raise DomainError("截断半径与数值长度不一致")
        if any(np.isnan(v) for v in values):
            raise DomainError("轮廓中含有 NaN")
        if any(not e > 0 for e in epsilons) or any(b >= a for a, b in zip(epsilons, epsilons[1:])):
            raise DomainError("轮廓的截断半径必须为正且严格递减")
        object.__setattr__(self, 'epsilons', epsilons)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_values(cls, values: Sequence[float], epsilons: Sequence[float] = None, x: float = 1.0):
        """由数值序列构造，缺省半径为 1, 1/2, 1/4, ..."""
        if epsilons is None:
            epsilons = [2.0 ** -i for i in range(len(values))]
        return cls(x, tuple(epsilons), tuple(values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def value_array(self) -> np.ndarray:
        return np.asarray(self.values)

    @property
    def epsilon_array(self) -> np.ndarray:
        return np.asarray(self.epsilons)


@dataclass(frozen=True)
class SplitParts:
    """截断增量的四段分解"""
    i1: float
    i2: float
    i3: float
    i4: float

    @property
    def total(self) -> float:
        return self.i1 + self.i2 + self.i3 + self.i4

    @property
    def magnitude(self) -> float:
        return abs(self.i1) + abs(self.i2) + abs(self.i3) + abs(self.i4)


def _intersect(pieces, lo: float, hi: float):
    out = []
    for a, b in pieces:
        a, b = max(a, lo), min(b, hi)
        if b > a:
            out.append((a, b))
    return out


def _band_pieces(inner: float, outer: float):
    """s 变量下的 inner < |1-s| <= outer"""
    return _intersect([(1.0 - outer, 1.0 - inner), (1.0 + inner, 1.0 + outer)], 0.0, np.inf)


def _support_window(f: TestFunction, x: float) -> Tuple[float, float]:
    if f.support is None:
        return 0.0, np.inf
    return f.support.lower / x, f.support.upper / x


def _tail_limit(lam: float, f: TestFunction, x: float, cfg: TransformConfig) -> float:
    """
    远场截断点 T：∫_T^∞ |R(1,s)| |f(xs)| s^{2λ} ds <= tail_tol

    依据远场上界 |R(1,s)| <= C̃ s^{-(2λ+2)}。
    """
    if f.support is not None:
        return f.support.upper / x
    if f.sup_bound is None:
        raise MissingDecayError(f"函数 {f.name} 支撑无界且未声明上界，无法截断尾部")
    bound = far_field_constant(lam, cfg.regimes.k1, cfg.kernel) * f.sup_bound
    decay = f.decay or 0.0
    limit = (bound * x ** -decay / ((1.0 + decay) * cfg.tail_tol)) ** (1.0 / (1.0 + decay))
    if decay and x * limit < 1.0:
        limit = bound / cfg.tail_tol
    return max(limit, 2.0 * cfg.regimes.k1)


def _piece_points(a: float, b: float, cuts: np.ndarray) -> np.ndarray:
    inside = _FIXED_POINTS[(_FIXED_POINTS > a) & (_FIXED_POINTS < b)]
    extra = cuts[(cuts > a) & (cuts < b)]
    return np.unique(np.concatenate([[a], inside, extra, [b]]))


def _integrate_s(lam: Optional[float], f: TestFunction, xs: Sequence[float], kinds: Sequence[int],
                 pieces: Sequence[List[Tuple[float, float]]], cfg: TransformConfig,
                 absolute: bool = False) -> BatchResult:
    """
    分组积分：第 g 组在 s 变量的若干区段上积分第 kinds[g] 类被积函数，点为 xs[g]

    所有区段先与 f 的支撑求交；f 为零的节点不计算核函数。
    """
    n_groups = len(xs)
    xs = np.asarray(xs, dtype=float)
    kind_array = np.asarray(kinds, dtype=np.intp)
    cut_points = np.asarray(f.cut_points, dtype=float)

    point_lists = []
    group_ids = []
    for gid in range(n_groups):
        lo, hi = _support_window(f, xs[gid])
        for a, b in _intersect(pieces[gid], lo, hi):
            point_lists.append(_piece_points(a, b, cut_points / xs[gid]))
            group_ids.append(gid)
    lower, upper, piece_groups = panels_from_breakpoints(point_lists, len(point_lists))
    groups = np.asarray(group_ids, dtype=np.intp)[piece_groups] if piece_groups.size else piece_groups

    evaluator = None
    if lam is not None and np.isin(kind_array, _NEEDS_KERNEL).any():
        evaluator = get_evaluator(lam, cfg.kernel)
    exponent = 0.0 if lam is None else lam

    def integrand(s, gid):
        x = xs[gid]
        kind = np.broadcast_to(kind_array[gid], s.shape)
        values = f(x * s)
        if absolute:
            values = np.abs(values)
        nonzero = values != 0
        if not nonzero.any():
            return np.zeros_like(s)
        kernel = np.zeros_like(s)
        wanted = nonzero & ((kind == RIESZ) | (kind == DEFECT))
        if wanted.any():
            kernel[wanted] = evaluator.unit_kernel(s[wanted], strict=False)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            weight = s ** (2.0 * exponent)
            gap = 1.0 - s
            choices = [
                kernel * weight * values,
                -(s ** exponent) / (np.pi * gap) * values,
                (kernel + s ** -exponent / (np.pi * gap)) * weight * values,
                -values / (np.pi * gap),
                np.maximum(np.log(np.sqrt(s) / np.abs(gap)), 0.0) * weight * np.abs(values),
                np.abs(values) / s,
                np.abs(values),
            ]
            out = np.select([kind == k for k in range(len(choices))], choices, 0.0)
        return np.where(nonzero & np.isfinite(out), out, 0.0)

    result = integrate_kronrod(integrand, lower, upper, groups, n_groups, rel_tol=cfg.rel_tol,
                               max_panels=cfg.max_panels, mag_tol=cfg.rel_tol * 1e-3)
    if not result.converged.all():
        index = int(np.argmin(result.converged))
        message = (f"积分未收敛: 函数 {f.name}, x={xs[index]:.6g}, 估计值 {result.values[index]:.6g}, "
                   f"误差界 {result.errors[index]:.3g}")
        if cfg.strict:
            raise ConvergenceError(message, float(result.values[index]), float(result.errors[index]))
        logger.warning(message)
    return result


def _check_point(x: float) -> float:
    if not (np.isfinite(x) and x > 0):
        raise DomainError(f"x 必须为正数，收到 {x}")
    return float(x)


def _check_decay(f: TestFunction) -> None:
    if f.support is None and f.sup_bound is None:
        raise MissingDecayError(f"函数 {f.name} 支撑无界且未声明上界或衰减")


def truncated_riesz(lam: LambdaLike, f: TestFunction, x: float, epsilon: float,
                    cfg: TransformConfig = None) -> float:
    """
    R_{ε} f(x) = ∫_{|x-y|>ε} R(x,y) f(y) dm_λ(y)

    Raises:
        MissingDecayError: 支撑无界且未声明上界
        ConvergenceError: 积分未收敛（strict 模式）
    """
    lam = as_lambda(lam)
    x = _check_point(x)
    if not epsilon > 0:
        raise DomainError(f"截断半径必须为正，收到 {epsilon}")
    cfg = cfg or TransformConfig()
    _check_decay(f)
    if f.is_zero:
        return 0.0
    return float(_truncated_many(lam, f, [x], [epsilon], cfg)[0])


def _truncated_pieces(lam, f, x, epsilon, cfg):
    e = epsilon / x
    tail = _tail_limit(lam, f, x, cfg)
    return _intersect([(0.0, 1.0 - e), (1.0 + e, tail)], 0.0, np.inf)


def _truncated_many(lam, f, xs, epsilons, cfg) -> np.ndarray:
    pieces = [_truncated_pieces(lam, f, x, e, cfg) for x, e in zip(xs, epsilons)]
    return _integrate_s(lam, f, xs, [RIESZ] * len(xs), pieces, cfg).values


def annulus_integral(lam: LambdaLike, f: TestFunction, x: float, inner: float, outer: float,
                     cfg: TransformConfig = None) -> float:
    """∫_{inner<|x-y|<=outer} R(x,y) f(y) dm_λ(y)，即 R_{inner} f(x) - R_{outer} f(x)"""
    lam = as_lambda(lam)
    x = _check_point(x)
    band = AnnulusBand(inner, outer)
    cfg = cfg or TransformConfig()
    if f.is_zero:
        return 0.0
    pieces = [_band_pieces(band.inner / x, band.outer / x)]
    return float(_integrate_s(lam, f, [x], [RIESZ], pieces, cfg).values[0])


def truncation_profiles(lam: LambdaLike, f: TestFunction, xs: Sequence[float], ladder: EpsilonLadder,
                        k: int = 1, cfg: TransformConfig = None) -> List[TruncationProfile]:
    """
    多个点上的截断轮廓

    每个点只对最大半径做一次完整积分，其余半径由相邻环带增量的补偿前缀和得到。
    """
    lam = as_lambda(lam)
    cfg = cfg or TransformConfig()
    _check_decay(f)
    radii = ladder.subdivided(k)
    xs = [_check_point(x) for x in xs]
    provenance = (lam, f.name, repr(cfg))
    if f.is_zero:
        return [TruncationProfile(x, tuple(radii), tuple(np.zeros(radii.size)), provenance) for x in xs]

    group_x, kinds, pieces = [], [], []
    for x in xs:
        group_x.append(x)
        kinds.append(RIESZ)
        pieces.append(_truncated_pieces(lam, f, x, radii[0], cfg))
        for outer, inner in zip(radii[:-1], radii[1:]):
            group_x.append(x)
            kinds.append(RIESZ)
            pieces.append(_band_pieces(inner / x, outer / x))
    values = _integrate_s(lam, f, group_x, kinds, pieces, cfg).values

    profiles = []
    stride = radii.size
    for i, x in enumerate(xs):
        block = values[i * stride:(i + 1) * stride]
        profile_values = neumaier_cumsum(block)
        profiles.append(TruncationProfile(x, tuple(radii), tuple(profile_values), provenance))
    logger.debug(f"计算截断轮廓: {f.name}, {len(xs)} 个点, 每点 {radii.size} 个半径")
    return profiles


def truncation_profile(lam: LambdaLike, f: TestFunction, x: float, ladder: EpsilonLadder, k: int = 1,
                       cfg: TransformConfig = None) -> TruncationProfile:
    """单点截断轮廓，k 为每个区段的几何细分数"""
    return truncation_profiles(lam, f, [x], ladder, k, cfg)[0]


def _maximal(weight_exponent: float, f: TestFunction, x: float, grid: RadialGrid, stride: int) -> float:
    x = _check_point(x)
    if x >= grid.upper:
        raise DomainError(f"x={x} 超出网格上界 {grid.upper}")
    if stride < 1:
        raise DomainError(f"步长必须 >= 1，收到 {stride}")
    if f.is_zero:
        return 0.0
    points = grid.points
    canonical = points[x + points <= grid.upper]
    candidate_left = np.maximum(x - canonical, 0.0)
    candidate_right = x + canonical
    edges = np.union1d(grid.integration_edges(f.cut_points),
                       np.concatenate([candidate_left, candidate_right]))
    edges = edges[edges <= grid.upper]

    cells = cell_integrals(f, edges, weight_exponent, grid.order, power=1.0)
    mass = np.concatenate([[0.0], np.cumsum(cells)])
    volume = np.concatenate([[0.0], np.cumsum(measure_between(0.0, edges[:-1], edges[1:],
                                                              exponent=weight_exponent + 1.0))])

    # 端点取网格边界（或 0）的区间族
    family_edges = np.concatenate([[0.0], grid.edges[::stride]])
    left = np.searchsorted(edges, family_edges[family_edges < x])
    right = np.searchsorted(edges, family_edges[family_edges > x])
    best = 0.0
    for start in range(0, right.size, 512):
        chunk = right[start:start + 512]
        averages = (mass[chunk][:, None] - mass[left][None, :]) / (volume[chunk][:, None] - volume[left][None, :])
        if averages.size:
            best = max(best, float(averages.max()))

    # 以 x 为中心的区间 I(x, r)
    chosen = canonical[::stride]
    lo = np.searchsorted(edges, np.maximum(x - chosen, 0.0))
    hi = np.searchsorted(edges, x + chosen)
    if chosen.size:
        best = max(best, float(np.max((mass[hi] - mass[lo]) / (volume[hi] - volume[lo]))))
    return best


def maximal_lambda(lam: LambdaLike, f: TestFunction, x: float, grid: RadialGrid, stride: int = 1) -> float:
    """
    M_λ f(x) 在有限区间族上的下界

    区间族：端点为网格边界（或 0）且包含 x 的区间，以及 I(x, r)，r 取网格点；
    stride 抽稀区间族，较大的 stride 给出子族。
    """
    return _maximal(2.0 * as_lambda(lam), f, x, grid, stride)


def maximal_lebesgue(f: TestFunction, x: float, grid: RadialGrid, stride: int = 1) -> float:
    """Lebesgue 测度下的 M f(x)"""
    return _maximal(0.0, f, x, grid, stride)


def _t1_limit(f: TestFunction, x: float, cfg: TransformConfig) -> float:
    if f.support is not None:
        return f.support.upper / x
    if not f.decay or f.sup_bound is None:
        raise MissingDecayError(f"函数 {f.name} 支撑无界且无衰减，T1 尾积分发散")
    # ∫_Y^∞ S y^{-d-1} dy = S Y^{-d} / d
    limit_y = (f.sup_bound / (f.decay * cfg.tail_tol)) ** (1.0 / f.decay)
    return max(limit_y, 1.0) / x


def t1_values(f: TestFunction, xs: Sequence[float], cfg: TransformConfig = None) -> np.ndarray:
    """T1 f(x) = ∫_{2x}^∞ |f(y)| dy/y，逐点计算"""
    cfg = cfg or TransformConfig()
    xs = [_check_point(x) for x in xs]
    if f.is_zero:
        return np.zeros(len(xs))
    pieces = [_intersect([(2.0, _t1_limit(f, x, cfg))], 0.0, np.inf) for x in xs]
    return _integrate_s(None, f, xs, [T1_TAIL] * len(xs), pieces, cfg, absolute=True).values


def t1(f: TestFunction, x: float, cfg: TransformConfig = None) -> float:
    """T1 f(x) = ∫_{2x}^∞ |f(y)| dy/y"""
    return float(t1_values(f, [x], cfg)[0])


def t1_norm_constant(lam: LambdaLike, p: float) -> float:
    """T1 在 L^p(dm_λ) 上的算子范数上界 p·2^{-(2λ+1)/p}/(2λ+1)"""
    lam = as_lambda(lam)
    return p * 2.0 ** (-(2 * lam + 1) / p) / (2 * lam + 1)


def t2_values(lam: LambdaLike, f: TestFunction, xs: Sequence[float], cfg: TransformConfig = None) -> np.ndarray:
    """T2 f(x) = ∫_{x/2}^{2x} x^{-(2λ+1)} log₊(√(xy)/|x-y|) |f(y)| dm_λ(y)，逐点计算"""
    lam = as_lambda(lam)
    cfg = cfg or TransformConfig()
    xs = [_check_point(x) for x in xs]
    if f.is_zero:
        return np.zeros(len(xs))
    pieces = [[(0.5, 1.0), (1.0, 2.0)] for _ in xs]
    return _integrate_s(lam, f, xs, [T2_LOG] * len(xs), pieces, cfg, absolute=True).values


def t2(lam: LambdaLike, f: TestFunction, x: float, cfg: TransformConfig = None) -> float:
    """T2 f(x)，y = x 处的对数奇点可积"""
    return float(t2_values(lam, f, [x], cfg)[0])


def _hilbert_groups(f, x, band, cfg):
    """依次为：局部带 (x/2,2x)、下尾 (0,x/2)、上尾 (2x,∞)、全线截断带"""
    x = _check_point(x)
    whole = _band_pieces(band.inner / x, band.outer / x)
    pieces = [
        _intersect(whole, 0.5, 2.0),
        _intersect(whole, 0.0, 0.5),
        _intersect(whole, 2.0, np.inf),
        whole,
    ]
    if f.is_zero:
        return np.zeros(4)
    return _integrate_s(None, f, [x] * 4, [HILBERT] * 4, pieces, cfg).values


def local_hilbert_band(f: TestFunction, x: float, band: AnnulusBand, cfg: TransformConfig = None) -> float:
    """H^loc_{δ,t} f(x) = -(1/π) ∫_{x/2}^{2x} χ_B(y) f(y)/(x-y) dy"""
    cfg = cfg or TransformConfig()
    return float(_hilbert_groups(f, x, band, cfg)[0])


def hilbert_band(f: TestFunction, x: float, band: AnnulusBand, cfg: TransformConfig = None) -> float:
    """零延拓后全线截断 Hilbert 变换在环带上的部分 -(1/π) ∫_B f(y)/(x-y) dy"""
    cfg = cfg or TransformConfig()
    return float(_hilbert_groups(f, x, band, cfg)[3])


def local_hilbert_split(f: TestFunction, x: float, band: AnnulusBand,
                        cfg: TransformConfig = None) -> Tuple[float, float, float]:
    """
    局部 Hilbert 的三段分解 (H_B f̃(x), 下尾, 上尾)

    下尾 = (1/π)∫_{(0,x/2)∩B} f/(x-y) dy，上尾 = (1/π)∫_{(2x,∞)∩B} f/(x-y) dy，
    三者之和等于 local_hilbert_band。
    """
    cfg = cfg or TransformConfig()
    local, lower, upper, whole = _hilbert_groups(f, x, band, cfg)
    return float(whole), float(-lower), float(-upper)


def split_truncation(lam: LambdaLike, f: TestFunction, x: float, band: AnnulusBand,
                     cfg: TransformConfig = None) -> SplitParts:
    """
    把环带上的增量 R_t f(x) - R_δ f(x) 拆成 I1 (0,x/2)、I2 (2x,∞)、
    I3 主项 -(1/π)(xy)^{-λ}/(x-y) 和 I4 缺陷项 R(x,y) + (1/π)(xy)^{-λ}/(x-y)，后两者限于 (x/2, 2x)
    """
    lam = as_lambda(lam)
    x = _check_point(x)
    cfg = cfg or TransformConfig()
    if f.is_zero:
        return SplitParts(0.0, 0.0, 0.0, 0.0)
    whole = _band_pieces(band.inner / x, band.outer / x)
    middle = _intersect(whole, 0.5, 2.0)
    pieces = [_intersect(whole, 0.0, 0.5), _intersect(whole, 2.0, np.inf), middle, middle]
    values = _integrate_s(lam, f, [x] * 4, [RIESZ, RIESZ, PRINCIPAL, DEFECT], pieces, cfg).values
    return SplitParts(*(float(v) for v in values))


def weighted_hilbert_defect(lam: LambdaLike, f: TestFunction, x: float, band: AnnulusBand,
                            cfg: TransformConfig = None) -> float:
    """|I3 - H^loc_B f(x)|，两者只差权因子 (y/x)^λ"""
    parts = split_truncation(lam, f, x, band, cfg)
    return abs(parts.i3 - local_hilbert_band(f, x, band, cfg))


def local_band_mass(f: TestFunction, x: float, band: AnnulusBand, cfg: TransformConfig = None) -> float:
    """(1/x) ∫_{(x/2,2x)∩B} |f| dy，用于比较 weighted_hilbert_defect"""
    x = _check_point(x)
    cfg = cfg or TransformConfig()
    if f.is_zero:
        return 0.0
    pieces = [_intersect(_band_pieces(band.inner / x, band.outer / x), 0.5, 2.0)]
    return float(_integrate_s(None, f, [x], [ABS_MASS], pieces, cfg, absolute=True).values[0])
