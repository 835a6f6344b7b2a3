"""
批量自适应求积模块

所有积分按面板（panel）批量计算，每个面板属于一个分组（group），
每个分组各自判断收敛，互不影响。提供两种面板规则：
- Gauss-Kronrod G7/K15，用于一般区间上的积分
- Gauss-Jacobi 阶数 n 对 2n，用于带端点权 om^alpha (2-om)^beta 的积分
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps
ROUNDOFF_FACTOR = 50.0 * EPS
MAX_ROUNDS = 80

# QUADPACK qk15 节点与权重
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_gauss_full = np.zeros(8)
_gauss_full[1::2] = _WG
GAUSS_WEIGHTS = np.concatenate([_gauss_full[:-1], [_gauss_full[-1]], _gauss_full[-2::-1]])


@dataclass(frozen=True)
class BatchResult:
    """批量积分结果，按分组给出"""
    values: np.ndarray
    errors: np.ndarray
    converged: np.ndarray
    panels: np.ndarray


PanelRule = Callable[[np.ndarray, np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


def _group_sums(groups, values, errors, magnitudes, n_groups):
    total = np.bincount(groups, weights=values, minlength=n_groups)
    error = np.bincount(groups, weights=errors, minlength=n_groups)
    scale = np.bincount(groups, weights=magnitudes, minlength=n_groups)
    count = np.bincount(groups, minlength=n_groups)
    return total, error, scale, count


def refine_panels(rule: PanelRule, lower: np.ndarray, upper: np.ndarray, groups: np.ndarray,
                  n_groups: int, rel_tol: float, abs_tol: float = 0.0,
                  max_panels: int = 2000, mag_tol: float = 0.0) -> BatchResult:
    """
    全局自适应细分：每轮只二分误差高于组内平均允许值的面板

    Args:
        rule: 面板规则，输入 (lower, upper, groups)，返回 (值, 误差估计, 绝对值积分)
        lower, upper: 初始面板端点
        groups: 每个面板所属分组编号
        n_groups: 分组数
        rel_tol, abs_tol: 相对/绝对容差
        mag_tol: 相对于 ∫|被积函数| 的容差，用于相消严重的积分
        max_panels: 每组面板数上限

    Returns:
        BatchResult，未收敛的分组 converged 为 False
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    groups = np.asarray(groups, dtype=np.intp)
    if lower.size == 0:
        zeros = np.zeros(n_groups)
        return BatchResult(zeros, zeros.copy(), np.ones(n_groups, dtype=bool), np.zeros(n_groups, dtype=np.intp))

    floor = max(ROUNDOFF_FACTOR, mag_tol)
    values, errors, magnitudes = rule(lower, upper, groups)
    for _ in range(MAX_ROUNDS):
        total, error, scale, count = _group_sums(groups, values, errors, magnitudes, n_groups)
        target = np.maximum(np.maximum(abs_tol, rel_tol * np.abs(total)), floor * scale)
        active = (error > target) & (count < max_panels)
        if not active.any():
            break
        width_ok = (upper - lower) > 8.0 * EPS * np.maximum(np.abs(lower), np.abs(upper))
        split = active[groups] & (errors > target[groups] / np.maximum(count[groups], 1)) & width_ok
        if not split.any():
            break

        keep = ~split
        mid = 0.5 * (lower[split] + upper[split])
        child_lower = np.concatenate([lower[split], mid])
        child_upper = np.concatenate([mid, upper[split]])
        child_groups = np.concatenate([groups[split], groups[split]])
        child_values, child_errors, child_mags = rule(child_lower, child_upper, child_groups)

        lower = np.concatenate([lower[keep], child_lower])
        upper = np.concatenate([upper[keep], child_upper])
        groups = np.concatenate([groups[keep], child_groups])
        values = np.concatenate([values[keep], child_values])
        errors = np.concatenate([errors[keep], child_errors])
        magnitudes = np.concatenate([magnitudes[keep], child_mags])

    # 组内按面板顺序求和，结果与其他分组无关
    total, error, scale, count = _group_sums(groups, values, errors, magnitudes, n_groups)
    target = np.maximum(np.maximum(abs_tol, rel_tol * np.abs(total)), floor * scale)
    converged = error <= target
    if not converged.all():
        logger.debug(f"{int((~converged).sum())} 个分组未达到容差")
    return BatchResult(total, error, converged, count)


def kronrod_rule(func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> PanelRule:
    """
    构造 G7/K15 面板规则

    func(y, gid) 接收形状 (P, 15) 的节点和形状 (P, 1) 的分组编号，返回同形状的被积函数值。
    """
    def rule(lower, upper, groups):
        center = 0.5 * (lower + upper)
        half = 0.5 * (upper - lower)
        nodes = center[:, None] + half[:, None] * KRONROD_NODES[None, :]
        fx = np.asarray(func(nodes, groups[:, None]), dtype=float)
        kronrod = fx @ KRONROD_WEIGHTS * half
        gauss = fx @ GAUSS_WEIGHTS * half
        magnitude = np.abs(fx) @ KRONROD_WEIGHTS * np.abs(half)
        return kronrod, np.abs(kronrod - gauss), magnitude
    return rule


def integrate_kronrod(func: Callable[[np.ndarray, np.ndarray], np.ndarray], lower, upper, groups,
                      n_groups: int, rel_tol: float, abs_tol: float = 0.0,
                      max_panels: int = 2000, mag_tol: float = 0.0) -> BatchResult:
    """在给定初始面板上做批量 G7/K15 自适应积分"""
    return refine_panels(kronrod_rule(func), lower, upper, groups, n_groups, rel_tol, abs_tol, max_panels, mag_tol)


@lru_cache(maxsize=64)
def _jacobi_nodes(order: int, alpha: float, beta: float):
    """四类面板的节点和权重：(内部, 贴 0, 贴 2, 两端都贴)"""
    interior = roots_legendre(order)
    # scipy 的权函数为 (1-s)^a (1+s)^b
    at_zero = roots_jacobi(order, 0.0, alpha)
    at_two = roots_jacobi(order, beta, 0.0)
    both = roots_jacobi(order, beta, alpha)
    return interior, at_zero, at_two, both


def jacobi_rule(func: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
                alpha: float, beta: float, order: int) -> PanelRule:
    """
    构造区间 (0, 2) 上权函数 om^alpha (2-om)^beta 的面板规则

    func(om, op, gid) 返回不含权函数的被积函数，op = 2 - om 由面板端点精确构造。
    误差估计为 order 阶与 2*order 阶结果之差。
    """
    coarse = _jacobi_nodes(order, alpha, beta)
    fine = _jacobi_nodes(2 * order, alpha, beta)

    def apply(nodes_weights, lower, upper, groups, touch_zero, touch_two):
        s, w = nodes_weights
        half = 0.5 * (upper - lower)
        om = lower[:, None] + half[:, None] * (1.0 + s[None, :])
        op = (2.0 - upper)[:, None] + half[:, None] * (1.0 - s[None, :])
        fx = np.asarray(func(om, op, groups[:, None]), dtype=float)
        if not touch_zero:
            fx = fx * om ** alpha
        if not touch_two:
            fx = fx * op ** beta
        factor = half.copy()
        if touch_zero:
            factor = factor * half ** alpha
        if touch_two:
            factor = factor * half ** beta
        return fx @ w * factor, np.abs(fx) @ np.abs(w) * factor

    def rule(lower, upper, groups):
        values = np.empty(lower.size)
        errors = np.empty(lower.size)
        magnitudes = np.empty(lower.size)
        left = lower == 0.0
        right = upper == 2.0
        kinds = (
            (~left & ~right, 0, False, False),
            (left & ~right, 1, True, False),
            (~left & right, 2, False, True),
            (left & right, 3, True, True),
        )
        for mask, index, touch_zero, touch_two in kinds:
            if not mask.any():
                continue
            lo, hi, gid = lower[mask], upper[mask], groups[mask]
            low_value, _ = apply(coarse[index], lo, hi, gid, touch_zero, touch_two)
            high_value, magnitude = apply(fine[index], lo, hi, gid, touch_zero, touch_two)
            values[mask] = high_value
            errors[mask] = np.abs(high_value - low_value)
            magnitudes[mask] = magnitude
        return values, errors, magnitudes

    return rule


def integrate_jacobi(func: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray], alpha: float,
                     beta: float, lower, upper, groups, n_groups: int, rel_tol: float,
                     order: int = 12, abs_tol: float = 0.0, max_panels: int = 400) -> BatchResult:
    """在 (0, 2) 的初始面板划分上做批量 Gauss-Jacobi 自适应积分"""
    rule = jacobi_rule(func, alpha, beta, order)
    return refine_panels(rule, lower, upper, groups, n_groups, rel_tol, abs_tol, max_panels)


def panels_from_breakpoints(points_per_group, n_groups: int):
    """
    把每组的有序断点列表展开成初始面板数组

    Args:
        points_per_group: 长度为 n_groups 的序列，每项为严格递增的断点数组（至少两个点）

    Returns:
        (lower, upper, groups)
    """
    lowers, uppers, gids = [], [], []
    for gid, points in enumerate(points_per_group):
        points = np.asarray(points, dtype=float)
        if points.size < 2:
            continue
        lowers.append(points[:-1])
        uppers.append(points[1:])
        gids.append(np.full(points.size - 1, gid, dtype=np.intp))
    if not lowers:
        empty = np.empty(0)
        return empty, empty.copy(), np.empty(0, dtype=np.intp)
    return np.concatenate(lowers), np.concatenate(uppers), np.concatenate(gids)


def neumaier_cumsum(increments) -> np.ndarray:
    """补偿求和的前缀和"""
    total = 0.0
    compensation = 0.0
    out = np.empty(len(increments))
    for i, value in enumerate(increments):
        value = float(value)
        t = total + value
        if abs(total) >= abs(value):
            compensation += (total - t) + value
        else:
            compensation += (value - t) + total
        total = t
        out[i] = total + compensation
    return out
