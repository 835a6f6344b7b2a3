"""
CZ 分解与 BMO 模块
(0, ∞, dm_λ) 上基于二进停时的 Calderón-Zygmund 分解、分解性质校验，以及 BMO 范数的区间族估计
"""
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.constants import BMO_CENTERS, BMO_RADII, CZ_GUARD, CZ_MAX_CELLS, CZ_MAX_DEPTH, CZ_MAX_ROOT_GROWTH
from src.core.errors import DomainError, ProvenanceError
from src.core.functions import TestFunction
from src.core.measure import (
    HalfLineInterval,
    LambdaLike,
    RadialGrid,
    as_lambda,
    interval_integrals,
    measure_between,
    measure_interval,
)

logger = logging.getLogger(__name__)

MEAN_ZERO_TOL = 1e-8
RATIO_SLACK = 1e-9
PRUNE_SAMPLES = 33


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """二进区间 [j·2^k, (j+1)·2^k)"""
    generation: int
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise DomainError(f"二进区间编号必须非负，收到 {self.index}")

    @property
    def lower(self) -> float:
        return math.ldexp(self.index, self.generation)

    @property
    def upper(self) -> float:
        return math.ldexp(self.index + 1, self.generation)

    def parent(self) -> 'DyadicInterval':
        return DyadicInterval(self.generation + 1, self.index // 2)

    def children(self) -> Tuple['DyadicInterval', 'DyadicInterval']:
        return (DyadicInterval(self.generation - 1, 2 * self.index),
                DyadicInterval(self.generation - 1, 2 * self.index + 1))

    def contains_interval(self, other: 'DyadicInterval') -> bool:
        if other.generation > self.generation:
            return False
        return other.index >> (self.generation - other.generation) == self.index

    def as_interval(self) -> HalfLineInterval:
        return HalfLineInterval.from_endpoints(self.lower, self.upper)


@dataclass(frozen=True)
class CZItem:
    """分解性质的一项实测结果"""
    name: str
    measured: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class CZReport:
    items: Tuple[CZItem, ...]
    dilated_ratio: float
    guard_hits: int
    root_selected: bool

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def item(self, name: str) -> CZItem:
        for item in self.items:
            if item.name == name:
                return item
        raise KeyError(name)


@dataclass(frozen=True)
class CZDecomposition:
    """
    阈值 η 下的分解 f = g + Σ b_j

    intervals 按位置排序；averages 为各区间上 f 的 dm_λ 平均，abs_averages 为 |f| 的平均。
    """
    lam: float
    eta: float
    function_name: str
    root: DyadicInterval
    intervals: Tuple[DyadicInterval, ...]
    averages: Tuple[float, ...]
    abs_averages: Tuple[float, ...]
    guard_hits: int = 0
    root_selected: bool = False
    report: Optional[CZReport] = field(default=None, compare=False)

    def _locate(self, y: np.ndarray) -> np.ndarray:
        """每个点所在的坏区间编号，不在坏集上为 -1"""
        if not self.intervals:
            return np.full(y.shape, -1)
        lowers = np.array([iv.lower for iv in self.intervals])
        uppers = np.array([iv.upper for iv in self.intervals])
        index = np.searchsorted(lowers, y, side='right') - 1
        safe = np.clip(index, 0, len(self.intervals) - 1)
        inside = (index >= 0) & (y < uppers[safe])
        return np.where(inside, safe, -1)

    def good_part(self, f: TestFunction) -> TestFunction:
        """g：坏集外等于 f，I_j 上等于 f 在 I_j 上的平均"""
        self._check_provenance(f)
        averages = np.array(self.averages)

        def evaluate(y):
            located = self._locate(y)
            return np.where(located >= 0, averages[np.clip(located, 0, None)] if averages.size else 0.0, f(y))

        breaks = tuple(sorted(set(f.cut_points) | {iv.lower for iv in self.intervals if iv.lower > 0}
                              | {iv.upper for iv in self.intervals}))
        return TestFunction(f"good[{f.name}]", evaluate, f.support, f.smoothness, None, f.decay, breaks)

    def bad_parts(self, f: TestFunction) -> List[Tuple[DyadicInterval, TestFunction]]:
        """b_j = (f - f_{I_j}) χ_{I_j}"""
        self._check_provenance(f)
        parts = []
        for interval, average in zip(self.intervals, self.averages):
            lower, upper = interval.lower, interval.upper

            def evaluate(y, lower=lower, upper=upper, average=average):
                return np.where((y >= lower) & (y < upper), f(y) - average, 0.0)

            breaks = tuple(sorted({p for p in f.cut_points if lower < p < upper} | {upper} | ({lower} if lower > 0 else set())))
            parts.append((interval, TestFunction(f"bad[{f.name}]{interval.generation}:{interval.index}", evaluate,
                                                 interval.as_interval(), f.smoothness, None, None, breaks)))
        return parts

    def _check_provenance(self, f: TestFunction) -> None:
        if f.name != self.function_name:
            raise ProvenanceError(f"分解来自函数 {self.function_name}，而传入的是 {f.name}")

    def to_dict(self) -> Dict:
        data = {
            'lambda': self.lam,
            'threshold': self.eta,
            'function': self.function_name,
            'root': {'generation': self.root.generation, 'index': self.root.index},
            'root_selected': self.root_selected,
            'guard_hits': self.guard_hits,
            'intervals': [
                {'generation': iv.generation, 'index': iv.index, 'lower': iv.lower, 'upper': iv.upper,
                 'average': avg, 'abs_average': abs_avg}
                for iv, avg, abs_avg in zip(self.intervals, self.averages, self.abs_averages)
            ],
        }
        if self.report is not None:
            data['report'] = {
                'passed': self.report.passed,
                'dilated_ratio': self.report.dilated_ratio,
                'items': [asdict(item) for item in self.report.items],
            }
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)


def _cell_arrays(cells: List[DyadicInterval]):
    return np.array([c.lower for c in cells]), np.array([c.upper for c in cells])


def _piece_midpoints(edges) -> np.ndarray:
    """相邻切点之间各段的中点"""
    edges = np.unique(np.asarray(edges, dtype=float))
    return 0.5 * (edges[:-1] + edges[1:])


def _sampled_sup(f: TestFunction, lowers: np.ndarray, uppers: np.ndarray) -> np.ndarray:
    """
    每个单元内 |f| 的采样上确界

    均匀采样之外，单元内含 f 的切点时再取被切开的各段中点，窄于采样间距的台阶不会漏掉。
    """
    s = np.linspace(0.0, 1.0, PRUNE_SAMPLES)
    ys = lowers[:, None] + (uppers - lowers)[:, None] * s[None, :]
    sup = np.max(np.abs(f(ys)), axis=1)
    cuts = np.asarray(f.cut_points, dtype=float)
    if cuts.size == 0:
        return sup
    first = np.searchsorted(cuts, lowers, side='right')
    last = np.searchsorted(cuts, uppers, side='left')
    for i in np.flatnonzero(last > first):
        midpoints = _piece_midpoints(np.concatenate(([lowers[i]], cuts[first[i]:last[i]], [uppers[i]])))
        sup[i] = max(sup[i], float(np.max(np.abs(f(midpoints)))))
    return sup


def cz_decompose(lam: LambdaLike, f: TestFunction, eta: float, max_depth: int = CZ_MAX_DEPTH,
                 max_root_growth: int = CZ_MAX_ROOT_GROWTH, guard: float = CZ_GUARD,
                 rel_tol: float = 1e-12) -> CZDecomposition:
    """
    二进停时构造：从包含支撑的根 [0, 2^K) 逐层下降，选出 |f| 的 dm_λ 平均 > η 的极大二进区间

    Raises:
        DomainError: η <= 0 或 f 的支撑无界
    """
    lam = as_lambda(lam)
    if not (np.isfinite(eta) and eta > 0):
        raise DomainError(f"阈值 η 必须为正，收到 {eta}")
    if f.support is None:
        raise DomainError(f"函数 {f.name} 的支撑无界，无法放入二进根区间")

    generation = math.frexp(f.support.upper)[1]
    if math.ldexp(1.0, generation - 1) >= f.support.upper:
        generation -= 1
    total = float(interval_integrals(lam, f, [0.0], [f.support.upper], power=1.0, rel_tol=rel_tol)[0])
    growth = 0
    while total / float(measure_between(lam, 0.0, math.ldexp(1.0, generation))) > eta and growth < max_root_growth:
        generation += 1
        growth += 1
    root = DyadicInterval(generation, 0)
    root_average = total / float(measure_between(lam, 0.0, root.upper))

    if f.is_zero or total == 0:
        return CZDecomposition(lam, eta, f.name, root, (), (), ())
    if root_average > eta:
        signed = float(interval_integrals(lam, f, [0.0], [root.upper], rel_tol=rel_tol)[0])
        measure = float(measure_between(lam, 0.0, root.upper))
        logger.warning(f"η={eta} 低于根区间平均 {root_average:.6g}，根区间本身被选中")
        return CZDecomposition(lam, eta, f.name, root, (root,), (signed / measure,), (root_average,),
                               root_selected=True)

    selected: List[DyadicInterval] = []
    abs_averages: List[float] = []
    guard_hits = 0
    level = [root]
    for depth in range(max_depth):
        cells = [child for cell in level for child in cell.children()]
        if not cells:
            break
        if len(cells) > CZ_MAX_CELLS:
            logger.warning(f"CZ 下降在第 {depth} 层达到单元上限 {CZ_MAX_CELLS}，停止下降")
            break
        lowers, uppers = _cell_arrays(cells)
        integrals = interval_integrals(lam, f, lowers, uppers, power=1.0, rel_tol=rel_tol)
        averages = integrals / measure_between(lam, lowers, uppers)
        chosen = averages > eta * (1.0 + guard)
        near = (~chosen) & (averages > eta * (1.0 - guard))
        guard_hits += int(near.sum())
        sup_sampled = _sampled_sup(f, lowers, uppers)
        descend = (~chosen) & (integrals > 0) & (sup_sampled > eta)
        for i in np.flatnonzero(chosen):
            selected.append(cells[i])
            abs_averages.append(float(averages[i]))
        level = [cells[i] for i in np.flatnonzero(descend)]

    order = sorted(range(len(selected)), key=lambda i: selected[i].lower)
    selected = [selected[i] for i in order]
    abs_averages = [abs_averages[i] for i in order]
    signed_averages: Tuple[float, ...] = ()
    if selected:
        lowers, uppers = _cell_arrays(selected)
        signed = interval_integrals(lam, f, lowers, uppers, rel_tol=rel_tol)
        signed_averages = tuple(float(v) for v in signed / measure_between(lam, lowers, uppers))
    if guard_hits:
        logger.warning(f"{guard_hits} 个二进单元的平均落在阈值保护带内，按未选中处理")
    logger.info(f"CZ 分解完成: {f.name}, η={eta}, 坏区间 {len(selected)} 个")
    return CZDecomposition(lam, eta, f.name, root, tuple(selected), signed_averages, tuple(abs_averages),
                           guard_hits=guard_hits)


def _max_overlap(intervals: Tuple[DyadicInterval, ...]) -> int:
    events = sorted([(iv.lower, 1) for iv in intervals] + [(iv.upper, -1) for iv in intervals],
                    key=lambda e: (e[0], e[1]))
    depth = best = 0
    for _, step in events:
        depth += step
        best = max(best, depth)
    return best


def _union_measure(lam: float, intervals: List[HalfLineInterval]) -> float:
    spans = sorted((iv.lower, iv.upper) for iv in intervals)
    merged: List[List[float]] = []
    for lower, upper in spans:
        if merged and lower <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], upper)
        else:
            merged.append([lower, upper])
    return float(sum(measure_between(lam, a, b) for a, b in merged))


def verify_cz(decomp: CZDecomposition, f: TestFunction, grid: RadialGrid) -> CZReport:
    """
    逐项校验分解性质并给出实测常数：
    (i) 重组残差 (ii) 坏部分平均界与零均值 (iii) ‖g‖∞/η 与 ‖g‖₁/‖f‖₁
    (iv) Σ‖b_j‖₁/‖f‖₁ (v) η·Σm_λ(I_j)/‖f‖₁ (vi) 最大重叠数

    Raises:
        ProvenanceError: 分解不是由 f 得到的
    """
    decomp._check_provenance(f)
    lam, eta = decomp.lam, decomp.eta
    doubling = 2.0 ** (2 * lam + 1)
    items: List[CZItem] = []

    # (i)
    points = grid.points
    g = decomp.good_part(f)
    residual = f(points) - g(points)
    for _, b in decomp.bad_parts(f):
        residual = residual - b(points)
    sup_f = float(np.max(np.abs(f(points)))) if points.size else 0.0
    reassembly = float(np.max(np.abs(residual))) / sup_f if sup_f > 0 else float(np.max(np.abs(residual)))
    items.append(CZItem('reassembly', reassembly, 1e-12, reassembly < 1e-12))

    norm_f = float(interval_integrals(lam, f, [0.0], [f.support.upper], power=1.0)[0]) if f.support else 0.0
    intervals = decomp.intervals
    if intervals:
        lowers, uppers = _cell_arrays(list(intervals))
        measures = measure_between(lam, lowers, uppers)
        bad_masses = np.array([
            float(interval_integrals(lam, b, [iv.lower], [iv.upper], power=1.0)[0])
            for iv, b in decomp.bad_parts(f)
        ])
        bad_means = np.array([
            float(interval_integrals(lam, b, [iv.lower], [iv.upper])[0])
            for iv, b in decomp.bad_parts(f)
        ])
        abs_integrals = np.array(decomp.abs_averages) * measures
    else:
        measures = bad_masses = bad_means = abs_integrals = np.zeros(0)

    # (ii)
    average_bound = 2.0 * doubling
    worst_average = float(np.max(bad_masses / (eta * measures))) if intervals else 0.0
    items.append(CZItem('bad_average', worst_average, average_bound,
                        worst_average <= average_bound * (1 + RATIO_SLACK) or decomp.root_selected))
    mean_zero = float(np.max(np.abs(bad_means) / (eta * measures))) if intervals else 0.0
    items.append(CZItem('bad_mean_zero', mean_zero, MEAN_ZERO_TOL, mean_zero < MEAN_ZERO_TOL))

    # (iii)
    # 网格点之外再取 f 的各段中点（切点与坏区间端点之间），覆盖窄于网格间距的台阶
    edges = [0.0, *f.cut_points, *(iv.lower for iv in intervals), *(iv.upper for iv in intervals)]
    samples = np.union1d(points, _piece_midpoints(edges))
    off_points = samples[decomp._locate(samples) < 0]
    off_sup = float(np.max(np.abs(f(off_points)))) if off_points.size else 0.0
    good_sup = max([off_sup] + [abs(a) for a in decomp.averages])
    items.append(CZItem('good_sup', good_sup / eta, doubling,
                        good_sup / eta <= doubling * (1 + RATIO_SLACK) or decomp.root_selected))
    good_norm = norm_f - float(np.sum(abs_integrals)) + float(np.sum(np.abs(decomp.averages) * measures))
    good_ratio = good_norm / norm_f if norm_f > 0 else 0.0
    items.append(CZItem('good_l1', good_ratio, 1.0, good_ratio <= 1.0 + RATIO_SLACK))

    # (iv)
    bad_ratio = float(np.sum(bad_masses)) / norm_f if norm_f > 0 else 0.0
    items.append(CZItem('bad_l1', bad_ratio, 2.0, bad_ratio <= 2.0 * (1 + RATIO_SLACK)))

    # (v)
    bad_set = eta * float(np.sum(measures)) / norm_f if norm_f > 0 else 0.0
    items.append(CZItem('bad_set', bad_set, 1.0, bad_set <= 1.0 + RATIO_SLACK or decomp.root_selected))

    # (vi)
    overlap = _max_overlap(intervals)
    items.append(CZItem('overlap', float(overlap), 1.0, overlap <= 1))

    dilated = _union_measure(lam, [iv.as_interval().dilate(3.0) for iv in intervals]) if intervals else 0.0
    dilated_ratio = eta * dilated / norm_f if norm_f > 0 else 0.0
    report = CZReport(tuple(items), dilated_ratio, decomp.guard_hits, decomp.root_selected)
    if not report.passed:
        failed = [item.name for item in items if not item.passed]
        logger.warning(f"CZ 分解校验未通过: {f.name}, η={eta}, 失败项 {failed}")
    return report


def bmo_mean(lam: LambdaLike, f: TestFunction, interval: HalfLineInterval) -> float:
    """f_{I,λ} = (1/m_λ(I)) ∫_I f dm_λ"""
    lam = as_lambda(lam)
    integral = float(interval_integrals(lam, f, [interval.lower], [interval.upper])[0])
    return integral / measure_interval(lam, interval)


@dataclass(frozen=True)
class BMOFamily:
    """对数间隔的中心 × 半径区间族"""
    centers: Tuple[float, ...]
    radii: Tuple[float, ...]

    @classmethod
    def log_spaced(cls, lower: float, upper: float, n_centers: int = BMO_CENTERS,
                   n_radii: int = BMO_RADII) -> 'BMOFamily':
        return cls(tuple(np.geomspace(lower, upper, n_centers)), tuple(np.geomspace(lower, upper, n_radii)))

    def refine(self) -> 'BMOFamily':
        """在相邻点之间插入几何中点，得到原区间族的超集"""
        def interleave(values):
            values = np.asarray(values)
            mids = np.sqrt(values[:-1] * values[1:])
            return tuple(np.sort(np.concatenate([values, mids])))
        return BMOFamily(interleave(self.centers), interleave(self.radii))

    def intervals(self):
        for c in self.centers:
            for r in self.radii:
                yield HalfLineInterval(c, r)


@dataclass(frozen=True)
class BMOEstimate:
    value: float
    witness: Optional[HalfLineInterval]


def bmo_norm(lam: LambdaLike, f: TestFunction, family: BMOFamily = None, grid: RadialGrid = None) -> BMOEstimate:
    """
    sup_I (1/m_λ(I)) ∫_I |f - f_{I,λ}| dm_λ 在有限区间族上的下界

    f 在网格单元上按中点取常值，区间端点处的单元按部分测度截取；区间超出网格上界的部分舍去。
    """
    lam = as_lambda(lam)
    grid = grid or RadialGrid()
    family = family or BMOFamily.log_spaced(grid.lower, grid.upper)
    edges = grid.integration_edges(f.cut_points)
    mids = 0.5 * (edges[:-1] + edges[1:])
    heights = f(mids)

    best, witness = 0.0, None
    for interval in family.intervals():
        lower, upper = interval.lower, min(interval.upper, grid.upper)
        if upper <= lower:
            continue
        first = max(int(np.searchsorted(edges, lower, side='right')) - 1, 0)
        last = int(np.searchsorted(edges, upper, side='left'))
        cell_lower = np.maximum(edges[first:last], lower)
        cell_upper = np.minimum(edges[first + 1:last + 1], upper)
        weights = measure_between(lam, cell_lower, cell_upper)
        values = heights[first:last]
        total = float(np.sum(weights))
        if total <= 0:
            continue
        mean = float(np.sum(values * weights)) / total
        oscillation = float(np.sum(np.abs(values - mean) * weights)) / total
        if oscillation > best:
            best, witness = oscillation, interval
    return BMOEstimate(best, witness)
