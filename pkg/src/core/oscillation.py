"""
振荡与变差模块
截断轮廓上的 ρ-变差、振荡 O 与 O′、混合范数 E、β-跳跃数 Λ 与上穿数 N
"""
import csv
import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np

from src.constants import PROFILE_CSV_COLUMNS, VARIATION_MAX_SAMPLES
from src.core.errors import DomainError, ProfileTooLongError
from src.core.measure import EpsilonLadder
from src.core.operators import TruncationProfile

logger = logging.getLogger(__name__)

ProfileLike = Union[TruncationProfile, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class MixedNormArray:
    """按区段分组的候选值 h(δ, i)"""
    bands: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        bands = tuple(tuple(float(v) for v in band) for band in self.bands)
        if any(len(band) == 0 for band in bands):
            raise DomainError("混合范数数组的每个区段都必须非空")
        object.__setattr__(self, 'bands', bands)

    def __add__(self, other: 'MixedNormArray') -> 'MixedNormArray':
        if [len(b) for b in self.bands] != [len(b) for b in other.bands]:
            raise DomainError("混合范数数组形状不一致")
        return MixedNormArray(tuple(tuple(a + b for a, b in zip(p, q)) for p, q in zip(self.bands, other.bands)))


def _as_values(profile: ProfileLike) -> np.ndarray:
    if isinstance(profile, TruncationProfile):
        values = profile.value_array
    else:
        values = np.asarray(profile, dtype=float)
    if values.ndim != 1:
        raise DomainError("轮廓必须是一维序列")
    if np.isnan(values).any():
        raise DomainError("轮廓中含有 NaN")
    return values


def _l2(contributions) -> float:
    """按区段顺序的 ℓ² 和；O、O′ 与混合范数共用，保证比较在浮点意义下精确"""
    contributions = np.asarray(contributions, dtype=float)
    return float(np.sqrt(np.sum(contributions * contributions)))


def _power_rows(values: np.ndarray, scale: float, rho: float):
    """第 j 行为 (|v_j - v_i| / scale)^ρ，i < j"""
    for j in range(1, values.size):
        yield j, (np.abs(values[j] - values[:j]) / scale) ** rho


def rho_variation(profile: ProfileLike, rho: float) -> float:
    """
    轮廓网格上的 ρ-变差 sup (Σ|v_{i+1} - v_i|^ρ)^{1/ρ}

    动态规划 best[j] = max(0, max_{i<j} best[i] + |v_j - v_i|^ρ)，O(m²)。
    差值先按值域缩放，避免大 ρ 时溢出。
    """
    if not rho >= 1:
        raise DomainError(f"ρ 必须 >= 1，收到 {rho}")
    if rho <= 2:
        logger.warning(f"ρ={rho} <= 2，变差算子的有界性只对 ρ > 2 成立")
    values = _as_values(profile)
    if values.size < 2:
        raise DomainError("计算变差至少需要两个样本")
    if values.size > VARIATION_MAX_SAMPLES:
        raise ProfileTooLongError(f"轮廓长度 {values.size} 超过上限 {VARIATION_MAX_SAMPLES}")
    scale = float(values.max() - values.min())
    if scale == 0:
        return 0.0
    best = np.zeros(values.size)
    for j, powers in _power_rows(values, scale, rho):
        best[j] = max(0.0, float(np.max(best[:j] + powers)))
    return scale * float(best.max()) ** (1.0 / rho)


def brute_force_variation(profile: ProfileLike, rho: float) -> float:
    """穷举所有子序列的 ρ-变差，只用于校验（m <= 16）"""
    values = _as_values(profile)
    if values.size > 16:
        raise DomainError("穷举只支持长度 <= 16 的轮廓")
    scale = float(values.max() - values.min()) if values.size else 0.0
    if scale == 0:
        return 0.0
    powers = np.zeros((values.size, values.size))
    for j, row in _power_rows(values, scale, rho):
        powers[j, :j] = row
    best = 0.0
    for size in range(2, values.size + 1):
        for chain in itertools.combinations(range(values.size), size):
            total = 0.0
            for i, j in zip(chain, chain[1:]):
                total = total + powers[j, i]
            best = max(best, total)
    return scale * best ** (1.0 / rho)


def _band_members(profile: TruncationProfile, ladder: EpsilonLadder):
    eps = profile.epsilon_array
    values = profile.value_array
    for index, (outer, inner) in enumerate(ladder.bands()):
        closed = (eps >= inner) & (eps <= outer)
        yield index, outer, inner, eps, values, closed


def oscillation(profile: TruncationProfile, ladder: EpsilonLadder) -> float:
    """
    O = (Σ_i sup_{ε_{i+1} <= t' < t <= ε_i} |v(t) - v(t')|²)^{1/2}

    每个闭区段内取样本的 max - min。
    """
    contributions = []
    for index, outer, inner, eps, values, closed in _band_members(profile, ladder):
        if closed.sum() < 2:
            raise DomainError(f"区段 {index} [{inner:.6g}, {outer:.6g}] 内样本不足两个")
        members = values[closed]
        contributions.append(members.max() - members.min())
    return _l2(contributions)


def increment_array(profile: TruncationProfile, ladder: EpsilonLadder) -> MixedNormArray:
    """h(δ, i) = v(ε_{i+1}) - v(δ)，δ 取区段 (ε_{i+1}, ε_i] 内的样本"""
    bands = []
    for index, outer, inner, eps, values, closed in _band_members(profile, ladder):
        endpoint = np.flatnonzero(eps == inner)
        if endpoint.size == 0:
            raise DomainError(f"区段 {index} 缺少端点 ε={inner:.6g} 的样本")
        candidates = values[(eps > inner) & (eps <= outer)]
        if candidates.size == 0:
            raise DomainError(f"区段 {index} (ε={inner:.6g}, {outer:.6g}] 内没有样本")
        bands.append(tuple(values[endpoint[0]] - candidates))
    return MixedNormArray(tuple(bands))


def mixed_norm(h: MixedNormArray) -> float:
    """‖h‖_E = (Σ_i (sup_δ |h(δ, i)|)²)^{1/2}"""
    return _l2([max(abs(v) for v in band) for band in h.bands])


def oscillation_prime(profile: TruncationProfile, ladder: EpsilonLadder) -> float:
    """O′ = ‖{v(ε_{i+1}) - v(δ_i)}‖_E"""
    return mixed_norm(increment_array(profile, ladder))


def count_jumps(values: Sequence[float], beta: float) -> int:
    """
    β-跳跃数：链 s_1 < t_1 <= s_2 < t_2 <= ... 上 |v(s_i) - v(t_i)| > β 的最大对数

    贪心扫描：从锚点起维护最小/最大值，差值首次严格超过 β 时闭合一对，闭合点成为新锚点。
    """
    if not beta > 0:
        raise DomainError(f"β 必须为正，收到 {beta}")
    values = _as_values(values)
    count = 0
    if values.size == 0:
        return 0
    low = high = values[0]
    for v in values[1:]:
        low = min(low, v)
        high = max(high, v)
        if high - low > beta:
            count += 1
            low = high = v
    return count


def count_upcrossings(values: Sequence[float], alpha: float, gamma: float) -> int:
    """
    上穿数：s_1 < t_1 < s_2 < ... 上 v(s_i) < α 且 v(t_i) > γ 的最大次数

    values 按截断参数递增的顺序给出。
    """
    if not alpha < gamma:
        raise DomainError(f"要求 α < γ，收到 α={alpha}, γ={gamma}")
    values = _as_values(values)
    count = 0
    below = False
    for v in values:
        if not below:
            below = v < alpha
        elif v > gamma:
            count += 1
            below = False
    return count


def jump_count(profile: ProfileLike, beta: float) -> int:
    """轮廓的 β-跳跃数（与扫描方向无关）"""
    return count_jumps(_as_values(profile)[::-1], beta)


def upcross_count(profile: ProfileLike, alpha: float, gamma: float) -> int:
    """轮廓的上穿数，按 ε 递增的顺序扫描"""
    return count_upcrossings(_as_values(profile)[::-1], alpha, gamma)


def brute_force_jumps(values: Sequence[float], beta: float) -> int:
    """穷举所有合法链的 β-跳跃数，只用于校验"""
    values = tuple(_as_values(values))

    @lru_cache(maxsize=None)
    def best(start: int) -> int:
        result = 0
        for s in range(start, len(values)):
            for t in range(s + 1, len(values)):
                if abs(values[s] - values[t]) > beta:
                    result = max(result, 1 + best(t))
        return result

    return best(0)


def brute_force_upcrossings(values: Sequence[float], alpha: float, gamma: float) -> int:
    """穷举所有合法链的上穿数，只用于校验"""
    values = tuple(_as_values(values))

    @lru_cache(maxsize=None)
    def best(start: int) -> int:
        result = 0
        for s in range(start, len(values)):
            if values[s] < alpha:
                for t in range(s + 1, len(values)):
                    if values[t] > gamma:
                        result = max(result, 1 + best(t + 1))
        return result

    return best(0)


def profile_to_csv(profile: TruncationProfile, path: Union[str, Path]) -> None:
    """导出轮廓，列为 epsilon,value"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(PROFILE_CSV_COLUMNS)
        for eps, value in zip(profile.epsilons, profile.values):
            writer.writerow([repr(eps), repr(value)])


def profile_from_csv(path: Union[str, Path], x: float = 1.0) -> TruncationProfile:
    """
    导入外部轮廓

    Raises:
        DomainError: 列名不符、数值无法解析、含 NaN 或半径不递减
    """
    with open(path, newline='', encoding='utf-8') as handle:
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != PROFILE_CSV_COLUMNS:
            raise DomainError(f"轮廓 CSV 列必须为 {','.join(PROFILE_CSV_COLUMNS)}，收到 {reader.fieldnames}")
        try:
            rows = [(float(row['epsilon']), float(row['value'])) for row in reader]
        except (TypeError, ValueError) as e:
            raise DomainError(f"轮廓 CSV 数值无法解析: {e}") from e
    if not rows:
        raise DomainError(f"轮廓 CSV 为空: {path}")
    epsilons, values = zip(*rows)
    return TruncationProfile(x, epsilons, values)
