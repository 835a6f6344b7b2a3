"""截断变换、轮廓与分解算子"""
import math

import numpy as np
import pytest
from scipy import integrate

from src.core.errors import DomainError, MissingDecayError
from src.core.functions import TestFunction, indicator, standard_family, zero
from src.core.measure import RadialGrid, lp_norm
from src.core.operators import (
    AnnulusBand,
    TruncationProfile,
    annulus_integral,
    hilbert_band,
    local_hilbert_band,
    local_hilbert_split,
    maximal_lambda,
    maximal_lebesgue,
    split_truncation,
    t1,
    t1_norm_constant,
    t2,
    truncated_riesz,
    truncation_profile,
)


def test_zero_function_gives_zero(ladder):
    assert truncated_riesz(1.0, zero(), 1.0, 0.5) == 0.0
    profile = truncation_profile(1.0, zero(), 1.0, ladder)
    assert set(profile.values) == {0.0}


def test_missing_decay_is_rejected():
    unbounded = TestFunction("unbounded", lambda y: y, None, 'smooth')
    with pytest.raises(MissingDecayError):
        truncated_riesz(1.0, unbounded, 1.0, 0.5)


def test_truncation_radius_must_be_positive():
    with pytest.raises(DomainError):
        truncated_riesz(1.0, indicator(0, 1), 1.0, 0.0)


def test_profile_matches_direct_evaluation(ladder):
    f = indicator(0, 1)
    profile = truncation_profile(1.0, f, 1.5, ladder, k=2)
    assert len(profile) == 7
    for eps, value in zip(profile.epsilons, profile.values):
        direct = truncated_riesz(1.0, f, 1.5, eps)
        assert value == pytest.approx(direct, rel=1e-8, abs=1e-12)
    assert profile.provenance[:2] == (1.0, f.name)


def test_annulus_is_difference_of_truncations():
    f = indicator(2, 3)
    band = annulus_integral(1.0, f, 2.5, 0.1, 0.4)
    direct = truncated_riesz(1.0, f, 2.5, 0.1) - truncated_riesz(1.0, f, 2.5, 0.4)
    assert band == pytest.approx(direct, rel=1e-8, abs=1e-12)


def test_profile_validation():
    with pytest.raises(DomainError):
        TruncationProfile(1.0, (1.0, 1.0), (0.0, 1.0))
    with pytest.raises(DomainError):
        TruncationProfile.from_values([0.0, float('nan')])
    profile = TruncationProfile.from_values([0.0, 1.0, 2.0])
    assert profile.epsilons == (1.0, 0.5, 0.25)


def test_split_parts_add_up():
    f = indicator(0.6, 1.8)
    band = AnnulusBand(0.1, 0.9)
    parts = split_truncation(1.0, f, 1.0, band)
    direct = annulus_integral(1.0, f, 1.0, 0.1, 0.9)
    assert parts.total == pytest.approx(direct, abs=1e-8)
    # f 的支撑在 (x/2, 2x) 内
    assert parts.i1 == 0.0
    assert parts.i2 == 0.0


def test_local_hilbert_closed_form():
    # 局部带为 [1/2, 0.9) ∪ (1.1, 1.6]，反导数为对数
    f = indicator(0.1, 3)
    value = local_hilbert_band(f, 1.0, AnnulusBand(0.1, 0.6))
    assert value == pytest.approx(np.log(6.0 / 5.0) / np.pi, abs=1e-9)


def test_local_hilbert_symmetric_band_cancels():
    value = local_hilbert_band(indicator(0.1, 3), 1.0, AnnulusBand(0.1, 0.4))
    assert value == pytest.approx(0.0, abs=1e-9)


def test_local_hilbert_split_sums_to_local():
    f = indicator(0.2, 5)
    band = AnnulusBand(0.05, 3.0)
    whole, lower, upper = local_hilbert_split(f, 1.0, band)
    assert whole + lower + upper == pytest.approx(local_hilbert_band(f, 1.0, band), abs=1e-9)


def test_annulus_band_validation():
    with pytest.raises(DomainError):
        AnnulusBand(0.5, 0.5)
    band = AnnulusBand(0.1, 0.5)
    np.testing.assert_array_equal(band.contains(1.0, [1.05, 1.3, 1.5, 2.0]), [False, True, True, False])


def test_t1_explicit_values():
    assert t1_norm_constant(1.0, 2.0) == pytest.approx(0.235702, abs=1e-6)
    # ∫_{1/2}^{1} dy/y
    assert t1(indicator(0, 1), 0.25) == pytest.approx(np.log(2.0), rel=1e-10)


def test_t2_is_positive_and_finite():
    value = t2(1.0, indicator(0.5, 2), 1.0)
    assert 0 < value < np.inf


def test_maximal_family_bounds():
    f = indicator(0, 1)
    grid = RadialGrid(1e-3, 10.0, 64)
    value = maximal_lebesgue(f, 2.0, grid)
    assert 0.25 <= value <= 0.5 + 1e-12


def test_maximal_subfamily_is_lower_bound():
    f = indicator(0.5, 3)
    grid = RadialGrid(1e-3, 20.0, 128)
    for x in (0.2, 1.0, 4.0):
        assert maximal_lambda(1.0, f, x, grid, stride=2) <= maximal_lambda(1.0, f, x, grid)
    with pytest.raises(DomainError):
        maximal_lambda(1.0, f, 25.0, grid)


def test_hilbert_band_odd_symmetry():
    band = AnnulusBand(0.1, 0.5)
    assert hilbert_band(indicator(0, 3), 1.0, band) == pytest.approx(0.0, abs=1e-8)
    whole, _, _ = local_hilbert_split(indicator(0, 3), 1.0, band)
    assert whole == hilbert_band(indicator(0, 3), 1.0, band)


def test_truncated_riesz_matches_closed_form():
    # λ=1：R(1, t) t² 的原函数为 -(ln((1+t)/(1-t))·(t²+1)/2 - t)/π
    def antiderivative(t):
        return math.log((1 + t) / (1 - t)) * (t * t + 1) / 2 - t

    expected = -(antiderivative(0.3) - antiderivative(0.2)) / math.pi
    assert expected == pytest.approx(-0.0084461976, rel=1e-7)
    assert truncated_riesz(1.0, indicator(2, 3), 10.0, 1.0) == pytest.approx(expected, rel=1e-6)
    # 截断半径小于 7 时不影响结果
    assert truncated_riesz(1.0, indicator(2, 3), 10.0, 6.5) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("lam", [0.5, 1.0])
@pytest.mark.parametrize("f", standard_family(), ids=lambda f: f.name)
def test_t1_norm_bound_over_family(lam, f):
    upper = f.support.upper
    breaks = sorted({point / 2 for point in f.cut_points if 0 < point < upper} | {upper / 4})
    squared, _ = integrate.quad(lambda x: t1(f, x) ** 2 * x ** (2 * lam), 0.0, upper / 2,
                                points=breaks, limit=200)
    norm_f = lp_norm(lam, f, 2.0, RadialGrid(1e-4, upper, 1024, order=4))
    assert math.sqrt(squared) <= t1_norm_constant(lam, 2.0) * norm_f * (1 + 1e-6)
