"""变差、振荡、跳跃数与上穿数"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import DomainError, ProfileTooLongError
from src.core.measure import EpsilonLadder
from src.core.operators import TruncationProfile
from src.core.oscillation import (
    MixedNormArray,
    brute_force_jumps,
    brute_force_upcrossings,
    brute_force_variation,
    count_jumps,
    count_upcrossings,
    increment_array,
    jump_count,
    mixed_norm,
    oscillation,
    oscillation_prime,
    profile_from_csv,
    profile_to_csv,
    rho_variation,
    upcross_count,
)

# 1/4 的整数倍，差值在浮点下精确
quarter_values = st.lists(st.integers(min_value=-16, max_value=16).map(lambda k: k / 4.0), min_size=2, max_size=10)
rhos = st.sampled_from([2.5, 3.0, 4.0])
betas = st.sampled_from([0.25, 0.5, 1.0, 1.5])


def ladder_of(profile: TruncationProfile) -> EpsilonLadder:
    return EpsilonLadder(profile.epsilons)


def test_zigzag_fixture():
    values = [0.0, 2.0, 0.0, 2.0]
    assert rho_variation(values, 3.0) == pytest.approx(24.0 ** (1.0 / 3.0), rel=1e-14)
    assert brute_force_variation(values, 3.0) == pytest.approx(24.0 ** (1.0 / 3.0), rel=1e-14)
    assert jump_count(values, 1.0) == 3
    assert brute_force_jumps(values, 1.0) == 3
    assert 1.0 * 3 ** (1.0 / 3.0) <= rho_variation(values, 3.0)


def test_constant_profile_has_no_variation():
    assert rho_variation([1.5, 1.5, 1.5], 3.0) == 0.0
    assert jump_count([1.5, 1.5, 1.5], 0.25) == 0


def test_variation_input_checks():
    with pytest.raises(DomainError):
        rho_variation([1.0], 3.0)
    with pytest.raises(DomainError):
        rho_variation([1.0, 2.0], 0.5)
    with pytest.raises(DomainError):
        rho_variation([1.0, float('nan')], 3.0)
    with pytest.raises(ProfileTooLongError):
        rho_variation(np.zeros(20_001), 3.0)
    with pytest.raises(DomainError):
        count_jumps([0.0, 1.0], 0.0)
    with pytest.raises(DomainError):
        count_upcrossings([0.0, 1.0], 1.0, 1.0)


@given(values=quarter_values, rho=rhos)
@settings(max_examples=200, deadline=None)
def test_variation_matches_enumeration(values, rho):
    assert rho_variation(values, rho) == brute_force_variation(values, rho)


@given(values=quarter_values, beta=betas)
@settings(max_examples=200, deadline=None)
def test_jumps_match_enumeration(values, beta):
    assert count_jumps(values, beta) == brute_force_jumps(values, beta)
    # 与扫描方向无关
    assert jump_count(values, beta) == brute_force_jumps(values, beta)


@given(values=quarter_values, a=st.integers(min_value=-8, max_value=8), gap=st.integers(min_value=1, max_value=6))
@settings(max_examples=200, deadline=None)
def test_upcrossings_match_enumeration(values, a, gap):
    alpha = a / 4.0 + 0.125
    gamma = alpha + gap / 4.0
    assert count_upcrossings(values, alpha, gamma) == brute_force_upcrossings(values, alpha, gamma)
    assert upcross_count(values, alpha, gamma) == brute_force_upcrossings(values[::-1], alpha, gamma)


@given(values=quarter_values, rho=rhos, beta=betas)
@settings(max_examples=200, deadline=None)
def test_jumps_controlled_by_variation(values, rho, beta):
    jumps = jump_count(values, beta)
    assert beta * jumps ** (1.0 / rho) <= rho_variation(values, rho) * (1 + 1e-12)


@given(values=quarter_values, a=st.integers(min_value=-8, max_value=8), gap=st.integers(min_value=1, max_value=6))
@settings(max_examples=200, deadline=None)
def test_upcrossings_bounded_by_jumps(values, a, gap):
    alpha = a / 4.0 + 0.125
    gamma = alpha + gap / 4.0
    assert upcross_count(values, alpha, gamma) <= jump_count(values, gamma - alpha)


@given(values=quarter_values)
@settings(max_examples=200, deadline=None)
def test_oscillation_chain(values):
    profile = TruncationProfile.from_values(values)
    ladder = ladder_of(profile)
    o = oscillation(profile, ladder)
    o_prime = oscillation_prime(profile, ladder)
    assert o_prime <= o <= 2.0 * o_prime


def test_oscillation_on_refined_profile():
    # 每个区段内有三个样本
    profile = TruncationProfile.from_values([0.0, 1.0, 0.5, 2.0, 1.0])
    ladder = EpsilonLadder((1.0, 0.25, 0.0625))
    assert oscillation(profile, ladder) == pytest.approx(np.hypot(1.0, 1.5), rel=1e-15)
    h = increment_array(profile, ladder)
    assert h.bands == ((0.5, -0.5), (0.5, -1.0))
    assert oscillation_prime(profile, ladder) == pytest.approx(np.hypot(0.5, 1.0), rel=1e-15)


def test_oscillation_needs_band_samples():
    profile = TruncationProfile.from_values([0.0, 1.0, 2.0])
    with pytest.raises(DomainError):
        oscillation(profile, EpsilonLadder((1.0, 0.75)))


def test_mixed_norm_array():
    h = MixedNormArray(((1.0, -3.0), (4.0,)))
    assert mixed_norm(h) == pytest.approx(5.0)
    assert mixed_norm(h + h) == pytest.approx(10.0)
    with pytest.raises(DomainError):
        MixedNormArray(((1.0,), ()))


def test_profile_csv_round_trip(tmp_path, zigzag_csv):
    profile = profile_from_csv(zigzag_csv)
    assert profile.values == (0.0, 2.0, 0.0, 2.0)
    path = tmp_path / "copy.csv"
    profile_to_csv(profile, path)
    assert profile_from_csv(path).epsilons == profile.epsilons


def test_profile_csv_rejects_bad_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("radius,value\n1.0,0.0\n", encoding="utf-8")
    with pytest.raises(DomainError):
        profile_from_csv(path)


def test_small_rho_examples():
    assert rho_variation([0.0, 1.0, 0.0], 2.0) == pytest.approx(np.sqrt(2.0), rel=1e-14)
    assert rho_variation([3.0, 2.0, 1.0], 2.0) == pytest.approx(2.0, rel=1e-14)


@given(pair=st.integers(min_value=2, max_value=10).flatmap(
    lambda n: st.tuples(*(st.lists(st.floats(min_value=-10, max_value=10), min_size=n, max_size=n),) * 2)),
    rho=rhos)
@settings(max_examples=200, deadline=None)
def test_variation_is_sublinear(pair, rho):
    f, g = (np.asarray(values) for values in pair)
    combined = rho_variation(f + g, rho)
    assert combined <= (rho_variation(f, rho) + rho_variation(g, rho)) * (1 + 1e-12) + 1e-12


@given(bands=st.lists(st.lists(st.floats(min_value=-10, max_value=10), min_size=1, max_size=4),
                      min_size=1, max_size=5),
       shift=st.floats(min_value=-5, max_value=5))
@settings(max_examples=200, deadline=None)
def test_mixed_norm_triangle_inequality(bands, shift):
    h = MixedNormArray(tuple(tuple(band) for band in bands))
    g = MixedNormArray(tuple(tuple(v * 0.5 - shift for v in band) for band in bands))
    assert mixed_norm(h + g) <= (mixed_norm(h) + mixed_norm(g)) * (1 + 1e-12) + 1e-12
