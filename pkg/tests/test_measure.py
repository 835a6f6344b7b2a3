"""测度、区间与网格"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import DomainError, MissingDecayError
from src.core.functions import constant, indicator
from src.core.measure import (
    BesselParameter,
    EpsilonLadder,
    HalfLineInterval,
    RadialGrid,
    doubling_ratio,
    lp_norm,
    measure_between,
    measure_interval,
    volume_comparability,
)

lambdas = st.sampled_from([0.25, 0.5, 1.0, 2.0, 3.5])
positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)


def test_bessel_parameter_rejects_non_positive():
    with pytest.raises(DomainError):
        BesselParameter(0.0)
    with pytest.raises(DomainError):
        BesselParameter(float('nan'))
    assert BesselParameter(1.5).exponent == 4.0


def test_measure_closed_form():
    assert float(measure_between(1.0, 0.0, 1.0)) == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert measure_interval(1.0, HalfLineInterval(1.0, 1.0)) == pytest.approx(8.0 / 3.0, rel=1e-15)
    # 区间被 0 截断
    assert HalfLineInterval(1.0, 3.0).lower == 0.0


def test_measure_near_cancellation():
    # b - a 很小时仍然准确
    value = float(measure_between(1.0, 1e8, 1e8 + 1.0))
    assert value == pytest.approx(1e16, rel=1e-9)


@given(lam=lambdas, x=positive, r=positive)
@settings(max_examples=300, deadline=None)
def test_doubling_ratio_bounded(lam, x, r):
    ratio = doubling_ratio(lam, HalfLineInterval(x, r))
    assert 1.0 < ratio <= 2.0 ** (2 * lam + 1) * (1 + 1e-12)


@given(lam=lambdas, x=positive, r=positive, c=st.sampled_from([0.125, 0.5, 2.0, 8.0]))
@settings(max_examples=200, deadline=None)
def test_measure_scaling(lam, x, r, c):
    base = measure_interval(lam, HalfLineInterval(x, r))
    scaled = measure_interval(lam, HalfLineInterval(c * x, c * r))
    assert scaled == pytest.approx(c ** (2 * lam + 1) * base, rel=1e-10)


def test_volume_comparability_value():
    assert volume_comparability(1.0, 1.0, 1.0) == pytest.approx(4.0 / 3.0, rel=1e-14)


@given(lam=lambdas, x=positive, r=positive)
@settings(max_examples=200, deadline=None)
def test_volume_comparability_is_finite(lam, x, r):
    ratio = volume_comparability(lam, x, r)
    assert 0 < ratio < np.inf


def test_ladder_validation():
    with pytest.raises(DomainError):
        EpsilonLadder((1.0, 1.0))
    with pytest.raises(DomainError):
        EpsilonLadder((1.0,))
    with pytest.raises(DomainError):
        EpsilonLadder.geometric(1.0, 1.0, 4)


def test_ladder_subdivision_keeps_endpoints(ladder):
    radii = ladder.subdivided(3)
    assert radii.size == (len(ladder) - 1) * 3 + 1
    assert set(ladder.values) <= set(radii.tolist())
    assert np.all(np.diff(radii) < 0)


def test_grid_refine_contains_old_edges():
    grid = RadialGrid(1e-2, 1e2, 16)
    finer = grid.refine()
    assert finer.n == 32
    np.testing.assert_allclose(finer.edges[::2], grid.edges, rtol=1e-13)


def test_grid_cell_measures_sum(small_grid):
    total = small_grid.cell_measures(1.0).sum()
    expected = float(measure_between(1.0, small_grid.lower, small_grid.upper))
    assert total == pytest.approx(expected, rel=1e-12)


def test_lp_norm_indicator(small_grid):
    assert lp_norm(1.0, indicator(0, 1), 2.0, small_grid) == pytest.approx(np.sqrt(1.0 / 3.0), rel=1e-12)
    assert lp_norm(0.5, indicator(0, 1), 1.0, small_grid) == pytest.approx(0.5, rel=1e-12)


def test_lp_norm_needs_decay(small_grid):
    with pytest.raises(MissingDecayError):
        lp_norm(1.0, constant(1.0), 2.0, small_grid)
    with pytest.raises(DomainError):
        lp_norm(1.0, indicator(0, 1), 0.5, small_grid)


def test_measure_tiny_interval_near_origin():
    value = float(measure_between(20.0, 1e-8, 2.0))
    assert np.isfinite(value)
    assert value == pytest.approx(2.0 ** 41 / 41.0, rel=1e-12)
