"""Bessel-Riesz 核函数与区域诊断量"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import beta as beta_function

from src.core.errors import DomainError, RegimeError, SingularityError
from src.core.kernel import (
    KernelEvalConfig,
    RegimeConstants,
    clear_kernel_cache,
    get_evaluator,
    kernel_at_origin,
    kernel_diagonal_defect,
    kernel_far_field_ratio,
    kernel_size_ratio,
    kernel_smoothness_ratio,
    riesz_kernel,
    riesz_kernel_many,
)


def elementary_kernel_lambda_one(t: float) -> float:
    """λ = 1 时 R(1, t) 的初等闭式"""
    return -(np.log(abs((1 + t) / (1 - t))) / t + 2.0 / (1 - t * t)) / np.pi


def test_origin_value_lambda_one():
    assert riesz_kernel(1.0, 1.0, 0.0) == pytest.approx(-4.0 / np.pi, rel=1e-10)
    assert riesz_kernel(1.0, 1.0, 0.0) == pytest.approx(-1.2732395, abs=1e-7)


@pytest.mark.parametrize("lam", [0.3, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("x", [0.1, 1.0, 10.0])
def test_origin_matches_beta_form(lam, x):
    expected = -(2 * lam / np.pi) * beta_function(lam, 0.5) * x ** -(2 * lam + 1)
    assert kernel_at_origin(lam, x) == pytest.approx(expected, rel=1e-14)
    assert riesz_kernel(lam, x, 0.0) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("t", [0.1, 0.5, 0.8, 1.25, 2.0, 4.0])
def test_lambda_one_elementary_form(t):
    assert riesz_kernel(1.0, 1.0, t) == pytest.approx(elementary_kernel_lambda_one(t), rel=1e-7, abs=1e-10)


@given(
    lam=st.sampled_from([0.5, 1.0, 1.5]),
    x=st.floats(min_value=0.1, max_value=10.0),
    y=st.floats(min_value=0.1, max_value=10.0),
    k=st.integers(min_value=-3, max_value=3),
)
@settings(max_examples=60, deadline=None)
def test_homogeneity(lam, x, y, k):
    if abs(x - y) < 1e-2 * x:
        return
    c = 2.0 ** k
    base = riesz_kernel(lam, x, y)
    scaled = riesz_kernel(lam, c * x, c * y) * c ** (2 * lam + 1)
    assert scaled == pytest.approx(base, rel=1e-12)


def test_diagonal_is_singular():
    with pytest.raises(SingularityError):
        riesz_kernel(1.0, 2.0, 2.0)
    with pytest.raises(SingularityError):
        riesz_kernel_many(1.0, [1.0, 2.0], [0.5, 2.0])


def test_domain_errors():
    with pytest.raises(DomainError):
        riesz_kernel(-1.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        riesz_kernel(1.0, 0.0, 0.5)
    with pytest.raises(DomainError):
        KernelEvalConfig(rel_tol=1e-2)


def test_many_matches_scalar():
    xs = np.array([1.0, 2.0, 3.0])
    ys = np.array([0.5, 0.0, 7.0])
    values = riesz_kernel_many(1.0, xs, ys)
    for x, y, v in zip(xs, ys, values):
        assert v == pytest.approx(riesz_kernel(1.0, x, y), rel=1e-15)


def test_size_ratio_at_one_two():
    ratio = kernel_size_ratio(1.0, 1.0, 2.0)
    assert ratio == pytest.approx(8.0 / 3.0 * abs(riesz_kernel(1.0, 1.0, 2.0)), rel=1e-12)


def test_smoothness_ratio_finite_and_stable():
    coarse = kernel_smoothness_ratio(1.0, 10.0, 1.0, 1.1, KernelEvalConfig(rel_tol=1e-8))
    fine = kernel_smoothness_ratio(1.0, 10.0, 1.0, 1.1, KernelEvalConfig(rel_tol=1e-10))
    assert np.isfinite(coarse)
    assert coarse == pytest.approx(fine, rel=1e-5)
    with pytest.raises(DomainError):
        kernel_smoothness_ratio(1.0, 1.0, 2.0, 3.0)


def test_far_field_ratio_is_bounded():
    ratios = [kernel_far_field_ratio(1.0, 1.0, z) for z in (20.0, 100.0, 1000.0)]
    assert all(r > 0 for r in ratios)
    assert max(ratios) / min(ratios) < 10.0
    assert kernel_far_field_ratio(2.0, 0.5, 50.0) > 0
    with pytest.raises(RegimeError):
        kernel_far_field_ratio(1.0, 1.0, 2.0)


def test_diagonal_defect_stays_bounded():
    defects = [kernel_diagonal_defect(1.0, 1.0, z) for z in (0.99, 0.999, 0.9999)]
    raw = [abs(riesz_kernel(1.0, 1.0, z)) for z in (0.99, 0.999, 0.9999)]
    assert max(defects) < 10.0 * min(defects) + 1.0
    assert raw[-1] > 50.0 * raw[0]
    assert np.isfinite(kernel_diagonal_defect(0.5, 2.0, 1.9))
    with pytest.raises(RegimeError):
        kernel_diagonal_defect(1.0, 1.0, 0.2)


def test_regime_constants_validation():
    with pytest.raises(DomainError):
        RegimeConstants(k1=1.5)
    with pytest.raises(DomainError):
        RegimeConstants(k2=0.4)
    rc = RegimeConstants().with_constant("size", 1.25)
    assert rc.constant("size") == 1.25


def test_evaluator_cache():
    evaluator = get_evaluator(1.0)
    assert get_evaluator(1.0) is evaluator
    clear_kernel_cache()
    assert get_evaluator(1.0) is not evaluator
