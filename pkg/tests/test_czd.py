"""CZ 分解与 BMO 估计"""
import json

import numpy as np
import pytest

from src.core.czd import (
    BMOFamily,
    DyadicInterval,
    bmo_mean,
    bmo_norm,
    cz_decompose,
    verify_cz,
)
from src.core.errors import DomainError, ProvenanceError
from src.core.functions import TestFunction, constant, indicator, power_bump, sign_step, smooth_bump, step_pair, zero
from src.core.measure import HalfLineInterval, RadialGrid

CZ_CASES = [
    (1.0, indicator(0, 1), 0.5),
    (1.0, indicator(0, 1), 0.05),
    (1.0, indicator(0, 1), 2.0),
    (0.5, indicator(0.5, 3), 0.3),
    (0.5, power_bump(2, 1), 0.1),
    (1.0, smooth_bump(1, 0.5), 0.05),
    (1.0, step_pair(0.5, 1, 1.5), 0.2),
]


def test_dyadic_interval_geometry():
    cell = DyadicInterval(-1, 3)
    assert (cell.lower, cell.upper) == (1.5, 2.0)
    assert cell.parent() == DyadicInterval(0, 1)
    left, right = cell.children()
    assert (left.lower, right.upper) == (1.5, 2.0)
    assert DyadicInterval(1, 0).contains_interval(cell)
    assert not DyadicInterval(0, 0).contains_interval(cell)
    with pytest.raises(DomainError):
        DyadicInterval(0, -1)


def test_indicator_selects_unit_interval():
    decomposition = cz_decompose(1.0, indicator(0, 1), 0.5)
    assert decomposition.root == DyadicInterval(1, 0)
    assert decomposition.intervals == (DyadicInterval(0, 0),)
    assert decomposition.averages[0] == pytest.approx(1.0, rel=1e-12)
    assert not decomposition.root_selected


def test_large_threshold_selects_nothing():
    decomposition = cz_decompose(1.0, indicator(0, 1), 2.0)
    assert decomposition.intervals == ()


def test_zero_function_on_bounded_support():
    f = TestFunction("zero", lambda y: np.zeros_like(y), HalfLineInterval.from_endpoints(0, 1), 'smooth',
                     sup_bound=0.0)
    decomposition = cz_decompose(1.0, f, 1.0)
    assert decomposition.intervals == ()


@pytest.mark.parametrize("lam,f,eta", CZ_CASES, ids=lambda v: getattr(v, 'name', str(v)))
def test_decomposition_properties(lam, f, eta, small_grid):
    decomposition = cz_decompose(lam, f, eta)
    report = verify_cz(decomposition, f, small_grid)
    failed = [(item.name, item.measured, item.bound) for item in report.items if not item.passed]
    assert report.passed, failed
    assert report.item('overlap').measured <= 1.0
    assert report.dilated_ratio >= 0.0


def test_bad_parts_reassemble_function(small_grid):
    f = step_pair(0.5, 1, 1.5)
    decomposition = cz_decompose(1.0, f, 0.2)
    ys = small_grid.points
    total = decomposition.good_part(f)(ys)
    for _, b in decomposition.bad_parts(f):
        total = total + b(ys)
    np.testing.assert_allclose(total, f(ys), atol=1e-12)


def test_provenance_is_checked(small_grid):
    decomposition = cz_decompose(1.0, indicator(0, 1), 0.5)
    with pytest.raises(ProvenanceError):
        decomposition.good_part(indicator(0, 2))
    with pytest.raises(ProvenanceError):
        verify_cz(decomposition, indicator(0, 2), small_grid)


def test_invalid_inputs():
    with pytest.raises(DomainError):
        cz_decompose(1.0, indicator(0, 1), 0.0)
    with pytest.raises(DomainError):
        cz_decompose(1.0, constant(1.0), 0.5)
    with pytest.raises(DomainError):
        cz_decompose(1.0, sign_step(1.0), 0.5)


def test_json_output():
    decomposition = cz_decompose(1.0, indicator(0, 1), 0.5)
    data = json.loads(decomposition.to_json())
    assert data['threshold'] == 0.5
    assert data['intervals'][0]['lower'] == 0.0
    assert data['intervals'][0]['upper'] == 1.0


def test_bmo_mean_of_indicator():
    mean = bmo_mean(1.0, indicator(0, 1), HalfLineInterval.from_endpoints(0, 2))
    assert mean == pytest.approx(1.0 / 8.0, rel=1e-12)


def test_bmo_norm_of_sign():
    grid = RadialGrid(1e-3, 100.0, 256)
    estimate = bmo_norm(1.0, sign_step(1.0), BMOFamily.log_spaced(1e-3, 100.0, 16, 16), grid)
    assert 0.0 < estimate.value <= 1.0 + 1e-12
    assert estimate.witness is not None
    assert bmo_norm(1.0, zero(), BMOFamily.log_spaced(1e-3, 100.0, 4, 4), grid).value == 0.0


def test_bmo_family_refinement_is_monotone():
    grid = RadialGrid(1e-3, 100.0, 256)
    family = BMOFamily.log_spaced(1e-2, 10.0, 8, 8)
    finer = family.refine()
    assert set(family.centers) <= set(finer.centers)
    assert len(finer.radii) == 15
    f = step_pair(0.5, 1, 1.5)
    assert bmo_norm(1.0, f, family, grid).value <= bmo_norm(1.0, f, finer, grid).value


def test_narrow_feature_is_selected():
    f = indicator(100, 100.01)
    eta = 0.01
    decomposition = cz_decompose(1.0, f, eta)
    assert decomposition.intervals
    inside = np.linspace(100.0, 100.01, 1001)[1:-1]
    assert (decomposition._locate(inside) >= 0).all()
    good = decomposition.good_part(f)(inside)
    assert np.max(np.abs(good)) <= 2.0 ** 3 * eta * (1 + 1e-9)
    report = verify_cz(decomposition, f, RadialGrid(1e-4, 256.0, 512))
    assert report.passed, [(item.name, item.measured, item.bound) for item in report.items if not item.passed]
