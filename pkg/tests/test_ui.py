"""界面页面里的纯计算部分"""
import math

import pytest

from src.ui.pages.kernel import evaluate_kernel_panel
from src.ui.pages.settings import parse_positive


@pytest.mark.parametrize("text,cast,expected", [
    ("0.5", float, 0.5),
    ("4", int, 4),
    ("0", float, None),
    ("-2", float, None),
    ("abc", float, None),
    ("1.5", int, None),
])
def test_parse_positive(text, cast, expected):
    assert parse_positive(text, cast) == expected


def test_kernel_panel_rows():
    rows = dict(evaluate_kernel_panel(1.0, 1.0, 0.0))
    assert float(rows["R(x, y)"]) == pytest.approx(-4 / math.pi, rel=1e-9)
    assert len(rows) == 5


def test_kernel_panel_reports_inapplicable_regimes():
    rows = evaluate_kernel_panel(1.0, 1.0, 0.5)
    assert any(value.startswith("不适用") for _, value in rows)
