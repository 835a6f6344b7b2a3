"""
核函数页面模块
计算 R(x, y) 及四个区域诊断量
"""
import logging

import flet as ft

from src.config.settings import app_settings
from src.constants import COLOR_BLUE_600, COLOR_RED_500, DEFAULT_LAMBDA
from src.core.kernel import (
    kernel_diagonal_defect,
    kernel_far_field_ratio,
    kernel_size_ratio,
    kernel_smoothness_ratio,
    riesz_kernel,
)

logger = logging.getLogger(__name__)


def evaluate_kernel_panel(lam: float, x: float, y: float) -> list[tuple[str, str]]:
    """页面显示的 (名称, 数值) 列表；不适用的诊断量显示原因"""
    results = [("R(x, y)", f"{riesz_kernel(lam, x, y):.12g}")]
    results.append(("|R|·m_λ(I(x,|x-y|))", f"{kernel_size_ratio(lam, x, y):.6g}"))

    z = y + 0.25 * abs(x - y)
    try:
        results.append(("光滑性比值 (z = y + |x-y|/4)", f"{kernel_smoothness_ratio(lam, x, y, z):.6g}"))
    except Exception as e:
        results.append(("光滑性比值", f"不适用: {e}"))
    try:
        results.append(("远场比值 R(x,y)·y^{2λ+2}/x", f"{kernel_far_field_ratio(lam, x, y):.6g}"))
    except Exception as e:
        results.append(("远场比值", f"不适用: {e}"))
    try:
        results.append(("近对角缺陷", f"{kernel_diagonal_defect(lam, x, y):.6g}"))
    except Exception as e:
        results.append(("近对角缺陷", f"不适用: {e}"))
    return results


def create_kernel_page(page: ft.Page):
    """创建核函数页面"""

    lambda_input = ft.TextField(label="λ", value=str(app_settings.get('lambda', DEFAULT_LAMBDA)), width=120)
    x_input = ft.TextField(label="x", value="1", width=120)
    y_input = ft.TextField(label="y", value="0.5", width=120)
    status_text = ft.Text("", size=14, color=ft.Colors.GREY_600)
    result_list = ft.Column([], spacing=8)

    def on_compute_click(e):
        try:
            lam, x, y = float(lambda_input.value), float(x_input.value), float(y_input.value)
            rows = evaluate_kernel_panel(lam, x, y)
        except Exception as ex:
            logger.error(f"核函数计算失败: {ex}")
            status_text.value = f"计算失败: {ex}"
            status_text.color = COLOR_RED_500
            status_text.update()
            return
        result_list.controls = [
            ft.Row([
                ft.Text(name, width=260, weight=ft.FontWeight.BOLD),
                ft.Text(value, selectable=True, color=COLOR_BLUE_600),
            ])
            for name, value in rows
        ]
        status_text.value = f"λ={lam}, x={x}, y={y}"
        status_text.color = ft.Colors.GREY_600
        result_list.update()
        status_text.update()

    compute_button = ft.ElevatedButton(text="计算", icon=ft.Icons.CALCULATE, on_click=on_compute_click)

    return ft.Container(
        content=ft.Column(
            [
                ft.Text("核函数", size=24, weight=ft.FontWeight.BOLD),
                ft.Container(height=20),
                ft.Row([lambda_input, x_input, y_input, compute_button], spacing=10),
                status_text,
                ft.Divider(),
                result_list,
            ],
            scroll=ft.ScrollMode.AUTO,
        ),
        padding=30,
        expand=True,
    )
