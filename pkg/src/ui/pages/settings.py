"""
设置页面模块
"""
import logging

import flet as ft

from src.config.settings import app_settings
from src.constants import DEFAULT_LAMBDA, DEFAULT_QUICK, DEFAULT_WORKERS, TRANSFORM_REL_TOL

logger = logging.getLogger(__name__)


def parse_positive(text: str, cast=float):
    """解析正数，失败返回 None"""
    try:
        value = cast(text)
    except (TypeError, ValueError):
        return None
    return value if value > 0 else None


def create_settings_page(page: ft.Page):
    """创建设置页面"""

    status_text = ft.Text("", size=12, color=ft.Colors.GREY_600)

    def save_field(key: str, control: ft.TextField, cast=float):
        value = parse_positive(control.value, cast)
        if value is None:
            control.error_text = "请输入正数"
            control.update()
            return
        control.error_text = None
        control.update()
        if app_settings.set(key, value):
            status_text.value = f"已保存 {key} = {value}"
        else:
            status_text.value = "保存失败，请查看日志"
        status_text.update()
        logger.info(f"更新设置 {key} = {value}")

    # 默认 λ
    lambda_input = ft.TextField(
        label="默认 λ",
        value=str(app_settings.get('lambda', DEFAULT_LAMBDA)),
        width=200,
        keyboard_type=ft.KeyboardType.NUMBER,
        on_blur=lambda e: save_field('lambda', e.control),
    )

    # 求积容差
    tolerance_input = ft.TextField(
        label="变换求积相对容差",
        value=str(app_settings.get('rel_tol', TRANSFORM_REL_TOL)),
        width=200,
        on_blur=lambda e: save_field('rel_tol', e.control),
    )

    # 工作进程数
    workers_input = ft.TextField(
        label="工作进程数",
        value=str(app_settings.get('workers', DEFAULT_WORKERS)),
        width=200,
        keyboard_type=ft.KeyboardType.NUMBER,
        on_blur=lambda e: save_field('workers', e.control, int),
    )

    # 快速模式
    quick_switch = ft.Switch(
        label="默认使用快速配置",
        value=app_settings.get('quick', DEFAULT_QUICK),
        on_change=lambda e: app_settings.set('quick', e.control.value),
    )

    settings_container = ft.Container(
        content=ft.Column(
            [
                ft.Text("设置", size=24, weight=ft.FontWeight.BOLD),
                ft.Container(height=20),
                ft.Container(
                    content=ft.Column([
                        ft.Text("数值默认值", size=18, weight=ft.FontWeight.BOLD),
                        ft.Container(height=10),
                        lambda_input,
                        tolerance_input,
                        workers_input,
                        ft.Container(height=10),
                        quick_switch,
                    ]),
                    padding=15,
                    border=ft.border.all(1, ft.Colors.GREY_300),
                    border_radius=10,
                ),
                ft.Container(height=10),
                status_text,
            ],
            alignment=ft.MainAxisAlignment.START,
            horizontal_alignment=ft.CrossAxisAlignment.START,
            scroll=ft.ScrollMode.AUTO,
        ),
        padding=30,
        expand=True,
    )

    return settings_container
