"""
主界面模块
"""
import logging

import flet as ft

from src.constants import NAVIGATION_WIDTH
from src.ui.pages.kernel import create_kernel_page
from src.ui.pages.settings import create_settings_page
from src.ui.pages.verify import create_verify_page

logger = logging.getLogger(__name__)

PAGE_LABELS = ["验证", "核函数", "设置"]


def show_main_ui(page: ft.Page):
    """显示主界面"""

    # 预先创建所有页面，保持状态
    verify_page = create_verify_page(page)
    kernel_page = create_kernel_page(page)
    settings_page = create_settings_page(page)

    pages = [verify_page, kernel_page, settings_page]

    content_container = ft.Column(
        [verify_page],
        alignment=ft.MainAxisAlignment.START,
        expand=True,
    )

    def on_nav_change(e):
        selected_index = e.control.selected_index
        content_container.controls.clear()
        content_container.controls.append(pages[selected_index])
        content_container.update()
        logger.info(f"切换到页面: {PAGE_LABELS[selected_index]}")

    navigation_content = ft.Column(
        [
            ft.Container(
                content=ft.Text("Bessel-Riesz 验证", size=16, weight=ft.FontWeight.BOLD),
                padding=20,
                bgcolor=ft.Colors.with_opacity(0.05, ft.Colors.BLUE_GREY_50),
                border_radius=10,
            ),
            ft.Divider(),
            ft.NavigationRail(
                selected_index=0,
                label_type=ft.NavigationRailLabelType.ALL,
                min_width=80,
                min_extended_width=200,
                expand=True,
                destinations=[
                    ft.NavigationRailDestination(
                        icon=ft.Icons.FACT_CHECK_OUTLINED,
                        selected_icon=ft.Icons.FACT_CHECK,
                        label=PAGE_LABELS[0],
                    ),
                    ft.NavigationRailDestination(
                        icon=ft.Icons.FUNCTIONS,
                        selected_icon=ft.Icons.FUNCTIONS,
                        label=PAGE_LABELS[1],
                    ),
                    ft.NavigationRailDestination(
                        icon=ft.Icons.SETTINGS_OUTLINED,
                        selected_icon=ft.Icons.SETTINGS,
                        label=PAGE_LABELS[2],
                    ),
                ],
                on_change=on_nav_change,
            ),
        ],
        expand=True,
    )

    page.add(
        ft.Row(
            [
                # 左侧导航栏，固定宽度
                ft.Container(
                    content=navigation_content,
                    width=NAVIGATION_WIDTH,
                ),
                ft.VerticalDivider(width=1),
                content_container,
            ],
            expand=True,
        )
    )
