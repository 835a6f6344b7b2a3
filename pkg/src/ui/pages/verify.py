"""
验证页面模块
在后台线程中运行验证套件，逐条显示结果
"""
import logging
from typing import List

import flet as ft

from src.config.settings import app_settings
from src.config.sweep import bundled_config
from src.constants import (
    COLOR_GREEN_500,
    COLOR_GREY_600,
    COLOR_RED_500,
    DEFAULT_QUICK,
    DEFAULT_WORKERS,
    REPORT_MAX_ROWS,
    TRANSFORM_REL_TOL,
)
from src.services.harness import SUITES, ReportRow, run_suites
from src.services.reporting import describe_target, summarize

logger = logging.getLogger(__name__)


def row_color(row: ReportRow) -> str:
    return COLOR_GREEN_500 if row.passed else COLOR_RED_500


def create_report_tile(row: ReportRow) -> ft.Container:
    """单条结果"""
    return ft.Container(
        content=ft.Row(
            [
                ft.Icon(ft.Icons.CHECK_CIRCLE if row.passed else ft.Icons.ERROR, color=row_color(row), size=18),
                ft.Text(row.suite, width=150, weight=ft.FontWeight.BOLD),
                ft.Text(row.parameters, width=220, size=12, color=COLOR_GREY_600),
                ft.Text(row.quantity, width=160),
                ft.Text(f"{row.measured:.6g} {describe_target(row)}", selectable=True),
                ft.Text(row.target_kind, size=12, color=COLOR_GREY_600),
            ],
            spacing=10,
        ),
        padding=ft.padding.symmetric(vertical=4, horizontal=8),
    )


def create_verify_page(page: ft.Page):
    """创建验证页面"""

    running = {'value': False}
    collected: List[ReportRow] = []

    suite_checks = {
        name: ft.Checkbox(label=name, value=True)
        for name in SUITES
    }
    status_text = ft.Text("就绪", size=14, color=ft.Colors.GREY_600)
    progress_bar = ft.ProgressBar(width=400, visible=False)
    result_list = ft.ListView(expand=True, spacing=2, auto_scroll=True)

    def on_suite_done(name: str, rows: List[ReportRow]):
        collected.extend(rows)
        failed = sum(not row.passed for row in rows)
        status_text.value = f"{name}: {len(rows) - failed}/{len(rows)} 通过"
        room = REPORT_MAX_ROWS - len(result_list.controls)
        for row in rows[:max(room, 0)]:
            result_list.controls.append(create_report_tile(row))
        page.update()

    def run_in_background(selected: List[str]):
        quick = app_settings.get('quick', DEFAULT_QUICK)
        try:
            config = bundled_config(quick, rel_tol=float(app_settings.get('rel_tol', TRANSFORM_REL_TOL)))
            run_suites(config, selected, workers=int(app_settings.get('workers', DEFAULT_WORKERS)),
                       progress=on_suite_done)
            summary = summarize(collected)
            status_text.value = f"完成: {summary['rows'] - summary['failed']}/{summary['rows']} 通过"
            status_text.color = COLOR_GREEN_500 if summary['passed'] else COLOR_RED_500
        except Exception as e:
            logger.error(f"验证运行失败: {e}")
            status_text.value = f"运行失败: {e}"
            status_text.color = COLOR_RED_500
        finally:
            running['value'] = False
            progress_bar.visible = False
            run_button.disabled = False
            page.update()

    def on_run_click(e):
        if running['value']:
            return
        selected = [name for name, check in suite_checks.items() if check.value]
        if not selected:
            status_text.value = "请至少选择一个套件"
            status_text.update()
            return
        running['value'] = True
        collected.clear()
        result_list.controls.clear()
        status_text.value = f"正在运行 {len(selected)} 个套件..."
        status_text.color = ft.Colors.GREY_600
        progress_bar.visible = True
        run_button.disabled = True
        page.update()
        logger.info(f"开始验证: {', '.join(selected)}")
        page.run_thread(run_in_background, selected)

    run_button = ft.ElevatedButton(text="开始验证", icon=ft.Icons.PLAY_ARROW, on_click=on_run_click)

    return ft.Container(
        content=ft.Column(
            [
                ft.Text("验证", size=24, weight=ft.FontWeight.BOLD),
                ft.Container(height=10),
                ft.Container(
                    content=ft.Row(list(suite_checks.values()), wrap=True, spacing=10),
                    padding=15,
                    border=ft.border.all(1, ft.Colors.GREY_300),
                    border_radius=10,
                ),
                ft.Row([run_button, progress_bar], spacing=20),
                status_text,
                ft.Divider(),
                result_list,
            ],
            expand=True,
        ),
        padding=30,
        expand=True,
    )
