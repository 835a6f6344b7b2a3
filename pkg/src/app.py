"""
桌面界面入口
"""
import logging
import flet as ft

from src.ui.pages.main import show_main_ui
from src.constants import WINDOW_WIDTH, WINDOW_HEIGHT
from src.utils.logger import setup_logging

logger = logging.getLogger(__name__)


async def main(page: ft.Page):
    """应用主函数"""
    page.title = "Bessel-Riesz Verifier"
    page.theme_mode = ft.ThemeMode.LIGHT
    page.window.width = WINDOW_WIDTH
    page.window.height = WINDOW_HEIGHT

    logger.info("界面启动")
    show_main_ui(page)


def launch() -> None:
    setup_logging()
    ft.app(main)


if __name__ == '__main__':
    launch()
