"""
Bessel-Riesz Verifier - 项目根目录入口

无参数时启动桌面界面（供 Flet 构建工具识别），否则按命令行子命令执行。
实际逻辑位于 src/cli.py 与 src/app.py
"""
import sys

from src.app import main

if __name__ == '__main__':
    if len(sys.argv) > 1:
        from src.cli import run
        run()
    else:
        from src.app import launch
        launch()
