"""
常量定义模块
定义数值引擎、验证套件和界面使用的各种常量
"""

# 网格默认值（对数均匀，覆盖八个数量级）
GRID_LOWER = 1e-4
GRID_UPPER = 1e4
GRID_CELLS = 4096

# 核函数求积默认值
KERNEL_REL_TOL = 1e-10
KERNEL_MAX_SUBDIVISIONS = 400
KERNEL_DIAGONAL_RATIO = 0.05
KERNEL_ORDER = 12
KERNEL_CACHE_SIZE = 500_000

# 核函数区域常数默认值
REGIME_K1 = 10.0
REGIME_K2 = 0.9

# 截断变换求积默认值
TRANSFORM_REL_TOL = 1e-10
TRANSFORM_MAX_PANELS = 4000
TRANSFORM_TAIL_TOL = 1e-9

# 变差动态规划上限
VARIATION_MAX_SAMPLES = 20_000
ROUNDOFF_SLACK = 1e-12

# CZ 分解默认值
CZ_GUARD = 1e-12
CZ_MAX_DEPTH = 40
CZ_MAX_ROOT_GROWTH = 60
CZ_MAX_CELLS = 200_000

# BMO 区间族默认值
BMO_CENTERS = 64
BMO_RADII = 64

# 报表与回归
REGRESSION_SLACK = 2.0
STABILITY_DRIFT = 0.2
KERNEL_DRIFT = 0.1
PROFILE_CSV_COLUMNS = ('epsilon', 'value')
KERNEL_CSV_COLUMNS = ('lambda', 'x', 'y', 'kernel')
REPORT_CSV_COLUMNS = ('suite', 'parameters', 'quantity', 'measured', 'target_low', 'target', 'comparison',
                      'target_kind', 'passed')

# 环境变量
WORKERS_ENV = 'BRV_WORKERS'
STORAGE_ENV = 'BRV_STORAGE_DIR'

# UI 常量
WINDOW_WIDTH = 1200
WINDOW_HEIGHT = 800
NAVIGATION_WIDTH = 200
REPORT_MAX_ROWS = 500

# 颜色常量
COLOR_GREEN_500 = "#4CAF50"
COLOR_RED_500 = "#F44336"
COLOR_GREY_600 = "#757575"
COLOR_BLUE_600 = "#1E88E5"

# 界面默认值
DEFAULT_LAMBDA = 1.0
DEFAULT_QUICK = True
DEFAULT_WORKERS = 1
