"""工具模块"""
from src.utils.logger import logger, setup_logging
from src.utils.quadrature import integrate_jacobi, integrate_kronrod, neumaier_cumsum

__all__ = ['logger', 'setup_logging', 'integrate_jacobi', 'integrate_kronrod', 'neumaier_cumsum']
