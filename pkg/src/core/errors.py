"""
异常定义模块
"""


class BesselRieszError(ValueError):
    """所有输入类错误的基类"""


class DomainError(BesselRieszError):
    """前置条件不满足"""


class SingularityError(BesselRieszError):
    """核函数在对角线 x = y 处无定义"""


class RegimeError(DomainError):
    """参数不在核函数估计适用的区域内"""


class MissingDecayError(BesselRieszError):
    """函数支撑无界且没有声明上界或衰减，无法截断尾部"""


class ProvenanceError(BesselRieszError):
    """分解结果与传入函数不匹配"""


class ProfileTooLongError(DomainError):
    """截断轮廓超过动态规划的长度上限"""


class ConvergenceError(ArithmeticError):
    """
    自适应求积在细分预算内未达到容差

    携带当前最佳估计和误差界，扫描可以降级继续。
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
