"""
异常定义
所有库内错误都继承自 RobustTestError（同时也是 ValueError）
"""


class RobustTestError(ValueError):
    """检验库的基础异常"""


class InsufficientDataError(RobustTestError):
    """样本量不足"""


class DegenerateInputError(RobustTestError):
    """退化输入：方差为零、边际为常数等"""


class TieError(RobustTestError):
    """存在结（重复值）且未启用随机破结"""

    def __init__(self, message: str, margin: str = None):
        super().__init__(message)
        self.margin = margin


class DistributionDomainError(RobustTestError):
    """分布函数的参数超出定义域"""


class InapplicableTestError(RobustTestError):
    """检验不适用于该模拟场景"""


class DataLoadError(RobustTestError):
    """数据读取失败：缺列、过滤条件非法或过滤后无数据"""
