"""
检验结果类型
TestOutcome 是所有检验的公共输出；各模块的结果类型在其上增加专有字段。
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .errors import RobustTestError


@dataclass(frozen=True)
class ConfidenceInterval:
    """置信区间 [lower, upper]，名义水平 level"""

    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise RobustTestError(f"置信区间下界 {self.lower} 大于上界 {self.upper}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def clamped_interval(center: float, half_width: float, level: float,
                     lo: float = -1.0, hi: float = 1.0) -> ConfidenceInterval:
    """center ± half_width，截断到 [lo, hi]"""
    return ConfidenceInterval(max(lo, center - half_width), min(hi, center + half_width), level)


@dataclass
class TestOutcome:
    """检验结果：统计量、p 值、点估计、可选置信区间与说明"""

    __test__ = False  # 避免 pytest 把它当作测试类收集

    statistic: float
    p_value: float
    method: str
    estimate: Optional[float] = None
    ci: Optional[ConfidenceInterval] = None
    n_info: Tuple[int, ...] = ()
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if math.isnan(self.p_value) or not 0.0 <= self.p_value <= 1.0:
            raise RobustTestError(f"p 值不在 [0, 1] 内: {self.p_value}")

    def rejects(self, alpha: float) -> bool:
        """在水平 alpha 下是否拒绝原假设（p <= alpha）"""
        return self.p_value <= alpha

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class CorrelationResult(TestOutcome):
    """相关性检验结果；robust 版本额外给出方差估计 V_n"""

    variance_estimate: Optional[float] = None


@dataclass(frozen=True)
class GroupSummary:
    """单组汇总：水平、样本量、均值、方差"""

    level: Any
    n: int
    mean: float
    variance: float


@dataclass
class AnovaResult(TestOutcome):
    """James-Welch 方差分析结果"""

    df1: float = 0.0
    df2: float = 0.0
    asymptotic_p_value: Optional[float] = None
    groups: Tuple[GroupSummary, ...] = ()


@dataclass
class TwoSampleResult(TestOutcome):
    """Mann-Whitney 类两样本结果"""

    t_stat: float = 0.0
    v1: Optional[float] = None
    v2: Optional[float] = None
    prob_x_less_y: Optional[float] = None


@dataclass(frozen=True)
class MedianCi:
    """基于次序统计量的中位数置信区间 [D_(k), D_(l)]"""

    k_index: int
    l_index: int
    lower: float
    upper: float
    level: float


@dataclass
class MedianTestResult(TestOutcome):
    """中位数检验结果"""

    median_ci: Optional[MedianCi] = None


@dataclass
class SignedRankResult(TestOutcome):
    """符号秩检验结果"""

    u_stat: int = 0
    v_n: Optional[float] = None
    w_prime: Optional[float] = None
