"""
robustest - Utility Functions
命令行用到的格式化与参数解析小工具
"""

import math
from typing import List, Optional


def format_pvalue(p: float) -> str:
    """p 值保留 4 位有效数字；极小值显示为 < 2.2e-16"""
    if p < 2.2e-16:
        return "< 2.2e-16"
    return f"{p:.4g}"


def format_number(x: Optional[float], digits: int = 5) -> str:
    """统计量、估计值的文本显示（默认 5 位有效数字）"""
    if x is None:
        return "NA"
    if math.isinf(x):
        return "Inf" if x > 0 else "-Inf"
    return f"{x:.{digits}g}"


def full_precision(x: Optional[float]) -> str:
    """机器可读输出：repr 精度（可无损回读），None 为空串"""
    if x is None:
        return ""
    return repr(float(x))


def parse_sizes(text: str) -> List[int]:
    """
    解析样本量列表 "30,70,150"

    Returns:
        正整数列表
    """
    sizes = []
    for part in text.split(','):
        part = part.strip()
        if not part:
            continue
        value = int(part)
        if value < 1:
            raise ValueError(f"样本量必须为正整数: {part}")
        sizes.append(value)
    if not sizes:
        raise ValueError("样本量列表为空")
    return sizes


def parse_labels(text: Optional[str]) -> Optional[List[str]]:
    """解析逗号分隔的检验标签；空值表示使用默认列表"""
    if not text:
        return None
    return [label.strip() for label in text.split(',') if label.strip()]
