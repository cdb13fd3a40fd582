"""
方差齐性检验模块
James-Welch 异方差方差分析，以及基于它的稳健方差相等检验（对 Z_i = (X_i - 组均值)^2
做 Welch ANOVA）。Fisher、Bartlett、Levene(Brown-Forsythe) 作为经典对照。
"""

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy import stats

from .distributions import chisq_sf, f_cdf, f_quantile, f_sf
from .errors import DegenerateInputError, InapplicableTestError, InsufficientDataError
from .results import AnovaResult, ConfidenceInterval, GroupSummary, TestOutcome
from .samples import GroupedSample, Sample

logger = logging.getLogger(__name__)


def _summaries(g: GroupedSample, groups: Sequence[np.ndarray]) -> Tuple[GroupSummary, ...]:
    return tuple(GroupSummary(level=name, n=int(values.size), mean=float(values.mean()),
                              variance=float(values.var(ddof=1)))
                 for name, values in zip(g.level_names, groups))


def _welch_from_groups(groups: List[np.ndarray]) -> Tuple[float, float, float]:
    """
    Welch 统计量及 F 近似自由度

    Returns:
        (JW_n, df1, df2)
    """
    p = len(groups)
    n = np.array([values.size for values in groups], dtype=float)
    means = np.array([values.mean() for values in groups])
    variances = np.array([values.var(ddof=1) for values in groups])
    if np.any(variances <= 0.0):
        raise DegenerateInputError("存在组内方差为零的组，Welch 检验无定义")

    w = n / variances
    h = w / w.sum()
    grand = float(np.sum(h * means))
    lam = float(np.sum((1.0 - h) ** 2 / (n - 1.0)))
    numerator = float(np.sum(w * (means - grand) ** 2)) / (p - 1)
    denominator = 1.0 + 2.0 * (p - 2) * lam / (p * p - 1.0)
    return numerator / denominator, float(p - 1), (p * p - 1.0) / (3.0 * lam)


def welch_anova(g: GroupedSample, alpha: float = 0.05) -> AnovaResult:
    """
    James-Welch 均值相等检验（不假设方差相等）

    Args:
        g: 分组样本（p >= 2，每组 >= 2 个观测，组内方差为正）
        alpha: 水平（结果中不使用临界值，仅为接口一致）

    Returns:
        AnovaResult：F(p-1, (p^2-1)/(3 Lambda)) 近似 p 值为主，
        另给出 (p-1) JW_n 对照 chi2(p-1) 的渐近 p 值
    """
    groups = g.groups()
    statistic, df1, df2 = _welch_from_groups(groups)
    return AnovaResult(statistic=statistic, p_value=f_sf(statistic, df1, df2),
                       method="One-way analysis of means (not assuming equal variances)",
                       n_info=g.group_counts, df1=df1, df2=df2,
                       asymptotic_p_value=chisq_sf(df1 * statistic, df1),
                       groups=_summaries(g, groups))


def vartest_robust(g: GroupedSample, alpha: float = 0.05) -> AnovaResult:
    """
    稳健方差相等检验：对平方离差 Z_i 做 Welch ANOVA

    需要四阶矩有限（无法检验）。组均值平移不改变统计量。

    Args:
        g: 分组样本，每组至少 3 个观测
        alpha: 水平

    Returns:
        AnovaResult，groups 中为原始数据各组的均值与方差
    """
    small = [str(name) for name, c in zip(g.level_names, g.group_counts) if c < 3]
    if small:
        raise InsufficientDataError(f"稳健方差检验要求每组至少 3 个观测: {', '.join(small)}")

    groups = g.groups()
    z_groups = [(values - values.mean()) ** 2 for values in groups]
    for name, z in zip(g.level_names, z_groups):
        if np.all(z == z[0]):
            raise DegenerateInputError(f"水平 {name} 的平方离差为常数，检验无定义")

    statistic, df1, df2 = _welch_from_groups(z_groups)
    return AnovaResult(statistic=statistic, p_value=f_sf(statistic, df1, df2),
                       method="Corrected test of equality of variances (James-Welch on squared deviations)",
                       n_info=g.group_counts, df1=df1, df2=df2,
                       asymptotic_p_value=chisq_sf(df1 * statistic, df1),
                       groups=_summaries(g, groups))


def fisher_vartest(a: Sample, b: Sample, alpha: float = 0.05) -> TestOutcome:
    """
    Fisher 方差比检验 F = S1^2 / S2^2，零分布 F(n1-1, n2-1)（高斯假设下）

    Returns:
        TestOutcome，estimate 为方差比，ci 为方差比的 1 - alpha 置信区间
    """
    if a.n < 2 or b.n < 2:
        raise InsufficientDataError("Fisher 检验要求两组各至少 2 个观测")
    va, vb = a.variance(), b.variance()
    if va <= 0.0 or vb <= 0.0:
        raise DegenerateInputError("Fisher 检验要求两组方差均为正")

    df1, df2 = a.n - 1, b.n - 1
    ratio = va / vb
    cdf = f_cdf(ratio, df1, df2)
    p_value = min(1.0, 2.0 * min(cdf, 1.0 - cdf))
    ci = ConfidenceInterval(ratio / f_quantile(1.0 - alpha / 2.0, df1, df2),
                            ratio / f_quantile(alpha / 2.0, df1, df2), 1.0 - alpha)
    return TestOutcome(statistic=ratio, p_value=p_value,
                       method="F test to compare two variances",
                       estimate=ratio, ci=ci, n_info=(a.n, b.n))


def fisher_vartest_grouped(g: GroupedSample, alpha: float = 0.05) -> TestOutcome:
    """两水平分组样本上的 Fisher 检验（第一个水平作分子）"""
    if g.p != 2:
        raise InapplicableTestError(f"Fisher 检验只适用于 2 个水平: p={g.p}")
    first, second = g.groups()
    return fisher_vartest(Sample(first), Sample(second), alpha)


def _check_positive_variances(g: GroupedSample, groups: List[np.ndarray]):
    for name, values in zip(g.level_names, groups):
        if np.all(values == values[0]):
            raise DegenerateInputError(f"水平 {name} 的方差为零")


def bartlett_test(g: GroupedSample, alpha: float = 0.05) -> TestOutcome:
    """
    Bartlett 方差齐性检验（高斯假设），零分布 chi2(p-1)

    Args:
        g: 分组样本，各组方差为正
        alpha: 水平

    Returns:
        TestOutcome
    """
    groups = g.groups()
    _check_positive_variances(g, groups)
    statistic, p_value = stats.bartlett(*groups)
    statistic = max(0.0, float(statistic))
    return TestOutcome(statistic=statistic, p_value=min(1.0, float(p_value)),
                       method="Bartlett test of homogeneity of variances",
                       n_info=g.group_counts)


def levene_bf_test(g: GroupedSample, alpha: float = 0.05) -> TestOutcome:
    """
    Levene 检验（Brown-Forsythe 修正）：对 |X_i - 组中位数| 做经典单因素方差分析

    偶数组取两个中间次序统计量的平均作中位数。
    """
    groups = g.groups()
    deviations = [np.abs(values - np.median(values)) for values in groups]
    within = sum(float(np.sum((dev - dev.mean()) ** 2)) for dev in deviations)
    if within <= 0.0:
        raise DegenerateInputError("各组绝对离差在组内均为常数，Levene 检验无定义")

    statistic, p_value = stats.levene(*groups, center='median')
    statistic = float(statistic)
    if math.isnan(statistic):
        raise DegenerateInputError("Levene 统计量无定义")
    return TestOutcome(statistic=statistic, p_value=min(1.0, float(p_value)),
                       method="Levene's test (Brown-Forsythe, median centered)",
                       n_info=g.group_counts)
