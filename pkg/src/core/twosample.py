"""
两独立样本随机占优检验
稳健 Mann-Whitney（用 Hoeffding 投影方差标准化 T），经典 Mann-Whitney（秩和正态近似），
Welch t 检验，两样本 Kolmogorov-Smirnov 检验。
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from .correlation import TIES_NONE, TIES_RANDOM, tiebreak
from .distributions import kolmogorov_sf, norm_quantile, norm_sf, t_quantile, t_sf
from .errors import (DegenerateInputError, InapplicableTestError, InsufficientDataError,
                     TieError)
from .results import ConfidenceInterval, TestOutcome, TwoSampleResult, clamped_interval
from .rng import RngStream
from .samples import GroupedSample, Sample, has_ties

logger = logging.getLogger(__name__)


def split_grouped(g: GroupedSample) -> Tuple[Sample, Sample]:
    """
    两水平分组样本按水平拆成 (x, y)，即按 Y 取值条件化得到的两个子样本

    Args:
        g: p = 2 的分组样本

    Returns:
        (第一个水平的样本, 第二个水平的样本)
    """
    if g.p != 2:
        raise InapplicableTestError(f"两样本检验需要恰好 2 个水平: p={g.p}")
    first, second = g.groups()
    return Sample(first), Sample(second)


def _resolve_pooled_ties(x: Sample, y: Sample, ties_break: str, rng: Optional[RngStream],
                         notes: List[str]) -> Tuple[Sample, Sample]:
    """合并样本中的结：'none' 时报错，'random' 时对合并样本破结后再拆分"""
    report = has_ties(x, y)
    if not report:
        return x, y
    if ties_break != TIES_RANDOM:
        raise TieError(f"合并样本存在结（{report.description}）；请使用 ties_break='random'",
                       margin='pooled')
    rng = rng if rng is not None else RngStream(0)
    pooled = tiebreak(Sample(np.concatenate([x.values, y.values])), rng.spawn(0), notes)
    notes.append("已对合并样本随机破结")
    return Sample(pooled.values[:x.n]), Sample(pooled.values[x.n:])


def _check_sizes(x: Sample, y: Sample, minimum: int, what: str):
    if x.n < minimum or y.n < minimum:
        raise InsufficientDataError(f"{what}要求两组各至少 {minimum} 个观测: n1={x.n}, n2={y.n}")


def mann_whitney_components(x: np.ndarray, y: np.ndarray) -> Tuple[int, np.ndarray, np.ndarray]:
    """
    计数形式的 Mann-Whitney 分量

    Args:
        x, y: 两组数值

    Returns:
        (count, above_x, below_y)：count = #{(i, j): X_i < Y_j}，
        above_x[k] = #{j: Y_j > X_k}（= n2 H_{n2}(X_k)），
        below_y[k] = #{i: X_i < Y_k}（= n1 F_{n1}(Y_k)）
    """
    xs = np.sort(x)
    ys = np.sort(y)
    above_x = y.size - np.searchsorted(ys, x, side='right')
    below_y = np.searchsorted(xs, y, side='left')
    return int(below_y.sum()), above_x, below_y


def mannwhitney_robust(x: Sample, y: Sample, alpha: float = 0.05,
                       ties_break: str = TIES_NONE,
                       rng: Optional[RngStream] = None) -> TwoSampleResult:
    """
    稳健 Mann-Whitney 检验（H0: P(X < Y) = 1/2，不要求同分布）

    T = count / (n1 n2) - 0.5，MW = T / sqrt(V1/n1 + V2/n2)，
    V1 = Var_n(H_{n2}(X_k))，V2 = Var_n(F_{n1}(Y_k))（n - 1 分母）

    Args:
        x, y: 两独立样本（各 >= 2）
        alpha: 置信水平 1 - alpha
        ties_break: 合并样本结的处理策略
        rng: 破结随机流

    Returns:
        TwoSampleResult：estimate 为 T，prob_x_less_y = T + 0.5
    """
    _check_sizes(x, y, 2, "Mann-Whitney 检验")
    notes: List[str] = []
    x, y = _resolve_pooled_ties(x, y, ties_break, rng, notes)
    n1, n2 = x.n, y.n

    count, above_x, below_y = mann_whitney_components(x.values, y.values)
    t_stat = count / (n1 * n2) - 0.5
    v1 = float(np.var(above_x / n2, ddof=1))
    v2 = float(np.var(below_y / n1, ddof=1))
    se = math.sqrt(v1 / n1 + v2 / n2)
    level = 1.0 - alpha

    if se == 0.0:
        if t_stat == 0.0:
            statistic, p_value = 0.0, 1.0
        else:
            statistic, p_value = math.copysign(math.inf, t_stat), 0.0
            notes.append("两样本完全分离，V1 = V2 = 0，p 值记为 0")
        ci = ConfidenceInterval(t_stat, t_stat, level)
    else:
        statistic = t_stat / se
        p_value = min(1.0, 2.0 * norm_sf(abs(statistic)))
        ci = clamped_interval(t_stat, norm_quantile(1.0 - alpha / 2.0) * se, level, -0.5, 0.5)

    return TwoSampleResult(statistic=statistic, p_value=p_value,
                           method="Corrected Mann-Whitney-Wilcoxon test",
                           estimate=t_stat, ci=ci, n_info=(n1, n2), notes=notes,
                           t_stat=t_stat, v1=v1, v2=v2, prob_x_less_y=t_stat + 0.5)


def mannwhitney_classic(x: Sample, y: Sample, alpha: float = 0.05,
                        ties_break: str = TIES_NONE,
                        rng: Optional[RngStream] = None) -> TestOutcome:
    """
    经典 Mann-Whitney（Wilcoxon 秩和）检验，带连续性修正的正态近似

    Returns:
        TestOutcome：statistic 为计数 #{X_i < Y_j}，estimate 为其比例
    """
    _check_sizes(x, y, 2, "Mann-Whitney 检验")
    notes: List[str] = []
    x, y = _resolve_pooled_ties(x, y, ties_break, rng, notes)
    n1, n2 = x.n, y.n

    count, _, _ = mann_whitney_components(x.values, y.values)
    mean = n1 * n2 / 2.0
    sd = math.sqrt(n1 * n2 * (n1 + n2 + 1) / 12.0)
    z = max(0.0, abs(count - mean) - 0.5) / sd
    return TestOutcome(statistic=float(count), p_value=min(1.0, 2.0 * norm_sf(z)),
                       method="Wilcoxon rank sum test with continuity correction",
                       estimate=count / (n1 * n2), n_info=(n1, n2), notes=notes)


def welch_ttest(x: Sample, y: Sample, alpha: float = 0.05) -> TestOutcome:
    """
    Welch 两样本 t 检验（Welch-Satterthwaite 自由度）

    Returns:
        TestOutcome：estimate 为均值差 mean(x) - mean(y)，ci 为其置信区间
    """
    _check_sizes(x, y, 2, "Welch 检验")
    a = x.variance() / x.n
    b = y.variance() / y.n
    se2 = a + b
    if se2 <= 0.0:
        raise DegenerateInputError("两组方差均为零，Welch 检验无定义")

    diff = x.mean() - y.mean()
    se = math.sqrt(se2)
    statistic = diff / se
    df = se2 * se2 / (a * a / (x.n - 1) + b * b / (y.n - 1))
    half = t_quantile(1.0 - alpha / 2.0, df) * se
    return TestOutcome(statistic=statistic, p_value=min(1.0, 2.0 * t_sf(abs(statistic), df)),
                       method="Welch Two Sample t-test",
                       estimate=diff, ci=ConfidenceInterval(diff - half, diff + half, 1.0 - alpha),
                       n_info=(x.n, y.n), notes=[f"df = {df:.4f}"])


def ks_twosample_stat(x: np.ndarray, y: np.ndarray) -> float:
    """D = sup_t |F_{n1}(t) - G_{n2}(t)|，在合并样本的断点上精确计算"""
    xs = np.sort(x)
    ys = np.sort(y)
    points = np.concatenate([xs, ys])
    fx = np.searchsorted(xs, points, side='right') / xs.size
    fy = np.searchsorted(ys, points, side='right') / ys.size
    return float(np.max(np.abs(fx - fy)))


def ks_twosample(x: Sample, y: Sample, alpha: float = 0.05, ties_break: str = TIES_NONE,
                 rng: Optional[RngStream] = None) -> TestOutcome:
    """
    两样本 Kolmogorov-Smirnov 检验，p 值用 Kolmogorov 极限分布

    与本模块其他检验不同，有结时不抛 TieError：ties_break='none' 时按原始数据计算 D
    （两组完全相同时 D = 0，p = 1），并在 notes 中注明渐近 p 值偏保守；
    ties_break='random' 时先对合并样本随机破结。

    Returns:
        TestOutcome，statistic 为 D
    """
    notes: List[str] = []
    report = has_ties(x, y)
    if report and ties_break == TIES_RANDOM:
        x, y = _resolve_pooled_ties(x, y, ties_break, rng, notes)
    elif report:
        notes.append(f"合并样本存在结（{report.description}），渐近 p 值偏保守")

    n1, n2 = x.n, y.n
    statistic = ks_twosample_stat(x.values, y.values)
    p_value = kolmogorov_sf(math.sqrt(n1 * n2 / (n1 + n2)) * statistic)
    return TestOutcome(statistic=statistic, p_value=p_value,
                       method="Two-sample Kolmogorov-Smirnov test",
                       n_info=(n1, n2), notes=notes)
