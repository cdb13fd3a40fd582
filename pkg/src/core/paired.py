"""
配对样本检验
- mediantest: 基于次序统计量的 Med(D) 渐近置信区间及由其导出的检验
- signedrank_robust: 校正的符号秩检验，检验 Med(D1 + D2) = 0（不要求 D 对称）
- signedrank_classic: 经典 Wilcoxon 符号秩检验（D 对称时无分布）
"""

import logging
import math
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import special

from .correlation import TIES_NONE, TIES_RANDOM, tiebreak
from .distributions import norm_quantile, norm_sf
from .errors import DegenerateInputError, InsufficientDataError, TieError
from .results import ConfidenceInterval, MedianCi, MedianTestResult, SignedRankResult
from .rng import RngStream
from .samples import PairedSample, Sample, has_ties, ranks

logger = logging.getLogger(__name__)

# p 值反演网格 0.001, 0.002, ..., 0.999
MEDIAN_PVALUE_GRID = np.round(np.arange(1, 1000) * 0.001, 3)


def as_differences(data: Union[Sample, PairedSample]) -> Sample:
    """PairedSample 转为 D = Y - X；Sample 原样返回"""
    if isinstance(data, PairedSample):
        return data.differences()
    return data


def median_ci_indices(n: int, alpha: float) -> Tuple[int, int]:
    """
    次序统计量下标 k = [n/2 - c sqrt(n)/2]，l = [n/2 + c sqrt(n)/2]，c = Phi^{-1}(1 - alpha/2)

    Returns:
        (k, l)，1-based；k 可能小于 1，由调用方检查
    """
    half = norm_quantile(1.0 - alpha / 2.0) * math.sqrt(n) / 2.0
    return int(math.floor(n / 2.0 - half)), int(math.floor(n / 2.0 + half))


def _grid_pvalue(sorted_d: np.ndarray) -> float:
    """0 离开置信区间的最小网格水平；始终不离开时为 1"""
    n = sorted_d.size
    half = special.ndtri(1.0 - MEDIAN_PVALUE_GRID / 2.0) * math.sqrt(n) / 2.0
    k = np.floor(n / 2.0 - half).astype(int)
    l = np.floor(n / 2.0 + half).astype(int)
    # 下标越界时区间向该侧无界
    lower = np.where(k >= 1, sorted_d[np.clip(k, 1, n) - 1], -np.inf)
    upper = np.where(l <= n, sorted_d[np.clip(l, 1, n) - 1], np.inf)
    outside = (lower > 0.0) | (upper < 0.0)
    if not outside.any():
        return 1.0
    return float(MEDIAN_PVALUE_GRID[int(np.argmax(outside))])


def mediantest(data: Union[Sample, PairedSample], alpha: float = 0.05) -> MedianTestResult:
    """
    中位数检验 H0: Med(D) = 0

    置信区间 [D_(k), D_(l)]，0 不在区间内即拒绝；p 值为网格上使 0 离开区间的最小水平。

    Args:
        data: 差值样本 D，或配对样本（取 D = Y - X）
        alpha: 水平

    Returns:
        MedianTestResult：statistic 为标准化符号计数 (2 #{D > 0} - n)/sqrt(n)，estimate 为样本中位数
    """
    d = as_differences(data)
    n = d.n
    k, l = median_ci_indices(n, alpha)
    if k < 1:
        raise InsufficientDataError(
            f"样本量太小，alpha={alpha} 时下标 k={k} < 1（n={n}）")

    sorted_d = d.sorted_values()
    lower, upper = float(sorted_d[k - 1]), float(sorted_d[l - 1])
    level = 1.0 - alpha
    positives = int(np.count_nonzero(d.values > 0))
    return MedianTestResult(statistic=(2 * positives - n) / math.sqrt(n),
                            p_value=_grid_pvalue(sorted_d),
                            method="Median test (order-statistic confidence interval)",
                            estimate=d.median(), ci=ConfidenceInterval(lower, upper, level),
                            n_info=(n,), median_ci=MedianCi(k, l, lower, upper, level))


# ---------------------------------------------------------------- 符号秩

def _resolve_signed_ties(d: Sample, ties_break: str, rng: Optional[RngStream],
                         notes: List[str]) -> Sample:
    """
    零差值与 |D| 的结：'none' 时报错；'random' 时对 |D| 破结，零差值随机取符号
    """
    values = d.values
    zeros = int(np.count_nonzero(values == 0.0))
    report = has_ties(Sample(np.abs(values)))
    if zeros == 0 and not report:
        return d
    if ties_break != TIES_RANDOM:
        reason = f"{zeros} 个零差值" if zeros else f"|D| 存在结（{report.description}）"
        raise TieError(f"{reason}；请使用 ties_break='random'", margin='D')

    rng = rng if rng is not None else RngStream(0)
    magnitude = np.abs(tiebreak(Sample(np.abs(values)), rng.spawn(0), notes).values)
    # 单个零差值不会被 tiebreak 扰动，放到 (0, gap/2) 内
    still_zero = magnitude == 0.0
    if still_zero.any():
        uniq = np.unique(np.abs(values))
        gap = float(np.min(np.diff(uniq))) if uniq.size >= 2 else 1.0
        draws = rng.spawn(2).generator().uniform(0.0, 0.5, size=int(still_zero.sum()))
        magnitude[still_zero] = draws * gap
    signs = np.sign(values)
    if zeros:
        coin = rng.spawn(1).generator().integers(0, 2, size=zeros)
        signs[values == 0.0] = 2 * coin - 1
    out = signs * magnitude
    if np.any(out == 0.0) or np.unique(np.abs(out)).size != out.size:
        raise DegenerateInputError("随机破结失败：仍有零差值或 |D| 重复")
    notes.append(f"已随机破结（零差值 {zeros} 个）")
    return Sample(out)


def signed_pair_count(d: np.ndarray) -> int:
    """U_n = #{j < i: D_i + D_j > 0}，排序后二分计数"""
    s = np.sort(d)
    ordered = int(np.sum(s.size - np.searchsorted(s, -d, side='right')))
    self_pairs = int(np.count_nonzero(d > 0))
    return (ordered - self_pairs) // 2


def signed_rank_sum(d: np.ndarray) -> float:
    """W_n = sum R_i 1{D_i > 0}，R_i 为 |D_i| 的秩"""
    r = ranks(Sample(np.abs(d)))
    return float(np.sum(r[d > 0]))


def signedrank_variance(d: np.ndarray) -> float:
    """V_n = 4/(n-1) * sum((F_n(-D_i) - Fbar)^2)，F_n(t) = #{D <= t}/n"""
    n = d.size
    f = np.searchsorted(np.sort(d), -d, side='right') / n
    return float(4.0 * np.var(f, ddof=1))


def signedrank_robust(diffs: Union[Sample, PairedSample], alpha: float = 0.05,
                      ties_break: str = TIES_NONE,
                      rng: Optional[RngStream] = None) -> SignedRankResult:
    """
    校正符号秩检验 H0': Med(D1 + D2) = 0

    W'_n = sqrt(n)/sqrt(V_n) * (2 U_n/(n(n-1)) - 0.5)，对照标准正态

    Args:
        diffs: 差值样本或配对样本（n >= 4）
        alpha: 水平
        ties_break: 零差值 / |D| 结的处理策略
        rng: 破结随机流

    Returns:
        SignedRankResult：estimate 为 2 U_n/(n(n-1))
    """
    d = as_differences(diffs)
    if d.n < 4:
        raise InsufficientDataError(f"符号秩检验至少需要 n >= 4: n={d.n}")
    notes: List[str] = []
    d = _resolve_signed_ties(d, ties_break, rng, notes)
    n = d.n
    values = d.values

    u = signed_pair_count(values)
    estimate = 2.0 * u / (n * (n - 1))
    vn = signedrank_variance(values)
    if vn <= 0.0:
        statistic = math.copysign(math.inf, estimate - 0.5)
        p_value = 0.0
        notes.append("所有差值同号，V_n = 0，p 值记为 0")
        w_prime = statistic
    else:
        w_prime = math.sqrt(n) / math.sqrt(vn) * (estimate - 0.5)
        statistic = w_prime
        p_value = min(1.0, 2.0 * norm_sf(abs(w_prime)))

    return SignedRankResult(statistic=statistic, p_value=p_value,
                            method="Corrected Wilcoxon signed rank test",
                            estimate=estimate, n_info=(n,), notes=notes,
                            u_stat=u, v_n=vn, w_prime=w_prime)


def signedrank_classic(diffs: Union[Sample, PairedSample], alpha: float = 0.05,
                       ties_break: str = TIES_NONE,
                       rng: Optional[RngStream] = None) -> SignedRankResult:
    """
    经典 Wilcoxon 符号秩检验：W_n 以 n(n+1)/4、n(n+1)(2n+1)/24 标准化，正态近似

    Returns:
        SignedRankResult：statistic 为 W_n，u_stat 为 U_n（W_n = U_n + #{D > 0}）
    """
    d = as_differences(diffs)
    if d.n < 2:
        raise InsufficientDataError(f"符号秩检验至少需要 n >= 2: n={d.n}")
    notes: List[str] = []
    d = _resolve_signed_ties(d, ties_break, rng, notes)
    n = d.n
    w = signed_rank_sum(d.values)
    mean = n * (n + 1) / 4.0
    sd = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0)
    z = (w - mean) / sd
    return SignedRankResult(statistic=w, p_value=min(1.0, 2.0 * norm_sf(abs(z))),
                            method="Wilcoxon signed rank test",
                            n_info=(n,), notes=notes, u_stat=signed_pair_count(d.values))
