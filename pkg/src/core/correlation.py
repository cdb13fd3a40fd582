"""
相关性检验模块
经典与稳健（渐近校准）的 Pearson、Kendall、Spearman 检验，以及随机破结 tiebreak。

稳健版本不假设独立性，只检验相关系数为零：
- Pearson: T'_n，用 Z_i = (X_i - Xbar)(Y_i - Ybar) 的经验方差标准化
- Kendall: K_n = sqrt(n) T_n / sqrt(V_n)，V_n 来自 U 统计量的 Hoeffding 投影
- Spearman: 影响函数方差估计 V_n = 144/(n-1) * sum((psi_k - psibar)^2)
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from .distributions import (norm_quantile, norm_sf, pearson_robust_pvalue,
                            t_prime_rows, t_sf)
from .errors import DegenerateInputError, InsufficientDataError, TieError
from .results import ConfidenceInterval, CorrelationResult, clamped_interval
from .rng import RngStream
from .samples import PairedSample, Sample, has_ties

logger = logging.getLogger(__name__)

TIES_NONE = 'none'
TIES_RANDOM = 'random'


# ---------------------------------------------------------------- 破结

def tiebreak(s: Sample, rng: RngStream, notes: Optional[List[str]] = None) -> Sample:
    """
    随机破结：只对重复值加独立均匀扰动，幅度小于不同取值间最小正间隔的一半，
    因此原本不相等的值之间的严格顺序保持不变。

    Args:
        s: 样本
        rng: 随机流（结果由其唯一确定）
        notes: 可选，追加说明信息

    Returns:
        取值两两不同的新样本
    """
    values = s.values
    uniq, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    if uniq.size == values.size:
        return s

    if uniq.size >= 2:
        gap = float(np.min(np.diff(uniq)))
    else:
        gap = 1.0
        message = "所有取值相同，扰动尺度取 1"
        logger.warning(message)
        if notes is not None:
            notes.append(message)

    tied = counts[inverse] > 1
    gen = rng.generator()
    out = values.copy()
    # 理论上扰动后重复的概率为零；浮点舍入时重抽
    for _ in range(100):
        out[tied] = values[tied] + gen.uniform(-0.5, 0.5, size=int(tied.sum())) * gap
        if np.unique(out).size == out.size:
            return Sample(out)
    raise DegenerateInputError("随机破结失败：扰动后仍有重复值")


def resolve_pair_ties(d: PairedSample, ties_break: str, rng: Optional[RngStream],
                      notes: List[str]) -> PairedSample:
    """按结处理策略检查/破除 x、y 各自边际内的结"""
    margins = {'x': d.x, 'y': d.y}
    tied = {name: has_ties(sample) for name, sample in margins.items()}
    offending = [name for name, report in tied.items() if report]
    if not offending:
        return d
    if ties_break != TIES_RANDOM:
        name = offending[0]
        raise TieError(
            f"边际 {name} 存在结（{tied[name].description}）；"
            f"该统计量在有结时表现不佳，请使用 ties_break='random'", margin=name)

    rng = rng if rng is not None else RngStream(0)
    x = tiebreak(d.x, rng.spawn(0), notes) if tied['x'] else d.x
    y = tiebreak(d.y, rng.spawn(1), notes) if tied['y'] else d.y
    notes.append(f"已随机破结: {', '.join(offending)}")
    return PairedSample(x, y)


def _check_margins(d: PairedSample, min_n: int):
    if d.n < min_n:
        raise InsufficientDataError(f"该检验至少需要 n >= {min_n}: n={d.n}")
    for name, sample in (('x', d.x), ('y', d.y)):
        if sample.is_constant():
            raise DegenerateInputError(f"边际 {name} 为常数（方差为零）")


def _perfect(statistic_sign: float, notes: List[str], what: str) -> Tuple[float, float]:
    notes.append(f"{what}：完全相关，统计量为无穷，p 值记为 0")
    return math.copysign(math.inf, statistic_sign), 0.0


# ---------------------------------------------------------------- Pearson

def pearson_rho(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    r = float(np.sum(xc * yc) / math.sqrt(np.sum(xc * xc) * np.sum(yc * yc)))
    return min(1.0, max(-1.0, r))


def pearson_classic(d: PairedSample, alpha: float = 0.05) -> CorrelationResult:
    """
    经典 Pearson 检验：T_n = rho / sqrt((1 - rho^2)/(n-2))，Student t(n-2)

    Args:
        d: 配对样本（n >= 3，边际非常数）
        alpha: 置信区间水平为 1 - alpha

    Returns:
        CorrelationResult；n >= 4 时给出 Fisher z 变换置信区间
    """
    _check_margins(d, 3)
    n = d.n
    notes: List[str] = []
    rho = pearson_rho(d.x.values, d.y.values)
    level = 1.0 - alpha

    if abs(rho) == 1.0:
        statistic, p_value = _perfect(rho, notes, "Pearson")
        ci = ConfidenceInterval(rho, rho, level)
    else:
        statistic = rho / math.sqrt((1.0 - rho * rho) / (n - 2))
        p_value = min(1.0, 2.0 * t_sf(abs(statistic), n - 2))
        ci = None
        if n >= 4:
            z = math.atanh(rho)
            half = norm_quantile(1.0 - alpha / 2.0) / math.sqrt(n - 3)
            ci = ConfidenceInterval(math.tanh(z - half), math.tanh(z + half), level)

    return CorrelationResult(statistic=statistic, p_value=p_value,
                             method="Pearson's product-moment correlation",
                             estimate=rho, ci=ci, n_info=(n,), notes=notes)


def pearson_robust(d: PairedSample, alpha: float = 0.05,
                   rng: Optional[RngStream] = None) -> CorrelationResult:
    """
    稳健 Pearson 检验（H0: rho = 0，不假设独立）

    统计量 T'_n；n < 130 时 p 值查高斯零分布表，否则用 Student t(n-2)。
    置信区间对 h(c, a, b) = c / sqrt(ab) 用 delta 方法，截断到 [-1, 1]。

    Args:
        d: 配对样本
        alpha: 置信水平 1 - alpha
        rng: 可选，指定零分布表的主种子

    Returns:
        CorrelationResult，variance_estimate 为 sum((Z - Zbar)^2)/n
    """
    _check_margins(d, 3)
    n = d.n
    x, y = d.x.values, d.y.values
    xc = x - x.mean()
    yc = y - y.mean()
    z = xc * yc
    zc = z - z.mean()
    ss = float(np.sum(zc * zc))
    if ss <= 0.0:
        raise DegenerateInputError("所有 Z_k 相等，T'_n 无定义")

    statistic = float(t_prime_rows(x[None, :], y[None, :])[0])
    p_value = pearson_robust_pvalue(statistic, n, rng)

    a = float(np.mean(xc * xc))
    b = float(np.mean(yc * yc))
    c = float(np.mean(z))
    rho = min(1.0, max(-1.0, c / math.sqrt(a * b)))
    psi = (z - c) / math.sqrt(a * b) - 0.5 * rho * ((xc * xc - a) / a + (yc * yc - b) / b)
    se = math.sqrt(float(np.var(psi, ddof=1)) / n)
    ci = clamped_interval(rho, norm_quantile(1.0 - alpha / 2.0) * se, 1.0 - alpha)

    return CorrelationResult(statistic=statistic, p_value=p_value,
                             method="Corrected Pearson correlation test",
                             estimate=rho, ci=ci, n_info=(n,),
                             variance_estimate=ss / n)


# ---------------------------------------------------------------- Kendall

def _merge_count(seq: List[float]) -> Tuple[List[float], int]:
    """归并排序并统计逆序对（严格大于）"""
    n = len(seq)
    if n <= 1:
        return seq, 0
    mid = n // 2
    left, inv_left = _merge_count(seq[:mid])
    right, inv_right = _merge_count(seq[mid:])
    merged = []
    inv = inv_left + inv_right
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            # 左侧剩余元素都与 right[j] 构成逆序对
            inv += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, inv


def count_discordant_pairs(x: np.ndarray, y: np.ndarray) -> int:
    """
    O(n log n) 统计不和谐对数：按 x 排序后 y 序列的逆序对数（x 无结时成立）

    Args:
        x, y: 等长数组

    Returns:
        满足 (X_i - X_j)(Y_i - Y_j) < 0 的无序对数
    """
    order = np.argsort(x, kind='stable')
    _, inv = _merge_count(list(y[order]))
    return inv


def kendall_tn(x: np.ndarray, y: np.ndarray) -> float:
    """
    T_n = 1/(n(n-1)) * sum_{i != j} (1{(X_i-X_j)(Y_i-Y_j) > 0} - 0.5)（无结输入）
    """
    n = len(x)
    pairs = n * (n - 1) // 2
    concordant = pairs - count_discordant_pairs(x, y)
    return concordant / pairs - 0.5


class _Fenwick:
    """树状数组（1-based），用于前缀计数"""

    def __init__(self, size: int):
        self.size = size
        self.tree = [0] * (size + 1)

    def add(self, i: int):
        while i <= self.size:
            self.tree[i] += 1
            i += i & -i

    def prefix(self, i: int) -> int:
        total = 0
        while i > 0:
            total += self.tree[i]
            i -= i & -i
        return total


def kendall_projection_counts(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    每个点的严格左下 / 右上点数：
    below_k = #{j: X_j < X_k, Y_j < Y_k}，above_k = #{j: X_j > X_k, Y_j > Y_k}

    Returns:
        (below, above) 两个整数数组，即 n*F_n(X_k, Y_k) 与 n*H_n(X_k, Y_k)
    """
    n = len(x)
    ry = np.unique(y, return_inverse=True)[1] + 1
    size = int(ry.max())
    order = np.argsort(x, kind='stable')
    xs = x[order]
    below = np.zeros(n, dtype=np.int64)
    above = np.zeros(n, dtype=np.int64)

    # 按 x 递增扫描；x 相同的一组先查询再插入，保证严格不等
    tree = _Fenwick(size)
    i = 0
    while i < n:
        j = i
        while j < n and xs[j] == xs[i]:
            j += 1
        group = order[i:j]
        for k in group:
            below[k] = tree.prefix(int(ry[k]) - 1)
        for k in group:
            tree.add(int(ry[k]))
        i = j

    tree = _Fenwick(size)
    inserted = 0
    i = n - 1
    while i >= 0:
        j = i
        while j >= 0 and xs[j] == xs[i]:
            j -= 1
        group = order[j + 1:i + 1]
        for k in group:
            above[k] = inserted - tree.prefix(int(ry[k]))
        for k in group:
            tree.add(int(ry[k]))
            inserted += 1
        i = j

    return below, above


def kendall_variance_from_counts(below: np.ndarray, above: np.ndarray) -> float:
    """V_n = 4/(n-1) * sum((F_n + H_n - Fbar - Hbar)^2)"""
    n = below.size
    s = (below + above).astype(float)
    dev = (s - s.mean()) / n
    return float(4.0 * np.sum(dev * dev) / (n - 1))


def kendall_variance(x: np.ndarray, y: np.ndarray) -> float:
    below, above = kendall_projection_counts(x, y)
    return kendall_variance_from_counts(below, above)


def kendall_robust(d: PairedSample, alpha: float = 0.05, ties_break: str = TIES_NONE,
                   rng: Optional[RngStream] = None) -> CorrelationResult:
    """
    稳健 Kendall 检验（H0: tau = 0）

    Args:
        d: 配对样本（n >= 3）
        alpha: 置信水平 1 - alpha
        ties_break: 'none'（有结报错）或 'random'（随机破结）
        rng: 破结所用随机流

    Returns:
        CorrelationResult：statistic = K_n，estimate = tau = 2 T_n，variance_estimate = V_n
    """
    notes: List[str] = []
    d = resolve_pair_ties(d, ties_break, rng, notes)
    _check_margins(d, 3)
    n = d.n
    x, y = d.x.values, d.y.values

    tn = kendall_tn(x, y)
    vn = kendall_variance(x, y)
    tau = 2.0 * tn
    level = 1.0 - alpha

    if vn <= 0.0:
        if tn == 0.0:
            statistic, p_value = 0.0, 1.0
        else:
            statistic, p_value = _perfect(tn, notes, "Kendall")
        ci = ConfidenceInterval(tau, tau, level)
    else:
        statistic = math.sqrt(n) * tn / math.sqrt(vn)
        p_value = min(1.0, 2.0 * norm_sf(abs(statistic)))
        half = norm_quantile(1.0 - alpha / 2.0) * 2.0 * math.sqrt(vn / n)
        ci = clamped_interval(tau, half, level)

    return CorrelationResult(statistic=statistic, p_value=p_value,
                             method="Corrected Kendall correlation test",
                             estimate=tau, ci=ci, n_info=(n,), notes=notes,
                             variance_estimate=vn)


def kendall_classic(d: PairedSample, alpha: float = 0.05, ties_break: str = TIES_NONE,
                    rng: Optional[RngStream] = None) -> CorrelationResult:
    """
    经典 Kendall 检验：独立零假设下 Var(tau) = 2(2n+5)/(9n(n-1))，正态近似
    """
    notes: List[str] = []
    d = resolve_pair_ties(d, ties_break, rng, notes)
    _check_margins(d, 3)
    n = d.n
    tau = 2.0 * kendall_tn(d.x.values, d.y.values)
    var0 = 2.0 * (2 * n + 5) / (9.0 * n * (n - 1))
    statistic = tau / math.sqrt(var0)
    p_value = min(1.0, 2.0 * norm_sf(abs(statistic)))
    return CorrelationResult(statistic=statistic, p_value=p_value,
                             method="Kendall's rank correlation tau",
                             estimate=tau, n_info=(n,), notes=notes)


# ---------------------------------------------------------------- Spearman

def _integer_ranks(values: np.ndarray) -> np.ndarray:
    """无结样本的整数秩 1..n"""
    out = np.empty(values.size, dtype=np.int64)
    out[np.argsort(values, kind='stable')] = np.arange(1, values.size + 1)
    return out


def spearman_rho_from_ranks(rx: np.ndarray, ry: np.ndarray) -> float:
    n = rx.size
    d2 = int(np.sum((rx - ry) ** 2))
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


def _suffix_weighted(keys: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """out_k = sum_j weights_j * 1{keys_j >= keys_k}（keys 为 1..n 的排列）"""
    order = np.argsort(keys, kind='stable')
    suffix = np.cumsum(weights[order][::-1])[::-1]
    out = np.empty_like(suffix)
    out[order] = suffix
    return out


def spearman_projection_numerators(rx: np.ndarray, ry: np.ndarray) -> np.ndarray:
    """
    n^2 * psi_k 的整数形式：
    psi_k = F_X(X_k) F_Y(Y_k) + g1(X_k) + g2(Y_k)，
    g1(x) = (1/n) sum_j F_Y(Y_j) 1{X_j >= x}，g2(y) = (1/n) sum_j F_X(X_j) 1{Y_j >= y}
    """
    return rx * ry + _suffix_weighted(rx, ry) + _suffix_weighted(ry, rx)


def spearman_variance_from_numerators(numerators: np.ndarray) -> float:
    """V_n = 144/(n-1) * sum((psi_k - psibar)^2)"""
    n = numerators.size
    psi = numerators.astype(float) / float(n * n)
    dev = psi - psi.mean()
    return float(144.0 * np.sum(dev * dev) / (n - 1))


def spearman_variance(x: np.ndarray, y: np.ndarray) -> float:
    return spearman_variance_from_numerators(
        spearman_projection_numerators(_integer_ranks(x), _integer_ranks(y)))


def spearman_robust(d: PairedSample, alpha: float = 0.05, ties_break: str = TIES_NONE,
                    rng: Optional[RngStream] = None) -> CorrelationResult:
    """
    稳健 Spearman 检验（H0: rho_S = 0）

    Args:
        d: 配对样本（n >= 4）
        alpha: 置信水平 1 - alpha
        ties_break: 结处理策略
        rng: 破结所用随机流

    Returns:
        CorrelationResult：statistic = sqrt(n) rho_S / sqrt(V_n)
    """
    notes: List[str] = []
    d = resolve_pair_ties(d, ties_break, rng, notes)
    _check_margins(d, 4)
    n = d.n
    rx = _integer_ranks(d.x.values)
    ry = _integer_ranks(d.y.values)
    rho_s = spearman_rho_from_ranks(rx, ry)
    vn = spearman_variance_from_numerators(spearman_projection_numerators(rx, ry))
    level = 1.0 - alpha

    if vn <= 0.0:
        if rho_s == 0.0:
            statistic, p_value = 0.0, 1.0
        else:
            statistic, p_value = _perfect(rho_s, notes, "Spearman")
        ci = ConfidenceInterval(rho_s, rho_s, level)
    else:
        statistic = math.sqrt(n) * rho_s / math.sqrt(vn)
        p_value = min(1.0, 2.0 * norm_sf(abs(statistic)))
        ci = clamped_interval(rho_s, norm_quantile(1.0 - alpha / 2.0) * math.sqrt(vn / n), level)

    return CorrelationResult(statistic=statistic, p_value=p_value,
                             method="Corrected Spearman correlation test",
                             estimate=rho_s, ci=ci, n_info=(n,), notes=notes,
                             variance_estimate=vn)


def spearman_classic(d: PairedSample, alpha: float = 0.05, ties_break: str = TIES_NONE,
                     rng: Optional[RngStream] = None) -> CorrelationResult:
    """
    经典 Spearman 检验：rho_S sqrt((n-2)/(1-rho_S^2)) 对照 Student t(n-2)
    """
    notes: List[str] = []
    d = resolve_pair_ties(d, ties_break, rng, notes)
    _check_margins(d, 3)
    n = d.n
    rho_s = spearman_rho_from_ranks(_integer_ranks(d.x.values), _integer_ranks(d.y.values))
    if abs(rho_s) == 1.0:
        statistic, p_value = _perfect(rho_s, notes, "Spearman")
    else:
        statistic = rho_s * math.sqrt((n - 2) / (1.0 - rho_s * rho_s))
        p_value = min(1.0, 2.0 * t_sf(abs(statistic), n - 2))
    return CorrelationResult(statistic=statistic, p_value=p_value,
                             method="Spearman's rank correlation rho",
                             estimate=rho_s, n_info=(n,), notes=notes)
