"""
分布函数模块
正态、Student t、卡方、Fisher F 分布的 CDF / 生存函数 / 分位数（基于 scipy.special），
Kolmogorov 极限分布，蒙特卡洛 p 值，以及稳健 Pearson 统计量 T'_n 的零分布分位数表。

分位数表在首次使用时按 n 生成（高斯独立零假设下 10^5 次重复），写入缓存目录，
进程内以锁保护，保证并发首次使用只计算一次。
"""

import logging
import os
import sys
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import special

# 添加src到路径以支持导入
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import settings
from .errors import DistributionDomainError, InsufficientDataError, RobustTestError
from .rng import RngStream

logger = logging.getLogger(__name__)

# v2: KS 零分布样本由整数计数精确换算
CACHE_FORMAT_VERSION = 2
PEARSON_KIND = 'pearson-robust-null'
# n < 130 用分位数表，n >= 130 用 Student t(n-2)
PEARSON_TABLE_MAX_N = 129
PEARSON_PROBS = np.round(np.arange(1, 200) * 0.005, 3)
_CHUNK_ROWS = 10_000


def _check_prob(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DistributionDomainError(f"概率必须在 (0, 1) 内: {p}")
    return p


def _check_df(*dfs: float):
    for df in dfs:
        if not df > 0:
            raise DistributionDomainError(f"自由度必须为正: {df}")


# ---------------------------------------------------------------- 正态分布

def norm_cdf(x: float) -> float:
    return float(special.ndtr(x))


def norm_sf(x: float) -> float:
    return float(special.ndtr(-x))


def norm_quantile(p: float) -> float:
    """标准正态分位数 Φ^{-1}(p)"""
    return float(special.ndtri(_check_prob(p)))


# ---------------------------------------------------------------- Student t

def t_cdf(x: float, df: float) -> float:
    _check_df(df)
    return float(special.stdtr(df, x))


def t_sf(x: float, df: float) -> float:
    _check_df(df)
    return float(special.stdtr(df, -x))


def t_quantile(p: float, df: float) -> float:
    p = _check_prob(p)
    _check_df(df)
    return float(special.stdtrit(df, p))


# ---------------------------------------------------------------- 卡方

def chisq_cdf(x: float, df: float) -> float:
    _check_df(df)
    return float(special.chdtr(df, max(x, 0.0)))


def chisq_sf(x: float, df: float) -> float:
    _check_df(df)
    return float(special.chdtrc(df, max(x, 0.0)))


def chisq_quantile(p: float, df: float) -> float:
    p = _check_prob(p)
    _check_df(df)
    return float(special.chdtri(df, 1.0 - p))


# ---------------------------------------------------------------- Fisher F

def f_cdf(x: float, df1: float, df2: float) -> float:
    _check_df(df1, df2)
    return float(special.fdtr(df1, df2, max(x, 0.0)))


def f_sf(x: float, df1: float, df2: float) -> float:
    _check_df(df1, df2)
    return float(special.fdtrc(df1, df2, max(x, 0.0)))


def f_quantile(p: float, df1: float, df2: float) -> float:
    p = _check_prob(p)
    _check_df(df1, df2)
    return float(special.fdtri(df1, df2, p))


# ---------------------------------------------------------------- Kolmogorov

def kolmogorov_sf(x: float) -> float:
    """Kolmogorov 极限分布的生存函数 P(K > x)"""
    if x <= 0:
        return 1.0
    return float(min(1.0, special.kolmogorov(x)))


# ---------------------------------------------------------------- 蒙特卡洛 p 值

def mc_pvalue(observed: float, null_draws: Sequence[float], presorted: bool = False) -> float:
    """
    上侧蒙特卡洛 p 值（加一估计）：(1 + #{draw >= observed}) / (N + 1)

    Args:
        observed: 观测统计量
        null_draws: 零分布模拟值
        presorted: null_draws 已升序排列时可走二分查找

    Returns:
        (0, 1] 内的 p 值
    """
    draws = np.asarray(null_draws, dtype=float)
    if draws.size == 0:
        raise InsufficientDataError("零分布模拟值为空")
    if presorted:
        exceed = draws.size - int(np.searchsorted(draws, observed, side='left'))
    else:
        exceed = int(np.count_nonzero(draws >= observed))
    return (1.0 + exceed) / (draws.size + 1.0)


# ---------------------------------------------------------------- 缓存文件

def cache_path(kind: str, n: int, seed: int, replicates: int) -> Path:
    return settings.CACHE_DIR / f"{kind}_n{n}_s{seed}_r{replicates}.csv"


def write_cache_file(path: Path, header: Dict[str, str], data: np.ndarray):
    """
    写缓存文件：'#' 开头的版本化头部 + 逗号分隔数值，原子替换

    Args:
        path: 目标路径
        header: 头部键值（kind, n, seed, replicates, grid ...）
        data: 一维或二维数值数组
    """
    settings.ensure_cache_dir()
    lines = [f"robustest-cache v{CACHE_FORMAT_VERSION}"]
    lines += [f"{key}={value}" for key, value in header.items()]
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), suffix='.tmp')
    os.close(fd)
    try:
        np.savetxt(tmp, data, delimiter=',', fmt='%.17g', header='\n'.join(lines))
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def read_cache_file(path: Path) -> Tuple[Dict[str, str], np.ndarray]:
    """读缓存文件，返回 (头部字典, 数值数组)"""
    header: Dict[str, str] = {}
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            if not line.startswith('#'):
                break
            text = line[1:].strip()
            if text.startswith('robustest-cache v'):
                header['version'] = text.rsplit(' v', 1)[1]
            elif '=' in text:
                key, value = text.split('=', 1)
                header[key] = value
    data = np.loadtxt(path, delimiter=',', comments='#', ndmin=1)
    return header, data


def header_matches(header: Dict[str, str], expected: Dict[str, str]) -> bool:
    if header.get('version') != str(CACHE_FORMAT_VERSION):
        return False
    return all(header.get(key) == value for key, value in expected.items())


# ---------------------------------------------------------------- Pearson 零分布表

def t_prime_rows(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    按行计算稳健 Pearson 统计量
    T'_n = sum(Z_k) / sqrt(sum((Z_k - Zbar)^2))，Z_k = (X_k - Xbar)(Y_k - Ybar)

    Args:
        x, y: 形状 (rows, n) 的数组

    Returns:
        长度为 rows 的统计量数组
    """
    xc = x - x.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    z = xc * yc
    zc = z - z.mean(axis=1, keepdims=True)
    return z.sum(axis=1) / np.sqrt((zc * zc).sum(axis=1))


@dataclass(frozen=True, eq=False)
class QuantileTable:
    """蒙特卡洛零分布分位数表"""

    kind: str
    n: int
    probs: np.ndarray
    quantiles: np.ndarray
    replicates: int
    seed: int

    def __post_init__(self):
        if np.any(np.diff(self.probs) <= 0) or self.probs[0] <= 0 or self.probs[-1] >= 1:
            raise RobustTestError("概率网格必须严格递增且位于 (0, 1) 内")
        if np.any(np.diff(self.quantiles) < 0):
            raise RobustTestError("分位数必须随概率单调不减")

    def header(self) -> Dict[str, str]:
        return {
            'kind': self.kind,
            'n': str(self.n),
            'seed': str(self.seed),
            'replicates': str(self.replicates),
            'grid': f"{self.probs[0]:g}:{self.probs[-1]:g}:{self.probs.size}",
        }

    def quantile(self, p: float) -> float:
        """
        网格内线性插值；网格外为 cdf 尾部（t(n-2) 尾部形状）的精确反函数
        """
        p = _check_prob(p)
        df = self.n - 2
        if p < self.probs[0]:
            lower_mass = p * t_cdf(self.quantiles[0], df) / self.probs[0]
            return t_quantile(lower_mass, df)
        if p > self.probs[-1]:
            upper_mass = (1.0 - p) * t_sf(self.quantiles[-1], df) / (1.0 - self.probs[-1])
            return -t_quantile(upper_mass, df)
        return float(np.interp(p, self.probs, self.quantiles))

    def cdf(self, t: float) -> float:
        """表所对应分布函数的近似；网格外的尾部按 t(n-2) 尾部形状缩放"""
        df = self.n - 2
        lo, hi = self.quantiles[0], self.quantiles[-1]
        if t < lo:
            return float(self.probs[0] * t_cdf(t, df) / t_cdf(lo, df))
        if t > hi:
            return float(1.0 - (1.0 - self.probs[-1]) * t_sf(t, df) / t_sf(hi, df))
        return float(np.interp(t, self.quantiles, self.probs))

    def two_sided_pvalue(self, t: float) -> float:
        F = self.cdf(t)
        return float(min(1.0, 2.0 * min(F, 1.0 - F)))


def build_pearson_table(n: int, seed: int, replicates: int) -> QuantileTable:
    """
    模拟 T'_n 在独立标准高斯对下的零分布并取分位数

    Args:
        n: 样本量（>= 3）
        seed: 主种子；第 n 个表使用 stream_id = n 的随机流
        replicates: 重复次数

    Returns:
        QuantileTable
    """
    gen = RngStream(seed, n).generator()
    draws = np.empty(replicates)
    done = 0
    while done < replicates:
        rows = min(_CHUNK_ROWS, replicates - done)
        x = gen.standard_normal((rows, n))
        y = gen.standard_normal((rows, n))
        draws[done:done + rows] = t_prime_rows(x, y)
        done += rows
    quantiles = np.quantile(draws, PEARSON_PROBS)
    return QuantileTable(PEARSON_KIND, n, PEARSON_PROBS.copy(), quantiles, replicates, seed)


_TABLES: Dict[Tuple[str, int, int, int], QuantileTable] = {}
_TABLE_LOCK = threading.Lock()


def pearson_null_table(n: int, rng: Optional[RngStream] = None) -> QuantileTable:
    """
    获取（必要时生成并缓存）样本量 n 的 T'_n 零分布表

    Args:
        n: 样本量，3 <= n < 130
        rng: 可选，使用其 seed 作为主种子；默认使用固定主种子 0x5EEDC0DE

    Returns:
        QuantileTable
    """
    if n < 3 or n > PEARSON_TABLE_MAX_N:
        raise InsufficientDataError(f"分位数表只覆盖 3 <= n <= {PEARSON_TABLE_MAX_N}: n={n}")
    seed = rng.seed if rng is not None else settings.PEARSON_TABLE_SEED
    replicates = settings.PEARSON_TABLE_REPLICATES
    key = (PEARSON_KIND, n, seed, replicates)

    with _TABLE_LOCK:
        table = _TABLES.get(key)
        if table is not None:
            return table

        path = cache_path(PEARSON_KIND, n, seed, replicates)
        expected = {'kind': PEARSON_KIND, 'n': str(n), 'seed': str(seed),
                    'replicates': str(replicates)}
        if path.exists():
            try:
                header, data = read_cache_file(path)
                if header_matches(header, expected):
                    table = QuantileTable(PEARSON_KIND, n, data[:, 0], data[:, 1],
                                          replicates, seed)
            except (OSError, ValueError, IndexError) as e:
                logger.warning("分位数缓存文件损坏，重新生成: %s (%s)", path, e)
                table = None

        if table is None:
            logger.info("生成 T'_n 零分布表: n=%d, replicates=%d, seed=%#x", n, replicates, seed)
            table = build_pearson_table(n, seed, replicates)
            try:
                write_cache_file(path, table.header(),
                                 np.column_stack([table.probs, table.quantiles]))
            except OSError as e:
                logger.warning("无法写入缓存 %s: %s", path, e)

        _TABLES[key] = table
        return table


def pearson_null_quantile(n: int, p: float, rng: Optional[RngStream] = None) -> float:
    """
    稳健 Pearson 统计量 T'_n 的零分布分位数

    Args:
        n: 样本量（>= 3）
        p: 概率
        rng: 可选随机流（仅使用其 seed）

    Returns:
        n < 130 时为蒙特卡洛表分位数，否则为 Student t(n-2) 分位数
    """
    if n < 3:
        raise InsufficientDataError(f"T'_n 零分布需要 n >= 3: n={n}")
    p = _check_prob(p)
    if n > PEARSON_TABLE_MAX_N:
        return t_quantile(p, n - 2)
    return pearson_null_table(n, rng).quantile(p)


def pearson_robust_pvalue(t: float, n: int, rng: Optional[RngStream] = None) -> float:
    """T'_n 的双侧 p 值（n < 130 查表，否则 Student t(n-2)）"""
    if n > PEARSON_TABLE_MAX_N:
        return float(min(1.0, 2.0 * t_sf(abs(t), n - 2)))
    return pearson_null_table(n, rng).two_sided_pvalue(t)
