"""
Kolmogorov-Smirnov 型无分布检验
- 独立性检验：KS_n = sqrt(n) sup_{s,t} |C_n(t, s) - F_{n,X}(t) F_{n,Y}(s)|
- 对称性检验：K_n = sqrt(n) sup_t |F_n(t) - F_{n,-}(t)|，F_{n,-} 为 -D 的经验分布

两个统计量在零假设下都与数据分布无关，临界值用蒙特卡洛模拟：
独立性用独立均匀对，对称性用标准正态。零分布样本按 (kind, n, seed, replicates)
缓存在进程内与缓存目录中。
"""

import logging
import math
import sys
import threading
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

# 添加src到路径以支持导入
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import settings
from .correlation import TIES_NONE, resolve_pair_ties
from .distributions import (cache_path, header_matches, mc_pvalue, read_cache_file,
                            write_cache_file)
from .errors import InsufficientDataError, RobustTestError
from .results import TestOutcome
from .rng import RngStream
from .samples import PairedSample, Sample

logger = logging.getLogger(__name__)

KIND_INDEPENDENCE = 'independence'
KIND_SYMMETRY = 'symmetry'
_KIND_STREAM = {KIND_INDEPENDENCE: 1, KIND_SYMMETRY: 2}
MIN_REPLICATES = 1000


# ---------------------------------------------------------------- 统计量

def _independence_count(x: np.ndarray, y: np.ndarray) -> int:
    """max |n c_ab - a_a b_b|，全程整数运算；KS_n = 该值 / n^1.5"""
    n = x.size
    ux, ix = np.unique(x, return_inverse=True)
    uy, iy = np.unique(y, return_inverse=True)
    # counts[a, b] = #{X <= ux[a], Y <= uy[b]}
    counts = np.zeros((ux.size, uy.size), dtype=np.int64)
    np.add.at(counts, (ix, iy), 1)
    counts = counts.cumsum(axis=0).cumsum(axis=1)
    # 阶梯函数的左极限等于前一个格点的值，-inf 处差为 0，网格已覆盖全部取值
    diff = np.abs(n * counts - counts[:, -1][:, None] * counts[-1, :][None, :])
    return int(diff.max())


def _independence_stat(x: np.ndarray, y: np.ndarray) -> float:
    # 同一整数值总是映射到同一个浮点数，零分布中的并列值在 mc_pvalue 中按 >= 计入
    return _independence_count(x, y) / x.size ** 1.5


def ks_independence_stat(d: PairedSample) -> float:
    """
    独立性 KS 统计量，在观测点构成的网格上精确求上确界

    Args:
        d: 配对样本（n >= 2）

    Returns:
        KS_n，位于 [0, sqrt(n)]
    """
    if d.n < 2:
        raise InsufficientDataError(f"KS 独立性统计量需要 n >= 2: n={d.n}")
    return _independence_stat(d.x.values, d.y.values)


def _symmetry_stat(values: np.ndarray) -> float:
    n = values.size
    pos = np.sort(values)
    neg = np.sort(-values)
    points = np.concatenate([pos, neg])
    best = 0.0
    for side in ('right', 'left'):
        f_pos = np.searchsorted(pos, points, side=side)
        f_neg = np.searchsorted(neg, points, side=side)
        best = max(best, float(np.max(np.abs(f_pos - f_neg))))
    return math.sqrt(n) * best / n


def ks_symmetry_stat(diffs: Sample) -> float:
    """对称性 KS 统计量：在所有 ±D_i 断点及其左极限处取最大值"""
    if diffs.n < 2:
        raise InsufficientDataError(f"KS 对称性统计量需要 n >= 2: n={diffs.n}")
    return _symmetry_stat(diffs.values)


# ---------------------------------------------------------------- 零分布

@dataclass(frozen=True, eq=False)
class KsNullCache:
    """蒙特卡洛零分布样本（升序，不可变）"""

    kind: str
    n: int
    draws: np.ndarray
    replicates: int
    seed: int

    def __post_init__(self):
        if self.kind not in _KIND_STREAM:
            raise RobustTestError(f"未知的零分布类型: {self.kind}")
        if self.replicates < MIN_REPLICATES:
            raise RobustTestError(f"蒙特卡洛重复次数至少为 {MIN_REPLICATES}: {self.replicates}")
        draws = np.asarray(self.draws, dtype=float)
        if draws.size != self.replicates:
            raise RobustTestError("零分布样本数与 replicates 不一致")
        if np.any(np.diff(draws) < 0):
            raise RobustTestError("零分布样本必须升序排列")
        draws.setflags(write=False)
        object.__setattr__(self, 'draws', draws)

    @property
    def file_kind(self) -> str:
        return f"ks-{self.kind}-null"

    def header(self) -> Dict[str, str]:
        return {'kind': self.file_kind, 'n': str(self.n), 'seed': str(self.seed),
                'replicates': str(self.replicates)}

    def pvalue(self, observed: float) -> float:
        return mc_pvalue(observed, self.draws, presorted=True)


def _null_stream(kind: str, n: int, seed: int) -> RngStream:
    return RngStream(seed).substream(_KIND_STREAM[kind], n)


def _simulate_chunk(args: Tuple[str, int, int, int, int]) -> np.ndarray:
    """模拟第 start..stop-1 次重复；每次重复使用独立子流"""
    kind, n, seed, start, stop = args
    base = _null_stream(kind, n, seed)
    out = np.empty(stop - start)
    for offset, r in enumerate(range(start, stop)):
        gen = base.spawn(r).generator()
        if kind == KIND_INDEPENDENCE:
            out[offset] = _independence_stat(gen.random(n), gen.random(n))
        else:
            out[offset] = _symmetry_stat(gen.standard_normal(n))
    return out


def simulate_null(kind: str, n: int, seed: int, replicates: int,
                  workers: int = 1) -> KsNullCache:
    """
    生成零分布样本

    Args:
        kind: 'independence' 或 'symmetry'
        n: 样本量
        seed: 主种子
        replicates: 重复次数（>= 1000）
        workers: 进程数；结果与进程数无关

    Returns:
        KsNullCache
    """
    if kind not in _KIND_STREAM:
        raise RobustTestError(f"未知的零分布类型: {kind}")
    if n < 2:
        raise InsufficientDataError(f"零分布模拟需要 n >= 2: n={n}")
    step = max(1, math.ceil(replicates / max(1, workers)))
    tasks = [(kind, n, seed, start, min(replicates, start + step))
             for start in range(0, replicates, step)]
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=workers) as pool:
            parts = pool.map(_simulate_chunk, tasks)
    else:
        parts = [_simulate_chunk(task) for task in tasks]
    draws = np.sort(np.concatenate(parts))
    return KsNullCache(kind, n, draws, replicates, seed)


_CACHES: Dict[Tuple[str, int, int, int], KsNullCache] = {}
_CACHE_LOCK = threading.Lock()


def ks_null_cache(kind: str, n: int, seed: int, replicates: Optional[int] = None,
                  workers: int = 1) -> KsNullCache:
    """
    获取（必要时模拟并持久化）零分布样本

    Args:
        kind: 'independence' 或 'symmetry'
        n: 样本量
        seed: 主种子
        replicates: 重复次数，默认 settings.KS_REPLICATES
        workers: 首次生成时使用的进程数

    Returns:
        KsNullCache
    """
    replicates = settings.KS_REPLICATES if replicates is None else int(replicates)
    key = (kind, n, seed, replicates)
    with _CACHE_LOCK:
        cache = _CACHES.get(key)
        if cache is not None:
            return cache

        file_kind = f"ks-{kind}-null"
        path = cache_path(file_kind, n, seed, replicates)
        expected = {'kind': file_kind, 'n': str(n), 'seed': str(seed),
                    'replicates': str(replicates)}
        if path.exists():
            try:
                header, data = read_cache_file(path)
                if header_matches(header, expected):
                    cache = KsNullCache(kind, n, data, replicates, seed)
            except (OSError, ValueError) as e:
                logger.warning("KS 零分布缓存损坏，重新生成: %s (%s)", path, e)
                cache = None

        if cache is None:
            logger.info("模拟 KS %s 零分布: n=%d, replicates=%d", kind, n, replicates)
            cache = simulate_null(kind, n, seed, replicates, workers)
            try:
                write_cache_file(path, cache.header(), cache.draws)
            except OSError as e:
                logger.warning("无法写入缓存 %s: %s", path, e)

        _CACHES[key] = cache
        return cache


# ---------------------------------------------------------------- 检验

def ks_independence_test(d: PairedSample, replicates: Optional[int] = None,
                         rng: Optional[RngStream] = None,
                         ties_break: str = TIES_NONE) -> TestOutcome:
    """
    KS 独立性检验（蒙特卡洛 p 值）

    Args:
        d: 配对样本（n >= 2）
        replicates: 零分布重复次数，默认 settings.KS_REPLICATES
        rng: 随机流；其 seed 决定零分布，其子流用于破结
        ties_break: 'none' 或 'random'

    Returns:
        TestOutcome，statistic 为 KS_n
    """
    notes: List[str] = []
    rng = rng if rng is not None else RngStream(settings.DEFAULT_SEED)
    d = resolve_pair_ties(d, ties_break, rng, notes)
    statistic = ks_independence_stat(d)
    cache = ks_null_cache(KIND_INDEPENDENCE, d.n, rng.seed, replicates)
    return TestOutcome(statistic=statistic, p_value=cache.pvalue(statistic),
                       method="Kolmogorov-Smirnov test of independence",
                       n_info=(d.n,), notes=notes)


def ks_symmetry_test(diffs: Sample, replicates: Optional[int] = None,
                     rng: Optional[RngStream] = None) -> TestOutcome:
    """
    KS 对称性检验（H0: D 关于 0 对称）

    Args:
        diffs: 差值样本 D（n >= 2）；也接受 PairedSample，取 D = Y - X
        replicates: 零分布重复次数
        rng: 随机流，其 seed 决定零分布

    Returns:
        TestOutcome，statistic 为 K_n
    """
    if isinstance(diffs, PairedSample):
        diffs = diffs.differences()
    rng = rng if rng is not None else RngStream(settings.DEFAULT_SEED)
    statistic = ks_symmetry_stat(diffs)
    cache = ks_null_cache(KIND_SYMMETRY, diffs.n, rng.seed, replicates)
    return TestOutcome(statistic=statistic, p_value=cache.pvalue(statistic),
                       method="Kolmogorov-Smirnov test of symmetry",
                       estimate=diffs.median(), n_info=(diffs.n,))
