"""
数据容器与秩/经验分布工具
Sample、PairedSample、GroupedSample 在构造时完成校验（有限值、长度、分组大小），
下游计算可以直接假设数据有效。
"""

from dataclasses import dataclass, field
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateInputError, InsufficientDataError


def _as_values(values: Iterable[float]) -> np.ndarray:
    if not isinstance(values, (np.ndarray, list, tuple)):
        values = list(values)
    arr = np.array(values, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise DegenerateInputError("样本包含 NaN 或无穷值")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Sample:
    """单变量样本（保持插入顺序，只读）"""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_values(self.values)
        if arr.size < 1:
            raise InsufficientDataError("样本至少需要 1 个观测值")
        object.__setattr__(self, 'values', arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def sorted_values(self) -> np.ndarray:
        return np.sort(self.values)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def variance(self) -> float:
        """无偏样本方差（n-1 分母）"""
        if self.n < 2:
            raise InsufficientDataError("计算方差至少需要 2 个观测值")
        return float(np.var(self.values, ddof=1))

    def median(self) -> float:
        return float(np.median(self.values))

    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))


@dataclass(frozen=True, eq=False)
class PairedSample:
    """配对样本 (X_i, Y_i)，i = 1..n"""

    x: Sample
    y: Sample

    def __post_init__(self):
        if not isinstance(self.x, Sample):
            object.__setattr__(self, 'x', Sample(self.x))
        if not isinstance(self.y, Sample):
            object.__setattr__(self, 'y', Sample(self.y))
        if self.x.n != self.y.n:
            raise DegenerateInputError(
                f"配对样本长度不一致: len(x)={self.x.n}, len(y)={self.y.n}")
        if self.x.n < 2:
            raise InsufficientDataError("配对样本至少需要 2 对观测值")

    @classmethod
    def from_arrays(cls, x: Sequence[float], y: Sequence[float]) -> 'PairedSample':
        return cls(Sample(x), Sample(y))

    @property
    def n(self) -> int:
        return self.x.n

    def __len__(self) -> int:
        return self.n

    def differences(self) -> Sample:
        """D_i = Y_i - X_i"""
        return Sample(self.y.values - self.x.values)


@dataclass(frozen=True, eq=False)
class GroupedSample:
    """数值 + 类别水平：每个观测值对应一个水平标签 L(Y_i)"""

    values: Sample
    levels: Tuple[Any, ...]
    level_names: Tuple[Any, ...] = field(init=False)
    group_counts: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if not isinstance(self.values, Sample):
            object.__setattr__(self, 'values', Sample(self.values))
        levels = tuple(self.levels)
        if len(levels) != self.values.n:
            raise DegenerateInputError(
                f"水平标签数量({len(levels)})与观测值数量({self.values.n})不一致")
        object.__setattr__(self, 'levels', levels)

        names = tuple(sorted(set(levels), key=_level_sort_key))
        if len(names) < 2:
            raise InsufficientDataError("分组样本至少需要 2 个不同水平")
        counts = tuple(sum(1 for lv in levels if lv == name) for name in names)
        small = [str(name) for name, c in zip(names, counts) if c < 2]
        if small:
            raise InsufficientDataError(f"以下水平的观测数少于 2: {', '.join(small)}")

        object.__setattr__(self, 'level_names', names)
        object.__setattr__(self, 'group_counts', counts)

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[float]],
                    labels: Optional[Sequence[Any]] = None) -> 'GroupedSample':
        """由若干组数值构造（固定设计的 p 个独立样本）"""
        if labels is None:
            labels = list(range(len(groups)))
        values: List[float] = []
        levels: List[Any] = []
        for label, group in zip(labels, groups):
            group = list(np.asarray(group, dtype=float).ravel())
            values.extend(group)
            levels.extend([label] * len(group))
        return cls(Sample(values), tuple(levels))

    @property
    def n(self) -> int:
        return self.values.n

    @property
    def p(self) -> int:
        return len(self.level_names)

    def groups(self) -> List[np.ndarray]:
        """按 level_names 顺序返回各组数值"""
        labels = np.array(self.levels, dtype=object)
        return [self.values.values[labels == name] for name in self.level_names]

    def group_of(self) -> np.ndarray:
        """每个观测值所属组的下标（0..p-1）"""
        index = {name: k for k, name in enumerate(self.level_names)}
        return np.array([index[lv] for lv in self.levels], dtype=int)


def _level_sort_key(level: Any):
    # 数值标签按数值排序，其余按字符串排序
    if isinstance(level, (int, float, np.integer, np.floating)):
        return (0, float(level), '')
    return (1, 0.0, str(level))


def ranks(s: Sample) -> np.ndarray:
    """
    样本秩，结取平均秩（midrank）

    Args:
        s: 样本

    Returns:
        与输入同序的秩，总和为 n(n+1)/2
    """
    return rankdata(s.values, method='average')


def ecdf_at(s: Sample, t: float, strict: bool = False) -> float:
    """
    经验分布函数在 t 处的值

    Args:
        s: 样本
        t: 评估点
        strict: True 时计算 #{X < t}/n，否则 #{X <= t}/n

    Returns:
        [0, 1] 内的比例
    """
    side = 'left' if strict else 'right'
    return float(np.searchsorted(s.sorted_values(), t, side=side)) / s.n


@dataclass(frozen=True)
class TieReport:
    """结检测结果"""

    has_ties: bool
    tied_values: Tuple[float, ...] = ()
    description: str = '无结'

    def __bool__(self) -> bool:
        return self.has_ties


def has_ties(a: Sample, b: Optional[Sample] = None) -> TieReport:
    """
    检查样本（或两样本合并后）是否存在重复值，比较为精确浮点比较

    Args:
        a: 第一个样本
        b: 可选的第二个样本，提供时检查合并样本

    Returns:
        TieReport，布尔值为是否有结
    """
    pooled = a.values if b is None else np.concatenate([a.values, b.values])
    uniq, counts = np.unique(pooled, return_counts=True)
    tied = uniq[counts > 1]
    if tied.size == 0:
        return TieReport(False)
    extra = int(np.sum(counts[counts > 1] - 1))
    shown = ', '.join(f"{v:g}" for v in tied[:5])
    more = ' ...' if tied.size > 5 else ''
    return TieReport(True, tuple(float(v) for v in tied),
                     f"{tied.size} 个取值重复（多出 {extra} 个观测）: {shown}{more}")
