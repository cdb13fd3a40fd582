"""
模拟实验模块
生成各模拟场景的数据，并统计各检验在给定水平下的拒绝频率。

场景：
- mod1:   Y = X^2 + 0.3 eps，X, eps ~ N(0,1) 独立（不相关但不独立）
- mod2:   Y = (X * 2(eps - 0.5))^3，X ~ U[0,1]，eps ~ B(0.5)
- mod3:   水平 ~ B(2/3)；水平 0 时 X ~ N(0,1)，水平 1 时 X ~ chi2(2)/2（方差相等）
- mw:     X ~ U[-0.5, 0.5]（n1），Y ~ N(0, 0.04^2)（n2 = 3 n1）
- signed: D = E - m，E ~ Exp(1)，m 为 Exp(1) 的伪中位数（非对称，Med(D1 + D2) = 0）

每个重复由 (主种子, n, 重复序号) 派生独立随机流，拒绝次数按整数汇总，
所以结果与进程数和执行顺序无关。
"""

import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

# 添加src到路径以支持导入
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import settings
from .correlation import (TIES_NONE, kendall_classic, kendall_robust, pearson_classic,
                          pearson_robust, spearman_classic, spearman_robust)
from .distributions import PEARSON_TABLE_MAX_N, pearson_null_table
from .errors import InapplicableTestError, RobustTestError
from .ksdistfree import (KIND_INDEPENDENCE, KIND_SYMMETRY, ks_independence_test,
                         ks_null_cache, ks_symmetry_test)
from .paired import mediantest, signedrank_classic, signedrank_robust
from .results import TestOutcome
from .rng import RngStream
from .samples import GroupedSample, PairedSample, Sample
from .twosample import ks_twosample, mannwhitney_classic, mannwhitney_robust, welch_ttest
from .variance import bartlett_test, fisher_vartest_grouped, levene_bf_test, vartest_robust

logger = logging.getLogger(__name__)

SHAPE_PAIRED = 'paired'
SHAPE_GROUPED = 'grouped'
SHAPE_TWO_SAMPLE = 'two-sample'
SHAPE_DIFFERENCES = 'differences'

SCENARIO_SHAPES = {
    'mod1': SHAPE_PAIRED,
    'mod2': SHAPE_PAIRED,
    'mod3': SHAPE_GROUPED,
    'mw': SHAPE_TWO_SAMPLE,
    'signed': SHAPE_DIFFERENCES,
}

# 各场景允许的最小样本量（mw 为 n1）
SCENARIO_MIN_SIZE = {'mod1': 4, 'mod2': 4, 'mod3': 10, 'mw': 2, 'signed': 8}

DEFAULT_TESTS = {
    'mod1': ['usualP', 'robustP', 'usualK', 'robustK', 'usualS', 'robustS', 'KSindep'],
    'mod2': ['usualP', 'robustP', 'usualK', 'robustK', 'usualS', 'robustS', 'KSindep'],
    'mod3': ['Fisher', 'Bartlett', 'Levene', 'VWelch'],
    'mw': ['robustMW', 'MW', 'Welch', 'KS'],
    'signed': ['robustW', 'W', 'median', 'KSsym'],
}

# Exp(1) 的伪中位数：E1 + E2 ~ Gamma(2, 1) 的中位数的一半
EXP_PSEUDO_MEDIAN = float(special.gammaincinv(2.0, 0.5)) / 2.0

_CHUNK = 100


# ---------------------------------------------------------------- 场景

@dataclass(frozen=True)
class Scenario:
    """模拟场景：模型名、样本量列表、重复次数、水平、主种子"""

    name: str
    sizes: Tuple[int, ...]
    replicates: int = 2000
    alpha: float = 0.05
    seed: int = field(default_factory=lambda: settings.DEFAULT_SEED)

    def __post_init__(self):
        if self.name not in SCENARIO_SHAPES:
            raise RobustTestError(
                f"未知场景: {self.name}（可选: {', '.join(SCENARIO_SHAPES)}）")
        object.__setattr__(self, 'sizes', tuple(int(n) for n in self.sizes))
        if not self.sizes:
            raise RobustTestError("至少需要一个样本量")
        minimum = SCENARIO_MIN_SIZE[self.name]
        too_small = [n for n in self.sizes if n < minimum]
        if too_small:
            raise RobustTestError(f"场景 {self.name} 的样本量至少为 {minimum}: {too_small}")
        if self.replicates < 1:
            raise RobustTestError(f"重复次数必须 >= 1: {self.replicates}")
        if not 0.0 < self.alpha < 1.0:
            raise RobustTestError(f"水平必须在 (0, 1) 内: {self.alpha}")

    @property
    def shape(self) -> str:
        return SCENARIO_SHAPES[self.name]

    def size_label(self, n: int) -> str:
        return f"{n};{3 * n}" if self.name == 'mw' else str(n)

    def stream(self, n: int, replicate_index: int) -> RngStream:
        return RngStream(self.seed).substream(n, replicate_index)


SimData = Union[PairedSample, GroupedSample, Tuple[Sample, Sample], Sample]


def _draw_mod3(n: int, gen: np.random.Generator) -> Optional[GroupedSample]:
    levels = (gen.random(n) < 2.0 / 3.0).astype(int)
    if np.bincount(levels, minlength=2).min() < 3:
        return None
    gauss = gen.standard_normal(n)
    # chi2(2)/2 = -ln(U)
    chi = -np.log1p(-gen.random(n))
    values = np.where(levels == 1, chi, gauss)
    return GroupedSample(Sample(values), tuple(int(v) for v in levels))


def _draw(name: str, n: int, gen: np.random.Generator) -> SimData:
    if name == 'mod1':
        x = gen.standard_normal(n)
        eps = gen.standard_normal(n)
        return PairedSample.from_arrays(x, x * x + 0.3 * eps)
    if name == 'mod2':
        x = gen.random(n)
        eps = gen.integers(0, 2, size=n)
        return PairedSample.from_arrays(x, (x * 2.0 * (eps - 0.5)) ** 3)
    if name == 'mw':
        x = gen.uniform(-0.5, 0.5, size=n)
        y = gen.normal(0.0, 0.04, size=3 * n)
        return Sample(x), Sample(y)
    return Sample(gen.standard_exponential(n) - EXP_PSEUDO_MEDIAN)


def generate(scenario: Scenario, replicate_index: int, n: Optional[int] = None) -> SimData:
    """
    生成一次重复的数据（由主种子、n 与重复序号唯一确定）

    Args:
        scenario: 场景
        replicate_index: 重复序号
        n: 样本量，默认取 scenario.sizes[0]；mw 场景为 n1

    Returns:
        mod1/mod2: PairedSample；mod3: GroupedSample；mw: (Sample, Sample)；signed: Sample
    """
    n = scenario.sizes[0] if n is None else int(n)
    stream = scenario.stream(n, replicate_index)
    if scenario.name != 'mod3':
        return _draw(scenario.name, n, stream.generator())

    # 水平按 Bernoulli(2/3) 分配，以"两组各 >= 3"为条件：某一水平不足 3 个时用下一个子流重抽。
    # n = 10 时约三成重复会重抽，n >= 60 时重抽概率可忽略（spawn(0) 留给检验本身）
    for attempt in range(1000):
        gen = (stream if attempt == 0 else stream.spawn(attempt)).generator()
        data = _draw_mod3(n, gen)
        if data is not None:
            return data
    raise RobustTestError(f"mod3 场景在 n={n} 时无法生成两组均 >= 3 的样本")


# ---------------------------------------------------------------- 检验注册表

TestRunner = Callable[[Any, float, RngStream], TestOutcome]


def _tie_free(fn):
    return lambda data, alpha, rng: fn(data, alpha, TIES_NONE, rng)


TEST_REGISTRY: Dict[str, Tuple[str, TestRunner]] = {
    'usualP': (SHAPE_PAIRED, lambda d, alpha, rng: pearson_classic(d, alpha)),
    'robustP': (SHAPE_PAIRED, lambda d, alpha, rng: pearson_robust(d, alpha)),
    'usualK': (SHAPE_PAIRED, _tie_free(kendall_classic)),
    'robustK': (SHAPE_PAIRED, _tie_free(kendall_robust)),
    'usualS': (SHAPE_PAIRED, _tie_free(spearman_classic)),
    'robustS': (SHAPE_PAIRED, _tie_free(spearman_robust)),
    'KSindep': (SHAPE_PAIRED, lambda d, alpha, rng: ks_independence_test(d, rng=rng)),
    'Fisher': (SHAPE_GROUPED, lambda g, alpha, rng: fisher_vartest_grouped(g, alpha)),
    'Bartlett': (SHAPE_GROUPED, lambda g, alpha, rng: bartlett_test(g, alpha)),
    'Levene': (SHAPE_GROUPED, lambda g, alpha, rng: levene_bf_test(g, alpha)),
    'VWelch': (SHAPE_GROUPED, lambda g, alpha, rng: vartest_robust(g, alpha)),
    'robustMW': (SHAPE_TWO_SAMPLE, lambda xy, alpha, rng: mannwhitney_robust(xy[0], xy[1], alpha)),
    'MW': (SHAPE_TWO_SAMPLE, lambda xy, alpha, rng: mannwhitney_classic(xy[0], xy[1], alpha)),
    'Welch': (SHAPE_TWO_SAMPLE, lambda xy, alpha, rng: welch_ttest(xy[0], xy[1], alpha)),
    'KS': (SHAPE_TWO_SAMPLE, lambda xy, alpha, rng: ks_twosample(xy[0], xy[1], alpha)),
    'robustW': (SHAPE_DIFFERENCES, _tie_free(signedrank_robust)),
    'W': (SHAPE_DIFFERENCES, _tie_free(signedrank_classic)),
    'median': (SHAPE_DIFFERENCES, lambda d, alpha, rng: mediantest(d, alpha)),
    'KSsym': (SHAPE_DIFFERENCES, lambda d, alpha, rng: ks_symmetry_test(d, rng=rng)),
}


def check_applicable(scenario: Scenario, tests: Sequence[str]):
    """所有检验标签都必须已注册且适用于场景的数据形态"""
    for label in tests:
        entry = TEST_REGISTRY.get(label)
        if entry is None:
            raise InapplicableTestError(f"未知检验: {label}")
        if entry[0] != scenario.shape:
            raise InapplicableTestError(
                f"检验 {label} 不适用于场景 {scenario.name}（需要 {entry[0]} 数据）")


# ---------------------------------------------------------------- 拒绝频率表

@dataclass(frozen=True)
class RejectionRow:
    """一个 (检验, 样本量) 单元的拒绝频率"""

    scenario: str
    test: str
    n: int
    size_label: str
    rejections: int
    replicates: int
    seed: int
    failures: int = 0

    @property
    def frequency(self) -> float:
        return self.rejections / self.replicates

    @property
    def mc_standard_error(self) -> float:
        f = self.frequency
        return math.sqrt(f * (1.0 - f) / self.replicates)

    def csv_line(self) -> str:
        return (f"{self.scenario},{self.test},{self.size_label},{self.frequency:.6f},"
                f"{self.mc_standard_error:.6f},{self.replicates},{self.seed}")


@dataclass
class RejectionReport:
    """拒绝频率表"""

    scenario: str
    alpha: float
    replicates: int
    seed: int
    rows: List[RejectionRow] = field(default_factory=list)

    CSV_HEADER = "scenario,test,n,frequency,stderr,N,seed"

    def get(self, test: str, n: int) -> RejectionRow:
        for row in self.rows:
            if row.test == test and row.n == n:
                return row
        raise KeyError(f"没有 ({test}, {n}) 对应的行")

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER] + [row.csv_line() for row in self.rows]
        return '\n'.join(lines) + '\n'

    def as_dict(self) -> Dict[str, Any]:
        return {
            'scenario': self.scenario,
            'alpha': self.alpha,
            'replicates': self.replicates,
            'seed': self.seed,
            'rows': [dict(asdict(row), frequency=row.frequency,
                          mc_standard_error=row.mc_standard_error) for row in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), ensure_ascii=False, indent=2)


def _run_chunk(args: Tuple[Scenario, Tuple[str, ...], int, int, int]) -> Dict[str, Tuple[int, int]]:
    """
    执行 start..stop-1 号重复，返回每个检验的 (拒绝次数, 失败次数)

    同一次重复的数据被所有检验共用。
    """
    scenario, tests, n, start, stop = args
    counts = {label: [0, 0] for label in tests}
    for r in range(start, stop):
        data = generate(scenario, r, n)
        # 检验内部所需随机性（KS 零分布、破结）与数据流分开
        test_rng = scenario.stream(n, r).spawn(0)
        for label in tests:
            runner = TEST_REGISTRY[label][1]
            try:
                outcome = runner(data, scenario.alpha, test_rng)
            except RobustTestError as e:
                logger.debug("检验 %s 在第 %d 次重复失败: %s", label, r, e)
                counts[label][1] += 1
                continue
            if outcome.rejects(scenario.alpha):
                counts[label][0] += 1
    return {label: (c[0], c[1]) for label, c in counts.items()}


def _prewarm(scenario: Scenario, tests: Sequence[str], n: int, workers: int):
    """在主进程生成零分布表/缓存，工作进程直接复用"""
    if 'robustP' in tests and 3 <= n <= PEARSON_TABLE_MAX_N:
        pearson_null_table(n)
    if 'KSindep' in tests:
        ks_null_cache(KIND_INDEPENDENCE, n, scenario.seed, workers=workers)
    if 'KSsym' in tests:
        ks_null_cache(KIND_SYMMETRY, n, scenario.seed, workers=workers)


def rejection_table(scenario: Scenario, tests: Optional[Sequence[str]] = None,
                    sizes: Optional[Sequence[int]] = None,
                    replicates: Optional[int] = None, alpha: Optional[float] = None,
                    seed: Optional[int] = None,
                    workers: Optional[int] = None) -> RejectionReport:
    """
    统计各 (检验, 样本量) 的拒绝频率

    Args:
        scenario: 场景
        tests: 检验标签列表，默认为场景的全部检验
        sizes, replicates, alpha, seed: 覆盖场景中的对应参数
        workers: 进程数，默认 settings.WORKERS；结果与进程数无关

    Returns:
        RejectionReport，行按 (样本量, 检验) 顺序排列
    """
    overrides = {key: value for key, value in
                 (('sizes', tuple(sizes) if sizes is not None else None),
                  ('replicates', replicates), ('alpha', alpha), ('seed', seed))
                 if value is not None}
    if overrides:
        scenario = replace(scenario, **overrides)
    tests = tuple(tests) if tests else tuple(DEFAULT_TESTS[scenario.name])
    check_applicable(scenario, tests)
    workers = settings.WORKERS if workers is None else max(1, int(workers))

    report = RejectionReport(scenario.name, scenario.alpha, scenario.replicates, scenario.seed)
    for n in scenario.sizes:
        logger.info("场景 %s: n=%s, %d 次重复, 检验 %s",
                    scenario.name, scenario.size_label(n), scenario.replicates, ', '.join(tests))
        _prewarm(scenario, tests, n, workers)
        tasks = [(scenario, tests, n, start, min(scenario.replicates, start + _CHUNK))
                 for start in range(0, scenario.replicates, _CHUNK)]
        if workers > 1 and len(tasks) > 1:
            with Pool(processes=workers) as pool:
                parts = pool.map(_run_chunk, tasks)
        else:
            parts = [_run_chunk(task) for task in tasks]

        for label in tests:
            rejections = sum(part[label][0] for part in parts)
            failures = sum(part[label][1] for part in parts)
            if failures:
                logger.warning("检验 %s 在 n=%d 时有 %d 次重复失败（计为不拒绝）",
                               label, n, failures)
            report.rows.append(RejectionRow(scenario.name, label, n, scenario.size_label(n),
                                            rejections, scenario.replicates, scenario.seed,
                                            failures))
    return report
