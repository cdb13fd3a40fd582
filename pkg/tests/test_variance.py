"""
robustest - Tests
Welch 方差分析与方差齐性检验
"""

import numpy as np
import pytest
from scipy import stats

from core.errors import DegenerateInputError, InapplicableTestError, InsufficientDataError
from core.rng import RngStream
from core.samples import GroupedSample, Sample
from core.twosample import welch_ttest
from core.variance import (bartlett_test, fisher_vartest, fisher_vartest_grouped, levene_bf_test,
                           vartest_robust, welch_anova)


def _groups(*groups):
    return GroupedSample.from_groups(groups)


@pytest.fixture
def three_groups():
    gen = RngStream(17).generator()
    return [gen.normal(0.0, 1.0, 12), gen.normal(0.5, 2.0, 15), gen.normal(0.0, 0.5, 9)]


def test_welch_anova_equal_means():
    result = welch_anova(_groups([1, 2, 3], [1, 2, 3]))
    assert result.statistic == pytest.approx(0.0, abs=1e-15)
    assert result.p_value == pytest.approx(1.0)
    assert result.df1 == 1.0


def test_welch_anova_two_groups_is_welch_t():
    a, b = [1, 2, 3, 4], [2, 3, 4, 5]
    anova = welch_anova(_groups(a, b))
    t = welch_ttest(Sample(a), Sample(b))
    assert anova.statistic == pytest.approx(t.statistic ** 2, rel=1e-12)
    assert anova.p_value == pytest.approx(t.p_value, rel=1e-9)


def test_welch_anova_affine_invariance(three_groups):
    base = welch_anova(_groups(*three_groups)).statistic
    moved = welch_anova(_groups(*[-2.5 * g + 7 for g in three_groups])).statistic
    assert moved == pytest.approx(base, abs=1e-10)


def test_welch_anova_reports_groups(three_groups):
    result = welch_anova(_groups(*three_groups))
    assert [g.n for g in result.groups] == [12, 15, 9]
    assert result.groups[1].variance == pytest.approx(np.var(three_groups[1], ddof=1))
    assert result.df1 == 2.0
    assert 0.0 <= result.asymptotic_p_value <= 1.0


def test_welch_anova_zero_variance():
    with pytest.raises(DegenerateInputError):
        welch_anova(_groups([5, 5, 5], [1, 2, 3]))


def test_vartest_robust_shift_invariance(three_groups):
    base = vartest_robust(_groups(*three_groups)).statistic
    shifted = vartest_robust(_groups(three_groups[0] + 10, three_groups[1],
                                     three_groups[2] - 3)).statistic
    assert shifted == pytest.approx(base, rel=1e-9)


def test_vartest_robust_identical_groups():
    assert vartest_robust(_groups([1, 2, 4], [1, 2, 4])).statistic == pytest.approx(0.0, abs=1e-15)


def test_vartest_robust_errors():
    with pytest.raises(DegenerateInputError):
        vartest_robust(_groups([-1, 1, -1, 1], [-2, 2, -2, 2]))
    with pytest.raises(InsufficientDataError):
        vartest_robust(_groups([1, 2], [1, 2, 3]))


def test_fisher_vartest():
    assert fisher_vartest(Sample([0, 2]), Sample([0, 1])).statistic == pytest.approx(4.0)
    same = fisher_vartest(Sample([1, 2, 4]), Sample([1, 2, 4]))
    assert same.statistic == pytest.approx(1.0)
    assert same.p_value == pytest.approx(1.0)
    assert same.ci.contains(1.0)


def test_fisher_vartest_grouped_requires_two_levels(three_groups):
    with pytest.raises(InapplicableTestError):
        fisher_vartest_grouped(_groups(*three_groups))


def test_bartlett(three_groups):
    result = bartlett_test(_groups(*three_groups))
    reference = stats.bartlett(*three_groups)
    assert result.statistic == pytest.approx(reference[0])
    assert bartlett_test(_groups([1, 2, 4], [1, 2, 4])).statistic == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DegenerateInputError):
        bartlett_test(_groups([3, 3, 3], [1, 2, 4]))


def test_levene(three_groups):
    result = levene_bf_test(_groups(*three_groups))
    reference = stats.levene(*three_groups, center='median')
    assert result.statistic == pytest.approx(reference[0])
    assert result.p_value == pytest.approx(reference[1])
    assert levene_bf_test(_groups([1, 2, 4], [1, 2, 4])).statistic == pytest.approx(0.0, abs=1e-12)
