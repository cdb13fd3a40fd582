"""
robustest - Tests
中位数检验、稳健与经典符号秩检验
"""

import math

import numpy as np
import pytest

import oracles
from core.errors import InsufficientDataError, TieError
from core.paired import (median_ci_indices, mediantest, signed_pair_count, signed_rank_sum,
                         signedrank_classic, signedrank_robust, signedrank_variance)
from core import results
from core.rng import RngStream
from core.samples import PairedSample, Sample


def test_median_ci_indices():
    assert median_ci_indices(9, 0.05) == (1, 7)


def test_mediantest_all_positive():
    result = mediantest(Sample(range(1, 10)))
    assert (result.ci.lower, result.ci.upper) == (1.0, 7.0)
    assert result.median_ci.k_index == 1 and result.median_ci.l_index == 7
    assert result.statistic == pytest.approx(3.0)
    assert result.estimate == 5.0
    assert result.p_value == pytest.approx(0.02)
    assert result.rejects(0.05)


def test_mediantest_symmetric_not_rejected():
    result = mediantest(Sample([-4, -3, -2, -1, 0, 1, 2, 3, 4]))
    assert result.ci.contains(0.0)
    assert not result.rejects(0.05)


def test_mediantest_pvalue_consistent_with_interval():
    gen = RngStream(60).generator()
    for shift in (0.0, 0.2, 0.5):
        d = Sample(gen.standard_normal(60) + shift)
        result = mediantest(d, alpha=0.05)
        assert result.rejects(0.05) == (not result.ci.contains(0.0))


def test_mediantest_accepts_paired():
    d = PairedSample.from_arrays([0] * 9, range(1, 10))
    assert mediantest(d).estimate == 5.0


def test_mediantest_too_small():
    with pytest.raises(InsufficientDataError):
        mediantest(Sample([1, 2, 3, 4, 5]))


def test_signed_counts():
    d = np.array([1.0, -2.0, 3.0])
    assert signed_pair_count(d) == 2
    assert signed_rank_sum(d) == 4.0
    assert signed_rank_sum(np.array([1.0, 2.0, 3.0])) == 6.0


def test_signed_counts_match_brute_force():
    d = RngStream(61).generator().standard_normal(40) + 0.2
    assert signed_pair_count(d) == oracles.signed_pair_count(d)
    assert signed_rank_sum(d) == oracles.signed_rank_sum(d)
    assert signed_rank_sum(d) == signed_pair_count(d) + np.count_nonzero(d > 0)


def test_signedrank_robust_example():
    result = signedrank_robust(Sample([1, -2, 3, -4, 5]))
    assert result.u_stat == oracles.signed_pair_count([1, -2, 3, -4, 5])
    assert result.estimate == pytest.approx(2 * result.u_stat / 20)


def test_signedrank_robust_antisymmetric():
    d = Sample([-4, -3, -2, -1, 1.5, 2.5, 3.5, 4.5][::-1])
    antisym = Sample([-4, -3, -2, -1, 1, 2, 3, 4])
    result = signedrank_robust(antisym)
    assert result.estimate == pytest.approx(0.5, abs=0.1)
    assert abs(result.statistic) < 1.0
    assert signedrank_robust(d).estimate > 0.5


def test_signedrank_variance_symmetric_limit():
    d = RngStream(62).generator().standard_normal(10_000)
    assert signedrank_variance(d) == pytest.approx(1 / 3, rel=0.1)


def test_signedrank_robust_one_sign():
    result = signedrank_robust(Sample([1, 2, 3, 4, 5]))
    assert result.p_value == 0.0
    assert result.statistic == math.inf
    assert result.notes


def test_signedrank_ties():
    with pytest.raises(TieError) as info:
        signedrank_robust(Sample([0, 1, -2, 3, 4]))
    assert info.value.margin == 'D'
    with pytest.raises(TieError):
        signedrank_classic(Sample([1, -1, 2, 3]))
    a = signedrank_robust(Sample([0, 1, -2, 3, 4]), ties_break='random', rng=RngStream(3))
    b = signedrank_robust(Sample([0, 1, -2, 3, 4]), ties_break='random', rng=RngStream(3))
    assert a.statistic == b.statistic
    assert a.notes


def test_signedrank_robust_requires_four():
    with pytest.raises(InsufficientDataError):
        signedrank_robust(Sample([1, -2, 3]))


def test_signedrank_classic():
    result = signedrank_classic(Sample([1, -2, 3]))
    assert result.statistic == 4.0
    assert result.u_stat == 2
    d = RngStream(63).generator().standard_normal(30)
    w = signed_rank_sum(d)
    n = 30
    z = (w - n * (n + 1) / 4) / math.sqrt(n * (n + 1) * (2 * n + 1) / 24)
    assert signedrank_classic(Sample(d)).p_value == pytest.approx(math.erfc(abs(z) / math.sqrt(2)))


# ---------------------------------------------------------------- 暴力核对与不变性

def test_signed_pair_count_matches_brute_force_many():
    gen = RngStream(401).generator()
    for _ in range(1000):
        n = int(gen.integers(2, 201))
        d = gen.standard_normal(n) + gen.uniform(-1, 1)
        assert signed_pair_count(d) == oracles.signed_pair_count_matrix(d)


def test_rank_sum_decomposes_into_pair_count():
    gen = RngStream(402).generator()
    for _ in range(100):
        n = int(gen.integers(2, 80))
        d = gen.standard_normal(n) + 0.3
        assert signed_rank_sum(d) == signed_pair_count(d) + int(np.count_nonzero(d > 0))


def test_signed_statistics_scale_and_negation():
    d = RngStream(403).generator().standard_normal(40) + 0.2
    base = signedrank_robust(Sample(d))
    scaled = signedrank_robust(Sample(3.5 * d))
    assert scaled.statistic == base.statistic
    assert signedrank_classic(Sample(3.5 * d)).statistic == signedrank_classic(Sample(d)).statistic
    negated = signedrank_robust(Sample(-d))
    assert negated.w_prime == pytest.approx(-base.w_prime, rel=1e-12)


def test_rejection_rule_is_p_at_most_alpha():
    assert results.TestOutcome(statistic=1.0, p_value=0.05, method='m').rejects(0.05)
    assert not results.TestOutcome(statistic=1.0, p_value=0.0501, method='m').rejects(0.05)
    assert results.MedianTestResult(statistic=1.0, p_value=0.05, method='m').rejects(0.05)
    assert results.MedianTestResult.rejects is results.TestOutcome.rejects
