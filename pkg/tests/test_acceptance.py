"""
robustest - Acceptance tests
蒙特卡洛校准：各场景下的拒绝频率（运行较慢，用 pytest -m slow 执行）
"""

import numpy as np
import pytest

from core.correlation import kendall_classic, pearson_robust, spearman_classic
from core.paired import mediantest
from core.rng import RngStream
from core.samples import PairedSample, Sample
from core.simlab import Scenario, rejection_table

pytestmark = pytest.mark.slow

N = 2000


def _frequency(scenario, test, n, replicates=N, seed=7):
    report = rejection_table(Scenario(scenario, (n,), replicates=replicates, seed=seed),
                             tests=[test], workers=2)
    return report.get(test, n).frequency


@pytest.mark.parametrize('test, n, expected, tol', [
    ('robustP', 100, 0.049, 0.015),
    ('usualP', 100, 0.362, 0.03),
    ('robustK', 200, 0.052, 0.015),
    ('robustS', 300, 0.056, 0.015),
])
def test_uncorrelated_dependent_model(test, n, expected, tol):
    assert _frequency('mod1', test, n) == pytest.approx(expected, abs=tol)


def test_ks_independence_power_model_one():
    assert _frequency('mod1', 'KSindep', 70) >= 0.99


@pytest.mark.parametrize('test, n, expected, tol', [
    ('usualK', 300, 0.246, 0.03),
    ('robustK', 300, 0.05, 0.015),
])
def test_symmetric_sign_model(test, n, expected, tol):
    assert _frequency('mod2', test, n) == pytest.approx(expected, abs=tol)


def test_ks_independence_power_model_two():
    assert _frequency('mod2', 'KSindep', 40) >= 0.99


@pytest.mark.parametrize('test, n, expected, tol', [
    ('Fisher', 150, 0.153, 0.025),
    ('Bartlett', 300, 0.161, 0.025),
    ('Levene', 300, 0.196, 0.03),
])
def test_equal_variance_baselines(test, n, expected, tol):
    assert _frequency('mod3', test, n) == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize('n', [60, 100, 300])
def test_robust_variance_test_calibrated(n):
    assert 0.04 <= _frequency('mod3', 'VWelch', n) <= 0.07


@pytest.mark.parametrize('test, n, expected, tol', [
    ('robustMW', 100, 0.051, 0.02),
    ('MW', 100, 0.161, 0.025),
    ('Welch', 30, 0.048, 0.02),
])
def test_stochastic_dominance_model(test, n, expected, tol):
    assert _frequency('mw', test, n) == pytest.approx(expected, abs=tol)


def test_ks_twosample_power():
    assert _frequency('mw', 'KS', 30, replicates=500) == 1.0


def test_signed_rank_asymmetric_null():
    assert _frequency('signed', 'robustW', 300) == pytest.approx(0.05, abs=0.02)


def test_rank_tests_null_calibration():
    """Independent uniforms: Kendall at n=10 and Spearman at n=50 reject about 5%"""
    base = RngStream(2024)
    kendall = spearman = 0
    for r in range(N):
        gen = base.spawn(r).generator()
        kendall += kendall_classic(PairedSample.from_arrays(gen.random(10), gen.random(10))).rejects(0.05)
        spearman += spearman_classic(PairedSample.from_arrays(gen.random(50), gen.random(50))).rejects(0.05)
    assert kendall / N == pytest.approx(0.05, abs=0.02)
    assert spearman / N == pytest.approx(0.05, abs=0.02)


def test_median_interval_coverage():
    base = RngStream(2025)
    covered = 0
    for r in range(N):
        d = Sample(base.spawn(r).generator().standard_normal(100))
        covered += mediantest(d).ci.contains(0.0)
    assert covered / N == pytest.approx(0.95, abs=0.02)


@pytest.mark.parametrize('n', [20, 200])
def test_robust_pearson_null_calibration(n):
    """Independent Gaussian pairs: table lookup (n = 20) and Student t (n = 200) both hold the level"""
    base = RngStream(2026)
    rejected = 0
    for r in range(N):
        gen = base.spawn(r).generator()
        d = PairedSample.from_arrays(gen.standard_normal(n), gen.standard_normal(n))
        rejected += pearson_robust(d).rejects(0.05)
    assert rejected / N == pytest.approx(0.05, abs=0.02)
