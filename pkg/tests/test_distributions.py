"""
robustest - Tests
分布函数、蒙特卡洛 p 值、缓存文件与 T'_n 零分布表
"""

import numpy as np
import pytest

from core import distributions as dist
from core.errors import DistributionDomainError, InsufficientDataError, RobustTestError
from core.rng import RngStream


def test_normal():
    assert dist.norm_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    assert dist.norm_quantile(0.5) == pytest.approx(0.0, abs=1e-15)
    assert dist.norm_cdf(0.0) == 0.5
    assert dist.norm_sf(1.959964) == pytest.approx(0.025, abs=1e-7)


def test_chisq_t_f():
    assert dist.chisq_quantile(0.95, 1) == pytest.approx(3.841459, abs=1e-5)
    assert dist.chisq_quantile(0.95, 1) == pytest.approx(dist.norm_quantile(0.975) ** 2)
    assert dist.t_quantile(0.975, 198) == pytest.approx(1.9720, abs=1e-4)
    assert dist.t_quantile(0.975, 10) == pytest.approx(2.228139, abs=1e-6)
    assert dist.f_quantile(0.95, 2, 10) == pytest.approx(4.102821, abs=1e-5)
    assert dist.f_cdf(dist.f_quantile(0.3, 3, 7), 3, 7) == pytest.approx(0.3)
    assert dist.chisq_sf(0.0, 3) == 1.0


def test_domain_errors():
    with pytest.raises(DistributionDomainError):
        dist.norm_quantile(0.0)
    with pytest.raises(DistributionDomainError):
        dist.t_quantile(1.0, 5)
    with pytest.raises(DistributionDomainError):
        dist.t_cdf(0.0, 0)


def test_kolmogorov_sf():
    assert dist.kolmogorov_sf(0.0) == 1.0
    assert dist.kolmogorov_sf(1.358) == pytest.approx(0.05, abs=1e-3)


def test_mc_pvalue():
    draws = np.arange(1, 1000, dtype=float)
    assert dist.mc_pvalue(5000.0, draws) == pytest.approx(1 / 1000)
    assert dist.mc_pvalue(-1.0, draws) == 1.0
    assert dist.mc_pvalue(500.0, draws) == pytest.approx(0.5, abs=0.01)
    assert dist.mc_pvalue(500.0, draws, presorted=True) == dist.mc_pvalue(500.0, draws)
    with pytest.raises(InsufficientDataError):
        dist.mc_pvalue(1.0, [])


def test_cache_file_header(tmp_path, monkeypatch):
    monkeypatch.setattr(dist.settings, 'CACHE_DIR', tmp_path)
    path = dist.cache_path('demo', 5, 1, 1000)
    header = {'kind': 'demo', 'n': '5', 'seed': '1', 'replicates': '1000'}
    dist.write_cache_file(path, header, np.array([0.25, 0.5, 1.0 / 3.0]))
    read_header, data = dist.read_cache_file(path)
    assert dist.header_matches(read_header, header)
    assert not dist.header_matches(read_header, dict(header, n='6'))
    assert data[2] == 1.0 / 3.0


def test_t_prime_rows():
    """Z = (2.25, -0.25, -0.25, 2.25) gives T'_n = 4 / 2.5"""
    x = np.array([[1.0, 2.0, 3.0, 4.0]])
    y = np.array([[1.0, 3.0, 2.0, 4.0]])
    assert dist.t_prime_rows(x, y)[0] == pytest.approx(1.6)


def test_pearson_table_shape_and_determinism():
    table = dist.pearson_null_table(30)
    assert table.quantile(0.5) == pytest.approx(0.0, abs=0.1)
    assert np.all(np.diff(table.quantiles) >= 0)
    rebuilt = dist.build_pearson_table(30, table.seed, table.replicates)
    assert rebuilt.quantile(0.975) == table.quantile(0.975)
    assert dist.pearson_null_table(30) is table


def test_pearson_table_tails_and_pvalue():
    table = dist.pearson_null_table(12)
    assert table.quantile(0.0001) < table.quantile(0.005)
    assert table.two_sided_pvalue(0.0) == pytest.approx(1.0, abs=0.05)
    assert table.two_sided_pvalue(50.0) < 1e-6


def test_pearson_null_quantile_large_n_uses_t():
    assert dist.pearson_null_quantile(200, 0.975) == pytest.approx(1.9720, abs=1e-4)
    with pytest.raises(InsufficientDataError):
        dist.pearson_null_quantile(2, 0.5)


def test_pearson_table_custom_seed():
    a = dist.pearson_null_table(8, RngStream(1))
    b = dist.pearson_null_table(8, RngStream(2))
    assert a.seed == 1 and b.seed == 2
    assert not np.array_equal(a.quantiles, b.quantiles)


def test_quantile_table_validation():
    with pytest.raises(RobustTestError):
        dist.QuantileTable('x', 5, np.array([0.5, 0.4]), np.array([0.0, 1.0]), 1000, 1)
    with pytest.raises(RobustTestError):
        dist.QuantileTable('x', 5, np.array([0.4, 0.5]), np.array([1.0, 0.0]), 1000, 1)


# ---------------------------------------------------------------- 单调性与往返

ROUND_TRIP_PROBS = np.concatenate([[1e-4, 1e-3], np.linspace(0.01, 0.99, 99), [1 - 1e-3, 1 - 1e-4]])

QUANTILE_PAIRS = [
    (dist.norm_quantile, dist.norm_cdf),
    (lambda p: dist.t_quantile(p, 3), lambda x: dist.t_cdf(x, 3)),
    (lambda p: dist.t_quantile(p, 30), lambda x: dist.t_cdf(x, 30)),
    (lambda p: dist.chisq_quantile(p, 1), lambda x: dist.chisq_cdf(x, 1)),
    (lambda p: dist.chisq_quantile(p, 5), lambda x: dist.chisq_cdf(x, 5)),
    (lambda p: dist.f_quantile(p, 3, 7), lambda x: dist.f_cdf(x, 3, 7)),
]


@pytest.mark.parametrize('quantile,cdf', QUANTILE_PAIRS)
def test_quantile_monotone_and_round_trip(quantile, cdf):
    grid = np.linspace(0.0005, 0.9995, 1000)
    values = np.array([quantile(p) for p in grid])
    assert np.all(np.diff(values) >= 0)
    for p in ROUND_TRIP_PROBS:
        assert abs(cdf(quantile(p)) - p) <= 1e-7


def test_pearson_table_increasing_and_round_trip():
    table = dist.pearson_null_table(25)
    assert np.all(np.diff(table.quantiles) > 0)
    values = np.array([table.quantile(p) for p in np.linspace(0.0005, 0.9995, 1000)])
    assert np.all(np.diff(values) >= 0)
    for p in ROUND_TRIP_PROBS:
        assert abs(table.cdf(table.quantile(p)) - p) <= 1e-7


def test_pearson_table_tail_continuous_at_grid_edges():
    table = dist.pearson_null_table(25)
    lo_p, hi_p = table.probs[0], table.probs[-1]
    assert table.quantile(lo_p * (1 - 1e-9)) == pytest.approx(table.quantiles[0], rel=1e-6)
    assert table.quantile(hi_p + (1 - hi_p) * 1e-9) == pytest.approx(table.quantiles[-1], rel=1e-6)


@pytest.mark.slow
def test_pearson_handover_is_smooth(monkeypatch):
    monkeypatch.setattr(dist.settings, 'PEARSON_TABLE_REPLICATES', 400_000)
    below = dist.pearson_null_quantile(129, 0.975)
    above = dist.pearson_null_quantile(130, 0.975)
    assert abs(below - above) < 0.02
