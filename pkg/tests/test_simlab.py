"""
robustest - Tests
模拟场景、数据生成与拒绝频率表
"""

import numpy as np
import pytest

from core.errors import InapplicableTestError, RobustTestError
from core.samples import GroupedSample, PairedSample, Sample
from core.simlab import (EXP_PSEUDO_MEDIAN, RejectionReport, RejectionRow, Scenario, _draw_mod3,
                         check_applicable, generate, rejection_table)


def test_scenario_validation():
    with pytest.raises(RobustTestError):
        Scenario('mod9', (10,))
    with pytest.raises(RobustTestError):
        Scenario('mod3', (5,))
    with pytest.raises(RobustTestError):
        Scenario('mod1', (10,), alpha=1.5)
    with pytest.raises(RobustTestError):
        Scenario('mod1', ())


def test_size_label():
    assert Scenario('mw', (10,)).size_label(10) == '10;30'
    assert Scenario('mod1', (10,)).size_label(10) == '10'


def test_generate_is_deterministic():
    scenario = Scenario('mod1', (20,), seed=5)
    a, b, c = generate(scenario, 0), generate(scenario, 0), generate(scenario, 1)
    assert np.array_equal(a.x.values, b.x.values)
    assert not np.array_equal(a.x.values, c.x.values)


def test_generate_shapes():
    assert isinstance(generate(Scenario('mod1', (10,), seed=1), 0), PairedSample)
    mod3 = generate(Scenario('mod3', (12,), seed=1), 0)
    assert isinstance(mod3, GroupedSample)
    assert min(mod3.group_counts) >= 3
    x, y = generate(Scenario('mw', (10,), seed=1), 0)
    assert (x.n, y.n) == (10, 30)
    assert isinstance(generate(Scenario('signed', (10,), seed=1), 0), Sample)


def test_mod2_bounds():
    d = generate(Scenario('mod2', (500,), seed=2), 0)
    assert np.all(np.abs(d.y.values) <= np.abs(d.x.values) ** 3 + 1e-15)
    assert np.all(np.abs(d.x.values) <= 1.0)


def test_mod3_small_n_conditions_on_group_sizes():
    scenario = Scenario('mod3', (10,), seed=11)
    for r in range(200):
        assert min(generate(scenario, r).group_counts) >= 3


def test_mod3_moderate_n_uses_first_draw():
    scenario = Scenario('mod3', (60,), seed=12)
    for r in range(200):
        first = _draw_mod3(60, scenario.stream(60, r).generator())
        assert first is not None
        assert np.array_equal(generate(scenario, r).values.values, first.values.values)


def test_mod3_level_proportion():
    g = generate(Scenario('mod3', (10_000,), seed=3), 0)
    assert g.group_counts[1] / g.n == pytest.approx(2 / 3, abs=0.02)


def test_mod1_regression_slope():
    d = generate(Scenario('mod1', (10_000,), seed=4), 0)
    slope = np.polyfit(d.x.values ** 2, d.y.values, 1)[0]
    assert slope == pytest.approx(1.0, abs=0.02)


def test_exp_pseudo_median():
    """P(E1 + E2 > 2m) = 1/2 for i.i.d. Exp(1)"""
    m2 = 2 * EXP_PSEUDO_MEDIAN
    assert (1 + m2) * np.exp(-m2) == pytest.approx(0.5, abs=1e-12)


def test_check_applicable():
    check_applicable(Scenario('mod1', (10,)), ['robustP', 'KSindep'])
    with pytest.raises(InapplicableTestError):
        check_applicable(Scenario('mod1', (10,)), ['Welch'])
    with pytest.raises(InapplicableTestError):
        check_applicable(Scenario('mod1', (10,)), ['nope'])


def test_rejection_row():
    row = RejectionRow('mod3', 'VWelch', 100, '100', 110, 2000, 7)
    assert row.frequency == pytest.approx(0.055)
    assert row.mc_standard_error == pytest.approx((0.055 * 0.945 / 2000) ** 0.5)
    assert row.csv_line().startswith('mod3,VWelch,100,0.055000,')


def test_rejection_table_independent_of_workers():
    scenario = Scenario('mw', (10,), replicates=150, seed=11)
    one = rejection_table(scenario, ['robustMW', 'Welch'], workers=1)
    two = rejection_table(scenario, ['robustMW', 'Welch'], workers=2)
    assert one.to_csv() == two.to_csv()
    assert one.to_csv().splitlines()[0] == RejectionReport.CSV_HEADER
    assert [row.test for row in one.rows] == ['robustMW', 'Welch']


def test_rejection_table_overrides():
    report = rejection_table(Scenario('signed', (10,), replicates=40, seed=1),
                             tests=['median', 'robustW'], sizes=[12, 20], replicates=30)
    assert report.replicates == 30
    assert report.get('median', 20).replicates == 30
    with pytest.raises(KeyError):
        report.get('median', 10)


def test_rejection_table_json():
    report = rejection_table(Scenario('mod3', (20,), replicates=20, seed=2), tests=['VWelch'])
    payload = report.as_dict()
    assert payload['rows'][0]['test'] == 'VWelch'
    assert 0.0 <= payload['rows'][0]['frequency'] <= 1.0
