"""
robustest - Tests
数据容器、秩、经验分布与结检测
"""

import numpy as np
import pytest

from core.errors import DegenerateInputError, InsufficientDataError
from core.samples import GroupedSample, PairedSample, Sample, ecdf_at, has_ties, ranks


def test_sample_rejects_non_finite():
    """Sample must contain finite values only"""
    with pytest.raises(DegenerateInputError):
        Sample([1.0, float('nan')])
    with pytest.raises(DegenerateInputError):
        Sample([1.0, float('inf')])
    with pytest.raises(InsufficientDataError):
        Sample([])


def test_sample_is_read_only():
    s = Sample([3.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0] = 10.0
    assert s.sorted_values().tolist() == [1.0, 2.0, 3.0]
    assert s.variance() == pytest.approx(1.0)
    assert s.median() == 2.0


def test_paired_sample():
    """Paired samples require equal lengths and give D = Y - X"""
    d = PairedSample.from_arrays([1, 2, 3], [2, 2, 5])
    assert d.n == 3
    assert d.differences().values.tolist() == [1.0, 0.0, 2.0]
    with pytest.raises(DegenerateInputError):
        PairedSample.from_arrays([1, 2, 3], [1, 2])
    with pytest.raises(InsufficientDataError):
        PairedSample.from_arrays([1], [1])


def test_grouped_sample_levels():
    g = GroupedSample(Sample([1, 2, 3, 4, 5, 6]), (1, 0, 1, 0, 1, 0))
    assert g.level_names == (0, 1)
    assert g.group_counts == (3, 3)
    assert g.p == 2
    first, second = g.groups()
    assert first.tolist() == [2.0, 4.0, 6.0]
    assert second.tolist() == [1.0, 3.0, 5.0]
    assert g.group_of().tolist() == [1, 0, 1, 0, 1, 0]


def test_grouped_sample_validation():
    with pytest.raises(InsufficientDataError):
        GroupedSample(Sample([1, 2, 3]), ('a', 'a', 'a'))
    with pytest.raises(InsufficientDataError):
        GroupedSample(Sample([1, 2, 3]), ('a', 'a', 'b'))
    with pytest.raises(DegenerateInputError):
        GroupedSample(Sample([1, 2, 3]), ('a', 'b'))


def test_grouped_from_groups():
    g = GroupedSample.from_groups([[1, 2], [3, 4, 5]], labels=['x', 'y'])
    assert g.n == 5
    assert g.group_counts == (2, 3)


def test_ranks():
    """Midranks for ties"""
    assert ranks(Sample([3, 1, 2])).tolist() == [3.0, 1.0, 2.0]
    assert ranks(Sample([5, 5, 1])).tolist() == [2.5, 2.5, 1.0]
    assert ranks(Sample([7])).tolist() == [1.0]


def test_ecdf_at():
    s = Sample([1, 2, 3])
    assert ecdf_at(s, 2) == pytest.approx(2 / 3)
    assert ecdf_at(s, 0.5) == 0.0
    assert ecdf_at(s, 2, strict=True) == pytest.approx(1 / 3)
    assert ecdf_at(Sample([1, 1, 2]), 1) == pytest.approx(2 / 3)


def test_has_ties():
    assert not has_ties(Sample([1, 2, 3]), Sample([4, 5]))
    assert has_ties(Sample([1, 2, 2]))
    assert has_ties(Sample([1, 2]), Sample([2, 3]))
    assert not has_ties(Sample([1.0, 1.0 + 2.0 ** -52]))
    report = has_ties(Sample([1, 2, 2, 2]))
    assert report.tied_values == (2.0,)
