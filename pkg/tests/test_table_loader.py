"""
robustest - Tests
表格读取、过滤与缺失值处理
"""

import logging

import pandas as pd
import pytest

from core.errors import DataLoadError
from core.table_loader import load_csv, parse_filter


def test_parse_filter():
    assert parse_filter('CDH==1') == ('CDH', 1.0)
    assert parse_filter(' g == 2.5 ') == ('g', 2.5)
    with pytest.raises(DataLoadError):
        parse_filter('CDH=1')
    with pytest.raises(DataLoadError):
        parse_filter('CDH==yes')


def test_load_basic(data_dir):
    table = load_csv(str(data_dir / 'basic.csv'), ['a', 'b'])
    assert table.n_rows == 3
    assert table.column('a').tolist() == [1.0, 2.0, 3.0]
    assert table.paired('a', 'b').differences().values.tolist() == [1.0, 2.0, 2.0]


def test_load_drops_missing(data_dir, caplog):
    with caplog.at_level(logging.WARNING):
        table = load_csv(str(data_dir / 'missing.csv'), ['a', 'b'])
    assert table.n_rows == 3
    assert table.dropped_rows == 1
    assert '1' in caplog.text


def test_load_filter(data_dir):
    table = load_csv(str(data_dir / 'basic.csv'), ['a'], filter='g==1')
    assert table.column('a').tolist() == [2.0, 3.0]
    with pytest.raises(DataLoadError):
        load_csv(str(data_dir / 'basic.csv'), ['a'], filter='g==5')


def test_load_errors(data_dir, tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(str(tmp_path / 'nope.csv'), ['a'])
    with pytest.raises(DataLoadError):
        load_csv(str(data_dir / 'basic.csv'), ['zzz'])
    duplicated = tmp_path / 'dup.csv'
    duplicated.write_text("a,a\n1,2\n", encoding='utf-8')
    with pytest.raises(DataLoadError):
        load_csv(str(duplicated), ['a'])
    empty = tmp_path / 'empty.csv'
    empty.write_text("a\nNA\n", encoding='utf-8')
    with pytest.raises(DataLoadError):
        load_csv(str(empty), ['a'])


def test_load_excel(tmp_path):
    path = tmp_path / 'data.xlsx'
    pd.DataFrame({'x': [1.5, 2.5, 3.5], 'y': [1, 0, 1]}).to_excel(path, index=False, engine='openpyxl')
    table = load_csv(str(path), ['x'], filter='y==1')
    assert table.column('x').tolist() == [1.5, 3.5]
