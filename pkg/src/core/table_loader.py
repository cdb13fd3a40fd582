"""
数据表读取模块
读取逗号分隔的 CSV（首行为表头，小数点为 '.'）或 Excel (.xlsx) 表格，
选取数值列、按一个等式条件过滤，并成对剔除含缺失/非数值的行。
"""

import logging
import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import DataLoadError
from .samples import PairedSample, Sample

logger = logging.getLogger(__name__)

_FILTER_PATTERN = re.compile(r'^\s*([^=\s]+)\s*==\s*(\S+)\s*$')


def parse_filter(text: str) -> Tuple[str, float]:
    """
    解析过滤条件 "col==value"（只支持一个数值等式）

    Args:
        text: 过滤条件字符串

    Returns:
        (列名, 数值)
    """
    match = _FILTER_PATTERN.match(text or '')
    if not match:
        raise DataLoadError(f"过滤条件格式应为 col==value: {text!r}")
    column, raw = match.groups()
    try:
        value = float(raw)
    except ValueError:
        raise DataLoadError(f"过滤值必须是数值: {raw!r}")
    return column, value


@dataclass
class CsvTable:
    """已清洗的数值表：所选列中每一行都是有限数值"""

    columns: Dict[str, np.ndarray]
    n_rows: int
    dropped_rows: int = 0
    missing_mask: Dict[str, np.ndarray] = field(default_factory=dict)
    source: str = ''

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise DataLoadError(f"表中没有列 {name!r}（已加载: {', '.join(self.columns)}）")
        return self.columns[name]

    def sample(self, name: str) -> Sample:
        return Sample(self.column(name))

    def paired(self, x: str, y: str) -> PairedSample:
        return PairedSample(self.sample(x), self.sample(y))


def _read_frame(path: str) -> pd.DataFrame:
    """按扩展名选择读取方式；表头保持原样以便检查重名列"""
    ext = os.path.splitext(path)[1].lower()
    readers = {
        '.csv': lambda p, **kw: pd.read_csv(p, sep=',', decimal='.', **kw),
        '.txt': lambda p, **kw: pd.read_csv(p, sep=',', decimal='.', **kw),
        '.xlsx': lambda p, **kw: pd.read_excel(p, engine='openpyxl', **kw),
    }
    reader = readers.get(ext, readers['.csv'])
    try:
        raw = reader(path, header=None, dtype=str, keep_default_na=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, ValueError) as e:
        raise DataLoadError(f"无法解析表格 {path}: {e}")
    if raw.shape[0] < 1:
        raise DataLoadError(f"表格为空: {path}")

    header = [str(name).strip() for name in raw.iloc[0].tolist()]
    duplicates = sorted({name for name in header if header.count(name) > 1})
    if duplicates:
        raise DataLoadError(f"列名重复: {', '.join(duplicates)}")
    frame = raw.iloc[1:].reset_index(drop=True)
    frame.columns = header
    return frame


def _to_numeric(series: pd.Series) -> np.ndarray:
    values = pd.to_numeric(series.str.strip(), errors='coerce').to_numpy(dtype=float)
    values[~np.isfinite(values)] = np.nan
    return values


def load_csv(path: str, columns: Sequence[str], filter: Optional[str] = None) -> CsvTable:
    """
    读取表格中的数值列

    Args:
        path: 文件路径（.csv 或 .xlsx）
        columns: 需要的列名
        filter: 可选过滤条件 "col==value"，按数值精确相等保留行

    Returns:
        CsvTable；所选列中任何一列缺失或非数值的行被成对剔除，并记录剔除行数
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"文件不存在: {path}")

    frame = _read_frame(path)
    wanted: List[str] = list(dict.fromkeys(columns))
    filter_column = None
    if filter:
        filter_column, filter_value = parse_filter(filter)

    missing = [name for name in wanted + ([filter_column] if filter_column else [])
               if name not in frame.columns]
    if missing:
        raise DataLoadError(f"缺少列: {', '.join(missing)}（可用列: {', '.join(frame.columns)}）")

    keep = np.ones(len(frame), dtype=bool)
    if filter_column:
        keep &= _to_numeric(frame[filter_column]) == filter_value
        if not keep.any():
            raise DataLoadError(f"过滤条件 {filter} 之后没有剩余行")

    numeric = {name: _to_numeric(frame[name])[keep] for name in wanted}
    missing_mask = {name: np.isnan(values) for name, values in numeric.items()}
    bad = np.zeros(int(keep.sum()), dtype=bool)
    for mask in missing_mask.values():
        bad |= mask

    dropped = int(bad.sum())
    if dropped:
        logger.warning("%s: 剔除 %d 行含缺失或非数值的记录（列: %s）",
                       path, dropped, ', '.join(wanted))
    if dropped == bad.size:
        raise DataLoadError(f"{path}: 剔除缺失值后没有剩余行")

    cleaned = {name: values[~bad] for name, values in numeric.items()}
    return CsvTable(columns=cleaned, n_rows=int((~bad).sum()), dropped_rows=dropped,
                    missing_mask=missing_mask, source=str(path))
