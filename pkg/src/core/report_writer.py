"""
报告输出模块
把 TestOutcome 渲染为文本报告或一行 CSV，把 RejectionReport 导出为 CSV / JSON。
文本模式 p 值保留 4 位有效数字，CSV 模式保留完整精度。
"""

import csv
import io
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

# 添加src到路径以支持导入
sys.path.insert(0, str(Path(__file__).parent.parent))

from utils import format_number, format_pvalue, full_precision
from .results import AnovaResult, CorrelationResult, SignedRankResult, TestOutcome, TwoSampleResult
from .simlab import RejectionReport

logger = logging.getLogger(__name__)

REPORT_VERSION = "1.0"
CSV_COLUMNS = ['method', 'statistic', 'p_value', 'estimate', 'ci_lower', 'ci_upper',
               'ci_level', 'n', 'notes']


def _extra_lines(outcome: TestOutcome) -> List[str]:
    """各结果类型的专有字段"""
    lines = []
    if isinstance(outcome, CorrelationResult) and outcome.variance_estimate is not None:
        lines.append(f"variance estimate = {format_number(outcome.variance_estimate)}")
    if isinstance(outcome, AnovaResult):
        lines.append(f"num df = {format_number(outcome.df1)}, denom df = {format_number(outcome.df2)}, "
                     f"asymptotic p-value = {format_pvalue(outcome.asymptotic_p_value)}")
        for group in outcome.groups:
            lines.append(f"  level {group.level}: n = {group.n}, mean = {format_number(group.mean)}, "
                         f"variance = {format_number(group.variance)}")
    if isinstance(outcome, TwoSampleResult):
        lines.append(f"V1 = {format_number(outcome.v1)}, V2 = {format_number(outcome.v2)}, "
                     f"P(X < Y) = {format_number(outcome.prob_x_less_y)}")
    if isinstance(outcome, SignedRankResult):
        parts = [f"U = {outcome.u_stat}"]
        if outcome.v_n is not None:
            parts.append(f"V_n = {format_number(outcome.v_n)}")
        lines.append(', '.join(parts))
    median_ci = getattr(outcome, 'median_ci', None)
    if median_ci is not None:
        lines.append(f"order statistics: k = {median_ci.k_index}, l = {median_ci.l_index}")
    return lines


def format_text(outcome: TestOutcome, data_label: str = '') -> str:
    """
    文本报告（类似 R 的检验输出）

    Args:
        outcome: 检验结果
        data_label: 数据说明，例如 "CHL and DBP"

    Returns:
        多行文本，以换行结尾
    """
    lines = ['', f"\t{outcome.method}", '']
    if data_label:
        lines.append(f"data:  {data_label}")
    lines.append(f"statistic = {format_number(outcome.statistic)}, "
                 f"p-value = {format_pvalue(outcome.p_value)}")
    if outcome.n_info:
        lines.append("n = " + ', '.join(str(n) for n in outcome.n_info))
    lines.append("alternative hypothesis: two-sided")
    if outcome.ci is not None:
        lines.append(f"{outcome.ci.level * 100:g} percent confidence interval:")
        lines.append(f" {format_number(outcome.ci.lower)} {format_number(outcome.ci.upper)}")
    if outcome.estimate is not None:
        lines.append("sample estimates:")
        lines.append(f" {format_number(outcome.estimate)}")
    lines.extend(_extra_lines(outcome))
    for note in outcome.notes:
        lines.append(f"note: {note}")
    return '\n'.join(lines) + '\n'


def csv_row(outcome: TestOutcome) -> Dict[str, str]:
    ci = outcome.ci
    return {
        'method': outcome.method,
        'statistic': full_precision(outcome.statistic),
        'p_value': full_precision(outcome.p_value),
        'estimate': full_precision(outcome.estimate),
        'ci_lower': full_precision(ci.lower) if ci else '',
        'ci_upper': full_precision(ci.upper) if ci else '',
        'ci_level': full_precision(ci.level) if ci else '',
        'n': ';'.join(str(n) for n in outcome.n_info),
        'notes': ' | '.join(outcome.notes),
    }


def format_csv(outcome: TestOutcome) -> str:
    """表头 + 一行机器可读结果（完整精度）"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator='\n')
    writer.writeheader()
    writer.writerow(csv_row(outcome))
    return buffer.getvalue()


def format_rejection_text(report: RejectionReport) -> str:
    """拒绝频率表的文本形式"""
    lines = [f"scenario {report.scenario}: N = {report.replicates}, alpha = {report.alpha:g}, "
             f"seed = {report.seed}",
             f"{'test':<10} {'n':>10} {'frequency':>10} {'stderr':>8}"]
    for row in report.rows:
        lines.append(f"{row.test:<10} {row.size_label:>10} {row.frequency:>10.4f} "
                     f"{row.mc_standard_error:>8.4f}")
    return '\n'.join(lines) + '\n'


def _payload(item: Union[TestOutcome, RejectionReport]) -> Dict[str, Any]:
    if isinstance(item, RejectionReport):
        return item.as_dict()
    data = {f.name: getattr(item, f.name) for f in fields(item)}
    data['ci'] = None if item.ci is None else {
        'lower': item.ci.lower, 'upper': item.ci.upper, 'level': item.ci.level}
    if getattr(item, 'groups', None):
        data['groups'] = [{'level': str(g.level), 'n': g.n, 'mean': g.mean,
                           'variance': g.variance} for g in item.groups]
    if getattr(item, 'median_ci', None) is not None:
        m = item.median_ci
        data['median_ci'] = {'k_index': m.k_index, 'l_index': m.l_index,
                             'lower': m.lower, 'upper': m.upper, 'level': m.level}
    data['n_info'] = list(item.n_info)
    return data


def save_report_json(item: Union[TestOutcome, RejectionReport], output_path: str,
                     command: Optional[List[str]] = None, pretty: bool = True) -> str:
    """
    把检验结果或拒绝频率表保存为 JSON（带元数据）

    Args:
        item: TestOutcome 或 RejectionReport
        output_path: 输出文件路径
        command: 可选，产生该结果的命令行参数
        pretty: 是否缩进

    Returns:
        保存的文件路径
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    # 元数据不含时间戳
    export_data = {
        "metadata": {
            "exporter": "robustest report_writer",
            "version": REPORT_VERSION,
            "command": command or [],
        },
        "data": _payload(item),
    }
    with open(output_path, 'w', encoding='utf-8') as f:
        json.dump(export_data, f, ensure_ascii=False, indent=2 if pretty else None,
                  allow_nan=True, default=str)
        f.write('\n')

    logger.info("JSON 报告已保存: %s", output_path)
    return str(output_path)


def save_report_csv(report: RejectionReport, output_path: str) -> str:
    """拒绝频率表保存为 CSV（scenario,test,n,frequency,stderr,N,seed）"""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8', newline='') as f:
        f.write(report.to_csv())
    logger.info("CSV 报告已保存: %s", output_path)
    return str(output_path)
