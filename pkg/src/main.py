"""
robustest - Main Entry Point
稳健假设检验命令行工具

子命令对应检验库的各个入口：相关性检验、KS 独立性检验、方差齐性检验、
Mann-Whitney / 符号秩检验、中位数检验、对称性检验、Welch 方差分析、
模拟实验（拒绝频率表）以及随机破结。

报告写到标准输出；诊断信息（日志、错误）只写到标准错误。
退出码：0 成功，1 用法错误，2 数据或退化错误。
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# 添加src到路径
sys.path.insert(0, str(Path(__file__).parent))

from config.settings import settings
from core.correlation import (TIES_NONE, TIES_RANDOM, kendall_classic, kendall_robust,
                              pearson_classic, pearson_robust, spearman_classic,
                              spearman_robust, tiebreak)
from core.errors import RobustTestError
from core.ksdistfree import ks_independence_test, ks_symmetry_test
from core.paired import mediantest, signedrank_classic, signedrank_robust
from core.report_writer import (format_csv, format_rejection_text, format_text,
                                save_report_csv, save_report_json)
from core.results import TestOutcome
from core.rng import RngStream
from core.samples import GroupedSample, Sample
from core.simlab import DEFAULT_TESTS, SCENARIO_SHAPES, Scenario, rejection_table
from core.table_loader import CsvTable, load_csv
from core.twosample import mannwhitney_classic, mannwhitney_robust, split_grouped
from core.variance import (bartlett_test, fisher_vartest_grouped, levene_bf_test,
                           vartest_robust, welch_anova)
from utils import parse_labels, parse_sizes

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class CliParser(argparse.ArgumentParser):
    """用法错误以退出码 1 结束"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    """参数组合不合法（退出码 1）"""


def setup_logging(verbose: bool):
    """只在命令行入口配置日志处理器，输出到标准错误"""
    level = logging.DEBUG if verbose else getattr(logging, settings.LOG_LEVEL, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')


def check_config():
    """检查配置"""
    is_valid, error_msg = settings.validate()
    if not is_valid:
        raise UsageError(f"配置错误: {error_msg}")


# ---------------------------------------------------------------- 数据读取

def _group_labels(values) -> tuple:
    return tuple(int(v) if float(v).is_integer() else float(v) for v in values)


def _load(args, columns: List[str]) -> CsvTable:
    return load_csv(args.input, [c for c in columns if c], args.filter)


def _paired(args):
    if not (args.x and args.y):
        raise UsageError("需要同时指定 --x 和 --y")
    table = _load(args, [args.x, args.y])
    return table.paired(args.x, args.y), f"{args.x} and {args.y}"


def _grouped(args) -> tuple:
    if not (args.value and args.group):
        raise UsageError("需要同时指定 --value 和 --group")
    table = _load(args, [args.value, args.group])
    g = GroupedSample(table.sample(args.value), _group_labels(table.column(args.group)))
    return g, f"{args.value} by {args.group}"


def _differences(args):
    """--value 给出 D；或 --x/--y 给出 D = y - x"""
    if args.value:
        table = _load(args, [args.value])
        return table.sample(args.value), args.value
    d, label = _paired(args)
    return d.differences(), f"{args.y} - {args.x}"


def _rng(args) -> RngStream:
    return RngStream(args.seed)


# ---------------------------------------------------------------- 子命令

def cmd_cortest(args):
    """相关性检验"""
    d, label = _paired(args)
    rng = _rng(args)
    if args.method == 'pearson':
        if args.classic:
            return pearson_classic(d, args.alpha), label
        return pearson_robust(d, args.alpha), label
    tests = {
        ('kendall', False): kendall_robust, ('kendall', True): kendall_classic,
        ('spearman', False): spearman_robust, ('spearman', True): spearman_classic,
    }
    fn = tests[(args.method, args.classic)]
    return fn(d, args.alpha, args.ties_break, rng), label


def cmd_indeptest(args):
    """KS 独立性检验"""
    d, label = _paired(args)
    return ks_independence_test(d, args.replicates, _rng(args), args.ties_break), label


def cmd_vartest(args):
    """方差齐性检验"""
    g, label = _grouped(args)
    tests = {'robust': vartest_robust, 'fisher': fisher_vartest_grouped,
             'bartlett': bartlett_test, 'levene': levene_bf_test}
    return tests[args.method](g, args.alpha), label


def cmd_anova(args):
    """James-Welch 方差分析"""
    g, label = _grouped(args)
    return welch_anova(g, args.alpha), label


def cmd_wilcoxtest(args):
    """Mann-Whitney（独立样本）或符号秩（--paired）检验"""
    rng = _rng(args)
    if args.paired:
        d, label = _differences(args)
        fn = signedrank_classic if args.classic else signedrank_robust
        return fn(d, args.alpha, args.ties_break, rng), label
    if args.value and args.group:
        g, label = _grouped(args)
        x, y = split_grouped(g)
    elif args.x and args.y:
        table_x = _load(args, [args.x])
        table_y = _load(args, [args.y])
        x, y = table_x.sample(args.x), table_y.sample(args.y)
        label = f"{args.x} and {args.y}"
    else:
        raise UsageError("需要 --x/--y 或 --value/--group")
    fn = mannwhitney_classic if args.classic else mannwhitney_robust
    return fn(x, y, args.alpha, args.ties_break, rng), label


def cmd_mediantest(args):
    """中位数检验"""
    d, label = _differences(args)
    return mediantest(d, args.alpha), label


def cmd_symtest(args):
    """KS 对称性检验"""
    d, label = _differences(args)
    return ks_symmetry_test(d, args.replicates, _rng(args)), label


def cmd_simulate(args):
    """模拟实验：拒绝频率表"""
    try:
        sizes = parse_sizes(args.sizes)
    except ValueError as e:
        raise UsageError(str(e))
    scenario = Scenario(args.scenario, tuple(sizes), args.replicates, args.alpha, args.seed)
    return rejection_table(scenario, parse_labels(args.tests), workers=args.workers), None


def cmd_tiebreak(args):
    """随机破结：每行输出一个值"""
    if not args.value:
        raise UsageError("需要指定 --value")
    table = _load(args, [args.value])
    notes: List[str] = []
    broken = tiebreak(table.sample(args.value), _rng(args), notes)
    for note in notes:
        logger.warning(note)
    return broken, None


# ---------------------------------------------------------------- 参数

def _add_common(p: argparse.ArgumentParser, data: bool = True):
    if data:
        p.add_argument('--input', required=True, help='输入表格路径（.csv 或 .xlsx）')
        p.add_argument('--filter', help='过滤条件，形如 CDH==1')
    p.add_argument('--alpha', type=float, default=0.05, help='显著性水平（默认: 0.05）')
    p.add_argument('--alternative', default='two-sided', choices=['two-sided'],
                   help='备择假设（目前只支持 two-sided）')
    p.add_argument('--seed', type=int, default=settings.DEFAULT_SEED,
                   help=f'随机种子（默认: ROBUSTEST_SEED 或 {settings.DEFAULT_SEED}）')
    p.add_argument('--format', default='text', choices=['text', 'csv'], help='输出格式')
    p.add_argument('--output', help='同时写入文件（.json 扩展名时输出 JSON）')
    p.add_argument('--verbose', action='store_true', help='输出调试日志到标准错误')


def _add_ties(p: argparse.ArgumentParser):
    p.add_argument('--ties-break', dest='ties_break', default=TIES_NONE,
                   choices=[TIES_NONE, TIES_RANDOM],
                   help='结的处理：none 报错，random 随机破结（默认: none）')


def build_parser() -> CliParser:
    parser = CliParser(
        prog='robustest',
        description='robustest - 稳健（渐近校准）假设检验',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
使用示例:
  # 稳健 Pearson 相关性检验
  python src/main.py cortest --method pearson --input evans.csv --x CHL --y DBP --filter CDH==1

  # 有结时随机破结的 Kendall 检验
  python src/main.py cortest --method kendall --input evans.csv --x CHL --y DBP --ties-break random

  # 方差齐性检验
  python src/main.py vartest --input data.csv --value X --group Y

  # 配对符号秩检验
  python src/main.py wilcoxtest --paired --input data.csv --x before --y after

  # 模拟实验
  python src/main.py simulate --scenario mod3 --sizes 60,100,300 --replicates 2000 --seed 7
        """
    )
    subparsers = parser.add_subparsers(dest='command', help='可用命令')

    p = subparsers.add_parser('cortest', help='相关系数为零的检验')
    p.add_argument('--x', help='第一列')
    p.add_argument('--y', help='第二列')
    p.add_argument('--method', default='pearson', choices=['pearson', 'kendall', 'spearman'],
                   help='相关系数类型（默认: pearson）')
    p.add_argument('--classic', action='store_true', help='使用经典（独立性假设下的）检验')
    _add_ties(p)
    _add_common(p)
    p.set_defaults(func=cmd_cortest)

    p = subparsers.add_parser('indeptest', help='Kolmogorov-Smirnov 独立性检验')
    p.add_argument('--x', help='第一列')
    p.add_argument('--y', help='第二列')
    p.add_argument('--replicates', type=int, default=None,
                   help=f'蒙特卡洛重复次数（默认: {settings.KS_REPLICATES}）')
    _add_ties(p)
    _add_common(p)
    p.set_defaults(func=cmd_indeptest)

    p = subparsers.add_parser('vartest', help='方差相等检验')
    p.add_argument('--value', help='数值列')
    p.add_argument('--group', help='分组列')
    p.add_argument('--method', default='robust', choices=['robust', 'fisher', 'bartlett', 'levene'],
                   help='检验方法（默认: robust）')
    _add_common(p)
    p.set_defaults(func=cmd_vartest)

    p = subparsers.add_parser('anova', help='James-Welch 均值相等检验')
    p.add_argument('--value', help='数值列')
    p.add_argument('--group', help='分组列')
    _add_common(p)
    p.set_defaults(func=cmd_anova)

    p = subparsers.add_parser('wilcoxtest', help='Mann-Whitney / 符号秩检验')
    p.add_argument('--x', help='第一列（配对时 D = y - x）')
    p.add_argument('--y', help='第二列')
    p.add_argument('--value', help='数值列（独立样本按 --group 拆分；配对时直接作为 D）')
    p.add_argument('--group', help='分组列（恰好 2 个水平）')
    p.add_argument('--paired', action='store_true', help='配对样本（符号秩检验）')
    p.add_argument('--classic', action='store_true', help='使用经典检验')
    _add_ties(p)
    _add_common(p)
    p.set_defaults(func=cmd_wilcoxtest)

    p = subparsers.add_parser('mediantest', help='中位数检验与置信区间')
    p.add_argument('--x', help='第一列（D = y - x）')
    p.add_argument('--y', help='第二列')
    p.add_argument('--value', help='差值列 D')
    _add_common(p)
    p.set_defaults(func=cmd_mediantest)

    p = subparsers.add_parser('symtest', help='Kolmogorov-Smirnov 对称性检验')
    p.add_argument('--x', help='第一列（D = y - x）')
    p.add_argument('--y', help='第二列')
    p.add_argument('--value', help='差值列 D')
    p.add_argument('--replicates', type=int, default=None,
                   help=f'蒙特卡洛重复次数（默认: {settings.KS_REPLICATES}）')
    _add_common(p)
    p.set_defaults(func=cmd_symtest)

    p = subparsers.add_parser('simulate', help='模拟实验：拒绝频率表')
    p.add_argument('--scenario', required=True, choices=list(SCENARIO_SHAPES),
                   help='模拟场景')
    p.add_argument('--sizes', required=True, help='样本量列表，如 30,70,150（mw 为 n1）')
    p.add_argument('--tests', help='检验标签列表（默认为场景的全部检验: '
                                   + '; '.join(f"{k}: {','.join(v)}" for k, v in DEFAULT_TESTS.items())
                                   + '）')
    p.add_argument('--replicates', type=int, default=2000, help='重复次数（默认: 2000）')
    p.add_argument('--workers', type=int, default=settings.WORKERS,
                   help=f'进程数（默认: {settings.WORKERS}），结果与进程数无关')
    _add_common(p, data=False)
    p.set_defaults(func=cmd_simulate)

    p = subparsers.add_parser('tiebreak', help='随机破结，每行输出一个值')
    p.add_argument('--value', help='需要破结的列')
    _add_common(p)
    p.set_defaults(func=cmd_tiebreak)

    return parser


# ---------------------------------------------------------------- 输出

def _render(args, result, label) -> str:
    if isinstance(result, Sample):
        return ''.join(f"{v!r}\n" for v in result.values.tolist())
    if isinstance(result, TestOutcome):
        return format_csv(result) if args.format == 'csv' else format_text(result, label)
    return result.to_csv() if args.format == 'csv' else format_rejection_text(result)


def _write_output(args, result, text: str, argv: List[str]):
    if not args.output:
        return
    if args.output.lower().endswith('.json') and not isinstance(result, Sample):
        save_report_json(result, args.output, command=argv)
    elif args.format == 'csv' and not isinstance(result, (Sample, TestOutcome)):
        save_report_csv(result, args.output)
    else:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        with open(args.output, 'w', encoding='utf-8') as f:
            f.write(text)


def run(argv: Optional[List[str]] = None) -> int:
    """
    执行一条命令

    Args:
        argv: 命令行参数（不含程序名），默认取 sys.argv[1:]

    Returns:
        退出码：0 成功，1 用法错误，2 数据/退化错误
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        settings.reload()
    except ValueError as e:
        print(f"robustest: error: 配置错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    # 如果没有提供命令，显示帮助
    if not args.command:
        parser.print_help()
        return EXIT_OK

    setup_logging(args.verbose)
    try:
        check_config()
        if not 0.0 < args.alpha < 1.0:
            raise UsageError(f"--alpha 必须在 (0, 1) 内: {args.alpha}")
        result, label = args.func(args)
        text = _render(args, result, label)
        sys.stdout.write(text)
        _write_output(args, result, text, argv)
    except UsageError as e:
        print(f"robustest: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RobustTestError, FileNotFoundError) as e:
        print(f"robustest: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    """主函数"""
    sys.exit(run())


if __name__ == "__main__":
    main()
