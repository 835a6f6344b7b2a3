"""
命令行入口
子命令：kernel、transform、variation、czd、verify、sweep、ui

退出码：0 成功（verify/sweep 全部通过），1 验证未通过或运行失败，2 用法错误。
"""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from src.config.settings import RegressionStore, worker_count
from src.config.sweep import bundled_config, load_sweep_config
from src.core.czd import cz_decompose, verify_cz
from src.core.errors import BesselRieszError, ConvergenceError
from src.core.functions import function_from_id
from src.core.kernel import KernelEvalConfig, riesz_kernel_many
from src.core.measure import EpsilonLadder, RadialGrid
from src.core.operators import TransformConfig, TruncationProfile, truncation_profile
from src.core.oscillation import (
    jump_count,
    oscillation,
    oscillation_prime,
    profile_from_csv,
    profile_to_csv,
    rho_variation,
    upcross_count,
)
from src.services.harness import SUITES, run_suites
from src.services.reporting import (
    format_summary,
    write_kernel_csv,
    write_manifest,
    write_report_csv,
    write_report_json,
)
from src.utils.logger import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """参数错误，对应退出码 2"""


class _Parser(argparse.ArgumentParser):
    """出错时抛出 UsageError 而不是直接退出进程"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无法解析数值列表: {text}") from e


def _ladder(args) -> EpsilonLadder:
    if args.epsilons:
        return EpsilonLadder(tuple(args.epsilons))
    return EpsilonLadder.geometric(args.start, args.ratio, args.length)


def _add_ladder_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--start', type=float, default=1.0, help='几何截断序列的首项')
    parser.add_argument('--ratio', type=float, default=2.0, help='几何比')
    parser.add_argument('--length', type=int, default=12, help='截断序列长度 m')
    parser.add_argument('--subsamples', type=int, default=4, help='每个区段的细分数 k')
    parser.add_argument('--epsilons', type=_floats, default=None, help='显式给出递减的截断序列（逗号分隔）')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='brv', description='Bessel-Riesz 截断变换的振荡与变差数值验证')
    parser.add_argument('--log-level', default='WARNING', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    parser.add_argument('--output-dir', default='output', help='清单与默认输出目录')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    p_kernel = sub.add_parser('kernel', help='R(x,y) 数值表')
    p_kernel.add_argument('--lambda', dest='lam', type=float, action='append', required=True)
    p_kernel.add_argument('--x', type=_floats, required=True, help='x 取值（逗号分隔）')
    p_kernel.add_argument('--y', type=_floats, required=True, help='y 取值（逗号分隔）')
    p_kernel.add_argument('--rel-tol', type=float, default=1e-10)
    p_kernel.add_argument('--output', default=None, help='CSV 路径，缺省打印到标准输出')

    p_transform = sub.add_parser('transform', help='给定 f 与 x 的截断轮廓')
    p_transform.add_argument('--lambda', dest='lam', type=float, required=True)
    p_transform.add_argument('--function', required=True, help='测试函数标识，如 indicator(0,1)')
    p_transform.add_argument('--x', type=float, required=True)
    _add_ladder_arguments(p_transform)
    p_transform.add_argument('--rel-tol', type=float, default=1e-10)
    p_transform.add_argument('--output', default=None)

    p_variation = sub.add_parser('variation', help='由轮廓计算 V_ρ、O、O′、Λ、N')
    source = p_variation.add_mutually_exclusive_group(required=True)
    source.add_argument('--input', help='轮廓 CSV（epsilon,value）')
    source.add_argument('--function', help='现场计算轮廓所用的测试函数')
    p_variation.add_argument('--lambda', dest='lam', type=float, default=1.0)
    p_variation.add_argument('--x', type=float, default=1.0)
    _add_ladder_arguments(p_variation)
    p_variation.add_argument('--rho', type=float, default=3.0)
    p_variation.add_argument('--beta', type=float, default=1.0)
    p_variation.add_argument('--alpha', type=float, default=0.0)
    p_variation.add_argument('--gamma', type=float, default=1.0)

    p_czd = sub.add_parser('czd', help='CZ 分解并校验')
    p_czd.add_argument('--lambda', dest='lam', type=float, required=True)
    p_czd.add_argument('--function', required=True)
    p_czd.add_argument('--eta', type=float, required=True)
    p_czd.add_argument('--max-depth', type=int, default=40)
    p_czd.add_argument('--output', default=None, help='JSON 路径，缺省打印到标准输出')

    p_verify = sub.add_parser('verify', help='运行验证套件')
    p_verify.add_argument('--lambda', dest='lam', type=float, action='append', default=None)
    p_verify.add_argument('--quick', action='store_true', help='使用快速配置')
    p_verify.add_argument('--config', default=None, help='扫描配置文件')
    p_verify.add_argument('--suite', action='append', choices=sorted(SUITES), default=None)
    mode = p_verify.add_mutually_exclusive_group()
    mode.add_argument('--calibrate', action='store_true', help='重新标定全部回归常数')
    mode.add_argument('--frozen', action='store_true', help='只与已记录的回归常数比较，缺少记录视为未通过')

    p_sweep = sub.add_parser('sweep', help='按配置文件运行扫描并输出 ReportRow CSV')
    p_sweep.add_argument('--config', required=True)
    p_sweep.add_argument('--suite', action='append', choices=sorted(SUITES), default=None)
    p_sweep.add_argument('--frozen', action='store_true', help='只与已记录的回归常数比较')

    sub.add_parser('ui', help='启动桌面界面')
    return parser


def cmd_kernel(args) -> int:
    cfg = KernelEvalConfig(rel_tol=args.rel_tol)
    records = []
    for lam in args.lam:
        xs, ys = np.meshgrid(np.asarray(args.x), np.asarray(args.y), indexing='ij')
        xs, ys = xs.ravel(), ys.ravel()
        off = xs != ys
        values = np.full(xs.shape, np.nan)
        values[off] = riesz_kernel_many(lam, xs[off], ys[off], cfg, strict=False)
        records.extend((float(lam), float(x), float(y), float(v)) for x, y, v in zip(xs, ys, values))
    outputs = []
    if args.output:
        write_kernel_csv(records, args.output)
        outputs.append(str(args.output))
    else:
        print('lambda,x,y,kernel')
        for lam, x, y, value in records:
            print(f"{lam!r},{x!r},{y!r},{value:.10g}")
    write_manifest(args.output_dir, 'kernel', {'lambda': args.lam, 'x': args.x, 'y': args.y},
                   {'kernel_rel_tol': args.rel_tol}, outputs=outputs)
    return EXIT_OK


def cmd_transform(args) -> int:
    f = function_from_id(args.function)
    cfg = TransformConfig(rel_tol=args.rel_tol)
    profile = truncation_profile(args.lam, f, args.x, _ladder(args), args.subsamples, cfg)
    outputs = []
    if args.output:
        profile_to_csv(profile, args.output)
        outputs.append(str(args.output))
    else:
        print('epsilon,value')
        for eps, value in zip(profile.epsilons, profile.values):
            print(f"{eps!r},{value!r}")
    write_manifest(args.output_dir, 'transform',
                   {'lambda': args.lam, 'function': f.name, 'x': args.x, 'ladder': list(_ladder(args).values),
                    'subsamples': args.subsamples},
                   {'rel_tol': cfg.rel_tol, 'tail_tol': cfg.tail_tol}, outputs=outputs)
    return EXIT_OK


def _variation_ladder(profile: TruncationProfile, args) -> Optional[EpsilonLadder]:
    """导入的轮廓默认以全部半径为截断序列"""
    if args.input and not args.epsilons:
        return EpsilonLadder(profile.epsilons)
    return _ladder(args)


def cmd_variation(args) -> int:
    if args.input:
        profile = profile_from_csv(args.input, x=args.x)
    else:
        f = function_from_id(args.function)
        profile = truncation_profile(args.lam, f, args.x, _ladder(args), args.subsamples)
    ladder = _variation_ladder(profile, args)
    results = {
        f"V_{args.rho:g}": rho_variation(profile, args.rho),
        'O': oscillation(profile, ladder),
        'O_prime': oscillation_prime(profile, ladder),
        f"Lambda(beta={args.beta:g})": jump_count(profile, args.beta),
        f"N(alpha={args.alpha:g},gamma={args.gamma:g})": upcross_count(profile, args.alpha, args.gamma),
    }
    for name, value in results.items():
        print(f"{name} = {value:.10g}" if isinstance(value, float) else f"{name} = {value}")
    write_manifest(args.output_dir, 'variation',
                   {'input': args.input, 'function': args.function, 'rho': args.rho, 'beta': args.beta,
                    'alpha': args.alpha, 'gamma': args.gamma, 'ladder': list(ladder.values)})
    return EXIT_OK


def cmd_czd(args) -> int:
    f = function_from_id(args.function)
    decomposition = cz_decompose(args.lam, f, args.eta, max_depth=args.max_depth)
    upper = max(10.0, 2.0 * f.support.upper)
    report = verify_cz(decomposition, f, RadialGrid(1e-4, upper, 4096))
    decomposition = replace(decomposition, report=report)
    text = decomposition.to_json()
    outputs = []
    if args.output:
        path = Path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + '\n', encoding='utf-8')
        outputs.append(str(path))
    else:
        print(text)
    write_manifest(args.output_dir, 'czd', {'lambda': args.lam, 'function': f.name, 'eta': args.eta,
                                            'max_depth': args.max_depth}, outputs=outputs)
    return EXIT_OK if report.passed else EXIT_FAILED


def _run_and_report(config, args, subcommand: str, suites: Optional[Sequence[str]], calibrate: bool) -> int:
    rows = run_suites(config, suites, calibrate=calibrate, store=RegressionStore(), frozen=args.frozen)
    output_dir = Path(args.output_dir)
    csv_path = write_report_csv(rows, output_dir / config.report_csv)
    json_path = write_report_json(rows, output_dir / config.report_json)
    print(format_summary(rows))
    write_manifest(output_dir, subcommand, config.to_dict(),
                   {'rel_tol': config.rel_tol, 'tail_tol': config.tail_tol, 'kernel_rel_tol': config.kernel_rel_tol},
                   seed=config.seed, outputs=[str(csv_path), str(json_path)])
    return EXIT_OK if all(row.passed for row in rows) else EXIT_FAILED


def cmd_verify(args) -> int:
    overrides = {'lambdas': tuple(args.lam) if args.lam else None}
    if args.config:
        config = load_sweep_config(args.config, **overrides)
    else:
        config = bundled_config(args.quick, **overrides)
    logger.info(f"验证配置: λ={config.lambdas}, 工作进程 {worker_count()}")
    return _run_and_report(config, args, 'verify', args.suite, args.calibrate)


def cmd_sweep(args) -> int:
    config = load_sweep_config(args.config)
    return _run_and_report(config, args, 'sweep', args.suite, False)


def cmd_ui(args) -> int:
    import flet as ft

    from src.app import main as app_main
    ft.app(app_main)
    return EXIT_OK


COMMANDS = {
    'kernel': cmd_kernel,
    'transform': cmd_transform,
    'variation': cmd_variation,
    'czd': cmd_czd,
    'verify': cmd_verify,
    'sweep': cmd_sweep,
    'ui': cmd_ui,
}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """解析参数并执行子命令，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"{parser.prog}: 错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    setup_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except BesselRieszError as e:
        logger.error(f"参数无效: {e}")
        print(f"{parser.prog}: 错误: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as e:
        logger.error(f"数值积分未收敛: {e}（估计值 {e.estimate:.6g}, 误差界 {e.error_bound:.3g}）")
        return EXIT_FAILED
    except Exception as e:
        logger.error(f"命令 {args.command} 执行失败: {e}")
        return EXIT_FAILED


def run() -> None:
    sys.exit(cli_main())


if __name__ == '__main__':
    run()
