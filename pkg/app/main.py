"""
命令行入口：具名特征标、分次维数、校验套件、组合基枚举与 Deligne 维数表
"""
from __future__ import annotations

import argparse
import asyncio
import sys
from typing import List, Optional, Sequence

import orjson
from loguru import logger
from pydantic import ValidationError
from tabulate import tabulate

from app import __version__
from app.core.config import ExitCodes, exit_code_for, settings
from app.core.logging import setup_logging
from app.models.exception import EngineException
from app.models.lattice import ChargeConfig
from app.models.payload import BasisMonomialPayload, CheckReport, RunConfig
from app.models.qseries import TruncatedQSeries, format_rational, parse_rational

COMMANDS = ("character", "graded-dim", "verify", "enumerate-basis", "deligne")
SUITE_CHOICES = ("identities", "mde", "kz", "modular", "oracle", "dimensions", "all")


# === 参数解析 ===

def _rational_list(text: str) -> List[str]:
    """逗号分隔的有理数列表，逐项校验"""
    items = [x.strip() for x in text.split(",") if x.strip()]
    for x in items:
        parse_rational(x)
    return items


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="e7half",
        description="中间顶点子代数的精确 q 级数与格计算",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="输出 DEBUG 日志")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", "-n", type=int, default=settings.default_order, help=f"截断阶数 (默认: {settings.default_order})")
    common.add_argument("--format", "-f", choices=["text", "json"], default="text", help="输出格式 (默认: text)")

    lattice = argparse.ArgumentParser(add_help=False)
    lattice.add_argument("--lattice", "-l", required=True, help="内置格名 (A1, A2, E7, E8) 或 Gram JSON 路径")
    lattice.add_argument("--r", type=int, default=0, help="R 的大小（前 r 个基向量）")
    lattice.add_argument("--s", type=int, default=0, help="S 的大小（随后 s 个基向量）")
    lattice.add_argument("--shift", type=_rational_list, default=None, help="λ 的坐标，如 1/2,0")
    lattice.add_argument("--budget", type=int, default=settings.oracle_budget, help="枚举预算")

    subparsers = parser.add_subparsers(dest="command", help="可用命令")

    character = subparsers.add_parser("character", parents=[common], help="展开目录中的具名特征标")
    character.add_argument("name", help="特征标名称，如 v-e712")

    graded = subparsers.add_parser("graded-dim", parents=[common, lattice], help="计算 W(R,S;λ) 的分次维数")
    graded.add_argument("--chi-prime", action="store_true", help="输出 χ′ = q^{-<λ,λ>/2} χ")

    verify = subparsers.add_parser("verify", parents=[common], help="执行校验套件")
    verify.add_argument("suite", choices=SUITE_CHOICES, help="套件名")
    verify.add_argument("--workers", "-w", type=int, default=settings.max_workers, help="进程数 (默认: 1 即串行)")
    verify.add_argument("--tol", type=float, default=None, help="S 矩阵数值校验容差")
    verify.add_argument("--budget", type=int, default=settings.oracle_budget, help="组合基枚举预算")

    enum = subparsers.add_parser("enumerate-basis", parents=[lattice], help="列出单个电荷的基单项式 (JSON lines)")
    enum.add_argument("--charge", "-k", type=_int_list, required=True, help="电荷向量，如 1,0")
    enum.add_argument("--excess", "-e", type=int, default=0, help="相对最低权的额外权 (默认: 0)")

    deligne = subparsers.add_parser("deligne", help="Deligne 维数公式与二阶 MDE 参数表")
    deligne.add_argument("--hv", type=parse_rational, default=None, help="对偶 Coxeter 数 h∨；缺省时输出整张表")
    return parser


# === 输出 ===

def _emit_series(series: TruncatedQSeries, fmt: str) -> None:
    from app.services.qseries import render_text, to_json

    if fmt == "json":
        sys.stdout.write(to_json(series).decode() + "\n")
    else:
        print(render_text(series))


def _emit_reports(reports: Sequence[CheckReport], fmt: str) -> None:
    if fmt == "json":
        for r in reports:
            sys.stdout.write(orjson.dumps(r.model_dump()).decode() + "\n")
        return
    rows = []
    for r in reports:
        failure = f"{r.first_failure.exponent}: {r.first_failure.value}" if r.first_failure else ""
        rows.append([r.check, r.status.upper(), failure, r.detail or ""])
    print(tabulate(rows, headers=["检查", "结果", "首个差异", "说明"], tablefmt="simple"))


# === 命令 ===

def _charge_config(args: argparse.Namespace) -> ChargeConfig:
    from app.services.lattice import resolve_lattice

    lat = resolve_lattice(args.lattice)
    shift = [parse_rational(x) for x in args.shift] if args.shift else ()
    return ChargeConfig(lat, args.r, args.s, tuple(shift))


def cmd_character(args: argparse.Namespace) -> int:
    from app.services.characters import builtin_character

    _emit_series(builtin_character(args.name, args.order), args.format)
    return ExitCodes.OK


def cmd_graded_dim(args: argparse.Namespace) -> int:
    from app.services.characters import chi_prime, graded_dimension

    cfg = _charge_config(args)
    series = chi_prime(cfg, args.order) if args.chi_prime else graded_dimension(cfg, args.order)
    _emit_series(series, args.format)
    return ExitCodes.OK


def cmd_verify(args: argparse.Namespace) -> int:
    from app.services.verification import verification_service
    from app.tasks.queue import run_suite

    if args.tol is not None:
        settings.s_check_tol = args.tol
    settings.oracle_budget = args.budget
    names = verification_service.names(args.suite)
    reports = asyncio.run(run_suite(names, args.order, args.workers))
    _emit_reports(reports, args.format)
    failed = [r.check for r in reports if not r.passed]
    if failed:
        logger.warning(f"{len(failed)}/{len(reports)} 项检查失败: {', '.join(failed)}")
        return ExitCodes.VERIFICATION_FAILED
    logger.info(f"全部 {len(reports)} 项检查通过")
    return ExitCodes.OK


def cmd_enumerate_basis(args: argparse.Namespace) -> int:
    from app.services.basis_oracle import enumerate_monomials

    cfg = _charge_config(args)
    count = 0
    for m in enumerate_monomials(cfg, args.charge, args.excess, args.budget):
        payload = BasisMonomialPayload(
            charge=list(m.charge),
            modes=[list(seq.modes) for seq in m.sequences],
            partitions=[list(p) for p in m.heisenberg],
            weight=format_rational(m.weight),
        )
        sys.stdout.write(orjson.dumps(payload.model_dump()).decode() + "\n")
        count += 1
    logger.info(f"电荷 {tuple(args.charge)}: {count} 个基单项式")
    return ExitCodes.OK


def cmd_deligne(args: argparse.Namespace) -> int:
    from app.services.modular import deligne_dim, deligne_dim2, deligne_points_derived, dual_coxeter_to_c

    if args.hv is not None:
        rows = [[
            format_rational(args.hv),
            format_rational(deligne_dim(args.hv)),
            format_rational(deligne_dim2(args.hv)),
            format_rational(dual_coxeter_to_c(args.hv)),
        ]]
        print(tabulate(rows, headers=["h∨", "dim g", "dim g^(2)", "c"], tablefmt="simple"))
        return ExitCodes.OK

    keys = ["mu", "dim", "c", "h", "hv", "c_from_mu", "h_from_mu", "dim_from_hv", "c_from_hv"]
    rows = [[format_rational(row[k]) for k in keys] for row in deligne_points_derived()]
    print(tabulate(rows, headers=["μ", "dim V1", "c", "h", "h∨", "c(μ)", "h(μ)", "dim(h∨)", "c(h∨)"], tablefmt="simple"))
    return ExitCodes.OK


HANDLERS = {
    "character": cmd_character,
    "graded-dim": cmd_graded_dim,
    "verify": cmd_verify,
    "enumerate-basis": cmd_enumerate_basis,
    "deligne": cmd_deligne,
}


def _validate(args: argparse.Namespace) -> None:
    """用 RunConfig 校验数值范围"""
    RunConfig(
        command=args.command,
        order=getattr(args, "order", settings.default_order),
        lattice=getattr(args, "lattice", None),
        r=getattr(args, "r", 0),
        s=getattr(args, "s", 0),
        shift=getattr(args, "shift", None),
        output=getattr(args, "format", "text"),
        budget=getattr(args, "budget", settings.oracle_budget),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging("DEBUG" if args.verbose else settings.log_level)

    if not args.command:
        parser.print_help()
        return ExitCodes.USAGE_ERROR

    try:
        _validate(args)
        return HANDLERS[args.command](args)
    except EngineException as e:
        logger.error(f"{e.error_code}: {e.message}")
        return exit_code_for(e.error_code)
    except (ValidationError, ValueError, KeyError) as e:
        logger.error(f"参数错误: {e}")
        return ExitCodes.USAGE_ERROR


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
