#!/usr/bin/env python3
"""
系数对照表查看器
用于并排查看具名特征标的系数、乘积恒等式两侧以及 Rogers-Ramanujan 分解
"""

import argparse
import sys
from pathlib import Path
from typing import List, Sequence

from tabulate import tabulate

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from app.core.logging import setup_logging  # noqa: E402
from app.models.exception import EngineException  # noqa: E402
from app.models.qseries import TruncatedQSeries, format_rational  # noqa: E402
from app.services.characters import (  # noqa: E402
    PRODUCT_IDENTITIES,
    builtin_character,
    character_catalogue,
    product_identity_terms,
    product_sum,
)
from app.services.modular import rr_decompose  # noqa: E402


class CoefficientTableViewer:
    """系数对照表查看器"""

    def __init__(self, order: int, tablefmt: str = "grid"):
        if order < 0:
            raise ValueError(f"order 必须非负: {order}")
        self.order = order
        self.tablefmt = tablefmt

    def _column(self, series: TruncatedQSeries) -> List[str]:
        return [format_rational(series.coefficient(series.offset + j)) for j in range(self.order + 1)]

    def show_characters(self, names: Sequence[str]):
        """按相对阶并排列出若干特征标的系数"""
        print("\n=== 特征标系数 ===")
        columns = []
        headers = ["阶"]
        for name in names:
            series = builtin_character(name, self.order)
            columns.append(self._column(series))
            headers.append(f"{name}\nq^({format_rational(series.offset)})")
        rows = [[j] + [col[j] for col in columns] for j in range(self.order + 1)]
        print(tabulate(rows, headers=headers, tablefmt=self.tablefmt))

    def show_identity(self, module: str):
        """左侧特征标与 Σ 乘积逐项对照"""
        print(f"\n=== 乘积恒等式: {module} ===")
        lhs, terms = product_identity_terms(module, self.order)
        rhs = product_sum(terms)
        rows = []
        mismatches = 0
        for j in range(self.order + 1):
            e = lhs.offset + j
            left, right = lhs.coefficient(e), rhs.coefficient(e)
            if left != right:
                mismatches += 1
            rows.append([format_rational(e), format_rational(left), format_rational(right), "" if left == right else "✗"])
        print(tabulate(rows, headers=["指数", "左侧", "乘积和", ""], tablefmt=self.tablefmt))
        if mismatches:
            print(f"❌ {mismatches} 个系数不一致")
        else:
            print("✅ 全部一致")

    def show_decomposition(self, name: str, degree: int):
        """Z = Σ c_i p_1^i p_2^{degree-i}"""
        print(f"\n=== {name} 的 {degree} 次分解 ===")
        found = rr_decompose(builtin_character(name, self.order), degree, self.order)
        rows = [[i, degree - i, format_rational(c)] for i, c in found]
        print(tabulate(rows, headers=["p1 次数", "p2 次数", "系数"], tablefmt=self.tablefmt))


def main():
    """主函数"""
    parser = argparse.ArgumentParser(description="系数对照表查看器")
    parser.add_argument("--order", "-n", type=int, default=6, help="截断阶数 (默认: 6)")
    parser.add_argument("--tablefmt", default="grid", help="tabulate 表格样式 (默认: grid)")
    parser.add_argument("--log-level", default="WARNING", help="日志级别 (默认: WARNING)")

    subparsers = parser.add_subparsers(dest="command", help="可用命令")

    # characters命令 - 并排显示特征标
    characters_parser = subparsers.add_parser("characters", help="并排显示特征标系数")
    characters_parser.add_argument(
        "names", nargs="+", choices=character_catalogue.names, help="特征标名称"
    )

    # identity命令 - 乘积恒等式对照
    identity_parser = subparsers.add_parser("identity", help="乘积恒等式两侧逐项对照")
    identity_parser.add_argument("module", choices=sorted(PRODUCT_IDENTITIES), help="模")

    # decompose命令 - Rogers-Ramanujan 分解
    decompose_parser = subparsers.add_parser("decompose", help="Rogers-Ramanujan 多项式分解")
    decompose_parser.add_argument("name", help="特征标名称")
    decompose_parser.add_argument("--degree", "-d", type=int, default=19, help="齐次次数 (默认: 19)")

    args = parser.parse_args()
    setup_logging(args.log_level)

    if not args.command:
        parser.print_help()
        return

    try:
        viewer = CoefficientTableViewer(args.order, args.tablefmt)

        if args.command == "characters":
            viewer.show_characters(args.names)
        elif args.command == "identity":
            viewer.show_identity(args.module)
        elif args.command == "decompose":
            viewer.show_decomposition(args.name, args.degree)

    except EngineException as e:
        print(f"❌ {e.error_code}: {e.message}")
        sys.exit(1)
    except ValueError as e:
        print(f"❌ 参数错误: {e}")
        sys.exit(2)
    except KeyboardInterrupt:
        print("\n⚠️  操作已取消")
        sys.exit(1)


if __name__ == "__main__":
    main()
