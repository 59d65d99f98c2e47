"""
组合基计数：直接枚举 M_i 模序列与 Heisenberg 分拆，独立复核分次维数公式
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from loguru import logger

from app.core.config import settings
from app.models.character import BasisMonomial, ModeSequence
from app.models.exception import DomainViolation, ScaleExceeded
from app.models.lattice import ChargeConfig
from app.models.qseries import TruncatedQSeries
from app.services.characters import graded_dimension
from app.services.lattice import enumerate_below, inner, qform
from app.services.qseries import common_order, first_difference, series_from_exponent_counts

Tally = Dict[Fraction, int]


class OracleBudget:
    """枚举预算：访问的单项式（序列/分拆）总数上限"""

    def __init__(self, limit: Optional[int] = None) -> None:
        self.limit = limit if limit is not None else settings.oracle_budget
        self.used = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise ScaleExceeded(f"枚举预算 {self.limit} 已耗尽")


def _shifted_lambda(cfg: ChargeConfig, k: Sequence[int]) -> Tuple[Fraction, ...]:
    """λ + δ：δ 取电荷的 S 部分"""
    r, f = cfg.r, cfg.free
    return tuple(
        l + (k[j] if r <= j < f else 0) for j, l in enumerate(cfg.shift)
    )


def _mode_bound(cfg: ChargeConfig, k: Sequence[int], i: int, lam: Sequence[Fraction]) -> int:
    """m_1 的上界 -1 - Σ_{l<i} k_l <ρ_i,ρ_l> - <ρ_i, λ>（i 从 1 开始）"""
    gram = cfg.lattice.gram
    unit = [0] * cfg.lattice.rank
    unit[i - 1] = 1
    pairing = inner(cfg.lattice, unit, lam)
    if pairing.denominator != 1:
        raise DomainViolation(f"<ρ_{i}, λ+δ> = {pairing} 不是整数，模序列无定义")
    return -1 - sum(k[l] * gram[i - 1][l] for l in range(i - 1)) - int(pairing)


def enumerate_Mi(
    cfg: ChargeConfig,
    k: Sequence[int],
    i: int,
    weight_bound: Fraction,
    budget: Optional[OracleBudget] = None,
) -> List[ModeSequence]:
    """
    M_i 中权贡献 Σ_j (<ρ_i,ρ_i>/2 - m_j - 1) 不超过 weight_bound 的全部序列

    m_1 <= 上界，m_{j+1} <= m_j - <ρ_i,ρ_i>；贡献随 m 递减而增大，故可提前剪枝。
    """
    charge = cfg.check_charge(k)
    if not 1 <= i <= cfg.r:
        raise DomainViolation(f"下标 {i} 不在 R 的范围 1..{cfg.r}")
    length = charge[i - 1]
    gap = cfg.lattice.gram[i - 1][i - 1]
    half = Fraction(gap, 2)
    top = _mode_bound(cfg, charge, i, _shifted_lambda(cfg, charge))
    bound = Fraction(weight_bound)

    def cost(m: int) -> Fraction:
        return half - m - 1

    def rest(m: int, remaining: int) -> Fraction:
        return sum((cost(m - u * gap) for u in range(1, remaining + 1)), Fraction(0))

    found: List[ModeSequence] = []
    modes: List[int] = []

    def extend(limit: int, acc: Fraction) -> None:
        if len(modes) == length:
            if budget is not None:
                budget.tick()
            found.append(ModeSequence(i, tuple(reversed(modes))))
            return
        remaining = length - len(modes) - 1
        m = limit
        while acc + cost(m) + rest(m, remaining) <= bound:
            modes.append(m)
            extend(m - gap, acc + cost(m))
            modes.pop()
            m -= 1

    extend(top, Fraction(0))
    return found


def sequence_weight(cfg: ChargeConfig, seq: ModeSequence) -> Fraction:
    half = Fraction(cfg.lattice.gram[seq.root_index - 1][seq.root_index - 1], 2)
    return sum((half - m - 1 for m in seq.modes), Fraction(0))


def _partitions(n: int, largest: int) -> Iterator[Tuple[int, ...]]:
    """n 的分拆（部分不超过 largest），非递减顺序输出"""
    if n == 0:
        yield ()
        return
    for part in range(min(n, largest), 0, -1):
        for rest in _partitions(n - part, part):
            yield rest + (part,)


def enumerate_heisenberg(
    s: int, bound: int, budget: Optional[OracleBudget] = None
) -> List[Tuple[Tuple[int, ...], ...]]:
    """s 色分拆组（每个分拆部分为正、非递减），总大小 <= bound"""
    if s == 0 or bound < 0:
        return [()] if bound >= 0 else []
    by_size = [list(_partitions(n, n)) for n in range(bound + 1)]
    found: List[Tuple[Tuple[int, ...], ...]] = []

    def extend(prefix: Tuple[Tuple[int, ...], ...], remaining: int) -> None:
        if len(prefix) == s:
            if budget is not None:
                budget.tick()
            found.append(prefix)
            return
        for n in range(remaining + 1):
            for part in by_size[n]:
                extend(prefix + (part,), remaining - n)

    extend((), bound)
    return found


def _tally(weights: Sequence[Fraction]) -> Tally:
    out: Tally = defaultdict(int)
    for w in weights:
        out[w] += 1
    return out


def _convolve(a: Tally, b: Tally, cap: Fraction) -> Tally:
    out: Tally = defaultdict(int)
    for wa, ca in a.items():
        for wb, cb in b.items():
            if wa + wb <= cap:
                out[wa + wb] += ca * cb
    return out


def _tight_cost(cfg: ChargeConfig, k: Sequence[int], i: int) -> Fraction:
    """M_i 中最紧序列 m_{j+1} = m_j - <ρ_i,ρ_i> 的权贡献"""
    if k[i - 1] == 0:
        return Fraction(0)
    gap = cfg.lattice.gram[i - 1][i - 1]
    top = _mode_bound(cfg, k, i, _shifted_lambda(cfg, k))
    return sum((Fraction(gap, 2) - (top - u * gap) - 1 for u in range(k[i - 1])), Fraction(0))


def oracle_charge_counts(
    cfg: ChargeConfig,
    k: Sequence[int],
    slack: Fraction,
    heisenberg: Tally,
    budget: Optional[OracleBudget] = None,
) -> Tally:
    """
    单个电荷：{总权: 基单项式个数}，总权不超过最低权 + slack

    总权 = <λ+δ,λ+δ>/2 + 各 M_i 的贡献 + Heisenberg 分拆大小。
    后面的根的最紧贡献可以为负，第 i 步的中间上界取 cap - Σ_{j>i} 最紧贡献，
    只有与 Heisenberg 部分的最后一次卷积用 cap 本身。
    """
    charge = cfg.check_charge(k)
    lam = _shifted_lambda(cfg, charge)
    ground = qform(cfg.lattice, lam) / 2
    minima = [_tight_cost(cfg, charge, i) for i in range(1, cfg.r + 1)]
    floor_weight = ground + sum(minima, Fraction(0))
    cap = floor_weight + slack

    combined: Tally = {ground: 1}
    partial_cap = ground + slack
    for i, low in zip(range(1, cfg.r + 1), minima):
        partial_cap += low
        seqs = enumerate_Mi(cfg, charge, i, low + slack, budget)
        combined = _convolve(combined, _tally([sequence_weight(cfg, q) for q in seqs]), partial_cap)
    return _convolve(combined, heisenberg, cap)


def oracle_graded_dimension(
    cfg: ChargeConfig, order: int, budget: Optional[int] = None
) -> TruncatedQSeries:
    """
    直接数基单项式得到的分次维数，约定与 graded_dimension 相同

    截断在 q^{qform(l)/2 + order}；超出枚举预算时抛 ScaleExceeded。
    """
    meter = OracleBudget(budget)
    top = qform(cfg.lattice, cfg.shift) / 2 + order
    charges = enumerate_below(cfg.lattice, cfg.shift, 2 * top, cfg.domains())
    meter.tick(len(charges))
    if not charges:
        return series_from_exponent_counts({}, top)

    grounds = {
        k: qform(cfg.lattice, [x + l for x, l in zip(k, cfg.shift)]) / 2 for k in charges
    }
    span = math.floor(top - min(grounds.values()))
    heis_sizes = [
        Fraction(sum(sum(p) for p in tup)) for tup in enumerate_heisenberg(cfg.s, span, meter)
    ]
    heisenberg = _tally(heis_sizes)

    counts: Tally = defaultdict(int)
    for k in charges:
        lam = _shifted_lambda(cfg, k)
        floor_weight = qform(cfg.lattice, lam) / 2 + sum(
            (_tight_cost(cfg, k, i) for i in range(1, cfg.r + 1)), Fraction(0)
        )
        slack = top - floor_weight
        if slack < 0:
            continue
        for w, c in oracle_charge_counts(cfg, k, slack, heisenberg, meter).items():
            counts[w] += c

    logger.debug(
        f"{cfg.lattice.name} r={cfg.r} s={cfg.s}: 枚举 {len(charges)} 个电荷，"
        f"访问 {meter.used} 个单项式"
    )
    return series_from_exponent_counts(counts, top)


def oracle_failure(
    cfg: ChargeConfig, order: int, budget: Optional[int] = None
) -> Optional[Tuple[Fraction, Fraction]]:
    """组合计数与公式的第一个差异 (指数, 计数 - 公式)"""
    oracle = oracle_graded_dimension(cfg, order, budget)
    formula = graded_dimension(cfg, order)
    return first_difference(oracle, formula, common_order(oracle, formula))


def oracle_matches_formula(cfg: ChargeConfig, order: int, budget: Optional[int] = None) -> bool:
    return oracle_failure(cfg, order, budget) is None


def enumerate_monomials(
    cfg: ChargeConfig, k: Sequence[int], excess: int, budget: Optional[int] = None
) -> Iterator[BasisMonomial]:
    """单个电荷下权不超过（最低权 + excess）的全部基单项式"""
    meter = OracleBudget(budget)
    charge = cfg.check_charge(k)
    lam = _shifted_lambda(cfg, charge)
    ground = qform(cfg.lattice, lam) / 2
    minima = [_tight_cost(cfg, charge, i) for i in range(1, cfg.r + 1)]
    cap = ground + sum(minima, Fraction(0)) + excess

    per_root = [
        enumerate_Mi(cfg, charge, i, low + excess, meter)
        for i, low in zip(range(1, cfg.r + 1), minima)
    ]
    partitions = enumerate_heisenberg(cfg.s, excess, meter)
    for seqs in itertools.product(*per_root):
        seq_weight = sum((sequence_weight(cfg, q) for q in seqs), Fraction(0))
        for parts in partitions:
            weight = ground + seq_weight + sum(sum(p) for p in parts)
            if weight <= cap:
                yield BasisMonomial(charge, tuple(seqs), tuple(parts), weight)
