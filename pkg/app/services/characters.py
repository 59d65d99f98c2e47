"""
分次维数引擎、χ′ 归一化、特征标组装与具名特征标目录
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy
from loguru import logger

from app.models.character import CharacterTag
from app.models.exception import DomainViolation, UnknownTag
from app.models.lattice import DOMAIN_NONNEG, ChargeConfig, QuadraticForm, RationalVector
from app.models.qseries import RationalLike, TruncatedQSeries, to_rational
from app.services.lattice import (
    CosetTheta,
    dual_weight,
    enumerate_below,
    enumerate_form,
    gram_builtin,
    omega2_e7,
    qform,
)
from app.services.qseries import (
    equal_to_order,
    euler_inv_pow,
    first_difference,
    pochhammer_inv,
    qs_add,
    qs_mul,
    qs_shift,
    series_from_exponent_counts,
)

RFilter = Callable[[Tuple[int, ...]], bool]


def _to_fraction(x) -> Fraction:
    r = sympy.Rational(x)
    return Fraction(int(r.p), int(r.q))


def _sym(values: Sequence[Fraction]) -> sympy.Matrix:
    return sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in values])


def _form(matrix: sympy.Matrix) -> QuadraticForm:
    return QuadraticForm(
        tuple(tuple(_to_fraction(matrix[i, j]) for j in range(matrix.cols)) for i in range(matrix.rows))
    )


@dataclass(frozen=True)
class _Reduced:
    """
    自由坐标上的配方结果：

        qform(k + l) = (y_S + P y_R)^T A_SS (y_S + P y_R) + y_R^T C y_R + const,  y = k_f + c_f
    """

    center_r: RationalVector
    center_s: RationalVector
    schur_r: QuadraticForm
    form_s: QuadraticForm
    coupling: Tuple[RationalVector, ...]
    const: Fraction


@lru_cache(maxsize=32)
def _reduce(cfg: ChargeConfig) -> _Reduced:
    lat, r, s = cfg.lattice, cfg.r, cfg.s
    n, f = lat.rank, cfg.free
    A = sympy.Matrix(lat.gram)
    l = _sym(cfg.shift)

    if f == 0:
        empty = QuadraticForm(())
        return _Reduced((), (), empty, empty, (), qform(lat, cfg.shift))

    A_ff = A[:f, :f]
    c_f = l[:f, 0]
    if f < n:
        c_f = c_f + A_ff.LUsolve(A[:f, f:] * l[f:, 0])
    const = _to_fraction((l.T * A * l)[0, 0] - (c_f.T * A_ff * c_f)[0, 0])

    A_rr, A_ss = A_ff[:r, :r], A_ff[r:, r:]
    if s and r:
        P = A_ss.LUsolve(A_ff[r:, :r])
        C = A_rr - A_ff[:r, r:] * P
    else:
        P = sympy.zeros(s, r)
        C = A_rr
    coupling = tuple(tuple(_to_fraction(P[i, j]) for j in range(r)) for i in range(s))
    return _Reduced(
        center_r=tuple(_to_fraction(c_f[i, 0]) for i in range(r)),
        center_s=tuple(_to_fraction(c_f[i, 0]) for i in range(r, f)),
        schur_r=_form(C),
        form_s=_form(A_ss),
        coupling=coupling,
        const=const,
    )


def _ground_exponent(cfg: ChargeConfig) -> Fraction:
    return qform(cfg.lattice, cfg.shift) / 2


# === 分次维数 ===

def graded_dimension(
    cfg: ChargeConfig, order: int, r_filter: Optional[RFilter] = None
) -> TruncatedQSeries:
    """
    Σ_k q^{qform(k+l)/2} / ((q)_{k_1}...(q)_{k_r} (q)_∞^s)，所有 x_i = 1

    截断在 q^{qform(l)/2 + order}。R 坐标逐个枚举（Schur 补二次型），
    S 部分按陪集 theta 计数整体求和；r_filter 可按 R 坐标筛选电荷。
    """
    if order < 0:
        raise ValueError(f"order 必须非负: {order}")
    started = time.perf_counter()
    red = _reduce(cfg)
    top = _ground_exponent(cfg) + order
    bound = 2 * top - red.const

    if cfg.r:
        r_vectors = enumerate_form(red.schur_r, red.center_r, bound, (DOMAIN_NONNEG,) * cfg.r)
    else:
        r_vectors = [()]
    theta = CosetTheta(red.form_s, bound) if cfg.s else None

    terms: List[Tuple[Tuple[int, ...], Dict[Fraction, int]]] = []
    for k_r in r_vectors:
        if r_filter is not None and not r_filter(k_r):
            continue
        y_r = [k + c for k, c in zip(k_r, red.center_r)]
        base = red.const + sum(
            (y_r[i] * red.schur_r.gram[i][j] * y_r[j] for i in range(cfg.r) for j in range(cfg.r)),
            Fraction(0),
        )
        if theta is not None:
            center_s = [
                red.center_s[i] + sum((red.coupling[i][j] * y_r[j] for j in range(cfg.r)), Fraction(0))
                for i in range(cfg.s)
            ]
            counts = theta.counts(center_s)
        else:
            counts = {Fraction(0): 1}
        exps = {(norm + base) / 2: mult for norm, mult in counts.items() if norm + base <= 2 * top}
        if exps:
            terms.append((k_r, exps))

    if not terms:
        return series_from_exponent_counts({}, top)
    lowest = min(min(exps) for _, exps in terms)
    total: Optional[TruncatedQSeries] = None
    for k_r, exps in terms:
        piece = series_from_exponent_counts(exps, top, base=lowest)
        width = int(top - lowest)
        for k in k_r:
            if k:
                piece = qs_mul(piece, pochhammer_inv(k, width))
        total = piece if total is None else qs_add(total, piece)
    if cfg.s:
        total = qs_mul(total, euler_inv_pow(cfg.s, int(top - lowest)))

    logger.debug(
        f"{cfg.lattice.name} r={cfg.r} s={cfg.s}: {len(terms)} 个 R 电荷, "
        f"order={order}, 耗时 {time.perf_counter() - started:.2f}s"
    )
    return total


def charge_component(cfg: ChargeConfig, k: Sequence[int], order: int) -> TruncatedQSeries:
    """单个电荷的求和项 q^{qform(k+l)/2} / (Π (q)_{k_i} (q)_∞^s)，相对阶 order"""
    charge = cfg.check_charge(k)
    exponent = qform(cfg.lattice, [x + l for x, l in zip(charge, cfg.shift)]) / 2
    piece = TruncatedQSeries.monomial(exponent, order)
    for x in charge[: cfg.r]:
        if x:
            piece = qs_mul(piece, pochhammer_inv(x, order))
    if cfg.s:
        piece = qs_mul(piece, euler_inv_pow(cfg.s, order))
    return piece


def graded_dimension_by_charges(cfg: ChargeConfig, order: int) -> TruncatedQSeries:
    """逐电荷求和：enumerate_below 列出电荷，再累加 charge_component"""
    top = _ground_exponent(cfg) + order
    charges = enumerate_below(cfg.lattice, cfg.shift, 2 * top, cfg.domains())
    total: Optional[TruncatedQSeries] = None
    for k in charges:
        exponent = qform(cfg.lattice, [x + l for x, l in zip(k, cfg.shift)]) / 2
        piece = charge_component(cfg, k, int(top - exponent))
        total = piece if total is None else qs_add(total, piece)
    if total is None:
        return series_from_exponent_counts({}, top)
    return total


def chi_prime(
    cfg: ChargeConfig, order: int, r_filter: Optional[RFilter] = None
) -> TruncatedQSeries:
    """χ′ = q^{-<λ,λ>/2} χ"""
    return qs_shift(graded_dimension(cfg, order, r_filter), -_ground_exponent(cfg))


def assemble_character(chi_prime_series: TruncatedQSeries, c: RationalLike, h: RationalLike) -> TruncatedQSeries:
    """乘以 q^{h - c/24}"""
    shift = to_rational(h) - to_rational(c) / 24
    if chi_prime_series.offset.denominator != 1:
        logger.warning(f"χ′ 首项指数 {chi_prime_series.offset} 非整数，组装结果可能不在预期网格上")
    return qs_shift(chi_prime_series, shift)


def hard_hexagon_sum(linear: int, shift: int, start: int, order: int) -> TruncatedQSeries:
    """Σ_{k≥start} q^{k²+linear·k} / (q)_{2k+shift}"""
    coeffs = [Fraction(0)] * (order + 1)
    k = start
    while k * k + linear * k <= order:
        e = k * k + linear * k
        if e >= 0 and 2 * k + shift >= 0:
            tail = pochhammer_inv(2 * k + shift, order - e)
            for j, c in enumerate(tail.coeffs):
                coeffs[e + j] += c
        k += 1
    return TruncatedQSeries(Fraction(0), tuple(coeffs), order)


# === 具名特征标目录 ===

def _e8_intermediate(shift: Sequence[RationalLike] = ()) -> ChargeConfig:
    return ChargeConfig(gram_builtin("E8"), 1, 7, tuple(shift))


def _alpha1() -> Tuple[int, ...]:
    return (1, 0, 0, 0, 0, 0, 0, 0)


class CharacterCatalogue:
    """具名特征标目录（纯函数 + 进程内缓存）"""

    def __init__(self) -> None:
        a1 = gram_builtin("A1")
        e7 = gram_builtin("E7")
        e8 = gram_builtin("E8")
        minus_w2 = tuple(-x for x in omega2_e7())
        self._lattice_configs: Dict[str, ChargeConfig] = {
            "rr-vac": ChargeConfig(a1, 1, 0),
            "rr-mod": ChargeConfig(a1, 1, 0, dual_weight(a1, 1)),
            "v-e7": ChargeConfig(e7, 0, 7),
            "v-e7-w2": ChargeConfig(e7, 0, 7, minus_w2),
            "v-e8": ChargeConfig(e8, 0, 8),
            "v-e712": _e8_intermediate(),
            "v-e712-a1": _e8_intermediate(_alpha1()),
        }
        # (linear, shift, start, q 前因子)
        self._hard_hexagon: Dict[str, Tuple[int, int, int, Fraction]] = {
            "vir-m35-m120": (0, 0, 0, Fraction(-1, 40)),
            "vir-m35-15": (1, 1, 0, Fraction(9, 40)),
            "vir-m35-34": (0, -1, 1, Fraction(-9, 40)),
            "vir-m35-0": (1, 0, 0, Fraction(1, 40)),
        }
        c_vir = Fraction(-3, 5)
        self.tags: Dict[str, CharacterTag] = {
            tag.name: tag
            for tag in [
                CharacterTag("rr-vac", Fraction(2, 5), Fraction(0), "q^{-1/60} Σ q^{k²}/(q)_k", "rogers-ramanujan"),
                CharacterTag("rr-mod", Fraction(2, 5), Fraction(1, 5), "q^{11/60} Σ q^{k²+k}/(q)_k", "rogers-ramanujan"),
                CharacterTag("vir-m35-0", c_vir, Fraction(0), "q^{1/40} Σ q^{k²+k}/(q)_{2k}", "virasoro"),
                CharacterTag("vir-m35-34", c_vir, Fraction(3, 4), "q^{-9/40} Σ_{k≥1} q^{k²}/(q)_{2k-1}", "virasoro"),
                CharacterTag("vir-m35-15", c_vir, Fraction(1, 5), "q^{9/40} Σ q^{k²+k}/(q)_{2k+1}", "virasoro"),
                CharacterTag("vir-m35-m120", c_vir, Fraction(-1, 20), "q^{-1/40} Σ q^{k²}/(q)_{2k}", "virasoro"),
                CharacterTag("v-e7", Fraction(7), Fraction(0), "E7 格和 / (q)_∞^7", "e7"),
                CharacterTag("v-e7-w2", Fraction(7), Fraction(3, 4), "E7 - ω2 陪集和 / (q)_∞^7", "e7"),
                CharacterTag("v-e8", Fraction(8), Fraction(0), "E8 格和 / (q)_∞^8", "e8"),
                CharacterTag("v-e712", Fraction(38, 5), Fraction(0), "E8, R={α1}, S={α2..α8}", "e7-half"),
                CharacterTag("v-e712-a1", Fraction(38, 5), Fraction(4, 5), "E8, R={α1}, S={α2..α8}, λ=α1", "e7-half"),
            ]
        }

    @property
    def names(self) -> List[str]:
        return list(self.tags)

    def tag(self, name: str) -> CharacterTag:
        if name not in self.tags:
            raise UnknownTag(f"未知的特征标: {name}，可选: {', '.join(self.tags)}")
        return self.tags[name]

    def config(self, name: str) -> ChargeConfig:
        if name not in self._lattice_configs:
            raise UnknownTag(f"{name} 不是格构造的特征标")
        return self._lattice_configs[name]

    def build(self, name: str, order: int) -> TruncatedQSeries:
        tag = self.tag(name)
        if name in self._hard_hexagon:
            linear, shift, start, prefactor = self._hard_hexagon[name]
            # 首项在 q^{start²+linear·start}，多展开这么多阶使规范形后仍为相对阶 order
            lead = start * start + linear * start
            return qs_shift(hard_hexagon_sum(linear, shift, start, order + lead), prefactor)
        return assemble_character(chi_prime(self.config(name), order), tag.c, tag.h)


character_catalogue = CharacterCatalogue()


@lru_cache(maxsize=None)
def builtin_character(name: str, order: int) -> TruncatedQSeries:
    """按名称取目录中的特征标，展开到相对阶 order"""
    started = time.perf_counter()
    series = character_catalogue.build(name, order)
    logger.debug(f"特征标 {name} (order={order}) 构造完成，耗时 {time.perf_counter() - started:.2f}s")
    return series


def lowest_weight_dimension(name: str) -> int:
    """最低权空间维数：χ′ 在指数 0 处的系数"""
    tag = character_catalogue.tag(name)
    series = builtin_character(name, 1)
    value = series.coefficient(tag.leading_exponent)
    if value.denominator != 1:
        raise DomainViolation(f"{name} 的最低权系数 {value} 不是整数")
    return int(value)


# === 乘积恒等式与奇偶拆分 ===

def product_sum(terms: Sequence[Tuple[TruncatedQSeries, TruncatedQSeries]]) -> TruncatedQSeries:
    total: Optional[TruncatedQSeries] = None
    for a, b in terms:
        piece = qs_mul(a, b)
        total = piece if total is None else qs_add(total, piece)
    if total is None:
        raise ValueError("至少需要一对乘积项")
    return total


def verify_product_identity(
    lhs: TruncatedQSeries,
    terms: Sequence[Tuple[TruncatedQSeries, TruncatedQSeries]],
    order: int,
) -> bool:
    """lhs 是否与 Σ a_i b_i 在相对阶 order 内精确相等"""
    return equal_to_order(lhs, product_sum(terms), order)


def product_identity_failure(
    lhs: TruncatedQSeries,
    terms: Sequence[Tuple[TruncatedQSeries, TruncatedQSeries]],
    order: int,
) -> Optional[Tuple[Fraction, Fraction]]:
    return first_difference(lhs, product_sum(terms), order)


# 模块 -> (目录名, α1 系数奇偶对应的乘积项)
PRODUCT_IDENTITIES: Dict[str, Tuple[str, List[Tuple[str, str]]]] = {
    "vacuum": ("v-e712", [("v-e7", "vir-m35-m120"), ("v-e7-w2", "vir-m35-15")]),
    "alpha1": ("v-e712-a1", [("v-e7", "vir-m35-34"), ("v-e7-w2", "vir-m35-0")]),
}


def product_identity_terms(module: str, order: int) -> Tuple[TruncatedQSeries, List[Tuple[TruncatedQSeries, TruncatedQSeries]]]:
    if module not in PRODUCT_IDENTITIES:
        raise UnknownTag(f"未知的模: {module}，可选: {', '.join(PRODUCT_IDENTITIES)}")
    lhs_name, pairs = PRODUCT_IDENTITIES[module]
    lhs = builtin_character(lhs_name, order)
    terms = [(builtin_character(a, order), builtin_character(b, order)) for a, b in pairs]
    return lhs, terms


def parity_split(module: str, order: int) -> Tuple[TruncatedQSeries, TruncatedQSeries]:
    """
    E8 求和按电荷的 α1 系数奇偶拆成两部分（均已乘上 q^{h-c/24}）

    返回 (偶部分, 奇部分)。真空模的偶部分对应 Z(V_E7)·Z(L(-3/5,-1/20))，
    α1 模的偶部分对应 Z(V_E7)·Z(L(-3/5,3/4))。
    """
    lhs_name = PRODUCT_IDENTITIES.get(module, (None,))[0]
    if lhs_name is None:
        raise UnknownTag(f"未知的模: {module}，可选: {', '.join(PRODUCT_IDENTITIES)}")
    tag = character_catalogue.tag(lhs_name)
    cfg = character_catalogue.config(lhs_name)
    lead = int(cfg.shift[0])
    parts = []
    for parity in (0, 1):
        series = chi_prime(cfg, order, lambda k_r, p=parity: (k_r[0] + lead) % 2 == p)
        parts.append(assemble_character(series, tag.c, tag.h))
    return parts[0], parts[1]


def parity_split_failure(module: str, order: int) -> Optional[Tuple[str, Tuple[Fraction, Fraction]]]:
    """
    奇偶两部分分别与对应乘积比较；返回第一个不一致 (部分名, (指数, 差值))

    每部分从自身首项起比较 order 阶，超出有效范围时抛 InsufficientPrecision。
    奇部分的首项可比整体高一阶，故拆分多展开一阶。
    """
    even, odd = parity_split(module, order + 1)
    _, terms = product_identity_terms(module, order)
    for label, part, (a, b) in (("even", even, terms[0]), ("odd", odd, terms[1])):
        product = qs_mul(a, b)
        diff = first_difference(part, product, order)
        if diff is not None:
            return label, diff
    return None
