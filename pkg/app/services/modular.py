"""
模校验层：MDE / Kaneko-Zagier 残差、T 相位、数值 S 矩阵、Rogers-Ramanujan 多项式分解与 Deligne 维数公式
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import sympy
from loguru import logger

from app.core.config import settings
from app.models.character import DelignePoint, MDESpec, TransformMatrices
from app.models.exception import (
    InconsistentSystem,
    InsufficientPrecision,
    NoAdmissibleMonomials,
    NonSquareDiscriminant,
    PoleAtInput,
    UnknownTag,
    ZeroSeries,
)
from app.models.qseries import RationalLike, TruncatedQSeries, to_rational
from app.services.characters import builtin_character
from app.services.qseries import (
    common_order,
    dedekind_eta,
    eisenstein,
    eval_numeric,
    first_difference,
    qs_add,
    qs_mul,
    qs_pow_rational,
    qs_scale,
    theta_derivative,
    truncate,
)


def _window(f: TruncatedQSeries, order: int) -> TruncatedQSeries:
    if order < 0:
        raise ValueError(f"order 必须非负: {order}")
    if f.is_zero:
        return f
    if order > f.order:
        raise InsufficientPrecision(f"级数只展开到相对阶 {f.order}，请求 {order}")
    return truncate(f, order)


# === 微分方程残差 ===

def mde_residual(f: TruncatedQSeries, spec: MDESpec, order: int) -> TruncatedQSeries:
    """
    θ²f + 2 E_2 θf + γ E_4 f（E_k 取本项目归一化，常数项 -1/12 与 1/720）

    返回零级数即 f 在相对阶 order 内满足方程。
    """
    g = _window(f, order)
    if g.is_zero:
        return g
    n = g.order
    df = theta_derivative(g)
    ddf = theta_derivative(df)
    e2_term = qs_scale(qs_mul(eisenstein(2, n), df), 2)
    e4_term = qs_scale(qs_mul(eisenstein(4, n), g), spec.e4_coefficient)
    return qs_add(qs_add(ddf, e2_term), e4_term)


def standard_e2(order: int) -> TruncatedQSeries:
    """E_2 = 1 - 24 Σ σ_1(n) q^n"""
    return qs_scale(eisenstein(2, order), -12)


def kz_residual(g: TruncatedQSeries, k: RationalLike, order: int) -> TruncatedQSeries:
    """
    g'' - (k+1)/6 E_2 g' + k(k+1)/12 E_2' g，' = θ，E_2 为标准归一化

    指标方程的根为 0 与 (k+1)/6。
    """
    weight = to_rational(k)
    h = _window(g, order)
    if h.is_zero:
        return h
    n = h.order
    e2 = standard_e2(n)
    dh = theta_derivative(h)
    ddh = theta_derivative(dh)
    middle = qs_scale(qs_mul(e2, dh), -(weight + 1) / 6)
    last = qs_scale(qs_mul(theta_derivative(e2), h), weight * (weight + 1) / 12)
    return qs_add(qs_add(ddh, middle), last)


def eta_twist(f: TruncatedQSeries, k: RationalLike) -> TruncatedQSeries:
    """η^{2k} f"""
    if f.is_zero:
        return f
    eta = qs_pow_rational(dedekind_eta(f.order), 2 * to_rational(k))
    return qs_mul(eta, f)


# === T 相位 ===

def t_phase(f: TruncatedQSeries) -> Fraction:
    """τ -> τ+1 下的相位指数 a（e^{2πia}），取 (-1/2, 1/2] 内的代表元"""
    if f.is_zero:
        raise ZeroSeries("零级数没有 T 相位")
    a = f.offset - math.floor(f.offset)
    return a - 1 if a > Fraction(1, 2) else a


def same_phase(a: RationalLike, b: RationalLike) -> bool:
    return (to_rational(a) - to_rational(b)).denominator == 1


# === S 矩阵 ===

def _sines() -> Tuple[mpmath.mpf, mpmath.mpf]:
    return mpmath.sin(mpmath.pi / 5), mpmath.sin(2 * mpmath.pi / 5)


def e7_transform() -> TransformMatrices:
    with mpmath.workdps(settings.numeric_dps):
        r = 1 / mpmath.sqrt(2)
        return TransformMatrices(
            "e7",
            ("v-e7", "v-e7-w2"),
            ((r, r), (r, -r)),
            (Fraction(-7, 24), Fraction(11, 24)),
        )


def virasoro_transform() -> TransformMatrices:
    """c = -3/5 极小模型；(3,3) 元取 -sin(2π/5)，使 S² = I"""
    with mpmath.workdps(settings.numeric_dps):
        s1, s2 = _sines()
        r = mpmath.sqrt(mpmath.mpf(2) / 5)
        rows = (
            (s2, -s2, -s1, s1),
            (-s2, -s2, s1, s1),
            (-s1, s1, -s2, s2),
            (s1, s1, s2, s2),
        )
        return TransformMatrices(
            "virasoro",
            ("vir-m35-0", "vir-m35-34", "vir-m35-15", "vir-m35-m120"),
            tuple(tuple(r * x for x in row) for row in rows),
            (Fraction(1, 40), Fraction(31, 40), Fraction(9, 40), Fraction(-1, 40)),
        )


def e7_half_transform() -> TransformMatrices:
    with mpmath.workdps(settings.numeric_dps):
        s1, s2 = _sines()
        r = 2 / mpmath.sqrt(5)
        return TransformMatrices(
            "e7-half",
            ("v-e712", "v-e712-a1"),
            ((r * s2, r * s1), (r * s1, -r * s2)),
            (Fraction(-19, 60), Fraction(29, 60)),
        )


TRANSFORM_FAMILIES = {
    "e7": e7_transform,
    "virasoro": virasoro_transform,
    "e7-half": e7_half_transform,
}


def transform_family(name: str) -> TransformMatrices:
    if name not in TRANSFORM_FAMILIES:
        raise UnknownTag(f"未知的特征标族: {name}，可选: {', '.join(TRANSFORM_FAMILIES)}")
    return TRANSFORM_FAMILIES[name]()


def s_deviation(
    family: Sequence[TruncatedQSeries],
    s_matrix: Sequence[Sequence],
    t: RationalLike,
) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """
    τ0 = it 时 max_i |Z_i(-1/τ0) - Σ_j S_ij Z_j(τ0)|，以及所用展开的最大尾项界

    q = e^{-2πt}，q̂ = e^{-2π/t}；t > 0。
    """
    if len(s_matrix) != len(family) or any(len(row) != len(family) for row in s_matrix):
        raise ValueError(f"S 矩阵维数与特征标个数 {len(family)} 不符")
    with mpmath.workdps(settings.numeric_dps):
        tt = mpmath.mpf(to_rational(t).numerator) / to_rational(t).denominator
        if tt <= 0:
            raise ValueError(f"t 必须为正: {t}")
        q = mpmath.exp(-2 * mpmath.pi * tt)
        q_hat = mpmath.exp(-2 * mpmath.pi / tt)
        at_tau = [eval_numeric(f, q) for f in family]
        at_inverse = [eval_numeric(f, q_hat) for f in family]
        tail = max(max(x[1] for x in at_tau), max(x[1] for x in at_inverse))
        worst = mpmath.mpf(0)
        for i, row in enumerate(s_matrix):
            image = mpmath.fsum(row[j] * at_tau[j][0] for j in range(len(family)))
            worst = max(worst, abs(at_inverse[i][0] - image))
        return +worst, +tail


def s_check_numeric(
    family: Sequence[TruncatedQSeries],
    s_matrix: Sequence[Sequence],
    t: RationalLike = 1,
    tol: Optional[float] = None,
) -> bool:
    """‖Z(-1/τ0) - S·Z(τ0)‖∞ < tol；尾项界超过 tol 时抛 InsufficientPrecision"""
    limit = mpmath.mpf(settings.s_check_tol if tol is None else tol)
    deviation, tail = s_deviation(family, s_matrix, t)
    if tail >= limit:
        raise InsufficientPrecision(f"尾项界 {mpmath.nstr(tail, 5)} 不小于容差 {limit}")
    logger.debug(f"S 校验 t={t}: 偏差 {mpmath.nstr(deviation, 5)}，尾项界 {mpmath.nstr(tail, 5)}")
    return deviation < limit


# === Rogers-Ramanujan 多项式分解 ===

def _power(f: TruncatedQSeries, n: int) -> TruncatedQSeries:
    result = TruncatedQSeries.one(f.order)
    base = f
    while n:
        if n & 1:
            result = qs_mul(result, base)
        n >>= 1
        if n:
            base = qs_mul(base, base)
    return result


def rr_generators(order: int) -> Tuple[TruncatedQSeries, TruncatedQSeries]:
    """p_1 = Z(rr-vac)，p_2 = Z(rr-mod)"""
    return builtin_character("rr-vac", order), builtin_character("rr-mod", order)


def _admissible(f: TruncatedQSeries, degree: int, p1: TruncatedQSeries, p2: TruncatedQSeries) -> List[int]:
    return [
        i
        for i in range(degree, -1, -1)
        if (i * p1.offset + (degree - i) * p2.offset - f.offset).denominator == 1
    ]


def rr_decompose(
    f: TruncatedQSeries,
    degree: int,
    order: Optional[int] = None,
    generators: Optional[Tuple[TruncatedQSeries, TruncatedQSeries]] = None,
) -> List[Tuple[int, Fraction]]:
    """
    f = Σ c_i p_1^i p_2^{degree-i}，只用首项指数与 f 同余的单项式；返回 [(i, c_i)]（i 降序）

    在公共有效范围内解精确线性方程组（sympy Gauss-Jordan），列满秩保证唯一性，
    最后逐项复核重构结果。
    """
    if f.is_zero:
        raise ZeroSeries("零级数无需分解")
    n = f.order if order is None else order
    f = _window(f, n)
    p1, p2 = generators if generators is not None else rr_generators(n)
    admissible = _admissible(f, degree, p1, p2)
    if not admissible:
        raise NoAdmissibleMonomials(f"首项指数 {f.offset} 无法由 {degree} 次单项式得到")

    monomials = [qs_mul(_power(p1, i), _power(p2, degree - i)) for i in admissible]
    base = min([f.offset] + [m.offset for m in monomials])
    window = math.floor(min([f.valid_through] + [m.valid_through for m in monomials]) - base)
    if window < 0:
        raise InsufficientPrecision("公共有效范围为空")
    exponents = [base + j for j in range(window + 1)]

    def rational(x: Fraction) -> sympy.Rational:
        return sympy.Rational(x.numerator, x.denominator)

    A = sympy.Matrix([[rational(m.coefficient(e)) for m in monomials] for e in exponents])
    b = sympy.Matrix([rational(f.coefficient(e)) for e in exponents])
    if A.rank() < len(monomials):
        raise InsufficientPrecision(
            f"相对阶 {window} 内 {len(monomials)} 个单项式线性相关，请提高阶数"
        )

    try:
        solution, params = A.gauss_jordan_solve(b)
    except ValueError as exc:
        failure = _first_inconsistent_row(A, b, exponents)
        raise InconsistentSystem(
            f"目标级数不在 {degree} 次单项式张成的空间内", first_failure=failure, original_exception=exc
        )
    coeffs = [Fraction(int(sympy.Rational(x).p), int(sympy.Rational(x).q)) for x in solution]

    rebuilt: Optional[TruncatedQSeries] = None
    for c, m in zip(coeffs, monomials):
        if c == 0:
            continue
        term = qs_scale(m, c)
        rebuilt = term if rebuilt is None else qs_add(rebuilt, term)
    if rebuilt is not None:
        diff = first_difference(f, rebuilt, common_order(f, rebuilt))
        if diff is not None:
            raise InconsistentSystem("重构结果与目标级数不一致", first_failure=diff)

    result = list(zip(admissible, coeffs))
    logger.debug(f"度数 {degree} 分解（相对阶 {window}）: {result}")
    return result


def _first_inconsistent_row(
    A: sympy.Matrix, b: sympy.Matrix, exponents: Sequence[Fraction]
) -> Optional[Tuple[Fraction, Fraction]]:
    """最短的不相容前缀行组：返回 (指数, 该行在前缀解下的残差)"""
    previous: Optional[sympy.Matrix] = None
    for j in range(len(exponents)):
        try:
            sol, params = A[: j + 1, :].gauss_jordan_solve(b[: j + 1, 0])
            previous = sol.subs({p: 0 for p in params})
        except ValueError:
            if previous is None:
                value = b[j, 0]
            else:
                value = b[j, 0] - (A[j, :] * previous)[0, 0]
            r = sympy.Rational(value)
            return exponents[j], Fraction(int(r.p), int(r.q))
    return None


def rr_expand(
    coefficients: Sequence[Tuple[int, RationalLike]],
    degree: int,
    order: int,
) -> TruncatedQSeries:
    """Σ c_i p_1^i p_2^{degree-i}，用于复核分解结果"""
    p1, p2 = rr_generators(order)
    total: Optional[TruncatedQSeries] = None
    for i, c in coefficients:
        term = qs_scale(qs_mul(_power(p1, i), _power(p2, degree - i)), c)
        total = term if total is None else qs_add(total, term)
    if total is None:
        raise ValueError("系数列表为空")
    return total


# === Deligne 维数公式与参数换算 ===

def deligne_dim(hv: RationalLike) -> Fraction:
    """dim g = 2(5h∨ - 6)(h∨ + 1)/(h∨ + 6)"""
    x = to_rational(hv)
    if x == -6:
        raise PoleAtInput("h∨ = -6 是 dim g 公式的极点")
    return 2 * (5 * x - 6) * (x + 1) / (x + 6)


def deligne_dim2(hv: RationalLike) -> Fraction:
    """5h∨²(2h∨ + 3)(5h∨ - 6)/((h∨ + 6)(h∨ + 12))"""
    x = to_rational(hv)
    if x in (-6, -12):
        raise PoleAtInput(f"h∨ = {x} 是 dim g^(2) 公式的极点")
    return 5 * x * x * (2 * x + 3) * (5 * x - 6) / ((x + 6) * (x + 12))


def _rational_sqrt(x: Fraction) -> Optional[Fraction]:
    if x < 0:
        return None
    num, den = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if num * num != x.numerator or den * den != x.denominator:
        return None
    return Fraction(num, den)


def mu_to_c(mu: RationalLike) -> Fraction:
    """x = √(1 + 36μ) = 1 + c/2，取正根"""
    m = to_rational(mu)
    root = _rational_sqrt(1 + 36 * m)
    if root is None:
        raise NonSquareDiscriminant(f"1 + 36μ = {1 + 36 * m} 不是有理数的平方")
    return 2 * (root - 1)


def mu_to_h(mu: RationalLike) -> Fraction:
    return (mu_to_c(mu) + 2) / 12


def mu_to_kz_weight(mu: RationalLike) -> Fraction:
    """μ = k(k+2)/36 的非负根 k = c/2"""
    return mu_to_c(mu) / 2


def dual_coxeter_to_c(hv: RationalLike) -> Fraction:
    x = to_rational(hv)
    if x == -1:
        raise PoleAtInput("h∨ = -1 时 c = dim g/(h∨+1) 无定义")
    return deligne_dim(x) / (x + 1)


def _row(mu: str, dim: int, c: str, h: str, hv: str) -> DelignePoint:
    return DelignePoint(Fraction(mu), dim, Fraction(c), Fraction(h), Fraction(hv))


# (μ, dim V_1, c, h, h∨)
DELIGNE_POINTS: Tuple[DelignePoint, ...] = (
    _row("11/900", 1, "2/5", "1/5", "3/2"),
    _row("5/144", 3, "1", "1/4", "2"),
    _row("1/12", 8, "2", "1/3", "3"),
    _row("119/900", 14, "14/5", "2/5", "4"),
    _row("2/9", 28, "4", "1/2", "6"),
    _row("299/900", 52, "26/5", "3/5", "9"),
    _row("5/12", 78, "6", "2/3", "12"),
    _row("77/144", 133, "7", "3/4", "18"),
    _row("551/900", 190, "38/5", "4/5", "24"),
    _row("2/3", 248, "8", "5/6", "30"),
)


def deligne_points_derived() -> List[Dict[str, Fraction]]:
    """每个有理点及由 μ、h∨ 推出的各列"""
    rows = []
    for p in DELIGNE_POINTS:
        rows.append(
            {
                "mu": p.mu,
                "dim": Fraction(p.dim),
                "c": p.c,
                "h": p.h,
                "hv": p.hv,
                "c_from_mu": mu_to_c(p.mu),
                "h_from_mu": mu_to_h(p.mu),
                "dim_from_hv": deligne_dim(p.hv),
                "c_from_hv": dual_coxeter_to_c(p.hv),
            }
        )
    return rows
