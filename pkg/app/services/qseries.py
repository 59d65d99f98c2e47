"""
截断 q 级数运算：对齐加法、Cauchy 乘积、分数次幂、θ 导数与常用 q 级数
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import mpmath
import orjson
import sympy

from app.core.config import settings
from app.models.exception import (
    InsufficientPrecision,
    NonUnitLeadingCoefficient,
    OffsetMismatch,
    UnsupportedWeight,
    ZeroSeries,
)
from app.models.payload import QSeriesPayload
from app.models.qseries import (
    RationalLike,
    TruncatedQSeries,
    format_rational,
    parse_rational,
    to_rational,
)

Number = Union[int, Fraction]


def _zero_through(valid_end: Fraction) -> TruncatedQSeries:
    """有效至 valid_end 的零级数"""
    return TruncatedQSeries(Fraction(valid_end), (Fraction(0),), 0)


def _restrict(f: TruncatedQSeries, valid_end: Fraction) -> TruncatedQSeries:
    """把 f 的有效范围收紧到 valid_end"""
    if f.is_zero:
        return _zero_through(min(f.valid_through, valid_end))
    order = math.floor(valid_end - f.offset)
    if order < 0:
        return _zero_through(valid_end)
    return truncate(f, order)


def _is_integral(x: Fraction) -> bool:
    return x.denominator == 1


def _convolve(xs: Sequence[Number], ys: Sequence[Number], n: int) -> List[Number]:
    """前 n+1 项的卷积；整数系数走 int 快路径"""
    out: List[Number] = [0] * (n + 1)
    for i in range(min(n, len(xs) - 1) + 1):
        xi = xs[i]
        if xi == 0:
            continue
        for j in range(min(n - i, len(ys) - 1) + 1):
            out[i + j] += xi * ys[j]
    return out


def _as_numbers(coeffs: Sequence[Fraction]) -> List[Number]:
    if all(c.denominator == 1 for c in coeffs):
        return [c.numerator for c in coeffs]
    return list(coeffs)


# === 基本运算 ===

def truncate(f: TruncatedQSeries, order: int) -> TruncatedQSeries:
    if order >= f.order:
        return f
    if order < 0:
        raise ValueError(f"截断阶数必须非负: {order}")
    return TruncatedQSeries(f.offset, f.coeffs[: order + 1], order)


def qs_add(a: TruncatedQSeries, b: TruncatedQSeries) -> TruncatedQSeries:
    """对齐后逐项相加，结果阶数取两者有效范围的较小者"""
    if a.is_zero:
        return _restrict(b, a.valid_through)
    if b.is_zero:
        return _restrict(a, b.valid_through)

    gap = b.offset - a.offset
    if not _is_integral(gap):
        raise OffsetMismatch(f"首项指数 {a.offset} 与 {b.offset} 相差非整数，无法相加")

    base = min(a.offset, b.offset)
    end = min(a.valid_through, b.valid_through)
    order = int(end - base)
    coeffs = [Fraction(0)] * (order + 1)
    for f in (a, b):
        shift = int(f.offset - base)
        for k, c in enumerate(f.coeffs):
            if shift + k > order:
                break
            coeffs[shift + k] += c
    return TruncatedQSeries(base, tuple(coeffs), order)


def qs_neg(f: TruncatedQSeries) -> TruncatedQSeries:
    return TruncatedQSeries(f.offset, tuple(-c for c in f.coeffs), f.order)


def qs_sub(a: TruncatedQSeries, b: TruncatedQSeries) -> TruncatedQSeries:
    return qs_add(a, qs_neg(b))


def qs_scale(f: TruncatedQSeries, c: RationalLike) -> TruncatedQSeries:
    factor = to_rational(c)
    if factor == 0:
        return _zero_through(f.valid_through)
    return TruncatedQSeries(f.offset, tuple(factor * x for x in f.coeffs), f.order)


def qs_shift(f: TruncatedQSeries, exponent: RationalLike) -> TruncatedQSeries:
    """乘以 q^exponent"""
    a = to_rational(exponent)
    if f.is_zero:
        return _zero_through(f.valid_through + a)
    return TruncatedQSeries(f.offset + a, f.coeffs, f.order)


def qs_mul(a: TruncatedQSeries, b: TruncatedQSeries) -> TruncatedQSeries:
    """Cauchy 乘积：指数相加，阶数取 min"""
    if a.is_zero or b.is_zero:
        zero, other = (a, b) if a.is_zero else (b, a)
        return _zero_through(zero.valid_through + other.offset)
    order = min(a.order, b.order)
    product = _convolve(_as_numbers(a.coeffs), _as_numbers(b.coeffs), order)
    return TruncatedQSeries(a.offset + b.offset, tuple(Fraction(x) for x in product), order)


def qs_product(factors: Sequence[TruncatedQSeries]) -> TruncatedQSeries:
    if not factors:
        raise ValueError("至少需要一个因子")
    result = factors[0]
    for f in factors[1:]:
        result = qs_mul(result, f)
    return result


def qs_pow_rational(f: TruncatedQSeries, alpha: RationalLike) -> TruncatedQSeries:
    """
    f = q^v * u（u 首项为 1）时返回 q^{alpha*v} * u^alpha

    u^alpha 用 J.C.P. Miller 递推：n g_n = sum_{j=1..n} ((alpha+1) j - n) u_j g_{n-j}
    """
    a = to_rational(alpha)
    if f.is_zero:
        raise ZeroSeries("零级数没有分数次幂")
    if f.leading_coefficient != 1:
        raise NonUnitLeadingCoefficient(
            f"首项系数为 {f.leading_coefficient}，分数次幂要求首项系数为 1"
        )

    u = f.coeffs
    n_max = f.order
    g: List[Fraction] = [Fraction(1)] + [Fraction(0)] * n_max
    for n in range(1, n_max + 1):
        acc = Fraction(0)
        for j in range(1, n + 1):
            if u[j] == 0:
                continue
            acc += ((a + 1) * j - n) * u[j] * g[n - j]
        g[n] = acc / n
    return TruncatedQSeries(a * f.offset, tuple(g), n_max)


def theta_derivative(f: TruncatedQSeries) -> TruncatedQSeries:
    """θ = q d/dq：c_k q^{a+k} -> (a+k) c_k q^{a+k}"""
    if f.is_zero:
        return f
    coeffs = tuple((f.offset + k) * c for k, c in enumerate(f.coeffs))
    return TruncatedQSeries(f.offset, coeffs, f.order)


# === 常用 q 级数 ===

def _divide_by_one_minus_q_power(coeffs: List[int], j: int) -> None:
    """原地乘以 1/(1-q^j)"""
    for n in range(j, len(coeffs)):
        coeffs[n] += coeffs[n - j]


def pochhammer_inv(k: int, order: int) -> TruncatedQSeries:
    """1/(q)_k 展开到 q^order：不超过 k 的分拆计数"""
    if k < 0 or order < 0:
        raise ValueError(f"k 与 order 必须非负: k={k}, order={order}")
    coeffs = [1] + [0] * order
    for j in range(1, min(k, order) + 1):
        _divide_by_one_minus_q_power(coeffs, j)
    return TruncatedQSeries(Fraction(0), tuple(Fraction(c) for c in coeffs), order)


def euler_inv_pow(s: int, order: int) -> TruncatedQSeries:
    """1/(q)_∞^s 展开到 q^order"""
    if s < 0 or order < 0:
        raise ValueError(f"s 与 order 必须非负: s={s}, order={order}")
    coeffs = [1] + [0] * order
    for _ in range(s):
        for j in range(1, order + 1):
            _divide_by_one_minus_q_power(coeffs, j)
    return TruncatedQSeries(Fraction(0), tuple(Fraction(c) for c in coeffs), order)


def eisenstein(k: int, order: int) -> TruncatedQSeries:
    """
    E_k = -B_k/k! + 2/(k-1)! * sum n^{k-1} q^n/(1-q^n)

    常数项 E_2 为 -1/12，E_4 为 1/720。
    """
    if k not in (2, 4):
        raise UnsupportedWeight(f"只支持权 2 与 4 的 Eisenstein 级数，收到 k={k}")
    bernoulli = sympy.bernoulli(k)
    constant = -Fraction(int(bernoulli.p), int(bernoulli.q)) / math.factorial(k)
    scale = Fraction(2, math.factorial(k - 1))
    coeffs = [constant] + [
        scale * int(sympy.divisor_sigma(n, k - 1)) for n in range(1, order + 1)
    ]
    return TruncatedQSeries(Fraction(0), tuple(coeffs), order)


def dedekind_eta(order: int) -> TruncatedQSeries:
    """η = q^{1/24} Π_{n≥1} (1 - q^n)"""
    coeffs = [1] + [0] * order
    for n in range(1, order + 1):
        for m in range(order, n - 1, -1):
            coeffs[m] -= coeffs[m - n]
    return TruncatedQSeries(Fraction(1, 24), tuple(Fraction(c) for c in coeffs), order)


def series_from_exponent_counts(
    counts: Mapping[Fraction, Number],
    top: Fraction,
    base: Optional[Fraction] = None,
) -> TruncatedQSeries:
    """
    由 {指数: 系数} 构造级数，有效至绝对指数 top

    base 缺省为最小指数；所有指数必须与 base 相差整数。
    """
    live = {e: c for e, c in counts.items() if c != 0 and e <= top}
    if base is None:
        if not live:
            return _zero_through(top)
        base = min(live)
    span = top - base
    if not _is_integral(span):
        raise OffsetMismatch(f"截断指数 {top} 与起点 {base} 不在同一整数网格上")
    if span < 0:
        return _zero_through(top)
    order = int(span)
    coeffs = [Fraction(0)] * (order + 1)
    for e, c in live.items():
        gap = e - base
        if not _is_integral(gap) or gap < 0:
            raise OffsetMismatch(f"指数 {e} 不在起点 {base} 的整数网格上")
        coeffs[int(gap)] += c
    return TruncatedQSeries(base, tuple(coeffs), order)


# === 比较 ===

def first_difference(
    a: TruncatedQSeries, b: TruncatedQSeries, order: int
) -> Optional[Tuple[Fraction, Fraction]]:
    """
    a - b 在相对阶 order 内第一个非零系数 (指数, 值)；全部相等时返回 None

    相对阶以两者中较低的首项指数为起点。超出任一方有效阶时抛 InsufficientPrecision。
    """
    nonzero = [f for f in (a, b) if not f.is_zero]
    if len(nonzero) == 2 and not _is_integral(a.offset - b.offset):
        base = min(a.offset, b.offset)
        lead = a.leading_coefficient if a.offset <= b.offset else -b.leading_coefficient
        return base, lead
    base = min((f.offset for f in nonzero), default=Fraction(0))
    end = base + order
    for f in (a, b):
        if end > f.valid_through:
            raise InsufficientPrecision(
                f"比较到指数 {end} 超出有效范围 {f.valid_through}"
            )
    for j in range(order + 1):
        e = base + j
        diff = a.coefficient(e) - b.coefficient(e)
        if diff != 0:
            return e, diff
    return None


def equal_to_order(a: TruncatedQSeries, b: TruncatedQSeries, order: int) -> bool:
    return first_difference(a, b, order) is None


def common_order(a: TruncatedQSeries, b: TruncatedQSeries) -> int:
    """两者共同有效范围对应的相对阶（以较低首项指数为起点）"""
    nonzero = [f for f in (a, b) if not f.is_zero]
    base = min((f.offset for f in nonzero), default=Fraction(0))
    return max(0, math.floor(min(a.valid_through, b.valid_through) - base))


def first_nonzero(f: TruncatedQSeries) -> Optional[Tuple[Fraction, Fraction]]:
    """残差级数的第一个非零项"""
    if f.is_zero:
        return None
    return f.offset, f.leading_coefficient


# === 数值求值 ===

def eval_numeric(f: TruncatedQSeries, q0) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """
    在 0 < q0 < 1 处求和 Σ c_k q0^{a+k}，返回 (值, 粗略尾项界)

    尾项界 |c_N| q0^{a+N+1} / (1-q0)。
    """
    with mpmath.workdps(settings.numeric_dps):
        if isinstance(q0, (int, Fraction)):
            q = mpmath.mpf(Fraction(q0).numerator) / Fraction(q0).denominator
        else:
            q = mpmath.mpf(q0)
        if not 0 < q < 1:
            raise ValueError(f"q0 必须在 (0,1) 内: {q0}")
        if f.is_zero:
            return mpmath.mpf(0), mpmath.mpf(0)
        power = mpmath.power(q, mpmath.mpf(f.offset.numerator) / f.offset.denominator)
        total = mpmath.mpf(0)
        for c in f.coeffs:
            if c != 0:
                total += mpmath.mpf(c.numerator) / c.denominator * power
            power *= q
        last = abs(f.coeffs[-1])
        tail = mpmath.mpf(last.numerator) / last.denominator * power / (1 - q)
        return +total, +tail


# === 序列化与渲染 ===

def to_payload(f: TruncatedQSeries) -> QSeriesPayload:
    return QSeriesPayload(
        offset=format_rational(f.offset),
        order=f.order,
        coeffs=[format_rational(c) for c in f.coeffs],
    )


def from_payload(payload: QSeriesPayload) -> TruncatedQSeries:
    return TruncatedQSeries(
        parse_rational(payload.offset),
        tuple(parse_rational(c) for c in payload.coeffs),
        payload.order,
    )


def to_json(f: TruncatedQSeries) -> bytes:
    return orjson.dumps(to_payload(f).model_dump())


def from_json(data: Union[str, bytes]) -> TruncatedQSeries:
    return from_payload(QSeriesPayload.model_validate(orjson.loads(data)))


def _render_term(c: Fraction, k: int) -> str:
    magnitude = abs(c)
    if k == 0:
        return format_rational(magnitude)
    power = "q" if k == 1 else f"q^{k}"
    if magnitude == 1:
        return power
    if magnitude.denominator == 1:
        return f"{magnitude}{power}"
    return f"({format_rational(magnitude)}){power}"


def render_text(f: TruncatedQSeries) -> str:
    """q^(p/q)*(c0 + c1q + c2q^2 + ...)；offset 为 0 时省略前缀"""
    if f.is_zero:
        return "0"
    body = ""
    for k, c in enumerate(f.coeffs):
        if c == 0:
            continue
        term = _render_term(c, k)
        if not body:
            body = f"-{term}" if c < 0 else term
        else:
            body += f" - {term}" if c < 0 else f" + {term}"
    if f.offset == 0:
        return body
    return f"q^({format_rational(f.offset)})*({body})"


