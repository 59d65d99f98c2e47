"""
截断 q 级数数据模型
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union

RationalLike = Union[int, str, Fraction]


def to_rational(value: RationalLike) -> Fraction:
    """把 int / "p/q" 字符串 / Fraction 统一为 Fraction；拒绝浮点"""
    if isinstance(value, bool):
        raise TypeError("布尔值不是有理数")
    if isinstance(value, float):
        raise TypeError(f"浮点数 {value!r} 不能作为精确有理数使用")
    if isinstance(value, str):
        return parse_rational(value)
    return Fraction(value)


def parse_rational(text: str) -> Fraction:
    """解析 "p/q" 或整数字符串，不接受小数写法"""
    cleaned = text.strip()
    if not cleaned or "." in cleaned or "e" in cleaned.lower():
        raise ValueError(f"无效的有理数字符串: {text!r}")
    return Fraction(cleaned)


def format_rational(value: Fraction) -> str:
    """Fraction -> "p/q"（整数不带分母）"""
    return str(Fraction(value))


@dataclass(frozen=True)
class TruncatedQSeries:
    """
    q^offset * (c_0 + c_1 q + ... + c_N q^N)，在 q^{offset+N} 处截断

    - offset: 首项指数（精确有理数）
    - coeffs: c_0..c_N，精确有理数
    - order: N，展开在 q^{offset+N}（含）之前有效

    规范形：c_0 != 0，或全零级数。全零级数的 offset 取使 offset + order
    恰为已知为零的最高指数的值，有效范围不因网格取整而丢失。
    """

    offset: Fraction
    coeffs: Tuple[Fraction, ...]
    order: int

    def __post_init__(self):
        offset = to_rational(self.offset)
        coeffs = tuple(to_rational(c) for c in self.coeffs)
        order = int(self.order)
        if order < 0:
            raise ValueError(f"order 必须非负: {order}")
        if len(coeffs) != order + 1:
            raise ValueError(f"系数个数 {len(coeffs)} 与 order={order} 不符")

        lead = next((i for i, c in enumerate(coeffs) if c != 0), None)
        if lead is None:
            # 全零级数：valid_through 原样保留
            valid_end = offset + order
            order = max(0, math.floor(valid_end))
            offset = valid_end - order
            coeffs = (Fraction(0),) * (order + 1)
        elif lead > 0:
            offset += lead
            order -= lead
            coeffs = coeffs[lead:]

        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "order", order)

    # === 构造 ===

    @classmethod
    def from_coefficients(
        cls, coeffs: Iterable[RationalLike], offset: RationalLike = 0
    ) -> "TruncatedQSeries":
        values = tuple(to_rational(c) for c in coeffs)
        if not values:
            raise ValueError("至少需要一个系数")
        return cls(to_rational(offset), values, len(values) - 1)

    @classmethod
    def monomial(
        cls, exponent: RationalLike, order: int, coefficient: RationalLike = 1
    ) -> "TruncatedQSeries":
        values = (to_rational(coefficient),) + (Fraction(0),) * order
        return cls(to_rational(exponent), values, order)

    @classmethod
    def one(cls, order: int) -> "TruncatedQSeries":
        return cls.monomial(0, order)

    @classmethod
    def zero(cls, order: int) -> "TruncatedQSeries":
        return cls(Fraction(0), (Fraction(0),) * (order + 1), order)

    # === 查询 ===

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def valid_through(self) -> Fraction:
        """展开有效的最高指数（含）"""
        return self.offset + self.order

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coeffs[0]

    def exponents(self) -> Sequence[Fraction]:
        return [self.offset + k for k in range(self.order + 1)]

    def coefficient(self, exponent: RationalLike) -> Fraction:
        """q^exponent 的系数；不在网格上或低于首项时为 0"""
        e = to_rational(exponent)
        if e > self.valid_through:
            from app.models.exception import InsufficientPrecision

            raise InsufficientPrecision(f"指数 {e} 超出有效阶 {self.valid_through}")
        k = e - self.offset
        if k.denominator != 1 or k < 0:
            return Fraction(0)
        return self.coeffs[int(k)]

    def integer_coefficients(self) -> Tuple[int, ...]:
        """系数全为整数时返回 int 元组（维数级数常用）"""
        if any(c.denominator != 1 for c in self.coeffs):
            raise ValueError("存在非整数系数")
        return tuple(int(c) for c in self.coeffs)

    # === 运算符 ===

    def __add__(self, other: "TruncatedQSeries") -> "TruncatedQSeries":
        from app.services.qseries import qs_add

        return qs_add(self, other)

    def __sub__(self, other: "TruncatedQSeries") -> "TruncatedQSeries":
        from app.services.qseries import qs_sub

        return qs_sub(self, other)

    def __neg__(self) -> "TruncatedQSeries":
        from app.services.qseries import qs_neg

        return qs_neg(self)

    def __mul__(self, other):
        from app.services.qseries import qs_mul, qs_scale

        if isinstance(other, TruncatedQSeries):
            return qs_mul(self, other)
        return qs_scale(self, other)

    __rmul__ = __mul__

    def __str__(self) -> str:
        from app.services.qseries import render_text

        return render_text(self)
