from typing import Optional as _Optional

from app.core.config import ErrorCodes


class EngineException(Exception):
    """
    计算引擎统一异常封装

    Attributes:
        message: 人类可读的错误信息
        error_code: 业务错误码，参考 `app.core.config.ErrorCodes`
        original_exception: 原始异常（可选）
    """

    default_code: str = ErrorCodes.INTERNAL_ERROR

    def __init__(
        self,
        message: str,
        error_code: _Optional[str] = None,
        original_exception: _Optional[Exception] = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.default_code
        self.original_exception = original_exception


# === 级数运算 ===

class OffsetMismatch(EngineException):
    """两个级数的首项指数相差非整数，无法对齐"""

    default_code = ErrorCodes.OFFSET_MISMATCH


class NonUnitLeadingCoefficient(EngineException):
    """分数次幂要求首项系数为 1"""

    default_code = ErrorCodes.NON_UNIT_LEADING


class ZeroSeries(EngineException):
    default_code = ErrorCodes.ZERO_SERIES


class UnsupportedWeight(EngineException):
    default_code = ErrorCodes.UNSUPPORTED_WEIGHT


# === 格与电荷配置 ===

class UnknownLattice(EngineException):
    default_code = ErrorCodes.UNKNOWN_LATTICE


class DimensionMismatch(EngineException):
    default_code = ErrorCodes.DIMENSION_MISMATCH


class NotPositiveDefinite(EngineException):
    """Gram 矩阵非正定（顺序主子式检查失败）"""

    default_code = ErrorCodes.NOT_POSITIVE_DEFINITE


class DomainViolation(EngineException):
    """电荷向量或平移向量不满足坐标取值域"""

    default_code = ErrorCodes.DOMAIN_VIOLATION


class UnknownTag(EngineException):
    default_code = ErrorCodes.UNKNOWN_TAG


# === 组合基枚举 ===

class ScaleExceeded(EngineException):
    """枚举预算耗尽"""

    default_code = ErrorCodes.SCALE_EXCEEDED


# === 校验层 ===

class NoAdmissibleMonomials(EngineException):
    default_code = ErrorCodes.NO_ADMISSIBLE_MONOMIALS


class InconsistentSystem(EngineException):
    """
    目标级数不在单项式张成的空间内

    Attributes:
        first_failure: (指数, 残差系数)，第一个不匹配的位置
    """

    default_code = ErrorCodes.INCONSISTENT_SYSTEM

    def __init__(self, message: str, first_failure=None, **kwargs) -> None:
        super().__init__(message, **kwargs)
        self.first_failure = first_failure


class InsufficientPrecision(EngineException):
    default_code = ErrorCodes.INSUFFICIENT_PRECISION


class PoleAtInput(EngineException):
    default_code = ErrorCodes.POLE_AT_INPUT


class NonSquareDiscriminant(EngineException):
    default_code = ErrorCodes.NON_SQUARE_DISCRIMINANT
