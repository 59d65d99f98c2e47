"""
应用配置管理
"""
from typing import Dict

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """应用设置"""

    # 截断阶数配置
    default_order: int = Field(default=20, alias="DEFAULT_ORDER")

    # 组合基枚举配置
    oracle_budget: int = Field(default=10_000_000, alias="ORACLE_BUDGET")
    oracle_order_a1: int = Field(default=12, alias="ORACLE_ORDER_A1")
    oracle_order_a2: int = Field(default=8, alias="ORACLE_ORDER_A2")
    oracle_order_e7: int = Field(default=6, alias="ORACLE_ORDER_E7")
    oracle_order_e8: int = Field(default=4, alias="ORACLE_ORDER_E8")

    # 数值校验配置（S 矩阵）
    numeric_dps: int = Field(default=40, alias="NUMERIC_DPS")
    s_check_order: int = Field(default=120, alias="S_CHECK_ORDER")
    s_check_tol: float = Field(default=1e-6, alias="S_CHECK_TOL")

    # 并发配置
    max_workers: int = Field(default=1, alias="MAX_WORKERS")

    # 日志配置
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")

    class Config:
        env_file = ".env"
        case_sensitive = False


# 全局设置实例
settings = Settings()


# 错误码定义
class ErrorCodes:
    """错误码定义"""

    # 通用错误
    INTERNAL_ERROR = "INTERNAL_ERROR"
    INVALID_REQUEST = "INVALID_REQUEST"
    NOT_FOUND = "NOT_FOUND"

    # 级数运算错误
    OFFSET_MISMATCH = "OFFSET_MISMATCH"
    NON_UNIT_LEADING = "NON_UNIT_LEADING"
    ZERO_SERIES = "ZERO_SERIES"
    UNSUPPORTED_WEIGHT = "UNSUPPORTED_WEIGHT"

    # 格与电荷配置错误
    UNKNOWN_LATTICE = "UNKNOWN_LATTICE"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    NOT_POSITIVE_DEFINITE = "NOT_POSITIVE_DEFINITE"
    DOMAIN_VIOLATION = "DOMAIN_VIOLATION"
    UNKNOWN_TAG = "UNKNOWN_TAG"

    # 资源错误
    SCALE_EXCEEDED = "SCALE_EXCEEDED"

    # 校验层错误
    NO_ADMISSIBLE_MONOMIALS = "NO_ADMISSIBLE_MONOMIALS"
    INCONSISTENT_SYSTEM = "INCONSISTENT_SYSTEM"
    INSUFFICIENT_PRECISION = "INSUFFICIENT_PRECISION"
    POLE_AT_INPUT = "POLE_AT_INPUT"
    NON_SQUARE_DISCRIMINANT = "NON_SQUARE_DISCRIMINANT"
    VERIFICATION_FAILED = "VERIFICATION_FAILED"


# 命令行退出码
class ExitCodes:
    """命令行退出码（稳定契约）"""

    OK = 0
    VERIFICATION_FAILED = 1
    USAGE_ERROR = 2
    RESOURCE_ERROR = 3


EXIT_CODES: Dict[str, int] = {
    ErrorCodes.INVALID_REQUEST: ExitCodes.USAGE_ERROR,
    ErrorCodes.NOT_FOUND: ExitCodes.USAGE_ERROR,
    ErrorCodes.UNKNOWN_LATTICE: ExitCodes.USAGE_ERROR,
    ErrorCodes.UNKNOWN_TAG: ExitCodes.USAGE_ERROR,
    ErrorCodes.DIMENSION_MISMATCH: ExitCodes.USAGE_ERROR,
    ErrorCodes.DOMAIN_VIOLATION: ExitCodes.USAGE_ERROR,
    ErrorCodes.UNSUPPORTED_WEIGHT: ExitCodes.USAGE_ERROR,
    ErrorCodes.POLE_AT_INPUT: ExitCodes.USAGE_ERROR,
    ErrorCodes.NON_SQUARE_DISCRIMINANT: ExitCodes.USAGE_ERROR,
    ErrorCodes.VERIFICATION_FAILED: ExitCodes.VERIFICATION_FAILED,
    ErrorCodes.INCONSISTENT_SYSTEM: ExitCodes.VERIFICATION_FAILED,
    ErrorCodes.NOT_POSITIVE_DEFINITE: ExitCodes.RESOURCE_ERROR,
    ErrorCodes.SCALE_EXCEEDED: ExitCodes.RESOURCE_ERROR,
    ErrorCodes.INSUFFICIENT_PRECISION: ExitCodes.RESOURCE_ERROR,
}


def exit_code_for(error_code: str) -> int:
    """错误码 -> 退出码，未登记的错误码按资源/构造错误处理"""
    return EXIT_CODES.get(error_code, ExitCodes.RESOURCE_ERROR)
