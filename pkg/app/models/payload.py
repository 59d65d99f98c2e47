"""
JSON 载荷模型（输入校验与输出整形）
"""
from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.models.qseries import parse_rational


def _check_rational(value: str) -> str:
    parse_rational(value)
    return value


class QSeriesPayload(BaseModel):
    """截断级数的 JSON 形式：{"offset": "p/q", "order": N, "coeffs": ["p/q", ...]}"""

    offset: str
    order: int = Field(..., ge=0)
    coeffs: List[str]

    @field_validator("offset")
    @classmethod
    def validate_offset(cls, v: str) -> str:
        return _check_rational(v)

    @field_validator("coeffs")
    @classmethod
    def validate_coeffs(cls, v: List[str]) -> List[str]:
        return [_check_rational(c) for c in v]

    @model_validator(mode="after")
    def validate_length(self) -> "QSeriesPayload":
        if len(self.coeffs) != self.order + 1:
            raise ValueError(f"coeffs 长度应为 order+1={self.order + 1}，实际 {len(self.coeffs)}")
        return self


class GramPayload(BaseModel):
    """Gram 矩阵文件：{"rank": n, "gram": [[...]], "labels": [...]}"""

    rank: int = Field(..., ge=1)
    gram: List[List[int]]
    labels: Optional[List[str]] = None

    @model_validator(mode="after")
    def validate_shape(self) -> "GramPayload":
        if len(self.gram) != self.rank or any(len(row) != self.rank for row in self.gram):
            raise ValueError(f"gram 必须是 {self.rank}x{self.rank} 矩阵")
        if self.labels is not None and len(self.labels) != self.rank:
            raise ValueError("labels 数量与 rank 不一致")
        return self


class FirstFailure(BaseModel):
    exponent: str
    value: str


class CheckReport(BaseModel):
    """单项校验结果"""

    check: str
    status: Literal["pass", "fail"]
    first_failure: Optional[FirstFailure] = None
    detail: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


class BasisMonomialPayload(BaseModel):
    """enumerate-basis 输出的一行"""

    charge: List[int]
    modes: List[List[int]]
    partitions: List[List[int]]
    weight: str


class RunConfig(BaseModel):
    """命令行一次运行的参数"""

    command: Literal["character", "graded-dim", "verify", "enumerate-basis", "deligne"]
    order: int = Field(default=20, ge=0)
    lattice: Optional[str] = None
    r: int = Field(default=0, ge=0)
    s: int = Field(default=0, ge=0)
    shift: Optional[List[str]] = None
    output: Literal["text", "json"] = "text"
    budget: int = Field(default=10_000_000, ge=1)

    @field_validator("shift")
    @classmethod
    def validate_shift(cls, v: Optional[List[str]]) -> Optional[List[str]]:
        if v is None:
            return v
        return [_check_rational(x) for x in v]
