"""
特征标目录、组合基单项式与模校验相关的数据模型
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import mpmath

from app.models.qseries import RationalLike, to_rational


@dataclass(frozen=True)
class CharacterTag:
    """
    目录中的具名特征标

    - name: 命令行名称（如 v-e712）
    - c / h: 中心荷与共形权，组装后的首项指数为 h - c/24
    - recipe: 构造方式的简述
    """

    name: str
    c: Fraction
    h: Fraction
    recipe: str
    family: str = ""

    @property
    def leading_exponent(self) -> Fraction:
        return self.h - self.c / 24


@dataclass(frozen=True)
class ModeSequence:
    """
    M_i 中的一条模序列 (m_k, ..., m_1)

    m_1 <= -1 - Σ_{l<i} k_l <ρ_i,ρ_l> - <ρ_i,λ>，且 m_{j+1} <= m_j - <ρ_i,ρ_i>。
    """

    root_index: int
    modes: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.modes)


@dataclass(frozen=True)
class BasisMonomial:
    """一个电荷向量 + 每个 ρ_i 的模序列 + s 个 Heisenberg 分拆"""

    charge: Tuple[int, ...]
    sequences: Tuple[ModeSequence, ...]
    heisenberg: Tuple[Tuple[int, ...], ...]
    weight: Fraction


@dataclass(frozen=True)
class MDESpec:
    """
    f'' + 2 E_2 f' + γ E_4 f = 0（θ = q d/dq，Eisenstein 级数取本项目归一化）

    γ 的符号作为参数保留：显示实例取 γ = -180μ，一般式写作 +180μ。
    """

    e4_coefficient: Fraction
    mu: Optional[Fraction] = None

    @classmethod
    def displayed(cls, mu: RationalLike) -> "MDESpec":
        m = to_rational(mu)
        return cls(-180 * m, m)

    @classmethod
    def from_equation(cls, mu: RationalLike) -> "MDESpec":
        m = to_rational(mu)
        return cls(180 * m, m)


@dataclass(frozen=True)
class DelignePoint:
    """二阶 MDE 有理解的一行数据：μ、dim V_1、中心荷 c、共形权 h、对偶 Coxeter 数 h∨"""

    mu: Fraction
    dim: int
    c: Fraction
    h: Fraction
    hv: Fraction


@dataclass(frozen=True)
class TransformMatrices:
    """
    一族特征标的 S 矩阵（高精度小数）与 T 相位（e^{2πi a} 的 a）
    """

    name: str
    labels: Tuple[str, ...]
    s_matrix: Tuple[Tuple[mpmath.mpf, ...], ...]
    t_phases: Tuple[Fraction, ...] = field(default=())

    def __post_init__(self):
        size = len(self.labels)
        if len(self.s_matrix) != size or any(len(row) != size for row in self.s_matrix):
            raise ValueError(f"{self.name}: S 矩阵维数与特征标个数 {size} 不符")
        if self.t_phases and len(self.t_phases) != size:
            raise ValueError(f"{self.name}: T 相位个数与特征标个数 {size} 不符")
        for a in self.t_phases:
            if not -1 < a <= 1:
                raise ValueError(f"{self.name}: T 相位 {a} 不在 (-1, 1] 内")

    def rows(self) -> List[List[mpmath.mpf]]:
        return [list(row) for row in self.s_matrix]
