"""
格、二次型与电荷配置数据模型
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import sympy

from app.models.exception import DimensionMismatch, DomainViolation, NotPositiveDefinite
from app.models.qseries import RationalLike, to_rational

# 坐标取值域：整数 / 非负整数 / 固定值
DOMAIN_Z = "Z"
DOMAIN_NONNEG = "N"
Domain = Union[str, int]

RationalVector = Tuple[Fraction, ...]


def as_vector(values: Sequence[RationalLike]) -> RationalVector:
    return tuple(to_rational(v) for v in values)


@dataclass(frozen=True)
class GramLattice:
    """
    秩 n 的正定整格，以 Gram 矩阵 A = (<β_i, β_j>) 给出

    构造时检查对称性、整数性，并用顺序主子式检查正定性。
    """

    gram: Tuple[Tuple[int, ...], ...]
    labels: Tuple[str, ...] = ()
    name: str = "custom"

    def __post_init__(self):
        gram = tuple(tuple(row) for row in self.gram)
        n = len(gram)
        if n == 0:
            raise DimensionMismatch("Gram 矩阵不能为空")
        if any(len(row) != n for row in gram):
            raise DimensionMismatch(f"Gram 矩阵必须是方阵，收到 {n} 行")
        for row in gram:
            for x in row:
                if isinstance(x, bool) or int(x) != x:
                    raise ValueError(f"Gram 矩阵元素必须是整数: {x!r}")
        gram = tuple(tuple(int(x) for x in row) for row in gram)
        for i in range(n):
            for j in range(i + 1, n):
                if gram[i][j] != gram[j][i]:
                    raise ValueError(f"Gram 矩阵不对称: ({i},{j})")

        matrix = sympy.Matrix(gram)
        for m in range(1, n + 1):
            if matrix[:m, :m].det() <= 0:
                raise NotPositiveDefinite(f"{self.name}: 第 {m} 个顺序主子式非正")

        labels = tuple(self.labels) or tuple(f"b{i + 1}" for i in range(n))
        if len(labels) != n:
            raise DimensionMismatch(f"labels 数量 {len(labels)} 与秩 {n} 不一致")

        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "labels", labels)

    @property
    def rank(self) -> int:
        return len(self.gram)

    def index_of(self, label: str) -> int:
        """标签 -> 1 起始的坐标下标"""
        try:
            return self.labels.index(label) + 1
        except ValueError:
            raise KeyError(f"{self.name} 中没有基向量 {label}")

    def determinant(self) -> int:
        return int(sympy.Matrix(self.gram).det())

    def form(self) -> "QuadraticForm":
        return QuadraticForm(tuple(tuple(Fraction(x) for x in row) for row in self.gram))


@dataclass(frozen=True)
class QuadraticForm:
    """有理系数正定二次型（Gram 矩阵的 Schur 补也用它表示）"""

    gram: Tuple[Tuple[Fraction, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.gram)


@dataclass(frozen=True)
class ChargeConfig:
    """
    基的划分 (R, S) 与平移 λ

    前 r 个基向量属于 R（系数取非负整数），随后 s 个属于 S（系数取整数），
    其余坐标固定为 0；shift 为 λ 在基 B 下的有理坐标 l。
    """

    lattice: GramLattice
    r: int
    s: int
    shift: RationalVector = field(default=())

    def __post_init__(self):
        n = self.lattice.rank
        if self.r < 0 or self.s < 0:
            raise DomainViolation(f"r, s 必须非负: r={self.r}, s={self.s}")
        if self.r + self.s > n:
            raise DomainViolation(f"r + s = {self.r + self.s} 超过格的秩 {n}")
        shift = as_vector(self.shift) if self.shift else (Fraction(0),) * n
        if len(shift) != n:
            raise DimensionMismatch(f"平移向量长度 {len(shift)} 与秩 {n} 不一致")
        object.__setattr__(self, "shift", shift)

    @property
    def free(self) -> int:
        return self.r + self.s

    def domains(self) -> Tuple[Domain, ...]:
        n = self.lattice.rank
        return (DOMAIN_NONNEG,) * self.r + (DOMAIN_Z,) * self.s + (0,) * (n - self.free)

    def check_charge(self, k: Sequence[int]) -> Tuple[int, ...]:
        """校验电荷向量满足 R/S/固定坐标的取值域"""
        if len(k) != self.lattice.rank:
            raise DimensionMismatch(f"电荷向量长度 {len(k)} 与秩 {self.lattice.rank} 不一致")
        charge = tuple(int(x) for x in k)
        for i, (x, dom) in enumerate(zip(charge, self.domains())):
            if dom == DOMAIN_NONNEG and x < 0:
                raise DomainViolation(f"R 坐标 {i + 1} 取负值 {x}")
            if isinstance(dom, int) and x != dom:
                raise DomainViolation(f"坐标 {i + 1} 固定为 {dom}，收到 {x}")
        return charge

    def with_shift(self, shift: Optional[Sequence[RationalLike]]) -> "ChargeConfig":
        return ChargeConfig(self.lattice, self.r, self.s, as_vector(shift or ()))
