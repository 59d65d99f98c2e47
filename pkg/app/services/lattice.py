"""
格服务：内置 Gram 矩阵、二次型求值、对偶权与有界格点枚举
"""
from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import orjson
import sympy
from loguru import logger

from app.models.exception import DimensionMismatch, NotPositiveDefinite, UnknownLattice
from app.models.lattice import (
    DOMAIN_NONNEG,
    DOMAIN_Z,
    Domain,
    GramLattice,
    QuadraticForm,
    RationalVector,
    as_vector,
)
from app.models.payload import GramPayload
from app.models.qseries import RationalLike

# E8 Dynkin 图：α1-α2-...-α7 链，外加 α5-α8
_E8_EDGES = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (5, 8)]
E8_LABELS = tuple(f"a{i}" for i in range(1, 9))


def _cartan_from_edges(size: int, edges: Sequence[Tuple[int, int]]) -> List[List[int]]:
    gram = [[2 if i == j else 0 for j in range(size)] for i in range(size)]
    for a, b in edges:
        gram[a - 1][b - 1] = gram[b - 1][a - 1] = -1
    return gram


def _e8_gram() -> List[List[int]]:
    return _cartan_from_edges(8, _E8_EDGES)


def _builtin_table() -> Dict[str, Tuple[List[List[int]], Tuple[str, ...]]]:
    e8 = _e8_gram()
    e7 = [row[1:] for row in e8[1:]]
    return {
        "A1": ([[2]], ("a",)),
        "A2": ([[2, -1], [-1, 2]], ("a1", "a2")),
        "E7": (e7, E8_LABELS[1:]),
        "E8": (e8, E8_LABELS),
    }


BUILTIN_LATTICES = tuple(_builtin_table())


@lru_cache(maxsize=None)
def gram_builtin(name: str) -> GramLattice:
    """按名称取内置格（A1, A2, E7, E8）；E7 是 E8 的后 7x7 块 <α2..α8>"""
    table = _builtin_table()
    key = name.strip().upper()
    if key not in table:
        raise UnknownLattice(f"未知的内置格: {name}，可选: {', '.join(BUILTIN_LATTICES)}")
    gram, labels = table[key]
    return GramLattice(tuple(tuple(row) for row in gram), labels, key)


def load_gram(path: Union[str, Path]) -> GramLattice:
    """从 JSON 文件读取 {"rank", "gram", "labels"}"""
    p = Path(path)
    if not p.exists():
        raise UnknownLattice(f"Gram 文件不存在: {path}")
    payload = GramPayload.model_validate(orjson.loads(p.read_bytes()))
    return GramLattice(
        tuple(tuple(row) for row in payload.gram),
        tuple(payload.labels or ()),
        p.stem,
    )


def resolve_lattice(spec: str) -> GramLattice:
    """内置名或 JSON 路径"""
    if spec.strip().upper() in BUILTIN_LATTICES:
        return gram_builtin(spec)
    return load_gram(spec)


# === 二次型 ===

def _check_dimension(lat: GramLattice, v: Sequence) -> None:
    if len(v) != lat.rank:
        raise DimensionMismatch(f"向量长度 {len(v)} 与格 {lat.name} 的秩 {lat.rank} 不一致")


def inner(lat: GramLattice, u: Sequence[RationalLike], v: Sequence[RationalLike]) -> Fraction:
    _check_dimension(lat, u)
    _check_dimension(lat, v)
    x, y = as_vector(u), as_vector(v)
    return sum(
        (x[i] * lat.gram[i][j] * y[j] for i in range(lat.rank) for j in range(lat.rank)),
        Fraction(0),
    )


def qform(lat: GramLattice, v: Sequence[RationalLike]) -> Fraction:
    """v^T A v（范数 <v,v>，不除以 2）"""
    return inner(lat, v, v)


def dual_weight(lat: GramLattice, i: int) -> RationalVector:
    """解 A x = e_i，得到基坐标下的基本权 ω_i（i 从 1 开始）"""
    if not 1 <= i <= lat.rank:
        raise DimensionMismatch(f"下标 {i} 超出 1..{lat.rank}")
    e = sympy.zeros(lat.rank, 1)
    e[i - 1] = 1
    x = sympy.Matrix(lat.gram).LUsolve(e)
    return tuple(Fraction(int(c.p), int(c.q)) for c in x)


def highest_root_e8() -> Tuple[int, ...]:
    """E8 最高根 2α1+3α2+4α3+5α4+6α5+4α6+2α7+3α8"""
    return (2, 3, 4, 5, 6, 4, 2, 3)


def omega2_e7() -> RationalVector:
    """E7 = <α2..α8> 中 α2 的对偶基向量 ω2 = (3,4,5,6,4,2,3)/2"""
    return dual_weight(gram_builtin("E7"), 1)


# === LDL 分层 ===

@lru_cache(maxsize=64)
def form_levels(form: QuadraticForm) -> Tuple[Tuple[Fraction, RationalVector], ...]:
    """
    对每个 m 返回 (d_m, p_m)：

        y^T A_m y = (y' + p_m y_m)^T A_{m-1} (y' + p_m y_m) + d_m y_m^2

    其中 p_m = A_{m-1}^{-1} b_m，d_m 为 Schur 补（LDL 主元）。
    """
    n = form.rank
    matrix = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in form.gram])
    levels = []
    for m in range(n):
        a = matrix[m, m]
        if m == 0:
            p: RationalVector = ()
            d = a
        else:
            b = matrix[:m, m]
            sol = matrix[:m, :m].LUsolve(b)
            d = a - (b.T * sol)[0, 0]
            p = tuple(Fraction(int(c.p), int(c.q)) for c in sol)
        if d <= 0:
            raise NotPositiveDefinite(f"二次型第 {m + 1} 个主元 {d} 非正")
        levels.append((Fraction(int(d.p), int(d.q)), p))
    return tuple(levels)


def _candidate_range(d: Fraction, c: Fraction, budget: Fraction) -> range:
    """满足 d (x+c)^2 <= budget 的整数 x 的候选范围（两端各放宽 1，再精确过滤）"""
    if budget < 0:
        return range(0)
    t = budget / d
    s = math.isqrt(t.numerator * t.denominator) // t.denominator
    return range(math.floor(-c) - s - 1, math.ceil(-c) + s + 2)


def _domain_values(dom: Domain, candidates: range) -> Sequence[int]:
    if dom == DOMAIN_Z:
        return candidates
    if dom == DOMAIN_NONNEG:
        return range(max(0, candidates.start), max(0, candidates.stop))
    return (dom,) if dom in candidates else ()


def enumerate_form(
    form: QuadraticForm,
    center: Sequence[RationalLike],
    bound: RationalLike,
    domains: Optional[Sequence[Domain]] = None,
) -> List[Tuple[int, ...]]:
    """
    列出所有满足取值域约束且 (k+center)^T A (k+center) <= bound 的整数向量 k

    Fincke-Pohst 式逐层区间界定，全程精确有理运算；输出按字典序排序。
    """
    n = form.rank
    c0 = as_vector(center)
    if len(c0) != n:
        raise DimensionMismatch(f"中心向量长度 {len(c0)} 与秩 {n} 不一致")
    doms = tuple(domains) if domains is not None else (DOMAIN_Z,) * n
    if len(doms) != n:
        raise DimensionMismatch(f"取值域个数 {len(doms)} 与秩 {n} 不一致")
    limit = Fraction(bound)
    if limit < 0:
        return []

    levels = form_levels(form)
    found: List[Tuple[int, ...]] = []
    suffix = [0] * n

    def descend(m: int, c: List[Fraction], budget: Fraction) -> None:
        d, p = levels[m]
        for x in _domain_values(doms[m], _candidate_range(d, c[m], budget)):
            y = x + c[m]
            used = d * y * y
            if used > budget:
                continue
            suffix[m] = x
            if m == 0:
                found.append(tuple(suffix))
                continue
            descend(m - 1, [c[i] + p[i] * y for i in range(m)], budget - used)

    descend(n - 1, list(c0), limit)
    found.sort()
    return found


def enumerate_below(
    lat: GramLattice,
    center: Sequence[RationalLike],
    bound: RationalLike,
    domains: Optional[Sequence[Domain]] = None,
) -> List[Tuple[int, ...]]:
    """qform(lat, k + center) <= bound 的全部整数向量 k（逐坐标取值域约束）"""
    _check_dimension(lat, center)
    vectors = enumerate_form(lat.form(), center, bound, domains)
    logger.debug(f"{lat.name}: bound={bound} 枚举得到 {len(vectors)} 个格点")
    return vectors


# === 陪集 theta 计数 ===

class CosetTheta:
    """
    陪集 center + Z^n 的范数计数 {范数: 重数}，范数 <= bound

    与 enumerate_form 相同的分层递推；子格陪集按中心 mod 1 记忆化，
    因为各层中心分母有界，E7/E8 在高阶下也只有少量陪集类。
    """

    def __init__(self, form: QuadraticForm, bound: RationalLike) -> None:
        self.form = form
        self.bound = Fraction(bound)
        self.levels = form_levels(form) if form.rank else ()
        self._memo: Dict[Tuple[int, RationalVector], Dict[Fraction, int]] = {}

    @staticmethod
    def _reduce(c: Sequence[Fraction]) -> RationalVector:
        return tuple(x - math.floor(x) for x in c)

    def counts(self, center: Sequence[RationalLike]) -> Dict[Fraction, int]:
        c = as_vector(center)
        if len(c) != self.form.rank:
            raise DimensionMismatch(f"中心向量长度 {len(c)} 与秩 {self.form.rank} 不一致")
        if not c:
            return {Fraction(0): 1}
        return self._level(len(c) - 1, self._reduce(c))

    def _level(self, m: int, c: RationalVector) -> Dict[Fraction, int]:
        key = (m, c)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        d, p = self.levels[m]
        out: Dict[Fraction, int] = defaultdict(int)
        for x in _candidate_range(d, c[m], self.bound):
            y = x + c[m]
            used = d * y * y
            if used > self.bound:
                continue
            if m == 0:
                out[used] += 1
                continue
            sub = self._level(m - 1, self._reduce([c[i] + p[i] * y for i in range(m)]))
            for norm, mult in sub.items():
                total = norm + used
                if total <= self.bound:
                    out[total] += mult
        result = dict(out)
        self._memo[key] = result
        return result

    @property
    def classes(self) -> int:
        return len(self._memo)


def coset_theta(
    lat: GramLattice, center: Sequence[RationalLike], bound: RationalLike
) -> Dict[Fraction, int]:
    """格 theta 级数（陪集版）的精确计数，范数 <= bound"""
    _check_dimension(lat, center)
    theta = CosetTheta(lat.form(), bound)
    result = theta.counts(center)
    logger.debug(f"{lat.name}: 陪集 theta 计数 {len(result)} 个范数值，记忆化 {theta.classes} 类")
    return result
