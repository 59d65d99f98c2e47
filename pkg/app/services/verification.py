"""
校验注册表：具名检查按套件分组，每项检查输出一个 CheckReport
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
from loguru import logger

from app.core.config import settings
from app.models.character import MDESpec
from app.models.exception import UnknownTag
from app.models.lattice import ChargeConfig
from app.models.payload import CheckReport, FirstFailure
from app.models.qseries import TruncatedQSeries, format_rational
from app.services.basis_oracle import oracle_failure
from app.services.characters import (
    builtin_character,
    character_catalogue,
    lowest_weight_dimension,
    parity_split_failure,
    product_identity_failure,
    product_identity_terms,
)
from app.services.lattice import dual_weight, enumerate_below, gram_builtin
from app.services.modular import (
    DELIGNE_POINTS,
    deligne_dim,
    deligne_dim2,
    dual_coxeter_to_c,
    eta_twist,
    kz_residual,
    mde_residual,
    mu_to_c,
    mu_to_h,
    mu_to_kz_weight,
    rr_decompose,
    s_deviation,
    same_phase,
    t_phase,
    transform_family,
)
from app.services.qseries import first_nonzero

CheckFn = Callable[[int], CheckReport]

SUITES = ("identities", "mde", "kz", "modular", "oracle", "dimensions")


@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    run: CheckFn


_REGISTRY: Dict[str, Check] = {}


def register(name: str, suite: str) -> Callable[[CheckFn], CheckFn]:
    def wrap(fn: CheckFn) -> CheckFn:
        _REGISTRY[name] = Check(name, suite, fn)
        return fn

    return wrap


# === 报告构造 ===

def _failure(point: Optional[Tuple[Fraction, Fraction]]) -> Optional[FirstFailure]:
    if point is None:
        return None
    return FirstFailure(exponent=format_rational(point[0]), value=format_rational(point[1]))


def report(
    name: str,
    failure: Optional[Tuple[Fraction, Fraction]] = None,
    ok: Optional[bool] = None,
    detail: Optional[str] = None,
) -> CheckReport:
    passed = failure is None if ok is None else ok
    return CheckReport(
        check=name,
        status="pass" if passed else "fail",
        first_failure=_failure(failure),
        detail=detail,
    )


def _first_residual(residuals: Sequence[TruncatedQSeries]) -> Optional[Tuple[Fraction, Fraction]]:
    for r in residuals:
        hit = first_nonzero(r)
        if hit is not None:
            return hit
    return None


# === 恒等式 ===

@register("identity-vacuum", "identities")
def _identity_vacuum(order: int) -> CheckReport:
    lhs, terms = product_identity_terms("vacuum", order)
    return report("identity-vacuum", product_identity_failure(lhs, terms, order))


@register("identity-alpha1", "identities")
def _identity_alpha1(order: int) -> CheckReport:
    lhs, terms = product_identity_terms("alpha1", order)
    return report("identity-alpha1", product_identity_failure(lhs, terms, order))


def _parity(module: str, order: int) -> CheckReport:
    name = f"parity-{module}"
    hit = parity_split_failure(module, order)
    if hit is None:
        return report(name)
    part, point = hit
    return report(name, point, detail=f"{part} 部分与乘积不一致")


@register("parity-vacuum", "identities")
def _parity_vacuum(order: int) -> CheckReport:
    return _parity("vacuum", order)


@register("parity-alpha1", "identities")
def _parity_alpha1(order: int) -> CheckReport:
    return _parity("alpha1", order)


# 度数 19 的 Rogers-Ramanujan 分解：{i: c_i}
RR_EXPECTED: Dict[str, Dict[int, Fraction]] = {
    "v-e712": {19: Fraction(1), 14: Fraction(171), 9: Fraction(247), 4: Fraction(-57)},
    "v-e712-a1": {15: Fraction(57), 10: Fraction(247), 5: Fraction(-171), 0: Fraction(1)},
}


def _decompose(tag: str, order: int) -> CheckReport:
    name = f"decompose-{tag}"
    # 四个单项式的首项跨 3 阶，至少需要这么多项才能列满秩
    n = max(order, 4)
    found = dict(rr_decompose(builtin_character(tag, n), 19, n))
    expected = RR_EXPECTED[tag]
    ok = found == expected
    detail = None if ok else "得到 " + ", ".join(f"{i}: {format_rational(c)}" for i, c in found.items())
    return report(name, ok=ok, detail=detail)


@register("decompose-v-e712", "identities")
def _decompose_vacuum(order: int) -> CheckReport:
    return _decompose("v-e712", order)


@register("decompose-v-e712-a1", "identities")
def _decompose_alpha1(order: int) -> CheckReport:
    return _decompose("v-e712-a1", order)


@register("lowest-weight-v-e712-a1", "identities")
def _lowest_weight(order: int) -> CheckReport:
    dim = lowest_weight_dimension("v-e712-a1")
    return report("lowest-weight-v-e712-a1", ok=dim == 57, detail=f"dim = {dim}")


# === 模微分方程 ===

def _mde(name: str, tags: Sequence[str], mu: Fraction, order: int) -> CheckReport:
    spec = MDESpec.displayed(mu)
    residuals = [mde_residual(builtin_character(t, order), spec, order) for t in tags]
    return report(name, _first_residual(residuals), detail=f"γ = {format_rational(spec.e4_coefficient)}")


@register("mde-rr", "mde")
def _mde_rr(order: int) -> CheckReport:
    return _mde("mde-rr", ("rr-vac", "rr-mod"), Fraction(11, 900), order)


@register("mde-e7-half", "mde")
def _mde_e7_half(order: int) -> CheckReport:
    return _mde("mde-e7-half", ("v-e712", "v-e712-a1"), Fraction(551, 900), order)


@register("mde-e7", "mde")
def _mde_e7(order: int) -> CheckReport:
    return _mde("mde-e7", ("v-e7", "v-e7-w2"), Fraction(77, 144), order)


@register("mde-e8", "mde")
def _mde_e8(order: int) -> CheckReport:
    return _mde("mde-e8", ("v-e8",), Fraction(2, 3), order)


# === Kaneko-Zagier ===

def _kz(name: str, tags: Sequence[str], mu: Fraction, order: int) -> CheckReport:
    k = mu_to_kz_weight(mu)
    window = max(order - 2, 0)
    residuals = [kz_residual(eta_twist(builtin_character(t, order), k), k, window) for t in tags]
    return report(name, _first_residual(residuals), detail=f"k = {format_rational(k)}")


@register("kz-rr", "kz")
def _kz_rr(order: int) -> CheckReport:
    return _kz("kz-rr", ("rr-vac", "rr-mod"), Fraction(11, 900), order)


@register("kz-e7-half", "kz")
def _kz_e7_half(order: int) -> CheckReport:
    return _kz("kz-e7-half", ("v-e712", "v-e712-a1"), Fraction(551, 900), order)


@register("kz-e7", "kz")
def _kz_e7(order: int) -> CheckReport:
    return _kz("kz-e7", ("v-e7", "v-e7-w2"), Fraction(77, 144), order)


# === T / S 矩阵 ===

def _t_phases(family: str) -> CheckReport:
    name = f"t-phase-{family}"
    matrices = transform_family(family)
    got = [t_phase(builtin_character(label, 2)) for label in matrices.labels]
    ok = all(same_phase(a, b) for a, b in zip(got, matrices.t_phases))
    return report(name, ok=ok, detail=", ".join(format_rational(a) for a in got))


def _s_check(family: str, t: int) -> CheckReport:
    name = f"s-matrix-{family}-t{t}"
    matrices = transform_family(family)
    series = [builtin_character(label, settings.s_check_order) for label in matrices.labels]
    deviation, tail = s_deviation(series, matrices.s_matrix, t)
    tol = mpmath.mpf(settings.s_check_tol)
    ok = deviation < tol and tail < tol
    return report(
        name,
        ok=ok,
        detail=f"deviation={mpmath.nstr(deviation, 5)} tail={mpmath.nstr(tail, 5)}",
    )


def _s_involution(family: str) -> CheckReport:
    """S² = I"""
    name = f"s-involution-{family}"
    with mpmath.workdps(settings.numeric_dps):
        s = mpmath.matrix(transform_family(family).rows())
        worst = mpmath.mnorm(s * s - mpmath.eye(s.rows), 1)
    ok = worst < mpmath.mpf(settings.s_check_tol)
    return report(name, ok=ok, detail=f"‖S²-I‖ = {mpmath.nstr(worst, 5)}")


def _register_family(family: str) -> None:
    register(f"t-phase-{family}", "modular")(lambda order: _t_phases(family))
    register(f"s-involution-{family}", "modular")(lambda order: _s_involution(family))
    for t in (1, 2):
        register(f"s-matrix-{family}-t{t}", "modular")(lambda order, t=t: _s_check(family, t))


for _family in ("e7", "virasoro", "e7-half"):
    _register_family(_family)


# === 组合基计数 ===

def _oracle_configs() -> Dict[str, Tuple[ChargeConfig, int]]:
    a1, a2 = gram_builtin("A1"), gram_builtin("A2")
    e7, e8 = gram_builtin("E7"), gram_builtin("E8")
    return {
        "oracle-a1": (ChargeConfig(a1, 1, 0), settings.oracle_order_a1),
        "oracle-a1-omega": (ChargeConfig(a1, 1, 0, dual_weight(a1, 1)), settings.oracle_order_a1),
        "oracle-a2": (ChargeConfig(a2, 2, 0), settings.oracle_order_a2),
        "oracle-e7": (ChargeConfig(e7, 0, 7), settings.oracle_order_e7),
        "oracle-e8-intermediate": (character_catalogue.config("v-e712"), settings.oracle_order_e8),
        "oracle-e8-intermediate-a1": (character_catalogue.config("v-e712-a1"), settings.oracle_order_e8),
    }


def _oracle(name: str, order: int) -> CheckReport:
    cfg, cap = _oracle_configs()[name]
    n = min(order, cap)
    return report(name, oracle_failure(cfg, n, settings.oracle_budget), detail=f"order = {n}")


for _name in (
    "oracle-a1",
    "oracle-a1-omega",
    "oracle-a2",
    "oracle-e7",
    "oracle-e8-intermediate",
    "oracle-e8-intermediate-a1",
):
    register(_name, "oracle")(lambda order, name=_name: _oracle(name, order))


# === 维数公式与格点计数 ===

@register("deligne-values", "dimensions")
def _deligne_values(order: int) -> CheckReport:
    pairs = [(deligne_dim(18), 133), (deligne_dim(24), 190), (deligne_dim(30), 248), (deligne_dim2(24), 15504)]
    pairs += [(deligne_dim(p.hv), p.dim) for p in DELIGNE_POINTS]
    bad = [f"{format_rational(got)} != {want}" for got, want in pairs if got != want]
    return report("deligne-values", ok=not bad, detail="; ".join(bad) or None)


@register("deligne-points", "dimensions")
def _deligne_points(order: int) -> CheckReport:
    bad = []
    for p in DELIGNE_POINTS:
        if mu_to_c(p.mu) != p.c or mu_to_h(p.mu) != p.h or dual_coxeter_to_c(p.hv) != p.c:
            bad.append(f"μ = {format_rational(p.mu)}")
    return report("deligne-points", ok=not bad, detail="; ".join(bad) or None)


def _q1_coefficient(tag: str) -> Fraction:
    series = builtin_character(tag, 1)
    return series.coefficient(character_catalogue.tag(tag).leading_exponent + 1)


@register("q1-v-e712", "dimensions")
def _q1_e712(order: int) -> CheckReport:
    got = _q1_coefficient("v-e712")
    return report("q1-v-e712", ok=got == deligne_dim(24), detail=f"{format_rational(got)}")


@register("q1-v-e7", "dimensions")
def _q1_e7(order: int) -> CheckReport:
    got = _q1_coefficient("v-e7")
    return report("q1-v-e7", ok=got == 133, detail=f"{format_rational(got)}")


@register("lattice-counts", "dimensions")
def _lattice_counts(order: int) -> CheckReport:
    e8 = len(enumerate_below(gram_builtin("E8"), (0,) * 8, 2))
    e7 = len(enumerate_below(gram_builtin("E7"), (0,) * 7, 2))
    return report("lattice-counts", ok=(e8, e7) == (241, 127), detail=f"E8: {e8}, E7: {e7}")


# === 服务 ===

class VerificationService:
    """按套件列出并执行检查"""

    def names(self, suite: str = "all") -> List[str]:
        if suite == "all":
            return list(_REGISTRY)
        if suite not in SUITES:
            raise UnknownTag(f"未知的校验套件: {suite}，可选: {', '.join(SUITES + ('all',))}")
        return [name for name, check in _REGISTRY.items() if check.suite == suite]

    def run(self, name: str, order: int) -> CheckReport:
        if name not in _REGISTRY:
            raise UnknownTag(f"未知的检查: {name}")
        started = time.perf_counter()
        result = _REGISTRY[name].run(order)
        elapsed = time.perf_counter() - started
        if result.passed:
            logger.info(f"PASS {name} ({elapsed:.2f}s)")
        else:
            logger.warning(f"FAIL {name} ({elapsed:.2f}s): {result.first_failure or result.detail}")
        return result

    def run_suite(self, suite: str, order: int) -> List[CheckReport]:
        return [self.run(name, order) for name in self.names(suite)]


verification_service = VerificationService()
