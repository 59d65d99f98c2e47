"""
截断 q 级数运算的单元测试
"""
import random
from fractions import Fraction

import mpmath
import pytest

from app.models.exception import (
    InsufficientPrecision,
    NonUnitLeadingCoefficient,
    OffsetMismatch,
    UnsupportedWeight,
    ZeroSeries,
)
from app.models.qseries import TruncatedQSeries, parse_rational, to_rational
from app.services.qseries import (
    common_order,
    dedekind_eta,
    eisenstein,
    equal_to_order,
    euler_inv_pow,
    eval_numeric,
    first_difference,
    from_json,
    pochhammer_inv,
    qs_add,
    qs_mul,
    qs_neg,
    qs_pow_rational,
    qs_scale,
    qs_shift,
    qs_sub,
    render_text,
    series_from_exponent_counts,
    theta_derivative,
    to_json,
    truncate,
)
from tests.helpers.assertions import assert_series_coeffs, assert_series_equal
from tests.helpers.brute_force import colored_partition_counts, partition_counts


def series(coeffs, offset=0):
    return TruncatedQSeries.from_coefficients(coeffs, offset)


class TestRationalHelpers:
    """有理数解析与校验"""

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_parse_fraction_string(self):
        assert parse_rational("-19/60") == Fraction(-19, 60)
        assert parse_rational(" 7 ") == Fraction(7)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_decimal_strings_rejected(self):
        """小数写法不是精确有理数"""
        with pytest.raises(ValueError):
            parse_rational("0.5")
        with pytest.raises(ValueError):
            parse_rational("1e3")

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_float_rejected(self):
        with pytest.raises(TypeError):
            to_rational(0.5)
        with pytest.raises(TypeError):
            to_rational(True)


class TestCanonicalForm:
    """规范形：去掉前导零，零级数保留原有效范围"""

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_leading_zeros_are_stripped(self):
        f = TruncatedQSeries(Fraction(0), (0, 0, 1, 2), 3)
        assert f.offset == 2
        assert f.coeffs == (Fraction(1), Fraction(2))
        assert f.order == 1
        assert f.valid_through == 3

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_zero_series(self):
        f = TruncatedQSeries(Fraction(1, 2), (0, 0, 0), 2)
        assert f.is_zero
        assert f.offset == Fraction(1, 2)
        assert f.order == 2
        assert f.valid_through == Fraction(5, 2)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_zero_series_with_negative_range(self):
        """有效范围在 0 以下的零级数不会被延长到 0"""
        f = TruncatedQSeries(Fraction(-19, 60), (0,), 0)
        assert f.is_zero
        assert f.valid_through == Fraction(-19, 60)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_length_must_match_order(self):
        with pytest.raises(ValueError):
            TruncatedQSeries(Fraction(0), (1, 2), 3)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_coefficient_lookup(self):
        f = series([1, 2, 3], Fraction(1, 2))
        assert f.coefficient(Fraction(3, 2)) == 2
        # 不在网格上或低于首项时为 0
        assert f.coefficient(1) == 0
        assert f.coefficient(Fraction(-1, 2)) == 0
        with pytest.raises(InsufficientPrecision):
            f.coefficient(Fraction(7, 2))


class TestArithmetic:
    """对齐加法、乘法与缩放"""

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_add_aligns_offsets(self):
        a = series([1, 1, 1])
        b = series([1, 1], 1)
        assert_series_coeffs(qs_add(a, b), 0, [1, 2, 2])
        assert qs_add(a, b).order == 2

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_add_takes_smaller_validity(self):
        a = series([1, 1, 1, 1, 1])
        b = series([1, 1])
        total = qs_add(a, b)
        assert total.order == 1
        assert total.coeffs == (Fraction(2), Fraction(2))

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_add_rejects_fractional_gap(self):
        with pytest.raises(OffsetMismatch):
            qs_add(series([1, 1]), series([1, 1], Fraction(1, 2)))

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_sub_to_zero(self):
        a = series([1, 2, 3], Fraction(-19, 60))
        diff = qs_sub(a, a)
        assert diff.is_zero
        assert diff.valid_through == a.valid_through == Fraction(101, 60)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_zero_difference_does_not_hide_short_range(self):
        """零差值之后再相加，有效范围仍取较短者"""
        a = series([1], Fraction(-19, 60))
        b = series([1, 190, 2831], Fraction(-19, 60))
        total = qs_add(qs_sub(a, a), b)
        assert total.valid_through == Fraction(-19, 60)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_mul_adds_offsets(self):
        a = series([1, 1], Fraction(1, 3))
        b = series([1, -1], Fraction(2, 3))
        product = qs_mul(a, b)
        assert_series_coeffs(product, 1, [1, 0])

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_operators_delegate(self):
        a = series([1, 2])
        b = series([3, 4])
        assert (a + b).coeffs == (Fraction(4), Fraction(6))
        assert (a * b).coeffs == (Fraction(3), Fraction(10))
        assert (a * Fraction(1, 2)).coeffs == (Fraction(1, 2), Fraction(1))
        assert (-a).coeffs == (Fraction(-1), Fraction(-2))

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_scale_and_shift(self):
        f = series([1, 2])
        assert qs_scale(f, 0).is_zero
        shifted = qs_shift(f, Fraction(-1, 60))
        assert shifted.offset == Fraction(-1, 60)
        assert shifted.coeffs == f.coeffs

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_truncate(self):
        f = series([1, 2, 3, 4])
        assert truncate(f, 1).coeffs == (Fraction(1), Fraction(2))
        assert truncate(f, 9) is f


class TestPowersAndDerivatives:
    """分数次幂与 θ 导数"""

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_inverse_of_geometric_series(self):
        f = pochhammer_inv(1, 6)
        assert_series_coeffs(qs_pow_rational(f, -1), 0, [1, -1, 0, 0, 0, 0, 0])

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_square_root(self):
        f = series([1, 2, 1, 0, 0])
        assert_series_coeffs(qs_pow_rational(f, Fraction(1, 2)), 0, [1, 1, 0, 0, 0])

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_power_scales_offset(self):
        eta = dedekind_eta(4)
        power = qs_pow_rational(eta, Fraction(38, 5))
        assert power.offset == Fraction(19, 60)
        assert power.coeffs[1] == Fraction(-38, 5)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_power_requires_unit_leading(self):
        with pytest.raises(NonUnitLeadingCoefficient):
            qs_pow_rational(series([2, 1]), Fraction(1, 2))
        with pytest.raises(ZeroSeries):
            qs_pow_rational(series([0, 0]), 2)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_theta_derivative(self):
        f = series([1, 1], Fraction(1, 2))
        assert_series_coeffs(theta_derivative(f), Fraction(1, 2), [Fraction(1, 2), Fraction(3, 2)])

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_theta_kills_constant(self):
        assert theta_derivative(TruncatedQSeries.one(5)).is_zero


def random_series(rng, offset, order=6, unit=False):
    """固定种子的随机整数系数级数，首项非零"""
    lead = 1 if unit else rng.choice([1, 2, -3])
    return series([lead] + [rng.randint(-5, 5) for _ in range(order)], offset)


SEEDS = [1, 7, 42]


class TestAlgebraicLaws:
    """环运算律、θ 的 Leibniz 律与幂运算的一致性"""

    @pytest.mark.unit
    @pytest.mark.qseries
    @pytest.mark.parametrize("seed", SEEDS)
    def test_commutativity(self, seed):
        rng = random.Random(seed)
        f = random_series(rng, Fraction(-1, 60))
        g = random_series(rng, Fraction(11, 60))
        h = random_series(rng, Fraction(71, 60))
        assert qs_mul(f, g) == qs_mul(g, f)
        assert qs_add(g, h) == qs_add(h, g)

    @pytest.mark.unit
    @pytest.mark.qseries
    @pytest.mark.parametrize("seed", SEEDS)
    def test_associativity(self, seed):
        rng = random.Random(seed)
        f = random_series(rng, Fraction(-1, 60))
        g = random_series(rng, Fraction(11, 60))
        h = random_series(rng, Fraction(1, 5))
        assert qs_mul(qs_mul(f, g), h) == qs_mul(f, qs_mul(g, h))
        k = random_series(rng, Fraction(-4, 5))
        assert qs_add(qs_add(h, k), h) == qs_add(h, qs_add(k, h))

    @pytest.mark.unit
    @pytest.mark.qseries
    @pytest.mark.parametrize("seed", SEEDS)
    def test_distributivity(self, seed):
        rng = random.Random(seed)
        f = random_series(rng, Fraction(-1, 60))
        g = random_series(rng, Fraction(11, 60))
        h = random_series(rng, Fraction(71, 60))
        assert qs_mul(f, qs_add(g, h)) == qs_add(qs_mul(f, g), qs_mul(f, h))

    @pytest.mark.unit
    @pytest.mark.qseries
    @pytest.mark.parametrize("seed", SEEDS)
    def test_additive_inverse(self, seed):
        f = random_series(random.Random(seed), Fraction(-19, 60))
        total = qs_add(f, qs_neg(f))
        assert total.is_zero
        assert total.valid_through == f.valid_through

    @pytest.mark.unit
    @pytest.mark.qseries
    @pytest.mark.parametrize("seed", SEEDS)
    def test_theta_is_a_derivation(self, seed):
        """θ(fg) = θf·g + f·θg"""
        rng = random.Random(seed)
        f = random_series(rng, Fraction(-1, 60))
        g = random_series(rng, Fraction(11, 60))
        left = theta_derivative(qs_mul(f, g))
        right = qs_add(qs_mul(theta_derivative(f), g), qs_mul(f, theta_derivative(g)))
        assert_series_equal(left, right, 6)

    @pytest.mark.unit
    @pytest.mark.qseries
    @pytest.mark.parametrize("alpha", [Fraction(38, 5), Fraction(-1, 3), Fraction(248)])
    def test_power_times_inverse_power_is_one(self, alpha):
        eta = dedekind_eta(10)
        product = qs_mul(qs_pow_rational(eta, alpha), qs_pow_rational(eta, -alpha))
        assert product == TruncatedQSeries.one(10)

    @pytest.mark.unit
    @pytest.mark.qseries
    @pytest.mark.parametrize("seed", SEEDS)
    def test_integer_power_is_repeated_product(self, seed):
        f = random_series(random.Random(seed), Fraction(1, 7), unit=True)
        assert qs_pow_rational(f, 3) == qs_mul(qs_mul(f, f), f)
        assert qs_pow_rational(f, 1) == f
        assert qs_pow_rational(f, 0) == TruncatedQSeries.one(f.order)


class TestStandardSeries:
    """Pochhammer、Euler、η 与 Eisenstein 级数"""

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_pochhammer_matches_partition_dp(self):
        for k in range(5):
            assert list(pochhammer_inv(k, 15).integer_coefficients()) == partition_counts(k, 15)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_euler_powers_match_colored_partitions(self):
        for s in (1, 2, 7):
            assert list(euler_inv_pow(s, 10).integer_coefficients()) == colored_partition_counts(s, 10)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_dedekind_eta(self):
        """Euler 五边形数定理"""
        eta = dedekind_eta(12)
        assert eta.offset == Fraction(1, 24)
        assert list(eta.integer_coefficients()) == [1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1]

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_eisenstein_normalisation(self):
        assert list(eisenstein(2, 2).coeffs) == [Fraction(-1, 12), 2, 6]
        assert list(eisenstein(4, 3).coeffs) == [Fraction(1, 720), Fraction(1, 3), 3, Fraction(28, 3)]

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_eisenstein_unsupported_weight(self):
        with pytest.raises(UnsupportedWeight):
            eisenstein(6, 3)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_series_from_exponent_counts(self):
        counts = {Fraction(1, 4): 2, Fraction(9, 4): 3}
        f = series_from_exponent_counts(counts, Fraction(13, 4))
        assert_series_coeffs(f, Fraction(1, 4), [2, 0, 3, 0])
        with pytest.raises(OffsetMismatch):
            series_from_exponent_counts({Fraction(0): 1, Fraction(1, 2): 1}, Fraction(2))


class TestComparison:
    """逐项比较与截断契约"""

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_first_difference(self):
        a = series([1, 2, 3, 4])
        b = series([1, 2, 5, 4])
        assert first_difference(a, b, 3) == (Fraction(2), Fraction(-2))
        assert first_difference(a, a, 3) is None

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_equal_beyond_validity_raises(self):
        a = series([1, 2, 3])
        with pytest.raises(InsufficientPrecision):
            equal_to_order(a, a, 5)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_mismatched_grid_counts_as_different(self):
        a = series([1, 1], Fraction(1, 3))
        b = series([1, 1])
        assert first_difference(a, b, 1) == (Fraction(0), Fraction(-1))

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_common_order(self):
        a = series([1, 1, 1, 1])
        b = series([1, 1, 1], 2)
        assert common_order(a, b) == 3


class TestSerialisation:
    """JSON 与文本渲染"""

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_json_round_trip(self):
        f = series([1, 190, 2831, Fraction(-1, 3)], Fraction(-19, 60))
        assert from_json(to_json(f)) == f

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_json_shape(self):
        f = series([1, Fraction(1, 2)], Fraction(11, 60))
        assert to_json(f) == b'{"offset":"11/60","order":1,"coeffs":["1","1/2"]}'

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_render_with_prefix(self):
        f = series([1, 190, 2831], Fraction(-19, 60))
        assert render_text(f) == "q^(-19/60)*(1 + 190q + 2831q^2)"

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_render_plain(self):
        assert render_text(series([1, -1, 0, 2])) == "1 - q + 2q^3"
        assert render_text(series([Fraction(1, 2), Fraction(-3, 4)])) == "1/2 - (3/4)q"
        assert render_text(TruncatedQSeries.zero(3)) == "0"


class TestNumericEvaluation:
    """mpmath 数值求值"""

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_polynomial_value_and_tail(self):
        value, tail = eval_numeric(series([1, 1]), Fraction(1, 2))
        assert value == mpmath.mpf("1.5")
        assert tail == mpmath.mpf("0.5")

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_fractional_offset(self):
        value, _ = eval_numeric(series([1], Fraction(1, 2)), Fraction(1, 4))
        assert abs(value - mpmath.mpf("0.5")) < mpmath.mpf(10) ** -30

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_eta_at_i(self):
        """η(i) = Γ(1/4) / (2π^{3/4}) ≈ 0.768225"""
        value, tail = eval_numeric(dedekind_eta(10), mpmath.exp(-2 * mpmath.pi))
        expected = mpmath.gamma(mpmath.mpf(1) / 4) / (2 * mpmath.pi ** (mpmath.mpf(3) / 4))
        assert abs(value - mpmath.mpf("0.768225")) < mpmath.mpf("1e-6")
        assert abs(value - expected) < mpmath.mpf("1e-12")
        assert tail < mpmath.mpf("1e-12")

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_geometric_series_at_half(self):
        value, tail = eval_numeric(pochhammer_inv(1, 60), Fraction(1, 2))
        assert abs(value - 2) <= tail
        assert abs(value - 2) < mpmath.mpf("1e-15")

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_partial_sums_converge_monotonically(self):
        errors = [
            abs(eval_numeric(pochhammer_inv(1, n), Fraction(1, 2))[0] - 2)
            for n in (5, 10, 20, 40)
        ]
        assert errors == sorted(errors, reverse=True)
        assert len(set(errors)) == len(errors)

    @pytest.mark.unit
    @pytest.mark.qseries
    def test_point_outside_unit_interval(self):
        with pytest.raises(ValueError):
            eval_numeric(series([1, 1]), 2)
