"""
格、二次型与有界枚举的单元测试
"""
from fractions import Fraction

import orjson
import pytest

from app.models.exception import DimensionMismatch, DomainViolation, NotPositiveDefinite, UnknownLattice
from app.models.lattice import DOMAIN_NONNEG, DOMAIN_Z, ChargeConfig, GramLattice, QuadraticForm
from app.services.lattice import (
    coset_theta,
    dual_weight,
    enumerate_below,
    enumerate_form,
    gram_builtin,
    highest_root_e8,
    inner,
    load_gram,
    omega2_e7,
    qform,
    resolve_lattice,
)
from tests.helpers.brute_force import box_search, e8_coordinate_norms, norm_histogram

A3_GRAM = ((2, -1, 0), (-1, 2, -1), (0, -1, 2))


class TestBuiltinLattices:
    """内置 Gram 矩阵"""

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_names_are_case_insensitive(self):
        assert gram_builtin("e8").name == "E8"
        assert resolve_lattice("a2").rank == 2

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_e7_is_trailing_block_of_e8(self, e7, e8):
        assert e7.gram == tuple(row[1:] for row in e8.gram[1:])
        assert e7.labels == ("a2", "a3", "a4", "a5", "a6", "a7", "a8")

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_determinants(self, a1, a2, e7, e8):
        assert [a1.determinant(), a2.determinant(), e7.determinant(), e8.determinant()] == [2, 3, 2, 1]

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_unknown_builtin(self):
        with pytest.raises(UnknownLattice):
            gram_builtin("G2")


class TestGramValidation:
    """Gram 矩阵的构造校验"""

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            GramLattice(((1, 2), (2, 1)))

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            GramLattice(((2, 1), (0, 2)))

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_non_square_rejected(self):
        with pytest.raises(DimensionMismatch):
            GramLattice(((2, 1),))

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_default_labels_and_index(self):
        lat = GramLattice(A3_GRAM)
        assert lat.labels == ("b1", "b2", "b3")
        assert lat.index_of("b2") == 2

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_load_gram_from_json(self, tmp_path):
        path = tmp_path / "a3.json"
        path.write_bytes(orjson.dumps({"rank": 3, "gram": [list(r) for r in A3_GRAM], "labels": ["x", "y", "z"]}))
        lat = load_gram(path)
        assert lat.name == "a3"
        assert lat.labels == ("x", "y", "z")
        assert lat.determinant() == 4

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_load_gram_missing_file(self, tmp_path):
        with pytest.raises(UnknownLattice):
            load_gram(tmp_path / "missing.json")


class TestWeights:
    """对偶权与最高根"""

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_a1_and_a2_fundamental_weights(self, a1, a2):
        assert dual_weight(a1, 1) == (Fraction(1, 2),)
        assert dual_weight(a2, 1) == (Fraction(2, 3), Fraction(1, 3))

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_omega2(self, e7):
        w = omega2_e7()
        assert w == tuple(Fraction(x, 2) for x in (3, 4, 5, 6, 4, 2, 3))
        assert qform(e7, w) == Fraction(3, 2)
        unit = (1, 0, 0, 0, 0, 0, 0)
        assert inner(e7, unit, w) == 1

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_highest_root_is_first_fundamental_weight(self, e8):
        root = highest_root_e8()
        assert qform(e8, root) == 2
        assert dual_weight(e8, 1) == tuple(Fraction(x) for x in root)

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_dimension_mismatch(self, e8):
        with pytest.raises(DimensionMismatch):
            qform(e8, (1, 0))
        with pytest.raises(DimensionMismatch):
            dual_weight(e8, 9)


class TestEnumeration:
    """Fincke-Pohst 枚举与盒子搜索对照"""

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_e8_and_e7_root_counts(self, e7, e8):
        assert len(enumerate_below(e8, (0,) * 8, 2)) == 241
        e7_vectors = enumerate_below(e7, (0,) * 7, 2)
        assert len(e7_vectors) == 127
        assert norm_histogram(e7.gram, e7_vectors) == {Fraction(0): 1, Fraction(2): 126}

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_a2_coset_matches_box_search(self, a2):
        center = (Fraction(1, 3), Fraction(2, 3))
        found = enumerate_below(a2, center, 6)
        expected = box_search(a2.gram, center, Fraction(6), (DOMAIN_Z, DOMAIN_Z), 4)
        assert found == expected
        assert found

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_a3_mixed_domains_match_box_search(self):
        lat = GramLattice(A3_GRAM, name="A3")
        center = (Fraction(1, 2), Fraction(0), Fraction(-1, 4))
        domains = (DOMAIN_NONNEG, DOMAIN_Z, 0)
        found = enumerate_below(lat, center, 4, domains)
        expected = box_search(lat.gram, center, Fraction(4), domains, 4)
        assert found == expected

    @pytest.mark.unit
    @pytest.mark.lattice
    @pytest.mark.parametrize("bound", range(7))
    @pytest.mark.parametrize("center", [(Fraction(0),), (Fraction(1, 2),), (Fraction(-1, 3),)])
    def test_a1_matches_box_search(self, a1, center, bound):
        expected = box_search(a1.gram, center, Fraction(bound), (DOMAIN_Z,), 4)
        assert enumerate_below(a1, center, bound) == expected

    @pytest.mark.unit
    @pytest.mark.lattice
    @pytest.mark.slow
    def test_e8_and_e7_match_coordinate_model(self, e7, e8):
        """标准坐标模型下逐点计数，与单根基下的枚举按范数对照"""
        e8_counts = e8_coordinate_norms(6)
        e7_counts = e8_coordinate_norms(6, orthogonal_to=(1, -1, 0, 0, 0, 0, 0, 0))
        assert e8_counts[Fraction(6)] == 6720
        assert e7_counts[Fraction(2)] == 126
        for bound in range(7):
            for lat, counts in ((e8, e8_counts), (e7, e7_counts)):
                expected = {n: c for n, c in counts.items() if n <= bound}
                found = enumerate_below(lat, (0,) * lat.rank, bound)
                assert norm_histogram(lat.gram, found) == expected, f"{lat.name} bound={bound}"

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_a1_nonnegative_domain(self, a1):
        assert enumerate_below(a1, (0,), 8, (DOMAIN_NONNEG,)) == [(0,), (1,), (2,)]

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_negative_bound_is_empty(self, a2):
        assert enumerate_below(a2, (0, 0), -1) == []

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_rational_form(self):
        form = QuadraticForm(((Fraction(1, 2),),))
        assert enumerate_form(form, (0,), 2) == [(-2,), (-1,), (0,), (1,), (2,)]

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_closed_under_negation(self, e8):
        vectors = set(enumerate_below(e8, (0,) * 8, 4))
        assert all(tuple(-x for x in v) in vectors for v in vectors)


class TestCosetTheta:
    """陪集 theta 计数"""

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_e8_theta(self, e8):
        assert coset_theta(e8, (0,) * 8, 4) == {Fraction(0): 1, Fraction(2): 240, Fraction(4): 2160}

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_e7_minuscule_coset(self, e7):
        center = tuple(-x for x in omega2_e7())
        assert coset_theta(e7, center, Fraction(3, 2)) == {Fraction(3, 2): 56}

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_a1_half_coset(self, a1):
        assert coset_theta(a1, (Fraction(1, 2),), 5) == {Fraction(1, 2): 2, Fraction(9, 2): 2}

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_matches_vector_enumeration(self, a2):
        center = (Fraction(1, 3), Fraction(-1, 3))
        vectors = enumerate_below(a2, center, 10)
        shifted = [tuple(Fraction(x) + c for x, c in zip(v, center)) for v in vectors]
        histogram = {}
        for y in shifted:
            n = qform(a2, y)
            histogram[n] = histogram.get(n, 0) + 1
        assert coset_theta(a2, center, 10) == histogram


class TestChargeConfig:
    """电荷配置 (R, S, λ)"""

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_domains(self, e8):
        cfg = ChargeConfig(e8, 1, 7)
        assert cfg.domains() == (DOMAIN_NONNEG,) + (DOMAIN_Z,) * 7
        assert cfg.shift == (Fraction(0),) * 8

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_fixed_coordinates(self, e8):
        cfg = ChargeConfig(e8, 1, 2)
        assert cfg.domains()[3:] == (0,) * 5
        with pytest.raises(DomainViolation):
            cfg.check_charge((0, 0, 0, 1, 0, 0, 0, 0))

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_negative_r_coordinate(self, a1):
        with pytest.raises(DomainViolation):
            ChargeConfig(a1, 1, 0).check_charge((-1,))

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_too_many_free_coordinates(self, a2):
        with pytest.raises(DomainViolation):
            ChargeConfig(a2, 2, 1)

    @pytest.mark.unit
    @pytest.mark.lattice
    def test_shift_length(self, a2):
        with pytest.raises(DimensionMismatch):
            ChargeConfig(a2, 1, 0, (Fraction(1, 2),))
