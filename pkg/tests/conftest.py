"""
全局测试配置和 fixtures
"""
import pytest

from app.core.config import settings
from app.core.logging import setup_logging
from app.models.lattice import ChargeConfig, GramLattice
from app.services.characters import character_catalogue
from app.services.lattice import dual_weight, gram_builtin, omega2_e7


@pytest.fixture(scope="session", autouse=True)
def _logging():
    """测试期间日志输出到 stderr"""
    setup_logging(settings.log_level)


@pytest.fixture(scope="session")
def a1() -> GramLattice:
    return gram_builtin("A1")


@pytest.fixture(scope="session")
def a2() -> GramLattice:
    return gram_builtin("A2")


@pytest.fixture(scope="session")
def e7() -> GramLattice:
    return gram_builtin("E7")


@pytest.fixture(scope="session")
def e8() -> GramLattice:
    return gram_builtin("E8")


@pytest.fixture(scope="session")
def rr_vacuum_cfg(a1) -> ChargeConfig:
    """A1 主子空间：Σ q^{k²}/(q)_k"""
    return ChargeConfig(a1, 1, 0)


@pytest.fixture(scope="session")
def rr_module_cfg(a1) -> ChargeConfig:
    """A1 主子空间在 λ = ω 处的模：Σ q^{k²+k}/(q)_k"""
    return ChargeConfig(a1, 1, 0, dual_weight(a1, 1))


@pytest.fixture(scope="session")
def a2_principal_cfg(a2) -> ChargeConfig:
    return ChargeConfig(a2, 2, 0)


@pytest.fixture(scope="session")
def e7_lattice_cfg(e7) -> ChargeConfig:
    return ChargeConfig(e7, 0, 7)


@pytest.fixture(scope="session")
def e7_w2_cfg(e7) -> ChargeConfig:
    return ChargeConfig(e7, 0, 7, tuple(-x for x in omega2_e7()))


@pytest.fixture(scope="session")
def intermediate_cfg() -> ChargeConfig:
    """E8，R = {α1}，S = {α2..α8}"""
    return character_catalogue.config("v-e712")


@pytest.fixture(scope="session")
def intermediate_a1_cfg() -> ChargeConfig:
    return character_catalogue.config("v-e712-a1")
