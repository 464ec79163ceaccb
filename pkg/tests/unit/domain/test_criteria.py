"""Unit tests for the dimension criterion, its oracle, the banded check and the isometry check"""

import numpy as np
import pytest
from src.core.config import FamilySpec
from src.core.exceptions import ConfigValidationError, NotBoundedBelowError
from src.core.models import BasisIndexing, BOperator, HVector, IndexingKind, OperatorFamily
from src.services.criteria import banded_check, dim_criterion, dim_criterion_oracle, isometry_preimage_check
from src.services.families import FamilyFactory


@pytest.fixture
def natural64():
    return BasisIndexing(IndexingKind.NATURAL, 64)


def random_family(dim: int, members: int, rng: np.random.Generator) -> OperatorFamily:
    indexing = BasisIndexing(IndexingKind.NATURAL, dim)
    ops = []
    for m in range(members):
        matrix = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        ops.append((f"T_{m}", BOperator(matrix / np.linalg.norm(matrix, 2))))
    return OperatorFamily(tuple(ops), indexing)


class TestShiftDichotomy:
    """Test suite for the shift families on either side of the criterion"""

    def test_right_shifts_are_banded(self, natural16):
        """Test banded_check({S_r^n : n <= 10}, K=0) passes exactly"""
        family = FamilyFactory().create(FamilySpec(kind="right_shift_powers", n_max=10), natural16)

        result = banded_check(family, 0)

        assert result.passed
        assert result.violation is None

    def test_left_shifts_report_first_violation(self, natural16):
        """Test the first entry above the band is reported 1-based"""
        family = FamilyFactory().create(FamilySpec(kind="left_shift_powers", k_max=3), natural16)

        result = banded_check(family, 1)

        assert not result.passed
        assert result.violation == ("S^1", 1, 2, 1 + 0j)

    def test_adjoint_shifts_stabilize_for_a_fixed_family(self, natural64):
        """Test container_dim = 10 at truncations 16/32/64 for {(S_r*)^n : n <= 10}"""
        # Arrange
        family = FamilyFactory().create(FamilySpec(kind="adjoint_right_shift_powers", n_max=10), natural64)
        V = [HVector.basis(natural64, 1)]

        # Act
        report = dim_criterion(family, V, 0.5, [16, 32, 64])

        # Assert
        assert report.growth_trace == [(16, 10), (32, 10), (64, 10)]
        assert report.container_dim == 10
        assert report.verdict == "stabilizing"
        assert all(m.count_at_least_c == 1 for m in report.per_member)

    def test_adjoint_shifts_grow_when_the_family_scales(self, natural64):
        """Test container_dim = dim/2 and verdict "growing" when n_max = dim/2"""
        # Arrange
        spec = FamilySpec(kind="adjoint_right_shift_powers", scale="half_dim")
        source = FamilyFactory().scaled(spec, natural64)
        V = [HVector.basis(natural64, 1)]

        # Act
        report = dim_criterion(source, V, 0.5, [16, 32, 64])

        # Assert
        assert report.growth_trace == [(16, 8), (32, 16), (64, 32)]
        assert report.verdict == "growing"

    def test_single_rung_is_undetermined(self, natural16):
        """Test the verdict of a one-rung ladder"""
        family = FamilyFactory().create(FamilySpec(kind="adjoint_right_shift_powers", n_max=3), natural16)

        report = dim_criterion(family, [HVector.basis(natural16, 1)], 0.5)

        assert report.growth_trace == [(16, 3)]
        assert report.verdict == "undetermined"

    def test_compression_acts_on_the_complement_of_V(self, natural16):
        """Test {I} with V = e_1: P_V I vanishes on V^⊥, so nothing qualifies"""
        family = OperatorFamily((("I", BOperator.identity(16)),), natural16)

        report = dim_criterion(family, [HVector.basis(natural16, 1)], 0.5)

        assert max(report.per_member[0].singular_values) < 1e-12
        assert report.container_dim == 0


class TestBandedImpliesBoundedContainer:
    """Test suite for banded families under the dimension criterion"""

    def test_banded_families_have_empty_containers(self, natural16):
        """Test banded_check(K=0) => container_dim = 0 for V = F_N"""
        factory = FamilyFactory()
        families = [
            factory.create(FamilySpec(kind="right_shift_powers", n_max=10), natural16),
            factory.create(FamilySpec(kind="random_banded", members=4, seed=1), natural16),
        ]

        for family in families:
            assert banded_check(family, 0).passed
            for N in (1, 4, 8):
                V = [HVector.basis(natural16, i) for i in range(1, N + 1)]
                for c in (0.01, 0.5, 1.0):
                    assert dim_criterion(family, V, c).container_dim == 0


class TestOracleAgreement:
    """Test suite comparing singular counts with the randomized oracle"""

    def test_counts_bound_the_oracle(self):
        """Test oracle rank <= count per member, with equality on >= 95% of 50 instances"""
        # Arrange
        rng = np.random.default_rng(20)
        agree = 0
        total = 0

        for instance in range(50):
            family = random_family(12, 2, rng)
            V = [HVector.basis(family.indexing, i) for i in range(1, 5)]

            # Act
            report = dim_criterion(family, V, 0.5)
            for (label, op), member in zip(family, report.per_member, strict=True):
                single = OperatorFamily(((label, op),), family.indexing)
                oracle = dim_criterion_oracle(single, V, 0.5, trials=64, seed=instance)

                # Assert
                assert oracle <= member.count_at_least_c
                agree += oracle == member.count_at_least_c
                total += 1

        assert agree >= 0.95 * total

    def test_oracle_recovers_the_adjoint_shift_container(self, natural64):
        """Test oracle rank 10 for {(S_r*)^n : n <= 10} with 10^4 trials"""
        family = FamilyFactory().create(FamilySpec(kind="adjoint_right_shift_powers", n_max=10), natural64)

        oracle = dim_criterion_oracle(family, [HVector.basis(natural64, 1)], 0.5, trials=10_000, seed=4)

        assert oracle == 10

    def test_oracle_is_empty_below_c(self, natural64):
        """Test oracle rank 0 when every singular value is 0.2 < c"""
        # Arrange
        shifts = FamilyFactory().create(FamilySpec(kind="adjoint_right_shift_powers", n_max=10), natural64)
        family = OperatorFamily(tuple((label, BOperator(0.2 * op.matrix)) for label, op in shifts), natural64)

        # Act
        oracle = dim_criterion_oracle(family, [HVector.basis(natural64, 1)], 0.5, trials=1000, seed=5)

        # Assert
        assert oracle == 0

    def test_oracle_needs_trials(self, natural16):
        """Test the oracle's validation"""
        family = random_family(16, 1, np.random.default_rng(0))

        with pytest.raises(ConfigValidationError):
            dim_criterion_oracle(family, [HVector.basis(natural16, 1)], 0.5, trials=0, seed=0)


class TestCriterionValidation:
    """Test suite for dim_criterion input checks"""

    def test_invalid_inputs(self, natural16):
        """Test c range, ladder order and orthonormality of V"""
        family = FamilyFactory().create(FamilySpec(kind="right_shift_powers", n_max=2), natural16)
        e_1 = HVector.basis(natural16, 1)

        with pytest.raises(ConfigValidationError):
            dim_criterion(family, [e_1], 1.5)
        with pytest.raises(ConfigValidationError, match="ladder not increasing"):
            dim_criterion(family, [e_1], 0.5, [16, 8])
        with pytest.raises(ConfigValidationError, match="not orthonormal"):
            dim_criterion(family, [e_1, e_1], 0.5)
        with pytest.raises(ConfigValidationError, match="not inside truncation"):
            dim_criterion(family, [HVector.basis(natural16, 12)], 0.5, [8, 16])


class TestIsometryPreimage:
    """Test suite for isometry_preimage_check"""

    def test_adjoint_shift_preimages(self, natural64):
        """Test the preimage trace of the adjoint shifts over V = F_4"""
        # Arrange
        family = FamilyFactory().create(FamilySpec(kind="adjoint_right_shift_powers", n_max=10), natural64)
        V = [HVector.basis(natural64, i) for i in range(1, 5)]

        # Act
        report = isometry_preimage_check(family, V, [16, 32, 64])

        # Assert
        assert report.beta == pytest.approx(1.0)
        assert report.growth_trace == [(16, 10), (32, 10), (64, 10)]
        assert report.verdict == "stabilizing"

    def test_not_bounded_below(self, natural16):
        """Test that a member without an isometric window is rejected"""
        family = OperatorFamily((("zero", BOperator(np.zeros((16, 16)))),), natural16)

        with pytest.raises(NotBoundedBelowError):
            isometry_preimage_check(family, [HVector.basis(natural16, 1)])
