"""Unit tests for the family factory and matrix CSV files"""

import numpy as np
import pytest
from src.core.config import FamilySpec
from src.core.exceptions import ConfigValidationError, DimensionMismatchError
from src.core.models import BasisIndexing, IndexingKind
from src.repositories.matrix_csv import read_matrix_csv, write_matrix_csv
from src.services.families import FamilyFactory
from src.services.operators import max_superdiagonal


@pytest.fixture
def factory(tmp_path):
    """Create a factory resolving custom matrices under tmp_path"""
    return FamilyFactory(tmp_path)


class TestFamilyFactory:
    """Test suite for descriptor-driven family construction"""

    def test_shift_families(self, factory, natural16):
        """Test labels and sizes of the shift families"""
        right = factory.create(FamilySpec(kind="right_shift_powers", n_max=3), natural16)
        adjoints = factory.create(FamilySpec(kind="adjoint_right_shift_powers", n_max=2), natural16)
        left = factory.create(FamilySpec(kind="left_shift_powers", k_max=4), natural16)

        assert right.labels == ["S_r^1", "S_r^2", "S_r^3"]
        assert adjoints.labels == ["S_r*^1", "S_r*^2"]
        assert len(left) == 4
        assert right.descriptor.get("n_max") == 3

    def test_half_dim_scaling(self, factory, natural16):
        """Test that scaled families follow the truncation"""
        spec = FamilySpec(kind="adjoint_right_shift_powers", scale="half_dim")

        build = factory.scaled(spec, natural16)

        assert len(factory.create(spec, natural16)) == 8
        assert len(build(32)) == 16
        assert build(32).dim == 32

    def test_random_banded_is_seeded_and_strictly_lower(self, factory, natural16):
        """Test that random banded families are reproducible contractions below the diagonal"""
        spec = FamilySpec(kind="random_banded", members=3, seed=12)

        first = factory.create(spec, natural16)
        second = factory.create(spec, natural16)

        assert first.labels == ["B_1", "B_2", "B_3"]
        assert all(np.array_equal(a.matrix, b.matrix) for a, b in zip(first.operators, second.operators, strict=True))
        assert max_superdiagonal(first) == -1
        assert all(op.sigma_max == pytest.approx(1.0) for op in first.operators)

    def test_mult_group_needs_fourier_modes(self, factory, natural16):
        """Test indexing requirements of the descriptors"""
        with pytest.raises(ConfigValidationError):
            factory.create(FamilySpec(kind="mult_group", t_list=[0.0]), natural16)
        with pytest.raises(ConfigValidationError):
            factory.create(
                FamilySpec(kind="right_shift_powers", n_max=1), BasisIndexing(IndexingKind.INTEGER, 9)
            )

    def test_register_builder(self, factory, natural16):
        """Test that new descriptor kinds can be registered"""
        spec = FamilySpec(kind="custom", matrix_files=["unused.csv"])
        sentinel = factory.create(FamilySpec(kind="right_shift_powers", n_max=1), natural16)
        factory.register_builder("custom", lambda s, indexing: sentinel)

        assert factory.create(spec, natural16) is sentinel

    def test_custom_family_from_csv(self, factory, tmp_path, natural16):
        """Test custom families read from matrix CSV files"""
        # Arrange
        matrix = np.zeros((16, 16), dtype=complex)
        matrix[0, 1] = 0.5 + 0.25j
        write_matrix_csv(tmp_path / "half.csv", matrix)

        # Act
        family = factory.create(FamilySpec(kind="custom", matrix_files=["half.csv"]), natural16)

        # Assert
        assert family.labels == ["half"]
        assert np.array_equal(family.operators[0].matrix, matrix)

    def test_custom_family_dimension_mismatch(self, factory, tmp_path, natural16):
        """Test that a matrix of the wrong size is rejected"""
        write_matrix_csv(tmp_path / "small.csv", np.eye(4))

        with pytest.raises(DimensionMismatchError):
            factory.create(FamilySpec(kind="custom", matrix_files=["small.csv"]), natural16)


class TestMatrixCsv:
    """Test suite for the "re,im" matrix format"""

    def test_cells_are_re_im_pairs(self, tmp_path):
        """Test row-major layout with quoted "re,im" cells"""
        path = write_matrix_csv(tmp_path / "m.csv", np.array([[1.0, 0.5j], [0.0, -2.0]]))

        lines = path.read_text().splitlines()

        assert lines == ['"1,0","0,0.5"', '"0,0","-2,0"']

    def test_twelve_digit_round_trip(self, tmp_path):
        """Test that reading back reproduces 12 significant digits"""
        rng = np.random.default_rng(0)
        matrix = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))

        restored = read_matrix_csv(write_matrix_csv(tmp_path / "r.csv", matrix))

        assert np.allclose(restored, matrix, rtol=1e-11, atol=1e-12)

    def test_malformed_files(self, tmp_path):
        """Test validation errors for unreadable or non-square files"""
        (tmp_path / "bad.csv").write_text('"1,0","x,0"\n"0,0","1,0"\n')
        (tmp_path / "rect.csv").write_text('"1,0","0,0"\n')

        with pytest.raises(ConfigValidationError):
            read_matrix_csv(tmp_path / "bad.csv")
        with pytest.raises(ConfigValidationError):
            read_matrix_csv(tmp_path / "rect.csv")
        with pytest.raises(ConfigValidationError):
            read_matrix_csv(tmp_path / "missing.csv")
