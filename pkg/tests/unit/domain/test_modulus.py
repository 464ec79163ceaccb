"""Unit tests for modulus estimation and the curve-level checks"""

import numpy as np
import pytest
from src.core.config import DEFAULT_DELTAS, FamilySpec
from src.core.exceptions import CompositionCapError, ConfigValidationError
from src.core.models import BasisIndexing, BOperator, HVector, IndexingKind, OperatorFamily, SuperMapKind
from src.services.families import FamilyFactory
from src.services.modulus import (
    composition_modulus_check,
    ec_equals_uec_check,
    envelope,
    estimate_modulus_supermaps,
    estimate_modulus_vectors,
)
from src.services.operators import make_supermap, mult_group_family, safe_window, supermap_family
from src.services.space import build_scheme, rho

DELTAS = list(DEFAULT_DELTAS)


def single(label: str, matrix: np.ndarray, indexing: BasisIndexing) -> OperatorFamily:
    return OperatorFamily(((label, BOperator(matrix)),), indexing)


def banded(members: int, seed: int, indexing: BasisIndexing) -> OperatorFamily:
    return FamilyFactory().create(FamilySpec(kind="random_banded", members=members, seed=seed), indexing)


def contraction(seed: int, indexing: BasisIndexing) -> OperatorFamily:
    rng = np.random.default_rng(seed)
    dim = indexing.dim
    matrix = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return single(f"C_{seed}", matrix / np.linalg.norm(matrix, 2), indexing)


class TestVectorModulus:
    """Test suite for estimate_modulus_vectors"""

    def test_zero_family(self, natural16, scheme16):
        """Test omega = 0 for {0}"""
        curve = estimate_modulus_vectors(single("0", np.zeros((16, 16)), natural16), scheme16, DELTAS, 200, 1)

        assert curve.omega_hat == [0.0] * len(DELTAS)

    def test_identity_family(self, natural16, scheme16):
        """Test omega(delta) in [0.95 delta, delta] for {I}"""
        curve = estimate_modulus_vectors(single("I", np.eye(16), natural16), scheme16, DELTAS, 200, 1)

        for delta, omega in zip(DELTAS, curve.omega_hat, strict=True):
            assert 0.95 * delta <= omega <= delta
        assert curve.method == "structured+sampling+local_search"
        assert curve.samples_per_delta >= 200

    def test_left_shift_powers_stay_away_from_zero(self, integer128, scheme128):
        """Test omega >= c0 once delta exceeds rho(e_k, e_(k+1)) at the edge of the safe window"""
        # Arrange
        family = FamilyFactory().create(FamilySpec(kind="left_shift_powers", k_max=40), integer128)
        _, hi = safe_window(family)
        edge = rho(HVector.basis(integer128, hi - 1), HVector.basis(integer128, hi), scheme128).value

        # Act
        curve = estimate_modulus_vectors(family, scheme128, DELTAS, 100, 3)

        # Assert
        for delta, omega in zip(DELTAS, curve.omega_hat, strict=True):
            if delta >= edge:
                assert omega >= scheme128.c0

    def test_more_budget_never_lowers_the_curve(self, natural16, scheme16):
        """Test monotonicity under candidate-set growth"""
        family = banded(3, 4, natural16)

        small = estimate_modulus_vectors(family, scheme16, DELTAS, 100, 9)
        large = estimate_modulus_vectors(family, scheme16, DELTAS, 400, 9)

        assert all(b >= a for a, b in zip(small.omega_hat, large.omega_hat, strict=True))

    def test_curve_is_nondecreasing(self, natural16, scheme16):
        """Test the running-maximum post-processing"""
        curve = estimate_modulus_vectors(contraction(2, natural16), scheme16, DELTAS, 200, 2)

        assert curve.omega_hat == envelope(curve.omega_hat)
        assert envelope([0.3, 0.1, 0.2]) == [0.3, 0.3, 0.3]

    def test_invalid_inputs(self, natural16, scheme16):
        """Test grid, budget and family validation"""
        family = single("I", np.eye(16), natural16)

        with pytest.raises(ConfigValidationError):
            estimate_modulus_vectors(family, scheme16, [1e-2, 1e-3], 200, 0)
        with pytest.raises(ConfigValidationError):
            estimate_modulus_vectors(family, scheme16, DELTAS, 50, 0)
        with pytest.raises(ValueError):
            estimate_modulus_vectors(OperatorFamily((), natural16), scheme16, DELTAS, 200, 0)


class TestSuperMapModulus:
    """Test suite for estimate_modulus_supermaps"""

    def test_conjugation_by_identity(self, scheme16):
        """Test omega(delta) in [0.95 delta, delta] for {alpha_I}"""
        maps = [make_supermap(SuperMapKind.CONJUGATION, BOperator.identity(16), "I")]

        curve = estimate_modulus_supermaps(maps, scheme16, DELTAS, 200, 4)

        for delta, omega in zip(DELTAS, curve.omega_hat, strict=True):
            assert 0.95 * delta <= omega <= delta

    def test_left_multiplication_by_right_shifts(self, natural16, scheme16):
        """Test that {psi_(S_r^n)} is UEC-consistent"""
        family = FamilyFactory().create(FamilySpec(kind="right_shift_powers", n_max=3), natural16)
        maps = supermap_family(family, SuperMapKind.LEFT_MULT)

        curve = estimate_modulus_supermaps(maps, scheme16, DELTAS, 200, 5)

        assert curve.omega_hat[DELTAS.index(1e-3)] < 0.05
        assert curve.omega_hat[0] < curve.omega_hat[-1]

    def test_integer_automorphisms_stay_away_from_zero(self):
        """Test omega bounded below for conjugation by integer u_k"""
        # Arrange
        indexing = BasisIndexing(IndexingKind.INTEGER, 64)
        scheme = build_scheme(indexing, L=8, net_depth=0, seed=5)
        maps = supermap_family(mult_group_family(range(-10, 11), indexing), SuperMapKind.CONJUGATION)

        # Act
        curve = estimate_modulus_supermaps(maps, scheme, DELTAS, 100, 6)

        # Assert
        assert min(curve.omega_hat) >= 0.3


class TestEcEqualsUec:
    """Test suite for ec_equals_uec_check"""

    def test_identity(self, natural16, scheme16):
        """Test that uniform and pointwise curves agree for {I}"""
        report = ec_equals_uec_check(single("I", np.eye(16), natural16), scheme16, 4, 200, 1)

        uniform = report.curves["uniform"].omega_hat
        pointwise = report.curves["pointwise"].omega_hat
        assert report.holds
        assert all(abs(u - p) <= 0.05 for u, p in zip(uniform, pointwise, strict=True))
        assert report.notes["delta_factor"] == pytest.approx(1.05)

    def test_left_shift_powers(self, integer128, scheme128):
        """Test that both curves carry the shift certificate constant"""
        family = FamilyFactory().create(FamilySpec(kind="left_shift_powers", k_max=40), integer128)

        report = ec_equals_uec_check(family, scheme128, 2, 100, 3)

        assert report.holds
        assert min(report.curves["uniform"].omega_hat) >= scheme128.c0
        assert min(report.curves["pointwise"].omega_hat) >= scheme128.c0

    def test_seeded_families(self, natural16, scheme16):
        """Test uniform <= pointwise max + 0.05 for five seeded families"""
        for seed in range(5):
            family = contraction(seed, natural16) if seed % 2 else banded(2, seed, natural16)

            report = ec_equals_uec_check(family, scheme16, 8, 200, seed)

            assert report.holds
            assert report.max_violation == 0.0

    def test_sampled_bases_give_an_independent_curve(self, natural16, scheme16):
        """Test the witness-free pointwise curve stays below the anchored one"""
        # Arrange
        family = contraction(3, natural16)

        # Act
        report = ec_equals_uec_check(family, scheme16, 8, 200, 3)

        # Assert
        anchored = report.curves["pointwise"].omega_hat
        sampled = report.curves["pointwise_sampled"].omega_hat
        assert all(s <= a for s, a in zip(sampled, anchored, strict=True))
        assert report.notes["independent_max_violation"] >= report.max_violation
        assert isinstance(report.notes["independent_holds"], bool)

    def test_identity_passes_without_anchors(self, natural16, scheme16):
        """Test independent_holds for {I}"""
        report = ec_equals_uec_check(single("I", np.eye(16), natural16), scheme16, 4, 200, 1)

        assert report.notes["independent_holds"]

    def test_needs_a_base_point(self, natural16, scheme16):
        """Test base point validation"""
        with pytest.raises(ConfigValidationError):
            ec_equals_uec_check(single("I", np.eye(16), natural16), scheme16, 0, 200, 1)


class TestCompositionCheck:
    """Test suite for composition_modulus_check"""

    def test_identity_compositions(self, natural16, scheme16):
        """Test F = G = {I} gives three equal curves"""
        identity = single("I", np.eye(16), natural16)

        report = composition_modulus_check(identity, identity, scheme16, DELTAS, 200, 1)

        assert report.holds
        assert np.allclose(report.curves["F"].omega_hat, report.curves["G"].omega_hat)
        assert np.allclose(report.curves["F∘G"].omega_hat, report.curves["G"].omega_hat)
        assert report.notes["composed_members"] == 1
        assert report.notes["independent_holds"]

    def test_seeded_banded_pairs(self, natural16, scheme16):
        """Test the composition inequality for ten seeded banded pairs"""
        for seed in range(10):
            F = banded(2, 100 + seed, natural16)
            G = banded(2, 200 + seed, natural16)

            report = composition_modulus_check(F, G, scheme16, DELTAS, 200, seed)

            assert report.holds, f"seed {seed}: violation {report.max_violation}"

    def test_own_candidates_give_an_independent_bound(self, natural16, scheme16):
        """Test F scored without the G-images never exceeds the shared F curve"""
        # Arrange
        F = contraction(4, natural16)
        G = banded(2, 7, natural16)

        # Act
        report = composition_modulus_check(F, G, scheme16, DELTAS, 200, 4)

        # Assert
        own = report.curves["F_own"].omega_hat
        shared = report.curves["F"].omega_hat
        assert all(o <= s for o, s in zip(own, shared, strict=True))
        assert all(o <= b for o, b in zip(report.notes["independent_bound"], report.notes["bound"], strict=True))
        assert isinstance(report.notes["independent_holds"], bool)

    def test_multiplication_then_conjugation(self):
        """Test psi_(u_t) composed with phi_(u_-t) contains the automorphisms"""
        # Arrange
        indexing = BasisIndexing(IndexingKind.INTEGER, 16)
        scheme = build_scheme(indexing, L=4, net_depth=0, seed=2)
        F = supermap_family(mult_group_family([0.5, 1.0], indexing), SuperMapKind.LEFT_MULT)
        G = supermap_family(mult_group_family([-0.5, -1.0], indexing), SuperMapKind.RIGHT_MULT)

        # Act
        report = composition_modulus_check(F, G, scheme, DELTAS, 200, 3)

        # Assert
        assert report.holds
        assert report.notes["composed_members"] == 4

    def test_errors(self, natural16, scheme16):
        """Test cap and kind validation"""
        F = banded(2, 1, natural16)
        maps = supermap_family(F, SuperMapKind.LEFT_MULT)

        with pytest.raises(CompositionCapError):
            composition_modulus_check(F, F, scheme16, DELTAS, 200, 0, cap=3)
        with pytest.raises(ConfigValidationError):
            composition_modulus_check(F, maps, scheme16, DELTAS, 200, 0)
