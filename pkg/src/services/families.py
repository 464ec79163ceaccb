"""module for building operator families from their configuration descriptors"""

import logging
from collections.abc import Callable
from pathlib import Path

import numpy as np

from ..core.config import FamilySpec
from ..core.exceptions import ConfigValidationError, DimensionMismatchError
from ..core.models import BasisIndexing, BOperator, FamilyDescriptor, IndexingKind, OperatorFamily
from ..repositories.matrix_csv import read_matrix_csv
from .operators import adjoint, left_shift, mult_group_family, power_family, right_shift

logger = logging.getLogger(__name__)

FamilyBuilder = Callable[[FamilySpec, BasisIndexing], OperatorFamily]

# lower band width of the seeded banded contractions
RANDOM_BAND_DEPTH = 3


def _count(spec: FamilySpec, name: str, indexing: BasisIndexing) -> int:
    if spec.scale == "half_dim":
        return indexing.dim // 2
    return getattr(spec, name)


def _descriptor(spec: FamilySpec, **params: object) -> FamilyDescriptor:
    return FamilyDescriptor(spec.kind, tuple(sorted(params.items())))


def _left_shift_powers(spec: FamilySpec, indexing: BasisIndexing) -> OperatorFamily:
    k_max = _count(spec, "k_max", indexing)
    return power_family(
        left_shift(indexing), range(1, k_max + 1), indexing, "S", _descriptor(spec, k_max=k_max)
    )


def _right_shift_powers(spec: FamilySpec, indexing: BasisIndexing) -> OperatorFamily:
    n_max = _count(spec, "n_max", indexing)
    return power_family(
        right_shift(indexing), range(1, n_max + 1), indexing, "S_r", _descriptor(spec, n_max=n_max)
    )


def _adjoint_right_shift_powers(spec: FamilySpec, indexing: BasisIndexing) -> OperatorFamily:
    n_max = _count(spec, "n_max", indexing)
    return power_family(
        adjoint(right_shift(indexing)),
        range(1, n_max + 1),
        indexing,
        "S_r*",
        _descriptor(spec, n_max=n_max),
    )


def _mult_group(spec: FamilySpec, indexing: BasisIndexing) -> OperatorFamily:
    family = mult_group_family(spec.t_list, indexing)
    return OperatorFamily(family.members, indexing, _descriptor(spec, t_list=tuple(spec.t_list)))


def _random_banded(spec: FamilySpec, indexing: BasisIndexing) -> OperatorFamily:
    """Seeded contractions with t_(i,j) = 0 whenever j - i >= K or i - j > K + RANDOM_BAND_DEPTH."""
    rng = np.random.default_rng(spec.seed)
    offsets = np.subtract.outer(np.arange(indexing.dim), np.arange(indexing.dim))
    mask = (-offsets < spec.K) & (offsets <= spec.K + RANDOM_BAND_DEPTH)
    members = []
    for m in range(spec.members):
        shape = (indexing.dim, indexing.dim)
        matrix = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * mask
        norm = np.linalg.norm(matrix, 2)
        if norm > 0:
            matrix /= norm
        members.append((f"B_{m + 1}", BOperator(matrix)))
    return OperatorFamily(tuple(members), indexing, _descriptor(spec, members=spec.members, K=spec.K, seed=spec.seed))


class FamilyFactory:
    """Registry of family builders keyed by descriptor kind."""

    def __init__(self, base_dir: str | Path = ".") -> None:
        self.base_dir = Path(base_dir)
        self.__builders: dict[str, FamilyBuilder] = {
            "left_shift_powers": _left_shift_powers,
            "right_shift_powers": _right_shift_powers,
            "adjoint_right_shift_powers": _adjoint_right_shift_powers,
            "mult_group": _mult_group,
            "conjugation_group": _mult_group,
            "random_banded": _random_banded,
            "custom": self._custom,
        }

    def register_builder(self, kind: str, builder: FamilyBuilder) -> None:
        self.__builders[kind] = builder

    def create(self, spec: FamilySpec, indexing: BasisIndexing) -> OperatorFamily:
        builder = self.__builders.get(spec.kind)
        if builder is None:
            raise ConfigValidationError(f"family kind '{spec.kind}' is not supported")
        if spec.kind in ("mult_group", "conjugation_group") and indexing.kind is not IndexingKind.INTEGER:
            raise ConfigValidationError(f"family '{spec.kind}' needs the integer (Fourier) indexing")
        if spec.kind == "right_shift_powers" and indexing.kind is not IndexingKind.NATURAL:
            raise ConfigValidationError("family 'right_shift_powers' needs the natural indexing")
        family = builder(spec, indexing)
        logger.debug("built family %s with %d members at dim %d", spec.kind, len(family), indexing.dim)
        return family

    def scaled(self, spec: FamilySpec, indexing: BasisIndexing) -> Callable[[int], OperatorFamily]:
        """Per-rung builder for ladders whose family grows with the truncation."""
        return lambda dim: self.create(spec, indexing.resized(dim))

    def _custom(self, spec: FamilySpec, indexing: BasisIndexing) -> OperatorFamily:
        labels = spec.labels or [Path(name).stem for name in spec.matrix_files]
        if len(labels) != len(spec.matrix_files):
            raise ConfigValidationError("custom family needs one label per matrix file")
        members = []
        for label, name in zip(labels, spec.matrix_files, strict=True):
            path = Path(name) if Path(name).is_absolute() else self.base_dir / name
            matrix = read_matrix_csv(path)
            if matrix.shape[0] != indexing.dim:
                raise DimensionMismatchError(
                    f"matrix {path} has dimension {matrix.shape[0]}, truncation is {indexing.dim}"
                )
            members.append((label, BOperator(matrix)))
        return OperatorFamily(tuple(members), indexing, _descriptor(spec, matrix_files=tuple(spec.matrix_files)))
