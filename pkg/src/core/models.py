"""module for the domain models shared by every service"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np


class IndexingKind(str, Enum):
    NATURAL = "natural"
    INTEGER = "integer"


@dataclass(frozen=True)
class BasisIndexing:
    """Enumeration of an abstract basis (over N or Z) onto storage positions 0..dim-1.

    Integer bases are enumerated 0, 1, -1, 2, -2, ... so growing the truncation
    only appends positions.
    """

    kind: IndexingKind
    dim: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("truncation dimension must be positive")

    def position(self, index: int) -> int:
        if self.kind is IndexingKind.NATURAL:
            pos = index - 1
        elif index > 0:
            pos = 2 * index - 1
        else:
            pos = -2 * index
        if not 0 <= pos < self.dim or (self.kind is IndexingKind.NATURAL and index < 1):
            raise KeyError(f"basis index {index} is not retained at dimension {self.dim}")
        return pos

    def index(self, position: int) -> int:
        if not 0 <= position < self.dim:
            raise KeyError(f"position {position} outside 0..{self.dim - 1}")
        if self.kind is IndexingKind.NATURAL:
            return position + 1
        if position % 2:
            return (position + 1) // 2
        return -(position // 2)

    def contains(self, index: int) -> bool:
        try:
            self.position(index)
        except KeyError:
            return False
        return True

    @cached_property
    def indices(self) -> np.ndarray:
        return np.array([self.index(p) for p in range(self.dim)], dtype=int)

    @property
    def max_index(self) -> int:
        return int(self.indices.max())

    def block_positions(self, n: int) -> np.ndarray:
        """Storage positions spanning F_n: e_1..e_n, or e_-n..e_n on Z."""
        if self.kind is IndexingKind.NATURAL:
            return np.arange(min(n, self.dim))
        return np.arange(min(2 * n + 1, self.dim))

    def resized(self, dim: int) -> BasisIndexing:
        return BasisIndexing(self.kind, dim)


@dataclass(frozen=True, eq=False)
class HVector:
    """Coordinate vector of the truncated Hilbert space."""

    coords: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=np.complex128).reshape(-1))

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def in_ball(self, tol: float = 1e-9) -> bool:
        return self.norm <= 1.0 + tol

    @classmethod
    def basis(cls, indexing: BasisIndexing, index: int) -> HVector:
        coords = np.zeros(indexing.dim, dtype=np.complex128)
        coords[indexing.position(index)] = 1.0
        return cls(coords)

    @classmethod
    def zero(cls, dim: int) -> HVector:
        return cls(np.zeros(dim, dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class BOperator:
    """Truncated operator; entry (i, j) is <T e_j, e_i> in storage order."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {matrix.shape}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def sigma_max(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def in_ball(self, tol: float = 1e-9) -> bool:
        return self.sigma_max <= 1.0 + tol

    def __matmul__(self, other: BOperator) -> BOperator:
        return BOperator(self.matrix @ other.matrix)

    def apply(self, x: HVector) -> HVector:
        return HVector(self.matrix @ x.coords)

    def leading_block(self, dim: int) -> BOperator:
        return BOperator(self.matrix[:dim, :dim])

    @classmethod
    def identity(cls, dim: int) -> BOperator:
        return cls(np.eye(dim, dtype=np.complex128))


@dataclass(frozen=True)
class FamilyDescriptor:
    """Generator tag of an operator family."""

    kind: str
    params: tuple[tuple[str, object], ...] = ()

    def get(self, name: str, default: object = None) -> object:
        return dict(self.params).get(name, default)


CUSTOM = FamilyDescriptor("custom")


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    members: tuple[tuple[str, BOperator], ...]
    indexing: BasisIndexing
    descriptor: FamilyDescriptor = CUSTOM

    def __post_init__(self) -> None:
        dims = {op.dim for _, op in self.members}
        if dims and dims != {self.indexing.dim}:
            raise ValueError(f"family members have dimensions {sorted(dims)}, expected {self.indexing.dim}")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.members]

    @property
    def operators(self) -> list[BOperator]:
        return [op for _, op in self.members]

    @property
    def dim(self) -> int:
        return self.indexing.dim

    def stacked(self) -> np.ndarray:
        return np.stack([op.matrix for op in self.operators])

    def leading_block(self, dim: int) -> OperatorFamily:
        return OperatorFamily(
            tuple((label, op.leading_block(dim)) for label, op in self.members),
            self.indexing.resized(dim),
            self.descriptor,
        )


class SuperMapKind(str, Enum):
    LEFT_MULT = "left_mult"
    RIGHT_MULT = "right_mult"
    CONJUGATION = "conjugation"
    COMPOSITE = "composite"


@dataclass(frozen=True, eq=False)
class SuperMap:
    """Linear map A -> left @ A @ right on the operator ball."""

    kind: SuperMapKind
    label: str
    operand: BOperator
    left: np.ndarray
    right: np.ndarray
    unitarity_defect: float = 0.0
    # conjugation operand replaced by its polar factor
    polar_corrected: bool = False

    @property
    def dim(self) -> int:
        return self.operand.dim


@dataclass(frozen=True, eq=False)
class MetricScheme:
    """Stored prefix h_1..h_M of the dense sequence, as columns of `h`."""

    indexing: BasisIndexing
    h: np.ndarray
    schedule: tuple[int, ...]
    net_quality: tuple[float, ...]
    seed: int
    # 1-based position of the last h in block n (e_n followed by its net)
    block_ends: tuple[int, ...] = ()

    @property
    def M(self) -> int:
        return self.h.shape[1]

    @property
    def tail_bound(self) -> float:
        return 2.0 ** (1 - self.M)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.ldexp(1.0, -np.arange(1, self.M + 1))

    @cached_property
    def h_adjoint(self) -> np.ndarray:
        return np.ascontiguousarray(self.h.conj().T)

    @cached_property
    def live_columns(self) -> int:
        """Columns whose weight 2^-i is still a nonzero double."""
        return int(np.count_nonzero(self.weights))

    @property
    def c0(self) -> float:
        """Separation constant 2^-a_1 contributed by h_{a_1} = e_1."""
        return 2.0 ** -self.schedule[0]

    @cached_property
    def scheme_id(self) -> str:
        digest = hashlib.sha256()
        digest.update(f"{self.indexing.kind.value}:{self.indexing.dim}:{self.seed}".encode())
        digest.update(np.ascontiguousarray(self.h).tobytes())
        return digest.hexdigest()[:16]


@dataclass(frozen=True)
class MetricValue:
    value: float
    truncation_error: float


@dataclass
class MemberCompression:
    label: str
    singular_values: list[float]
    count_at_least_c: int


@dataclass
class DimCriterionReport:
    V_basis: list[HVector]
    c: float
    per_member: list[MemberCompression]
    container_dim: int
    growth_trace: list[tuple[int, int]]
    verdict: str


@dataclass
class BandedResult:
    passed: bool
    violation: tuple[str, int, int, complex] | None = None


@dataclass
class PreimageReport:
    beta: float
    growth_trace: list[tuple[int, int]]
    verdict: str


@dataclass
class ModulusCurve:
    deltas: list[float]
    omega_hat: list[float]
    method: str
    samples_per_delta: int
    seed: int


@dataclass
class NonUecCertificate:
    member_label: str
    input_dist: float
    output_dist: float
    scheme_id: str
    x: HVector | None = None
    y: HVector | None = None
    A: BOperator | None = None
    B: BOperator | None = None

    @property
    def gain(self) -> float:
        return self.output_dist / max(self.input_dist, float(np.finfo(float).eps))


@dataclass
class ModulusComparison:
    """Two or more curves on one delta grid plus the inequality verdict."""

    curves: dict[str, ModulusCurve]
    holds: bool
    max_violation: float
    slack: float
    notes: dict[str, object] = field(default_factory=dict)


@dataclass
class CorrespondenceVerdict:
    verdict: str
    vector_certificate: NonUecCertificate | None
    operator_certificate: NonUecCertificate | None
    lifted_certificate: NonUecCertificate | None
    lifted_valid: bool
    curves: dict[str, ModulusCurve] = field(default_factory=dict)
    automorphisms: list[SuperMap] = field(default_factory=list)
