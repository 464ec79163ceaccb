"""module for the operator constructions: shifts, the multiplication group, rank-one maps and super-maps"""

import logging
from collections.abc import Iterable, Sequence

import numpy as np
from scipy.linalg import polar

from ..core.config import DEFAULT_TOLERANCES, Tolerances
from ..core.exceptions import DimensionMismatchError, NonUnitaryError, NumericContractError
from ..core.models import (
    CUSTOM,
    BasisIndexing,
    BOperator,
    FamilyDescriptor,
    HVector,
    IndexingKind,
    OperatorFamily,
    SuperMap,
    SuperMapKind,
)

logger = logging.getLogger(__name__)


def _index_shift(indexing: BasisIndexing, offset: int) -> BOperator:
    """Matrix of e_k -> e_(k+offset), with images outside the truncation dropped."""
    matrix = np.zeros((indexing.dim, indexing.dim), dtype=np.complex128)
    for column, index in enumerate(indexing.indices):
        target = int(index) + offset
        if indexing.contains(target):
            matrix[indexing.position(target), column] = 1.0
    return BOperator(matrix)


def left_shift(indexing: BasisIndexing) -> BOperator:
    return _index_shift(indexing, -1)


def right_shift(indexing: BasisIndexing) -> BOperator:
    if indexing.kind is not IndexingKind.NATURAL:
        raise ValueError("the right shift is defined on the natural-indexed truncation")
    return _index_shift(indexing, 1)


def adjoint(T: BOperator) -> BOperator:
    return BOperator(T.matrix.conj().T)


def power_family(
    base: BOperator,
    exponents: Iterable[int],
    indexing: BasisIndexing,
    symbol: str = "T",
    descriptor: FamilyDescriptor = CUSTOM,
) -> OperatorFamily:
    members = []
    for n in exponents:
        if n < 0:
            raise ValueError(f"negative exponent {n}")
        members.append((f"{symbol}^{n}", BOperator(np.linalg.matrix_power(base.matrix, n))))
    return OperatorFamily(tuple(members), indexing, descriptor)


def _exact_sinc(z: np.ndarray) -> np.ndarray:
    integral = np.rint(z) == z
    return np.where(integral, (z == 0).astype(float), np.sinc(z))


def mult_group_element(t: float, n_modes: int | BasisIndexing) -> BOperator:
    """Multiplication by e^{itx} on the Fourier modes e_n ~ e^{inx} of L^2[-pi, pi].

    Entry <u_t e_n, e_m> = sinc(t + n - m); integer t gives the exact index shift by t.
    """
    if isinstance(n_modes, BasisIndexing):
        indexing = n_modes
    else:
        indexing = BasisIndexing(IndexingKind.INTEGER, n_modes)
    if indexing.kind is not IndexingKind.INTEGER:
        raise ValueError("the multiplication group lives on the Z-indexed Fourier truncation")
    n = indexing.indices
    z = t + n[None, :] - n[:, None]
    return BOperator(_exact_sinc(z.astype(float)).astype(np.complex128))


def _format_t(t: float) -> str:
    return f"{t:g}"


def mult_group_family(t_list: Sequence[float], indexing: BasisIndexing) -> OperatorFamily:
    members = tuple((f"u_{_format_t(t)}", mult_group_element(t, indexing)) for t in t_list)
    descriptor = FamilyDescriptor("mult_group", (("t_list", tuple(t_list)),))
    return OperatorFamily(members, indexing, descriptor)


def rank_one(x: HVector, y: HVector) -> BOperator:
    """(x ⊗ y) h = <h, y> x."""
    if x.dim != y.dim:
        raise DimensionMismatchError(f"rank_one of vectors of dimension {x.dim} and {y.dim}")
    return BOperator(np.outer(x.coords, y.coords.conj()))


def unitarity_defect(T: BOperator) -> float:
    gram = T.matrix.conj().T @ T.matrix
    return float(np.linalg.norm(gram - np.eye(T.dim), 2))


def is_truncated_unitary(T: BOperator, tolerances: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """A contraction whose columns are (near) unit vectors on at least half of the truncation."""
    if T.sigma_max > 1.0 + tolerances.norm:
        return False
    column_norms = np.linalg.norm(T.matrix, axis=0)
    isometric = np.count_nonzero(column_norms >= 1.0 - tolerances.unitary_column)
    return 2 * isometric >= T.dim


def check_ball(family: OperatorFamily, tolerances: Tolerances = DEFAULT_TOLERANCES) -> None:
    for label, op in family:
        if not op.in_ball(tolerances.norm):
            raise NumericContractError(
                f"member {label} has sigma_max {op.sigma_max:.12g} > 1 + {tolerances.norm:g}"
            )


def _identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def make_supermap(
    kind: SuperMapKind,
    operand: BOperator,
    label: str,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> SuperMap:
    dim = operand.dim
    if kind is SuperMapKind.LEFT_MULT:
        return SuperMap(kind, f"psi[{label}]", operand, operand.matrix, _identity(dim))
    if kind is SuperMapKind.RIGHT_MULT:
        return SuperMap(kind, f"phi[{label}]", operand, _identity(dim), operand.matrix)
    if kind is not SuperMapKind.CONJUGATION:
        raise ValueError(f"cannot build a super-map of kind {kind}")

    if not is_truncated_unitary(operand, tolerances):
        raise NonUnitaryError(f"member {label} is not unitary within tolerance")
    defect = unitarity_defect(operand)
    u = operand.matrix
    corrected = defect > tolerances.unitary_polar
    if corrected:
        u, _ = polar(u)
        logger.debug("conjugation operand %s replaced by its polar factor (defect %.3g)", label, defect)
    return SuperMap(
        kind, f"alpha[{label}]", BOperator(u), u, u.conj().T, unitarity_defect=defect, polar_corrected=corrected
    )


def apply_supermap(m: SuperMap, A: BOperator) -> BOperator:
    if A.dim != m.dim:
        raise DimensionMismatchError(f"super-map of dimension {m.dim} applied to dimension {A.dim}")
    return BOperator(m.left @ A.matrix @ m.right)


def supermap_family(
    family: OperatorFamily, kind: SuperMapKind, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> list[SuperMap]:
    return [make_supermap(kind, op, label, tolerances) for label, op in family]


def compose_supermaps(f: SuperMap, g: SuperMap) -> SuperMap:
    """f ∘ g : A -> f.left g.left A g.right f.right."""
    if f.dim != g.dim:
        raise DimensionMismatchError("super-maps of different dimensions cannot be composed")
    left = f.left @ g.left
    return SuperMap(
        SuperMapKind.COMPOSITE,
        f"{f.label}∘{g.label}",
        BOperator(left),
        left,
        g.right @ f.right,
        unitarity_defect=max(f.unitarity_defect, g.unitarity_defect),
        polar_corrected=f.polar_corrected or g.polar_corrected,
    )


def max_superdiagonal(family: OperatorFamily, tol: float = DEFAULT_TOLERANCES.banded_zero) -> int | None:
    """Largest j - i over nonzero entries t_(i,j) of any member (None for the zero family)."""
    best = None
    for op in family.operators:
        rows, cols = np.nonzero(np.abs(op.matrix) > tol)
        if len(rows):
            top = int((cols - rows).max())
            best = top if best is None else max(best, top)
    return best


def safe_window(family: OperatorFamily, tol: float = DEFAULT_TOLERANCES.banded_zero) -> tuple[int, int] | None:
    """Basis-index range at distance >= the family's index reach from every truncation boundary."""
    indexing = family.indexing
    indices = indexing.indices
    reach = 0
    for op in family.operators:
        rows, cols = np.nonzero(np.abs(op.matrix) > tol)
        if len(rows):
            reach = max(reach, int(np.abs(indices[rows] - indices[cols]).max()))
    lo, hi = int(indices.min()), int(indices.max())
    if indexing.kind is IndexingKind.INTEGER:
        lo += reach
    hi -= reach
    if lo > hi:
        return None
    return lo, hi
