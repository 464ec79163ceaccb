"""module for the finite decision engines: dimension criterion, its oracle, banded and isometry checks"""

import logging
from collections.abc import Callable, Sequence

import numpy as np
from scipy.linalg import null_space, svdvals

from ..core.config import DEFAULT_TOLERANCES, Tolerances
from ..core.exceptions import ConfigValidationError, NotBoundedBelowError
from ..core.models import (
    BandedResult,
    DimCriterionReport,
    HVector,
    MemberCompression,
    OperatorFamily,
    PreimageReport,
)

logger = logging.getLogger(__name__)

FamilySource = OperatorFamily | Callable[[int], OperatorFamily]

ORACLE_REFINED_STARTS = 32
ORACLE_POWER_STEPS = 60


def _family_at(source: FamilySource, dim: int) -> OperatorFamily:
    if isinstance(source, OperatorFamily):
        if dim > source.dim:
            raise ConfigValidationError(f"truncation {dim} exceeds the family dimension {source.dim}")
        return source if dim == source.dim else source.leading_block(dim)
    family = source(dim)
    if family.dim != dim:
        raise ConfigValidationError(f"family factory returned dimension {family.dim} for rung {dim}")
    return family


def _ladder(source: FamilySource, truncation_dims: Sequence[int] | None) -> list[int]:
    if not truncation_dims:
        if not isinstance(source, OperatorFamily):
            raise ConfigValidationError("a scaled family needs an explicit truncation ladder")
        return [source.dim]
    dims = list(truncation_dims)
    if any(b <= a for a, b in zip(dims, dims[1:], strict=False)):
        raise ConfigValidationError("ladder not increasing")
    return dims


def _subspace(V_basis: Sequence[HVector], dim: int, tolerances: Tolerances) -> np.ndarray:
    """Columns of V restricted to the first `dim` storage positions."""
    if not V_basis:
        raise ConfigValidationError("V_basis must contain at least one vector")
    columns = []
    for v in V_basis:
        coords = v.coords
        if coords.shape[0] > dim:
            if np.abs(coords[dim:]).max() > tolerances.identity:
                raise ConfigValidationError(f"V not inside truncation of dimension {dim}")
            coords = coords[:dim]
        elif coords.shape[0] < dim:
            coords = np.concatenate([coords, np.zeros(dim - coords.shape[0], dtype=np.complex128)])
        columns.append(coords)
    V = np.column_stack(columns)
    gram = V.conj().T @ V
    if np.abs(gram - np.eye(V.shape[1])).max() > tolerances.norm:
        raise ConfigValidationError("V_basis is not orthonormal")
    return V


def _rank(columns: list[np.ndarray], tol: float) -> int:
    if not columns:
        return 0
    stacked = np.hstack(columns)
    if stacked.shape[1] == 0:
        return 0
    return int(np.count_nonzero(svdvals(stacked) > tol))


def _svd(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if 0 in matrix.shape:
        rows, cols = matrix.shape
        return np.zeros((rows, 0)), np.zeros(0), np.zeros((0, cols), dtype=np.complex128)
    return np.linalg.svd(matrix, full_matrices=False)


def _verdict(trace: list[tuple[int, int]]) -> str:
    if len(trace) < 2:
        return "undetermined"
    return "stabilizing" if trace[-1][1] == trace[-2][1] else "growing"


def dim_criterion(
    family: FamilySource,
    V_basis: Sequence[HVector],
    c: float,
    truncation_dims: Sequence[int] | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> DimCriterionReport:
    """Singular values of P_V T on V^⊥ per member, and the span of the qualifying directions.

    A member's count is the largest dimension of a subspace of V^⊥ on which ||P_V T x|| >= c||x||.
    """
    if not 0.0 < c <= 1.0:
        raise ConfigValidationError(f"c={c} outside (0, 1]")

    trace: list[tuple[int, int]] = []
    per_member: list[MemberCompression] = []
    container_dim = 0
    for dim in _ladder(family, truncation_dims):
        members = _family_at(family, dim)
        V = _subspace(V_basis, dim, tolerances)
        Q = null_space(V.conj().T)
        per_member = []
        qualifying: list[np.ndarray] = []
        for label, op in members:
            _, sigma, vh = _svd(V.conj().T @ op.matrix @ Q)
            count = int(np.count_nonzero(sigma >= c - tolerances.tie))
            per_member.append(MemberCompression(label, sigma.tolist(), count))
            qualifying.append(Q @ vh[:count].conj().T)
        container_dim = _rank(qualifying, tolerances.rank)
        trace.append((dim, container_dim))
        logger.debug("dim_criterion at %d: container %d", dim, container_dim)

    return DimCriterionReport(
        V_basis=list(V_basis),
        c=c,
        per_member=per_member,
        container_dim=container_dim,
        growth_trace=trace,
        verdict=_verdict(trace),
    )


def _qualifying_subspace(
    compression: np.ndarray, c: float, trials: int, rng: np.random.Generator, tolerances: Tolerances
) -> np.ndarray:
    """Greedily grow an orthonormal B (in V^⊥ coordinates) with sigma_min(M B) >= c.

    Each step samples `trials` random directions, refines the best few by power
    iteration on M*M deflated against B, and keeps the winner if the enlarged span still qualifies.
    """
    r = compression.shape[1]
    gram = compression.conj().T @ compression
    basis = np.zeros((r, 0), dtype=np.complex128)
    while basis.shape[1] < min(r, compression.shape[0]):
        starts = rng.standard_normal((r, trials)) + 1j * rng.standard_normal((r, trials))
        starts -= basis @ (basis.conj().T @ starts)
        norms = np.linalg.norm(starts, axis=0)
        scores = np.linalg.norm(compression @ starts, axis=0) / np.maximum(norms, 1e-300)
        keep = np.argsort(scores)[::-1][:ORACLE_REFINED_STARTS]
        x = starts[:, keep] / norms[keep]
        for _ in range(ORACLE_POWER_STEPS):
            x = gram @ x
            x -= basis @ (basis.conj().T @ x)
            x /= np.maximum(np.linalg.norm(x, axis=0), 1e-300)
        best = x[:, int(np.argmax(np.linalg.norm(compression @ x, axis=0)))]

        candidate, _ = np.linalg.qr(np.column_stack([basis, best]))
        sigma = svdvals(compression @ candidate)
        if sigma.min() < c - tolerances.tie:
            break
        basis = candidate
    return basis


def dim_criterion_oracle(
    family: OperatorFamily,
    V_basis: Sequence[HVector],
    c: float,
    trials: int,
    seed: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> int:
    """Randomized estimate of the dimension of the qualifying span, built only from sampled vectors."""
    if trials < 1:
        raise ConfigValidationError("the oracle needs at least one trial")
    if not 0.0 < c <= 1.0:
        raise ConfigValidationError(f"c={c} outside (0, 1]")

    V = _subspace(V_basis, family.dim, tolerances)
    Q = null_space(V.conj().T)
    rng = np.random.default_rng(seed)
    kept = []
    for label, op in family:
        basis = _qualifying_subspace(V.conj().T @ op.matrix @ Q, c, trials, rng, tolerances)
        logger.debug("oracle kept %d directions for %s", basis.shape[1], label)
        kept.append(Q @ basis)
    return _rank(kept, tolerances.oracle_rank)


def banded_check(
    family: OperatorFamily, K: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> BandedResult:
    """Pass iff every member has t_(i,j) = 0 whenever j - i >= K (1-based storage positions)."""
    if len(family) == 0:
        raise ValueError("banded_check needs a nonempty family")
    offsets = np.subtract.outer(np.arange(family.dim), np.arange(family.dim))
    above = -offsets >= K
    for label, op in family:
        hits = np.argwhere(above & (np.abs(op.matrix) > tolerances.banded_zero))
        if len(hits):
            i, j = (int(v) for v in hits[0])
            return BandedResult(passed=False, violation=(label, i + 1, j + 1, complex(op.matrix[i, j])))
    return BandedResult(passed=True)


def isometry_preimage_check(
    family: FamilySource,
    V_basis: Sequence[HVector],
    truncation_dims: Sequence[int] | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> PreimageReport:
    """Dimension of span{U^-1(V)} ∩ V^⊥ across the ladder, for members bounded below on their window.

    A member's window is the set of columns with norm above the bounded-below floor; the truncation
    cuts shifts off at one end, and the window is where the member still acts isometrically.
    """
    beta = np.inf
    trace: list[tuple[int, int]] = []
    for dim in _ladder(family, truncation_dims):
        members = _family_at(family, dim)
        V = _subspace(V_basis, dim, tolerances)
        windows = []
        for label, op in members:
            window = np.flatnonzero(np.linalg.norm(op.matrix, axis=0) > tolerances.bounded_below_min)
            floor = float(svdvals(op.matrix[:, window]).min()) if len(window) else 0.0
            if floor < tolerances.bounded_below_min:
                raise NotBoundedBelowError(
                    f"member {label} is not bounded below (smallest singular value {floor:.3g})"
                )
            beta = min(beta, floor)
            windows.append((op, window))

        preimages = []
        for op, window in windows:
            _, sigma, vh = _svd(V.conj().T @ op.matrix[:, window])
            count = int(np.count_nonzero(sigma >= beta * (1.0 - tolerances.tie)))
            vectors = np.zeros((dim, count), dtype=np.complex128)
            vectors[window] = vh[:count].conj().T
            preimages.append(vectors)

        spanned = _rank(preimages, tolerances.rank)
        in_v = _rank([V.conj().T @ p for p in preimages], tolerances.rank)
        trace.append((dim, spanned - in_v))
        logger.debug("isometry preimage at %d: span %d, inside V %d", dim, spanned, in_v)

    return PreimageReport(beta=float(beta), growth_trace=trace, verdict=_verdict(trace))
