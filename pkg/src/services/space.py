"""module for the truncated Hilbert-space model: metric schemes, rho and d, ball sampling"""

import itertools
import logging
import math

import numpy as np

from ..core.config import DEFAULT_TOLERANCES, Tolerances
from ..core.exceptions import ConfigValidationError, DimensionMismatchError, NetCostError
from ..core.models import BasisIndexing, BOperator, HVector, IndexingKind, MetricScheme, MetricValue

logger = logging.getLogger(__name__)

MAX_NET_DEPTH = 4
GRID_POOL_CAP = 60_000
RANDOM_POOL_SIZE = 20_000
CERTIFY_SAMPLES = 4_000
MAX_SAMPLED_NET_POINTS = 2_048
NEAREST_CHUNK = 512


def ball_array(space_dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Rows alternate between sphere directions and sphere * u^(1/dim) ball points."""
    z = rng.standard_normal((count, space_dim)) + 1j * rng.standard_normal((count, space_dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    radii = rng.random(count) ** (1.0 / space_dim)
    radii[0::2] = 1.0
    return z * radii[:, None]


def sample_unit_ball(space_dim: int, count: int, seed: int) -> list[HVector]:
    if count < 1:
        raise ValueError("count must be at least 1")
    rows = ball_array(space_dim, count, np.random.default_rng(seed))
    return [HVector(row) for row in rows]


def norm_ball_project(x: HVector, tolerances: Tolerances = DEFAULT_TOLERANCES) -> HVector:
    if x.dim == 0:
        raise ValueError("cannot project a zero-length coordinate list")
    norm = x.norm
    if norm <= 1.0 + tolerances.identity:
        return x
    return HVector(x.coords / norm)


def _project_rows(points: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    return points / np.maximum(norms, 1.0)


def _grid_pool(space_dim: int, radius: float) -> tuple[np.ndarray, float] | None:
    """Projected cubic grid whose covering radius is at most radius / 2, if small enough."""
    real_dim = 2 * space_dim
    per_axis = math.ceil(2.0 * math.sqrt(real_dim) / radius) + 1
    if per_axis**real_dim > GRID_POOL_CAP:
        return None
    axis = np.linspace(-1.0, 1.0, per_axis)
    grid = np.array(list(itertools.product(axis, repeat=real_dim)))
    pool = grid[:, 0::2] + 1j * grid[:, 1::2]
    # projection onto the ball never increases the distance to a ball point
    return _project_rows(pool), math.sqrt(real_dim) / (per_axis - 1)


def nearest_distance(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Distance from each row of `points` to the closest row of `centers`, in row chunks."""
    if not len(centers):
        return np.full(len(points), np.inf)
    center_sq = np.sum(np.abs(centers) ** 2, axis=1)
    out = np.empty(len(points))
    for start in range(0, len(points), NEAREST_CHUNK):
        chunk = points[start : start + NEAREST_CHUNK]
        sq = (
            np.sum(np.abs(chunk) ** 2, axis=1)[:, None]
            + center_sq[None, :]
            - 2.0 * np.real(chunk @ centers.conj().T)
        )
        out[start : start + len(chunk)] = np.sqrt(np.maximum(sq.min(axis=1), 0.0))
    return out


def _greedy_net(
    centers: np.ndarray, space_dim: int, radius: float, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Farthest-point insertion over a candidate pool.

    On a grid pool the insertion runs until the pool is radius/2-covered and the returned
    covering radius is rigorous. On a sampled pool it stops at radius or after
    MAX_SAMPLED_NET_POINTS insertions, and the radius is estimated from fresh ball samples.
    """
    grid = _grid_pool(space_dim, radius)
    if grid is not None:
        pool, grid_cover = grid
        stop, cap = radius / 2, len(pool)
    else:
        pool, grid_cover = ball_array(space_dim, RANDOM_POOL_SIZE, rng), None
        stop, cap = radius, MAX_SAMPLED_NET_POINTS

    gaps = nearest_distance(pool, centers.reshape(-1, space_dim))
    chosen: list[np.ndarray] = []
    while gaps.max() > stop and len(chosen) < cap:
        point = pool[int(np.argmax(gaps))]
        chosen.append(point)
        gaps = np.minimum(gaps, np.linalg.norm(pool - point, axis=1))
    new_points = np.array(chosen).reshape(-1, space_dim)

    if grid_cover is not None:
        return new_points, float(gaps.max() + grid_cover)

    every_center = np.vstack([centers.reshape(-1, space_dim), new_points])
    samples = ball_array(space_dim, CERTIFY_SAMPLES, rng)
    quality = float(nearest_distance(samples, every_center).max())
    if quality > radius:
        logger.warning(
            "sampled net radius %.4f exceeds target %.4f (%d points)", quality, radius, len(new_points)
        )
    return new_points, quality


def build_scheme(indexing: BasisIndexing, L: int, net_depth: int, seed: int) -> MetricScheme:
    if L < 1:
        raise ConfigValidationError("scheme length L must be at least 1")
    if L > indexing.dim or L > indexing.max_index:
        raise ConfigValidationError(
            f"L={L} would reference basis vectors absent from the truncation of dimension {indexing.dim}"
        )
    if net_depth > MAX_NET_DEPTH:
        raise NetCostError(
            f"net_depth={net_depth} exceeds {MAX_NET_DEPTH}: net size grows exponentially in n"
        )
    if net_depth > L:
        raise ConfigValidationError(f"net_depth={net_depth} exceeds L={L}")

    dim = indexing.dim
    columns: list[np.ndarray] = []
    schedule: list[int] = []
    block_ends: list[int] = []
    quality: list[float] = []

    for n in range(1, L + 1):
        columns.append(HVector.basis(indexing, n).coords)
        schedule.append(len(columns))
        if n <= net_depth:
            block = indexing.block_positions(n)
            if len(block) < (n if indexing.kind is IndexingKind.NATURAL else 2 * n + 1):
                raise ConfigValidationError(f"F_{n} is not contained in the truncation")
            centers = np.array([col[block] for col in columns])
            points, radius = _greedy_net(
                centers, len(block), 1.0 / n, np.random.default_rng([seed, n])
            )
            for point in points:
                column = np.zeros(dim, dtype=np.complex128)
                column[block] = point
                columns.append(column)
            quality.append(radius)
            logger.debug("net for F_%d: %d points, radius %.4f", n, len(points), radius)
        block_ends.append(len(columns))

    scheduled = {indexing.position(n) for n in range(1, L + 1)}
    for position in range(dim):
        if position not in scheduled:
            column = np.zeros(dim, dtype=np.complex128)
            column[position] = 1.0
            columns.append(column)

    scheme = MetricScheme(
        indexing=indexing,
        h=np.column_stack(columns),
        schedule=tuple(schedule),
        net_quality=tuple(quality),
        seed=seed,
        block_ends=tuple(block_ends),
    )
    if scheme.M > scheme.live_columns:
        logger.warning(
            "scheme has %d columns, only the first %d carry a nonzero weight", scheme.M, scheme.live_columns
        )
    return scheme


def _check_dim(scheme: MetricScheme, *dims: int) -> None:
    for dim in dims:
        if dim != scheme.indexing.dim:
            raise DimensionMismatchError(
                f"dimension {dim} does not match scheme dimension {scheme.indexing.dim}"
            )


def vector_seminorm(scheme: MetricScheme, z: np.ndarray) -> np.ndarray:
    """p(z) = sum_i |<z, h_i>| / 2^i for each column of z (or for a single vector)."""
    k = scheme.live_columns
    return scheme.weights[:k] @ np.abs(scheme.h_adjoint[:k] @ z)


def operator_seminorm(scheme: MetricScheme, d: np.ndarray) -> float:
    k = scheme.live_columns
    gram = scheme.h_adjoint[:k] @ (d @ scheme.h[:, :k])
    return float(scheme.weights[:k] @ np.abs(gram) @ scheme.weights[:k])


def rho(x: HVector, y: HVector, scheme: MetricScheme) -> MetricValue:
    _check_dim(scheme, x.dim, y.dim)
    value = float(vector_seminorm(scheme, x.coords - y.coords))
    return MetricValue(value=value, truncation_error=scheme.tail_bound)


def d_metric(A: BOperator, B: BOperator, scheme: MetricScheme) -> MetricValue:
    _check_dim(scheme, A.dim, B.dim)
    value = operator_seminorm(scheme, A.matrix - B.matrix)
    return MetricValue(value=value, truncation_error=2.0 * scheme.tail_bound)


def net_violations(scheme: MetricScheme, n: int, samples: int, seed: int) -> int:
    """Count sampled points of F_n ∩ H_1 farther than 1/n from h_1..h_{a_(n+1)}."""
    block = scheme.indexing.block_positions(n)
    centers = scheme.h[block, : scheme.block_ends[n - 1]].T
    points = ball_array(len(block), samples, np.random.default_rng(seed))
    nearest = nearest_distance(points, centers)
    return int(np.count_nonzero(nearest > 1.0 / n + DEFAULT_TOLERANCES.identity))
