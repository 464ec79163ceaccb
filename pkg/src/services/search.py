"""module for the candidate pairs and objectives shared by the modulus and certificate engines

Both weak metrics are seminorms of the difference, so a pair (x, y) is scored by
its input p(x - y) and its output max_T p(T(x - y)). Moving y toward x along the
segment scales both by the same factor, which is how a pair is fitted under a
distance constraint.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ..core.exceptions import DimensionMismatchError
from ..core.models import MetricScheme, SuperMap
from .space import ball_array

logger = logging.getLogger(__name__)

# leading h columns used while scoring; the omitted tail is below 2^-62
SCORE_COLUMNS = 64
RANDOM_CHUNK = 100
INDEX_GAPS = (1, 2)
NET_PAIR_CAP = 512
EVAL_CHUNK = 256
LOCAL_STARTS = 3
LOCAL_ITERATIONS = 50
SHRINK_MARGIN = 1.0 - 1e-12

VECTOR_STREAM = 11
OPERATOR_STREAM = 13
LOCAL_STREAM = 17


def shrink_factor(inputs: np.ndarray | float, delta: float) -> np.ndarray | float:
    """Largest t <= 1 with t * input <= delta."""
    return np.minimum(1.0, delta * SHRINK_MARGIN / np.maximum(inputs, np.finfo(float).tiny))


def to_ball(v: np.ndarray) -> np.ndarray:
    return v / max(1.0, float(np.linalg.norm(v)))


@dataclass
class VectorPairs:
    """Candidate pairs as rows of x and y; the first `structured` rows are budget independent."""

    x: np.ndarray
    y: np.ndarray
    structured: int

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def z(self) -> np.ndarray:
        return self.x - self.y

    def images(self, T: np.ndarray) -> "VectorPairs":
        return VectorPairs(self.x @ T.T, self.y @ T.T, self.structured)

    @staticmethod
    def concat(parts: Sequence["VectorPairs"]) -> "VectorPairs":
        return VectorPairs(
            np.vstack([p.x for p in parts]), np.vstack([p.y for p in parts]), parts[0].structured
        )


@dataclass
class OperatorPairs:
    """Low-rank operator pairs: A = a_left @ a_right^H and B = b_left @ b_right^H, stacked over candidates.

    `sources` keeps the vectors (x, y) behind the structured rank-one pairs x⊗x, y⊗y.
    """

    a_left: np.ndarray
    a_right: np.ndarray
    b_left: np.ndarray
    b_right: np.ndarray
    structured: int
    sources: tuple[np.ndarray, np.ndarray] | None = None

    def __len__(self) -> int:
        return self.a_left.shape[0]

    def difference(self) -> tuple[np.ndarray, np.ndarray]:
        """Factors (left, right) with A - B = left @ right^H."""
        return (
            np.concatenate([self.a_left, self.b_left], axis=2),
            np.concatenate([self.a_right, -self.b_right], axis=2),
        )

    def images(self, m: SuperMap) -> "OperatorPairs":
        adjoint_right = m.right.conj().T
        return OperatorPairs(
            np.matmul(m.left, self.a_left),
            np.matmul(adjoint_right, self.a_right),
            np.matmul(m.left, self.b_left),
            np.matmul(adjoint_right, self.b_right),
            self.structured,
        )

    def materialize(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        A = self.a_left[index] @ self.a_right[index].conj().T
        B = self.b_left[index] @ self.b_right[index].conj().T
        return A, B

    @staticmethod
    def concat(parts: Sequence["OperatorPairs"]) -> "OperatorPairs":
        def stack(name: str) -> np.ndarray:
            return np.concatenate([getattr(p, name) for p in parts], axis=0)

        return OperatorPairs(
            stack("a_left"),
            stack("a_right"),
            stack("b_left"),
            stack("b_right"),
            parts[0].structured,
            parts[0].sources,
        )


def _random_chunks(total: int, stream: int, seed: int, build: Callable[[np.random.Generator], list]) -> list:
    """Concatenate seeded chunks; chunk c always draws from rng([seed, stream, c]).

    A larger budget therefore extends, never reshuffles, the candidate list.
    """
    rows: list = []
    for chunk in range(math.ceil(total / RANDOM_CHUNK)):
        rows.extend(build(np.random.default_rng([seed, stream, chunk])))
    return rows[:total]


def vector_pairs(scheme: MetricScheme, budget: int, seed: int) -> VectorPairs:
    indexing = scheme.indexing
    dim = indexing.dim
    eye = np.eye(dim, dtype=np.complex128)
    xs: list[np.ndarray] = []
    ys: list[np.ndarray] = []
    for index in indexing.indices:
        for gap in INDEX_GAPS:
            if indexing.contains(int(index) + gap):
                xs.append(eye[indexing.position(int(index))])
                ys.append(eye[indexing.position(int(index) + gap)])
    zero = np.zeros(dim, dtype=np.complex128)
    for position in range(dim):
        xs.append(eye[position])
        ys.append(zero)
    for i in range(min(scheme.M - 1, NET_PAIR_CAP)):
        xs.append(scheme.h[:, i])
        ys.append(scheme.h[:, i + 1])
    structured = len(xs)

    def draw(rng: np.random.Generator) -> list[tuple[np.ndarray, np.ndarray]]:
        points = ball_array(dim, 2 * RANDOM_CHUNK, rng)
        return list(zip(points[:RANDOM_CHUNK], points[RANDOM_CHUNK:], strict=True))

    for x, y in _random_chunks(budget, VECTOR_STREAM, seed, draw):
        xs.append(x)
        ys.append(y)
    logger.debug("vector candidates: %d structured, %d sampled", structured, len(xs) - structured)
    return VectorPairs(np.array(xs), np.array(ys), structured)


def _rank_one_pairs(x: np.ndarray, y: np.ndarray) -> OperatorPairs:
    count, dim = x.shape
    a = np.zeros((count, dim, 2), dtype=np.complex128)
    b = np.zeros((count, dim, 2), dtype=np.complex128)
    a[:, :, 0] = x
    b[:, :, 0] = y
    return OperatorPairs(a, a.copy(), b, b.copy(), count)


def _random_contraction(dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Rank-two contraction U diag(s) V^H as (U diag(s), V)."""
    u, _ = np.linalg.qr(rng.standard_normal((dim, 2)) + 1j * rng.standard_normal((dim, 2)))
    v, _ = np.linalg.qr(rng.standard_normal((dim, 2)) + 1j * rng.standard_normal((dim, 2)))
    return u * rng.random(2), v


def operator_pairs(scheme: MetricScheme, budget: int, seed: int) -> OperatorPairs:
    """Rank-one lifts x⊗x, y⊗y of the structured vector pairs, then seeded random pairs.

    Random chunks alternate rank-one pairs of ball vectors and pairs of rank-two contractions.
    """
    dim = scheme.indexing.dim
    base = vector_pairs(scheme, 0, seed)
    lifted = _rank_one_pairs(base.x, base.y)
    lifted.sources = (base.x, base.y)

    def draw(rng: np.random.Generator) -> list[tuple[np.ndarray, ...]]:
        rows = []
        points = ball_array(dim, RANDOM_CHUNK, rng)
        for k in range(RANDOM_CHUNK // 2):
            x, y = points[2 * k], points[2 * k + 1]
            pad = np.zeros((dim, 1), dtype=np.complex128)
            a = np.hstack([x[:, None], pad])
            b = np.hstack([y[:, None], pad])
            rows.append((a, a, b, b))
            rows.append(_random_contraction(dim, rng) + _random_contraction(dim, rng))
        return rows

    sampled = _random_chunks(budget, OPERATOR_STREAM, seed, draw)
    if not sampled:
        return lifted
    stacked = [np.array([row[k] for row in sampled]) for k in range(4)]
    logger.debug("operator candidates: %d structured, %d sampled", len(lifted), len(sampled))
    return OperatorPairs.concat([lifted, OperatorPairs(*stacked, structured=0)])


def _scoring_basis(scheme: MetricScheme) -> tuple[np.ndarray, np.ndarray]:
    m = min(scheme.M, SCORE_COLUMNS)
    return np.conj(scheme.h[:, :m]), scheme.weights[:m]


class VectorObjective:
    """Scores vector pairs under a family of matrices acting on H."""

    def __init__(self, operators: Sequence[np.ndarray], scheme: MetricScheme) -> None:
        dims = {T.shape[0] for T in operators}
        if dims and dims != {scheme.indexing.dim}:
            raise DimensionMismatchError(
                f"operators of dimension {sorted(dims)} on a scheme of dimension {scheme.indexing.dim}"
            )
        self.hc, self.w = _scoring_basis(scheme)
        self.mapped = [T.T @ self.hc for T in operators]

    def __len__(self) -> int:
        return len(self.mapped)

    def seminorm(self, rows: np.ndarray) -> np.ndarray:
        return np.abs(rows @ self.hc) @ self.w

    def inputs(self, pairs: VectorPairs) -> np.ndarray:
        return self.seminorm(pairs.z)

    def outputs(self, pairs: VectorPairs) -> tuple[np.ndarray, np.ndarray]:
        z = pairs.z
        best = np.zeros(len(pairs))
        member = np.zeros(len(pairs), dtype=int)
        for k, mapped in enumerate(self.mapped):
            values = np.abs(z @ mapped) @ self.w
            better = values > best
            best[better] = values[better]
            member[better] = k
        return best, member

    def pair_score(self, x: np.ndarray, y: np.ndarray, member: int) -> tuple[float, float]:
        z = (x - y)[None, :]
        return float(self.seminorm(z)[0]), float((np.abs(z @ self.mapped[member]) @ self.w)[0])


class OperatorObjective:
    """Scores operator pairs under super-maps A -> L A R, through the factors of A - B."""

    def __init__(self, maps: Sequence[SuperMap], scheme: MetricScheme) -> None:
        dims = {m.dim for m in maps}
        if dims and dims != {scheme.indexing.dim}:
            raise DimensionMismatchError(
                f"super-maps of dimension {sorted(dims)} on a scheme of dimension {scheme.indexing.dim}"
            )
        hc, self.w = _scoring_basis(scheme)
        self.h_adj = hc.T
        self.mapped = [(self.h_adj @ m.left, self.h_adj @ m.right.conj().T) for m in maps]

    def __len__(self) -> int:
        return len(self.mapped)

    def _seminorm(self, hl: np.ndarray, hr: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        values = np.empty(left.shape[0])
        for start in range(0, left.shape[0], EVAL_CHUNK):
            stop = start + EVAL_CHUNK
            p = np.matmul(hl, left[start:stop])
            q = np.matmul(hr, right[start:stop])
            gram = np.matmul(p, np.conj(np.swapaxes(q, 1, 2)))
            values[start:stop] = np.einsum("cji,j,i->c", np.abs(gram), self.w, self.w)
        return values

    def inputs(self, pairs: OperatorPairs) -> np.ndarray:
        left, right = pairs.difference()
        return self._seminorm(self.h_adj, self.h_adj, left, right)

    def outputs(self, pairs: OperatorPairs) -> tuple[np.ndarray, np.ndarray]:
        left, right = pairs.difference()
        best = np.zeros(len(pairs))
        member = np.zeros(len(pairs), dtype=int)
        for k, (hl, hr) in enumerate(self.mapped):
            values = self._seminorm(hl, hr, left, right)
            better = values > best
            best[better] = values[better]
            member[better] = k
        return best, member

    def pair_score(self, x: np.ndarray, y: np.ndarray, member: int) -> tuple[float, float]:
        """Input and output of the rank-one pair x⊗x, y⊗y."""
        pair = _rank_one_pairs(x[None, :], y[None, :])
        left, right = pair.difference()
        hl, hr = self.mapped[member]
        return (
            float(self._seminorm(self.h_adj, self.h_adj, left, right)[0]),
            float(self._seminorm(hl, hr, left, right)[0]),
        )


def scaled_values(inputs: np.ndarray, outputs: np.ndarray, deltas: Sequence[float]) -> np.ndarray:
    """(len(deltas), candidates) matrix of outputs after fitting every pair under each delta."""
    grid = np.asarray(deltas, dtype=float)[:, None]
    return shrink_factor(inputs[None, :], grid) * outputs[None, :]


def local_ascent(
    score: Callable[[np.ndarray, np.ndarray], tuple[float, float]],
    x: np.ndarray,
    y: np.ndarray,
    delta: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Coordinate-wise perturbation ascent of the fitted output, staying in the unit ball.

    Returns the unfitted pair and its fitted output; fit it with shrink_factor to realize it.
    """

    def fitted(cx: np.ndarray, cy: np.ndarray) -> float:
        gap, out = score(cx, cy)
        return float(shrink_factor(gap, delta) * out)

    best = fitted(x, y)
    support = np.flatnonzero(np.abs(x) + np.abs(y) > 0)
    step = 0.25
    for _ in range(LOCAL_ITERATIONS):
        if len(support) and rng.random() < 0.8:
            coord = int(rng.choice(support))
        else:
            coord = int(rng.integers(len(x)))
        kick = step * complex(rng.standard_normal(), rng.standard_normal())
        cx, cy = x.copy(), y.copy()
        if rng.random() < 0.5:
            cx[coord] += kick
        else:
            cy[coord] += kick
        cx, cy = to_ball(cx), to_ball(cy)
        value = fitted(cx, cy)
        if value > best:
            x, y, best = cx, cy, value
            support = np.flatnonzero(np.abs(x) + np.abs(y) > 0)
        step *= 0.95
    return x, y, best


def top_structured(scores: np.ndarray, structured: int, count: int = LOCAL_STARTS) -> list[int]:
    head = scores[:structured]
    order = np.argsort(-head, kind="stable")
    return [int(c) for c in order[:count] if head[c] > 0]
