"""module for modulus-of-continuity estimation and the curve-level consistency checks"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..core.config import DEFAULT_DELTAS, DEFAULT_TOLERANCES, Tolerances
from ..core.exceptions import CompositionCapError, ConfigValidationError, DimensionMismatchError
from ..core.models import (
    BOperator,
    MetricScheme,
    ModulusComparison,
    ModulusCurve,
    OperatorFamily,
    SuperMap,
)
from .operators import compose_supermaps
from .search import (
    LOCAL_STREAM,
    OperatorObjective,
    OperatorPairs,
    VectorObjective,
    VectorPairs,
    local_ascent,
    operator_pairs,
    scaled_values,
    shrink_factor,
    top_structured,
    vector_pairs,
)
from .space import sample_unit_ball

logger = logging.getLogger(__name__)

MIN_BUDGET = 100


def _check_grid(deltas: Sequence[float], budget: int) -> None:
    if not deltas:
        raise ConfigValidationError("the delta grid is empty")
    if any(d <= 0 for d in deltas) or any(b <= a for a, b in zip(deltas, deltas[1:], strict=False)):
        raise ConfigValidationError("deltas must be positive and increasing")
    if budget < MIN_BUDGET:
        raise ConfigValidationError(f"budget {budget} is below {MIN_BUDGET}")


def envelope(values: Sequence[float]) -> list[float]:
    """Running maximum; each entry stays attained by some feasible pair."""
    if len(values) == 0:
        return []
    return [float(v) for v in np.maximum.accumulate(np.asarray(values, dtype=float))]


@dataclass
class VectorSearch:
    values: np.ndarray
    witnesses: list[tuple[np.ndarray, np.ndarray] | None]
    members: list[int]
    evaluated: int
    pairs: VectorPairs


def search_vectors(
    family: OperatorFamily,
    scheme: MetricScheme,
    deltas: Sequence[float],
    budget: int,
    seed: int,
    local: bool = True,
) -> VectorSearch:
    """Best fitted output per delta over the candidate pairs, refined by local ascent.

    Witnesses are returned already fitted under their delta.
    """
    if len(family) == 0:
        raise ValueError("the family is empty")
    objective = VectorObjective([op.matrix for op in family.operators], scheme)
    pairs = vector_pairs(scheme, budget, seed)
    inputs = objective.inputs(pairs)
    outputs, members = objective.outputs(pairs)
    scaled = scaled_values(inputs, outputs, deltas)

    values = scaled.max(axis=1)
    witnesses: list[tuple[np.ndarray, np.ndarray] | None] = []
    chosen: list[int] = []
    for i, delta in enumerate(deltas):
        c = int(np.argmax(scaled[i]))
        t = shrink_factor(inputs[c], delta)
        witnesses.append((pairs.x[c], pairs.x[c] + t * (pairs.y[c] - pairs.x[c])))
        chosen.append(int(members[c]))

    evaluated = len(pairs)
    if local:
        for i, delta in enumerate(deltas):
            for rank, c in enumerate(top_structured(scaled[i], pairs.structured)):
                member = int(members[c])
                rng = np.random.default_rng([seed, LOCAL_STREAM, i, rank])
                x, y, value = local_ascent(
                    lambda a, b, m=member: objective.pair_score(a, b, m),
                    pairs.x[c],
                    pairs.y[c],
                    delta,
                    rng,
                )
                evaluated += 1
                if value > values[i]:
                    t = shrink_factor(objective.pair_score(x, y, member)[0], delta)
                    values[i] = value
                    witnesses[i] = (x, x + t * (y - x))
                    chosen[i] = member
    logger.debug("vector search: %d pairs, best %s", len(pairs), np.round(values, 6).tolist())
    return VectorSearch(values, witnesses, chosen, evaluated, pairs)


def estimate_modulus_vectors(
    family: OperatorFamily,
    scheme: MetricScheme,
    deltas: Sequence[float],
    budget: int,
    seed: int,
) -> ModulusCurve:
    _check_grid(deltas, budget)
    search = search_vectors(family, scheme, deltas, budget, seed)
    return ModulusCurve(
        deltas=[float(d) for d in deltas],
        omega_hat=envelope(search.values),
        method="structured+sampling+local_search",
        samples_per_delta=search.evaluated,
        seed=seed,
    )


@dataclass
class OperatorSearch:
    values: np.ndarray
    evaluated: int
    pairs: OperatorPairs


def search_supermaps(
    maps: Sequence[SuperMap],
    scheme: MetricScheme,
    deltas: Sequence[float],
    budget: int,
    seed: int,
    local: bool = True,
) -> OperatorSearch:
    if not maps:
        raise ValueError("the super-map list is empty")
    objective = OperatorObjective(maps, scheme)
    pairs = operator_pairs(scheme, budget, seed)
    inputs = objective.inputs(pairs)
    outputs, members = objective.outputs(pairs)
    scaled = scaled_values(inputs, outputs, deltas)
    values = scaled.max(axis=1)

    evaluated = len(pairs)
    if local and pairs.sources is not None:
        xs, ys = pairs.sources
        for i, delta in enumerate(deltas):
            for rank, c in enumerate(top_structured(scaled[i], pairs.structured)):
                member = int(members[c])
                rng = np.random.default_rng([seed, LOCAL_STREAM, i, rank])
                _, _, value = local_ascent(
                    lambda a, b, m=member: objective.pair_score(a, b, m), xs[c], ys[c], delta, rng
                )
                evaluated += 1
                values[i] = max(values[i], value)
    return OperatorSearch(values, evaluated, pairs)


def estimate_modulus_supermaps(
    maps: Sequence[SuperMap],
    scheme: MetricScheme,
    deltas: Sequence[float],
    budget: int,
    seed: int,
) -> ModulusCurve:
    _check_grid(deltas, budget)
    search = search_supermaps(maps, scheme, deltas, budget, seed)
    return ModulusCurve(
        deltas=[float(d) for d in deltas],
        omega_hat=envelope(search.values),
        method="rank_one+sampling+local_search",
        samples_per_delta=search.evaluated,
        seed=seed,
    )


def _pointwise_values(
    objective: VectorObjective,
    bases: np.ndarray,
    directions: np.ndarray,
    deltas: Sequence[float],
) -> np.ndarray:
    """max over bases x0 and unit directions u of min(s_max(x0, u), delta / p(u)) * g(u)."""
    p = objective.seminorm(directions)
    g, _ = objective.outputs(VectorPairs(directions, np.zeros_like(directions), 0))
    best = np.zeros(len(deltas))
    for x0 in bases:
        b = np.real(directions.conj() @ x0)
        room = max(0.0, 1.0 - float(np.vdot(x0, x0).real))
        reach = -b + np.sqrt(b * b + room)
        for i, delta in enumerate(deltas):
            steps = np.minimum(reach, delta / np.maximum(p, np.finfo(float).tiny))
            best[i] = max(best[i], float((steps * g).max()))
    return best


def ec_equals_uec_check(
    family: OperatorFamily,
    scheme: MetricScheme,
    base_points: int,
    budget: int,
    seed: int,
    deltas: Sequence[float] = DEFAULT_DELTAS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusComparison:
    """Uniform modulus against the best pointwise modulus at anchored base points.

    Base points are 0, both ends of every uniform witness and seeded ball samples; the
    pointwise side is read at delta * (1 + slack). Anchoring at the witnesses reproduces every
    uniform value, so `holds` is a consistency check that passes by construction. The
    "pointwise_sampled" curve uses 0 and the seeded samples only, and `independent_holds`
    in the notes compares the uniform curve against it.
    """
    _check_grid(deltas, budget)
    if base_points < 1:
        raise ConfigValidationError("at least one base point is required")
    uniform = search_vectors(family, scheme, deltas, budget, seed)
    objective = VectorObjective([op.matrix for op in family.operators], scheme)

    dim = scheme.indexing.dim
    anchors = [np.zeros(dim, dtype=np.complex128)]
    extra_directions = []
    for witness in uniform.witnesses:
        if witness is None:
            continue
        x, y = witness
        anchors.extend([x, y])
        if np.linalg.norm(y - x) > 0:
            extra_directions.append(y - x)
            extra_directions.append(x - y)
    sampled = [v.coords for v in sample_unit_ball(dim, base_points, seed)]
    bases = [*anchors, *sampled]

    raw = np.vstack([uniform.pairs.z, *extra_directions]) if extra_directions else uniform.pairs.z
    norms = np.linalg.norm(raw, axis=1)
    directions = raw[norms > 0] / norms[norms > 0, None]

    widened = [d * (1.0 + tolerances.slack) for d in deltas]
    pointwise = envelope(_pointwise_values(objective, np.array(bases), directions, widened))
    free_bases = np.array([anchors[0], *sampled])
    pointwise_sampled = envelope(_pointwise_values(objective, free_bases, directions, widened))
    uniform_curve = envelope(uniform.values)
    gaps = [u - (p + tolerances.slack) for u, p in zip(uniform_curve, pointwise, strict=True)]
    free_gaps = [u - (p + tolerances.slack) for u, p in zip(uniform_curve, pointwise_sampled, strict=True)]

    samples = len(directions) * len(bases)
    return ModulusComparison(
        curves={
            "uniform": ModulusCurve(list(deltas), uniform_curve, "structured+sampling+local_search", uniform.evaluated, seed),
            "pointwise": ModulusCurve(list(deltas), pointwise, "anchored_directions", samples, seed),
            "pointwise_sampled": ModulusCurve(
                list(deltas), pointwise_sampled, "sampled_bases", len(directions) * len(free_bases), seed
            ),
        },
        holds=all(gap <= tolerances.tie for gap in gaps),
        max_violation=max(0.0, max(gaps)),
        slack=tolerances.slack,
        notes={
            "base_points": len(bases),
            "delta_factor": 1.0 + tolerances.slack,
            "independent_holds": all(gap <= tolerances.tie for gap in free_gaps),
            "independent_max_violation": max(0.0, max(free_gaps)),
        },
    )


def _compose_families(F: OperatorFamily, G: OperatorFamily) -> OperatorFamily:
    members = tuple(
        (f"{lf}∘{lg}", BOperator(tf.matrix @ tg.matrix)) for lf, tf in F for lg, tg in G
    )
    return OperatorFamily(members, F.indexing)


def _fitted_curve(inputs: np.ndarray, outputs: np.ndarray, deltas: Sequence[float]) -> np.ndarray:
    return scaled_values(inputs, outputs, deltas).max(axis=1)


def composition_modulus_check(
    F: OperatorFamily | Sequence[SuperMap],
    G: OperatorFamily | Sequence[SuperMap],
    scheme: MetricScheme,
    deltas: Sequence[float],
    budget: int,
    seed: int,
    cap: int = 4096,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ModulusComparison:
    """Check omega_FG(delta) <= omega_F(omega_G(delta) + slack) + slack on shared evidence.

    G is scored on the base candidates, F on the base candidates plus their G-images,
    and the composed family (materialized pairwise) on the base candidates. Every composed
    pair is an F-pair of the augmented set, so `holds` passes by construction. The "F_own" curve
    scores F on the base candidates alone; `independent_holds` in the notes repeats the
    comparison against it.
    """
    _check_grid(deltas, budget)
    vector_kind = isinstance(F, OperatorFamily)
    if vector_kind != isinstance(G, OperatorFamily):
        raise ConfigValidationError("composition needs two families of the same kind")
    if len(F) == 0 or len(G) == 0:
        raise ValueError("composition of an empty family")
    if len(F) * len(G) > cap:
        raise CompositionCapError(f"pairwise composition has {len(F) * len(G)} members, cap is {cap}")

    if vector_kind:
        if F.dim != G.dim:
            raise DimensionMismatchError("composed families have different dimensions")
        composed = _compose_families(F, G)
        pairs = vector_pairs(scheme, budget, seed)
        images = [pairs.images(op.matrix) for op in G.operators]
        f_obj = VectorObjective([op.matrix for op in F.operators], scheme)
        g_obj = VectorObjective([op.matrix for op in G.operators], scheme)
        fg_obj = VectorObjective([op.matrix for op in composed.operators], scheme)
        augmented = VectorPairs.concat([pairs, *images])
        composed_count = len(composed)
    else:
        composed_maps = [compose_supermaps(f, g) for f in F for g in G]
        pairs = operator_pairs(scheme, budget, seed)
        images = [pairs.images(g) for g in G]
        f_obj = OperatorObjective(F, scheme)
        g_obj = OperatorObjective(G, scheme)
        fg_obj = OperatorObjective(composed_maps, scheme)
        augmented = OperatorPairs.concat([pairs, *images])
        composed_count = len(composed_maps)

    base_inputs = f_obj.inputs(pairs)
    omega_g = envelope(_fitted_curve(base_inputs, g_obj.outputs(pairs)[0], deltas))
    omega_fg = envelope(_fitted_curve(base_inputs, fg_obj.outputs(pairs)[0], deltas))

    aug_inputs = f_obj.inputs(augmented)
    aug_outputs = f_obj.outputs(augmented)[0]
    omega_f = envelope(_fitted_curve(aug_inputs, aug_outputs, deltas))
    inner = [g + tolerances.slack for g in omega_g]
    bound = [v + tolerances.slack for v in envelope(_fitted_curve(aug_inputs, aug_outputs, inner))]
    gaps = [lhs - rhs for lhs, rhs in zip(omega_fg, bound, strict=True)]

    base_outputs = f_obj.outputs(pairs)[0]
    omega_f_own = envelope(_fitted_curve(base_inputs, base_outputs, deltas))
    own_bound = [v + tolerances.slack for v in envelope(_fitted_curve(base_inputs, base_outputs, inner))]
    own_gaps = [lhs - rhs for lhs, rhs in zip(omega_fg, own_bound, strict=True)]

    method = "shared_candidates"
    samples = len(augmented)
    logger.debug("composition check over %d composed members, %d candidates", composed_count, samples)
    return ModulusComparison(
        curves={
            "F": ModulusCurve(list(deltas), omega_f, method, samples, seed),
            "G": ModulusCurve(list(deltas), omega_g, method, len(pairs), seed),
            "F∘G": ModulusCurve(list(deltas), omega_fg, method, len(pairs), seed),
            "F_own": ModulusCurve(list(deltas), omega_f_own, "base_candidates", len(pairs), seed),
        },
        holds=all(gap <= tolerances.tie for gap in gaps),
        max_violation=max(0.0, max(gaps)),
        slack=tolerances.slack,
        notes={
            "bound": bound,
            "composed_members": composed_count,
            "independent_bound": own_bound,
            "independent_holds": all(gap <= tolerances.tie for gap in own_gaps),
        },
    )
