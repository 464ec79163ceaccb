"""module for non-UEC certificate search and the automorphism correspondence"""

import logging
from collections.abc import Iterable, Sequence

import numpy as np

from ..core.config import DEFAULT_TOLERANCES, Tolerances
from ..core.exceptions import ConfigValidationError
from ..core.models import (
    BOperator,
    CorrespondenceVerdict,
    HVector,
    MetricScheme,
    NonUecCertificate,
    OperatorFamily,
    SuperMap,
    SuperMapKind,
)
from .modulus import estimate_modulus_supermaps, estimate_modulus_vectors
from .operators import apply_supermap, rank_one, supermap_family
from .search import (
    LOCAL_STREAM,
    OperatorObjective,
    VectorObjective,
    local_ascent,
    operator_pairs,
    shrink_factor,
    top_structured,
    vector_pairs,
)
from .space import d_metric, rho

logger = logging.getLogger(__name__)

# smallest d-gap accepted for a rank-one lift of a vector certificate
LIFT_GAP_MIN = 1e-4
REALIZE_ATTEMPTS = 16
EPS = float(np.finfo(float).eps)


def _check_thresholds(delta_max: float, gain_min: float) -> None:
    if delta_max <= 0:
        raise ConfigValidationError(f"delta_max={delta_max} must be positive")
    if gain_min <= 1:
        raise ConfigValidationError(f"gain_min={gain_min} must exceed 1")


def _accepts(input_dist: float, output_dist: float, delta_max: float, gain_min: float) -> bool:
    """input <= delta_max and output >= max(gain_min * input, delta_max)."""
    return input_dist <= delta_max and output_dist >= max(gain_min * max(input_dist, EPS), delta_max)


def _ranked(found: list[tuple[float, float, object]]) -> list[object]:
    """Largest gain first, larger output on ties."""
    order = sorted(range(len(found)), key=lambda k: (-found[k][1], -found[k][0], k))
    return [found[k][2] for k in order]


def _collect(
    inputs: np.ndarray,
    outputs: np.ndarray,
    delta_max: float,
    gain_min: float,
    refined: Iterable[tuple[float, float, object]],
) -> list[object]:
    """Qualifying candidates, best first; sampled pairs appear by index, refined ones by payload."""
    t = shrink_factor(inputs, delta_max)
    fitted_in = t * inputs
    fitted_out = t * outputs
    gains = fitted_out / np.maximum(fitted_in, EPS)
    found = [
        (float(fitted_out[c]), float(gains[c]), int(c))
        for c in np.flatnonzero((gains >= gain_min) & (fitted_out >= delta_max))
    ]
    found.extend(item for item in refined if item[1] >= gain_min and item[0] >= delta_max)
    return _ranked(found)


def certificate_search(
    family: OperatorFamily,
    scheme: MetricScheme,
    delta_max: float,
    gain_min: float,
    seed: int,
    budget: int = 1000,
) -> NonUecCertificate | None:
    """Pair (x, y) with rho(x, y) <= delta_max and rho(Tx, Ty) >= max(gain_min * rho(x, y), delta_max).

    None means no witness at this budget, not a proof of uniform equicontinuity.
    """
    _check_thresholds(delta_max, gain_min)
    if len(family) == 0:
        return None
    objective = VectorObjective([op.matrix for op in family.operators], scheme)
    pairs = vector_pairs(scheme, budget, seed)
    inputs = objective.inputs(pairs)
    outputs, members = objective.outputs(pairs)

    def fitted(x: np.ndarray, y: np.ndarray, gap: float) -> np.ndarray:
        return x + shrink_factor(gap, delta_max) * (y - x)

    refined = []
    scores = shrink_factor(inputs, delta_max) * outputs
    for rank, c in enumerate(top_structured(scores, len(pairs))):
        member = int(members[c])
        rng = np.random.default_rng([seed, LOCAL_STREAM, rank])
        x, y, value = local_ascent(
            lambda a, b, m=member: objective.pair_score(a, b, m), pairs.x[c], pairs.y[c], delta_max, rng
        )
        gap, _ = objective.pair_score(x, y, member)
        y = fitted(x, y, gap)
        fitted_gap = objective.pair_score(x, y, member)[0]
        refined.append((value, value / max(fitted_gap, EPS), (member, x, y)))

    def make(c: int) -> tuple[int, np.ndarray, np.ndarray]:
        return int(members[c]), pairs.x[c], fitted(pairs.x[c], pairs.y[c], inputs[c])

    ranked = _collect(inputs, outputs, delta_max, gain_min, refined)
    labels = family.labels
    for item in ranked[:REALIZE_ATTEMPTS]:
        member, x, y = make(item) if isinstance(item, int) else item
        T = family.operators[member]
        xv, yv = HVector(x), HVector(y)
        input_dist = rho(xv, yv, scheme).value
        output_dist = rho(T.apply(xv), T.apply(yv), scheme).value
        if _accepts(input_dist, output_dist, delta_max, gain_min):
            logger.info("certificate under %s: %.3g -> %.3g", labels[member], input_dist, output_dist)
            return NonUecCertificate(labels[member], input_dist, output_dist, scheme.scheme_id, x=xv, y=yv)
    logger.info("no vector certificate at budget %d", budget)
    return None


def certificate_search_supermaps(
    maps: Sequence[SuperMap],
    scheme: MetricScheme,
    delta_max: float,
    gain_min: float,
    seed: int,
    budget: int = 1000,
) -> NonUecCertificate | None:
    """Operator pair (A, B) with d(A, B) <= delta_max and d(m(A), m(B)) >= max(gain_min * d(A, B), delta_max)."""
    _check_thresholds(delta_max, gain_min)
    if not maps:
        return None
    objective = OperatorObjective(maps, scheme)
    pairs = operator_pairs(scheme, budget, seed)
    inputs = objective.inputs(pairs)
    outputs, members = objective.outputs(pairs)

    refined = []
    if pairs.sources is not None:
        xs, ys = pairs.sources
        scores = shrink_factor(inputs, delta_max) * outputs
        for rank, c in enumerate(top_structured(scores, pairs.structured)):
            member = int(members[c])
            rng = np.random.default_rng([seed, LOCAL_STREAM, rank])
            x, y, value = local_ascent(
                lambda a, b, m=member: objective.pair_score(a, b, m), xs[c], ys[c], delta_max, rng
            )
            gap, _ = objective.pair_score(x, y, member)
            A, B = np.outer(x, x.conj()), np.outer(y, y.conj())
            fitted_gap = shrink_factor(gap, delta_max) * gap
            refined.append((value, value / max(fitted_gap, EPS), (member, A, B, gap)))

    def make(c: int) -> tuple[int, np.ndarray, np.ndarray, float]:
        A, B = pairs.materialize(c)
        return int(members[c]), A, B, float(inputs[c])

    ranked = _collect(inputs, outputs, delta_max, gain_min, refined)
    for item in ranked[:REALIZE_ATTEMPTS]:
        member, A, B, gap = make(item) if isinstance(item, int) else item
        m = maps[member]
        a_op = BOperator(A)
        b_op = BOperator(A + shrink_factor(gap, delta_max) * (B - A))
        input_dist = d_metric(a_op, b_op, scheme).value
        output_dist = d_metric(apply_supermap(m, a_op), apply_supermap(m, b_op), scheme).value
        if _accepts(input_dist, output_dist, delta_max, gain_min):
            logger.info("certificate under %s: %.3g -> %.3g", m.label, input_dist, output_dist)
            return NonUecCertificate(m.label, input_dist, output_dist, scheme.scheme_id, A=a_op, B=b_op)
    logger.info("no operator certificate at budget %d", budget)
    return None


def lift_certificate(
    certificate: NonUecCertificate, supermap: SuperMap, scheme: MetricScheme
) -> NonUecCertificate:
    """Rank-one lift (x⊗x, y⊗y) of a vector certificate, measured under the super-map."""
    if certificate.x is None or certificate.y is None:
        raise ValueError("only vector certificates can be lifted")
    A = rank_one(certificate.x, certificate.x)
    B = rank_one(certificate.y, certificate.y)
    return NonUecCertificate(
        supermap.label,
        d_metric(A, B, scheme).value,
        d_metric(apply_supermap(supermap, A), apply_supermap(supermap, B), scheme).value,
        scheme.scheme_id,
        A=A,
        B=B,
    )


def automorphism_correspondence(
    u_family: OperatorFamily,
    scheme: MetricScheme,
    deltas: Sequence[float],
    budget: int,
    seed: int,
    delta_max: float = 1e-2,
    gain_min: float = 10.0,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> CorrespondenceVerdict:
    """Compare the certificate searches for {u_t} on (H_1, rho) and for {α_t} on (B_1, d)."""
    alphas = supermap_family(u_family, SuperMapKind.CONJUGATION, tolerances)
    for m in alphas:
        if m.unitarity_defect > tolerances.unitary_polar:
            logger.warning("%s uses the polar factor (defect %.3g)", m.label, m.unitarity_defect)

    vector_cert = certificate_search(u_family, scheme, delta_max, gain_min, seed, budget)
    operator_cert = certificate_search_supermaps(alphas, scheme, delta_max, gain_min, seed, budget)

    lifted = None
    lifted_valid = True
    if vector_cert is not None:
        alpha = alphas[u_family.labels.index(vector_cert.member_label)]
        lifted = lift_certificate(vector_cert, alpha, scheme)
        lifted_valid = lifted.output_dist - lifted.input_dist >= LIFT_GAP_MIN

    if vector_cert is not None and operator_cert is not None:
        verdict = "both witnessed"
    elif vector_cert is None and operator_cert is None:
        verdict = "both none"
    else:
        verdict = "disagree"

    curves = {}
    if deltas:
        curves["vectors"] = estimate_modulus_vectors(u_family, scheme, deltas, budget, seed)
        curves["automorphisms"] = estimate_modulus_supermaps(alphas, scheme, deltas, budget, seed)
    return CorrespondenceVerdict(verdict, vector_cert, operator_cert, lifted, lifted_valid, curves, alphas)
