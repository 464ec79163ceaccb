"""module for turning analysis results into the JSON report document and its curve tables"""

import json
import re
from collections.abc import Iterable

import numpy as np

from ..core.models import (
    BandedResult,
    BOperator,
    CorrespondenceVerdict,
    DimCriterionReport,
    HVector,
    MetricScheme,
    ModulusComparison,
    ModulusCurve,
    NonUecCertificate,
    OperatorFamily,
    PreimageReport,
    SuperMap,
)
from ..repositories.matrix_csv import format_number
from .operators import unitarity_defect

CURVE_HEADER = ("delta", "omega_hat", "samples")
UNITARY_KINDS = ("mult_group", "conjugation_group")

# entries at or below this magnitude are left out of sparse coordinate dumps
SPARSE_ZERO = 1e-15


def number(value: float) -> float:
    """Round to 12 significant digits."""
    return float(format_number(float(value)))


def numbers(values: Iterable[float]) -> list[float]:
    return [number(v) for v in values]


def complex_pair(z: complex) -> list[float]:
    return [number(z.real), number(z.imag)]


def _sparse_vector(v: HVector) -> list[list[float]]:
    return [[int(p), *complex_pair(v.coords[p])] for p in np.flatnonzero(np.abs(v.coords) > SPARSE_ZERO)]


def _sparse_matrix(op: BOperator) -> list[list[float]]:
    rows, cols = np.nonzero(np.abs(op.matrix) > SPARSE_ZERO)
    return [[int(i), int(j), *complex_pair(op.matrix[i, j])] for i, j in zip(rows, cols, strict=True)]


def serialize_scheme(scheme: MetricScheme) -> dict:
    return {
        "scheme_id": scheme.scheme_id,
        "M": scheme.M,
        "schedule": list(scheme.schedule),
        "net_quality": numbers(scheme.net_quality),
        "tail_bound": number(scheme.tail_bound),
        "c0": number(scheme.c0),
        "seed": scheme.seed,
    }


def serialize_family(family: OperatorFamily) -> dict:
    """Members with sigma_max; unitary groups also record each truncation's defect |T*T - I|."""
    members = []
    for label, op in family:
        member = {"label": label, "sigma_max": number(op.sigma_max)}
        if family.descriptor.kind in UNITARY_KINDS:
            member["unitarity_defect"] = number(unitarity_defect(op))
        members.append(member)
    return {
        "kind": family.descriptor.kind,
        "dim": family.dim,
        "indexing": family.indexing.kind.value,
        "members": members,
    }


def serialize_supermaps(maps: Iterable[SuperMap]) -> list[dict]:
    return [
        {
            "label": m.label,
            "kind": m.kind.value,
            "unitarity_defect": number(m.unitarity_defect),
            "polar_corrected": m.polar_corrected,
        }
        for m in maps
    ]


def serialize_curve(curve: ModulusCurve) -> dict:
    return {
        "deltas": numbers(curve.deltas),
        "omega_hat": numbers(curve.omega_hat),
        "method": curve.method,
        "samples_per_delta": curve.samples_per_delta,
        "seed": curve.seed,
    }


def serialize_certificate(cert: NonUecCertificate | None) -> dict | None:
    if cert is None:
        return None
    data = {
        "member_label": cert.member_label,
        "input_dist": number(cert.input_dist),
        "output_dist": number(cert.output_dist),
        "gain": number(cert.gain),
        "scheme_id": cert.scheme_id,
    }
    if cert.x is not None and cert.y is not None:
        data["x"] = _sparse_vector(cert.x)
        data["y"] = _sparse_vector(cert.y)
    if cert.A is not None and cert.B is not None:
        data["A"] = _sparse_matrix(cert.A)
        data["B"] = _sparse_matrix(cert.B)
    return data


def _serialize_comparison(result: ModulusComparison) -> dict:
    notes = {
        key: numbers(value) if isinstance(value, list) else value for key, value in result.notes.items()
    }
    return {
        "holds": result.holds,
        "max_violation": number(result.max_violation),
        "slack": number(result.slack),
        "curves": {name: serialize_curve(curve) for name, curve in result.curves.items()},
        "notes": notes,
    }


def serialize_result(result: object) -> dict:
    """JSON form of one engine result."""
    match result:
        case DimCriterionReport():
            return {
                "c": number(result.c),
                "per_member": [
                    {
                        "label": m.label,
                        "singular_values": numbers(m.singular_values),
                        "count_at_least_c": m.count_at_least_c,
                    }
                    for m in result.per_member
                ],
                "container_dim": result.container_dim,
                "growth_trace": [list(step) for step in result.growth_trace],
                "verdict": result.verdict,
            }
        case BandedResult():
            violation = None
            if result.violation is not None:
                label, i, j, value = result.violation
                violation = {"label": label, "i": i, "j": j, "value": complex_pair(value)}
            return {"passed": result.passed, "violation": violation}
        case PreimageReport():
            return {
                "beta": number(result.beta),
                "growth_trace": [list(step) for step in result.growth_trace],
                "verdict": result.verdict,
            }
        case ModulusCurve():
            return {"curve": serialize_curve(result)}
        case NonUecCertificate() | None:
            return {"found": result is not None, "certificate": serialize_certificate(result)}
        case CorrespondenceVerdict():
            return {
                "verdict": result.verdict,
                "vector_certificate": serialize_certificate(result.vector_certificate),
                "operator_certificate": serialize_certificate(result.operator_certificate),
                "lifted_certificate": serialize_certificate(result.lifted_certificate),
                "lifted_valid": result.lifted_valid,
                "curves": {name: serialize_curve(curve) for name, curve in result.curves.items()},
                "supermaps": serialize_supermaps(result.automorphisms),
            }
        case ModulusComparison():
            return _serialize_comparison(result)
    raise TypeError(f"no report form for {type(result).__name__}")


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def _file_stem(name: str) -> str:
    stem = re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_")
    return stem or "curve"


def _report_curves(report: dict) -> list[tuple[str, dict]]:
    found = []
    for analysis in report.get("analyses", []):
        result = analysis.get("result") or {}
        if "curve" in result:
            found.append((analysis["label"], result["curve"]))
        for key, curve in (result.get("curves") or {}).items():
            found.append((f"{analysis['label']}-{key}", curve))
    return found


def curve_tables(report: dict) -> list[tuple[str, list[tuple[str, ...]]]]:
    """One (file name, rows) table per curve, rows in ascending delta.

    Names derive from the analysis labels; a repeated name gets "-2", "-3", ... appended.
    """
    tables = []
    seen: dict[str, int] = {}
    for name, curve in _report_curves(report):
        stem = _file_stem(name)
        seen[stem] = seen.get(stem, 0) + 1
        if seen[stem] > 1:
            stem = f"{stem}-{seen[stem]}"
        rows = [CURVE_HEADER]
        points = sorted(zip(curve["deltas"], curve["omega_hat"], strict=True))
        samples = str(curve["samples_per_delta"])
        rows.extend((format_number(delta), format_number(omega), samples) for delta, omega in points)
        tables.append((f"{stem}.csv", rows))
    return tables


def parse_curve_csv(text: str) -> tuple[list[float], list[float]]:
    lines = text.strip().splitlines()
    if not lines or tuple(lines[0].split(",")) != CURVE_HEADER:
        raise ValueError("not a curve table")
    rows = [line.split(",") for line in lines[1:]]
    return [float(r[0]) for r in rows], [float(r[1]) for r in rows]
