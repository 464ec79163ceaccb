"""module for experiment orchestration: config in, self-describing report out"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..core.config import ExperimentConfig, FamilySpec
from ..core.exceptions import ConfigValidationError
from ..core.models import BasisIndexing, HVector, MetricScheme, OperatorFamily, SuperMap, SuperMapKind
from ..repositories.base import BaseReportRepository
from .certificates import automorphism_correspondence, certificate_search, certificate_search_supermaps
from .criteria import FamilySource, banded_check, dim_criterion, isometry_preimage_check
from .families import FamilyFactory
from .modulus import (
    composition_modulus_check,
    ec_equals_uec_check,
    estimate_modulus_supermaps,
    estimate_modulus_vectors,
)
from .operators import check_ball, max_superdiagonal, safe_window, supermap_family
from .report import (
    curve_tables,
    number,
    serialize_family,
    serialize_result,
    serialize_scheme,
    serialize_supermaps,
)
from .space import build_scheme

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    config: ExperimentConfig
    indexing: BasisIndexing
    scheme: MetricScheme
    family: OperatorFamily
    source: FamilySource

    def basis(self, indices: list[int]) -> list[HVector]:
        try:
            return [HVector.basis(self.indexing, i) for i in indices]
        except KeyError as exc:
            raise ConfigValidationError(str(exc.args[0])) from exc

    def ladder(self, dims: list[int] | None) -> list[int]:
        return list(dims or self.config.space.truncation_dims)


Analysis = Callable[[object, RunContext], object]


def _is_identity(family: OperatorFamily, tol: float) -> bool:
    eye = np.eye(family.dim)
    return all(np.abs(op.matrix - eye).max() <= tol for op in family.operators)


class ExperimentService:
    """Runs the configured analyses in declared order and assembles the report."""

    def __init__(self, repository: BaseReportRepository, factory: FamilyFactory | None = None) -> None:
        self.repository = repository
        self.factory = factory or FamilyFactory()
        self.__analyses: dict[str, Analysis] = {
            "dim_criterion": self._dim_criterion,
            "banded": self._banded,
            "isometry": self._isometry,
            "modulus": self._modulus,
            "certificate": self._certificate,
            "correspondence": self._correspondence,
            "ec_uec": self._ec_uec,
            "composition": self._composition,
        }

    def _family(self, spec: FamilySpec, indexing: BasisIndexing) -> tuple[OperatorFamily, FamilySource]:
        family = self.factory.create(spec, indexing)
        if spec.scale == "half_dim":
            return family, self.factory.scaled(spec, indexing)
        return family, family

    def _supermaps(self, family: OperatorFamily, name: str, ctx: RunContext) -> list[SuperMap]:
        return supermap_family(family, SuperMapKind(name), ctx.config.tolerances)

    def _supermap_name(self, requested: str | None, ctx: RunContext) -> str | None:
        # a conjugation group is analysed through its automorphisms unless told otherwise
        if requested is None and ctx.config.family.kind == "conjugation_group":
            return SuperMapKind.CONJUGATION.value
        return requested

    def _context(self, config: ExperimentConfig) -> RunContext:
        indexing = BasisIndexing(config.space.indexing, config.space.max_dim)
        family, source = self._family(config.family, indexing)
        check_ball(family, config.tolerances)
        scheme = build_scheme(indexing, config.scheme.L, config.scheme.net_depth, config.scheme.seed)
        return RunContext(config, indexing, scheme, family, source)

    def _dim_criterion(self, spec, ctx: RunContext):
        V = ctx.basis(spec.V_indices)
        return dim_criterion(ctx.source, V, spec.c, ctx.ladder(spec.truncation_dims), ctx.config.tolerances)

    def _banded(self, spec, ctx: RunContext):
        return banded_check(ctx.family, spec.K, ctx.config.tolerances)

    def _isometry(self, spec, ctx: RunContext):
        V = ctx.basis(spec.V_indices)
        return isometry_preimage_check(ctx.source, V, ctx.ladder(spec.truncation_dims), ctx.config.tolerances)

    def _modulus(self, spec, ctx: RunContext):
        name = self._supermap_name(spec.supermap, ctx)
        if name:
            maps = self._supermaps(ctx.family, name, ctx)
            return estimate_modulus_supermaps(maps, ctx.scheme, spec.deltas, spec.budget, spec.seed), maps
        return estimate_modulus_vectors(ctx.family, ctx.scheme, spec.deltas, spec.budget, spec.seed)

    def _certificate(self, spec, ctx: RunContext):
        name = self._supermap_name(spec.supermap, ctx)
        if name:
            maps = self._supermaps(ctx.family, name, ctx)
            found = certificate_search_supermaps(
                maps, ctx.scheme, spec.delta_max, spec.gain_min, spec.seed, spec.budget
            )
            return found, maps
        return certificate_search(ctx.family, ctx.scheme, spec.delta_max, spec.gain_min, spec.seed, spec.budget)

    def _correspondence(self, spec, ctx: RunContext):
        return automorphism_correspondence(
            ctx.family,
            ctx.scheme,
            spec.deltas,
            spec.budget,
            spec.seed,
            spec.delta_max,
            spec.gain_min,
            ctx.config.tolerances,
        )

    def _ec_uec(self, spec, ctx: RunContext):
        return ec_equals_uec_check(
            ctx.family, ctx.scheme, spec.base_points, spec.budget, spec.seed, spec.deltas, ctx.config.tolerances
        )

    def _composition(self, spec, ctx: RunContext):
        second, _ = self._family(spec.second, ctx.indexing)
        check_ball(second, ctx.config.tolerances)
        F, G = ctx.family, second
        first_kind = spec.supermap or spec.second_supermap
        if not first_kind:
            return composition_modulus_check(
                F, G, ctx.scheme, spec.deltas, spec.budget, spec.seed, spec.cap, ctx.config.tolerances
            )
        F = self._supermaps(ctx.family, first_kind, ctx)
        G = self._supermaps(second, spec.second_supermap or first_kind, ctx)
        result = composition_modulus_check(
            F, G, ctx.scheme, spec.deltas, spec.budget, spec.seed, spec.cap, ctx.config.tolerances
        )
        return result, F + G

    def build_report(self, config: ExperimentConfig) -> dict:
        started = time.perf_counter()
        ctx = self._context(config)
        analyses = []
        for spec in config.analyses:
            logger.info("analysis %s (%s) started", spec.name, spec.kind)
            outcome = self.__analyses[spec.kind](spec, ctx)
            result, maps = outcome if isinstance(outcome, tuple) else (outcome, None)
            serialized = serialize_result(result)
            if maps is not None:
                serialized["supermaps"] = serialize_supermaps(maps)
            analyses.append({"label": spec.name, "kind": spec.kind, "result": serialized})
            logger.info("analysis %s finished", spec.name)

        return {
            "version": __version__,
            "config": config.model_dump(mode="json"),
            "tolerances": config.tolerances.model_dump(mode="json"),
            "scheme": serialize_scheme(ctx.scheme),
            "family": serialize_family(ctx.family),
            "analyses": analyses,
            "wall_time": number(time.perf_counter() - started),
        }

    async def run(self, config: ExperimentConfig) -> dict:
        report = self.build_report(config)
        await self.repository.save_report(config.output.report_path, report)
        if config.output.curves_dir and curve_tables(report):
            await self.emit_curves(report, config.output.curves_dir)
        return report

    async def emit_curves(self, report: dict, out_dir: str | Path) -> list[str]:
        tables = curve_tables(report)
        if not tables:
            raise ConfigValidationError("report contains no modulus curve")
        return await self.repository.save_curves(str(out_dir), tables)

    def describe(self, config: ExperimentConfig) -> str:
        indexing = BasisIndexing(config.space.indexing, config.space.max_dim)
        family, _ = self._family(config.family, indexing)
        tol = config.tolerances
        n = len(family)
        head = f"{n} member" if n == 1 else f"{n} members"
        if n and _is_identity(family, tol.identity):
            lines = [f"{head}, identity"]
        else:
            top = max_superdiagonal(family, tol.banded_zero)
            lines = [f"{head}, max superdiagonal {'none' if top is None else top}"]
        lines.append(f"dimension {family.dim} ({indexing.kind.value} indexing)")
        if n:
            norms = [op.sigma_max for op in family.operators]
            lines.append(f"sigma_max {number(max(norms)):.12g} (min {number(min(norms)):.12g})")
        for label, op in family:
            lines.append(f"  {label}: {op.dim}x{op.dim}, sigma_max {number(op.sigma_max):.12g}")
        window = safe_window(family, tol.banded_zero)
        lines.append("safe window empty" if window is None else f"safe window {window[0]}..{window[1]}")
        return "\n".join(lines)
