"""module for experiment configuration: one JSON document, validated with pydantic"""

import json
from pathlib import Path
from typing import Annotated, Literal

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, ValidationError, model_validator

from .exceptions import ConfigValidationError
from .models import IndexingKind

DEFAULT_DELTAS = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2]


class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    norm: float = 1e-9
    identity: float = 1e-12
    rank: float = 1e-9
    statistical: float = 1e-2
    tie: float = 1e-9
    banded_zero: float = 1e-12
    unitary_polar: float = 1e-6
    unitary_column: float = 5e-2
    oracle_rank: float = 1e-6
    bounded_below_min: float = 1e-6
    slack: float = 0.05


DEFAULT_TOLERANCES = Tolerances()


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _check_ladder(dims: list[int]) -> list[int]:
    if any(b <= a for a, b in zip(dims, dims[1:], strict=False)):
        raise ValueError("ladder not increasing")
    if any(d < 1 for d in dims):
        raise ValueError("truncation dimensions must be positive")
    return dims


Ladder = Annotated[list[int], AfterValidator(_check_ladder)]


class SpaceConfig(_Strict):
    indexing: IndexingKind
    truncation_dims: Ladder = Field(min_length=1)
    dimension_cap: int = 512

    @model_validator(mode="after")
    def _within_cap(self) -> "SpaceConfig":
        if max(self.truncation_dims) > self.dimension_cap:
            raise ValueError(
                f"dimension overflow: {max(self.truncation_dims)} exceeds cap {self.dimension_cap}"
            )
        return self

    @property
    def max_dim(self) -> int:
        return self.truncation_dims[-1]


class SchemeConfig(_Strict):
    L: int = Field(ge=1)
    net_depth: int = Field(ge=0)
    seed: int


FamilyKind = Literal[
    "left_shift_powers",
    "right_shift_powers",
    "adjoint_right_shift_powers",
    "mult_group",
    "conjugation_group",
    "random_banded",
    "custom",
]

_REQUIRED_PARAMS: dict[str, tuple[str, ...]] = {
    "left_shift_powers": ("k_max",),
    "right_shift_powers": ("n_max",),
    "adjoint_right_shift_powers": ("n_max",),
    "mult_group": ("t_list",),
    "conjugation_group": ("t_list",),
    "random_banded": ("members", "seed"),
    "custom": ("matrix_files",),
}


class FamilySpec(_Strict):
    kind: FamilyKind
    k_max: int | None = Field(default=None, ge=0)
    n_max: int | None = Field(default=None, ge=0)
    t_list: list[float] | None = None
    members: int | None = Field(default=None, ge=1)
    K: int = Field(default=0, ge=0)
    seed: int | None = None
    matrix_files: list[str] | None = None
    labels: list[str] | None = None
    scale: Literal["fixed", "half_dim"] = "fixed"

    @model_validator(mode="after")
    def _has_parameters(self) -> "FamilySpec":
        scaled = self.scale == "half_dim"
        missing = [
            name
            for name in _REQUIRED_PARAMS[self.kind]
            if getattr(self, name) is None and not (scaled and name in ("k_max", "n_max"))
        ]
        if missing:
            raise ValueError(f"family '{self.kind}' requires {', '.join(missing)}")
        return self


SuperMapName = Literal["left_mult", "right_mult", "conjugation"]


class _AnalysisBase(_Strict):
    label: str | None = None

    @property
    def name(self) -> str:
        return self.label or self.kind  # type: ignore[attr-defined]


class DimCriterionSpec(_AnalysisBase):
    kind: Literal["dim_criterion"]
    V_indices: list[int] = Field(min_length=1)
    c: float = Field(gt=0.0, le=1.0)
    truncation_dims: Ladder | None = None


class BandedSpec(_AnalysisBase):
    kind: Literal["banded"]
    K: int = Field(ge=0)


class IsometrySpec(_AnalysisBase):
    kind: Literal["isometry"]
    V_indices: list[int] = Field(min_length=1)
    truncation_dims: Ladder | None = None


def _check_deltas(deltas: list[float]) -> list[float]:
    if any(d <= 0 for d in deltas) or any(b <= a for a, b in zip(deltas, deltas[1:], strict=False)):
        raise ValueError("deltas must be positive and increasing")
    return deltas


DeltaGrid = Annotated[list[float], AfterValidator(_check_deltas)]


class ModulusSpec(_AnalysisBase):
    kind: Literal["modulus"]
    deltas: DeltaGrid = Field(default_factory=lambda: list(DEFAULT_DELTAS), min_length=1)
    budget: int = Field(default=1000, ge=100)
    seed: int
    supermap: SuperMapName | None = None


class CertificateSpec(_AnalysisBase):
    kind: Literal["certificate"]
    delta_max: float = Field(default=1e-2, gt=0.0)
    gain_min: float = Field(default=10.0, gt=1.0)
    budget: int = Field(default=1000, ge=0)
    seed: int
    supermap: SuperMapName | None = None


class CorrespondenceSpec(_AnalysisBase):
    kind: Literal["correspondence"]
    deltas: DeltaGrid = Field(default_factory=list)
    delta_max: float = Field(default=1e-2, gt=0.0)
    gain_min: float = Field(default=10.0, gt=1.0)
    budget: int = Field(default=1000, ge=100)
    seed: int


class EcUecSpec(_AnalysisBase):
    kind: Literal["ec_uec"]
    deltas: DeltaGrid = Field(default_factory=lambda: list(DEFAULT_DELTAS), min_length=1)
    base_points: int = Field(default=8, ge=1)
    budget: int = Field(default=1000, ge=100)
    seed: int


class CompositionSpec(_AnalysisBase):
    kind: Literal["composition"]
    second: FamilySpec
    supermap: SuperMapName | None = None
    second_supermap: SuperMapName | None = None
    deltas: DeltaGrid = Field(default_factory=lambda: list(DEFAULT_DELTAS), min_length=1)
    budget: int = Field(default=1000, ge=100)
    seed: int
    cap: int = Field(default=4096, ge=1)


AnalysisSpec = Annotated[
    DimCriterionSpec
    | BandedSpec
    | IsometrySpec
    | ModulusSpec
    | CertificateSpec
    | CorrespondenceSpec
    | EcUecSpec
    | CompositionSpec,
    Field(discriminator="kind"),
]


class OutputConfig(_Strict):
    report_path: str = "report.json"
    curves_dir: str | None = None


class ExperimentConfig(_Strict):
    space: SpaceConfig
    scheme: SchemeConfig
    family: FamilySpec
    analyses: list[AnalysisSpec] = Field(min_length=1)
    output: OutputConfig = Field(default_factory=OutputConfig)
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @model_validator(mode="after")
    def _nested_ladders_fit(self) -> "ExperimentConfig":
        for spec in self.analyses:
            dims = getattr(spec, "truncation_dims", None)
            if dims and max(dims) > self.space.max_dim:
                raise ValueError(
                    f"analysis '{spec.name}' ladder exceeds the space truncation {self.space.max_dim}"
                )
        return self


def parse_config(document: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as exc:
        raise ConfigValidationError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigValidationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(document)
