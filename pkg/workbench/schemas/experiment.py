# Pydantic schemas for experiment configuration
# Plain-text TOML sections, environment overrides, CLI overrides
# Unknown keys are rejected everywhere; everything is validated before any run

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, Union

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from ..errors import DomainError
from ..utils.constants import DEFAULT_N, DEFAULT_STARTS, MIN_STARTS
from ..utils.torus import parse_angle
from .diagnostics import Thresholds

AngleLiteral = Union[str, float, int]


class ExperimentKind(str, Enum):
    ORBIT = "orbit"
    LYAPUNOV = "lyapunov"
    DIAGNOSE = "diagnose"
    INDUCE = "induce"
    SEARCH_REDUCIBILITY = "search-reducibility"
    VERIFY_COUNTEREXAMPLES = "verify-counterexamples"
    REPRODUCE_PAPER = "reproduce-paper"


class InduceFormula(str, Enum):
    RETURNS = "returns"
    SECTION_MAP = "S_B"
    SQUARED_RETURN = "Q"
    Z2_SECTION_MAP = "R_B"
    ALL = "all"


def _literal(value: Optional[AngleLiteral]) -> Optional[str]:
    """Validate an angle literal and keep its text form."""
    if value is None:
        return None
    text = repr(value) if isinstance(value, float) else str(value)
    try:
        parse_angle(text)
    except ValueError as e:
        raise ValueError(str(e)) from e
    return text


class _Section(BaseModel):
    model_config = {"extra": "forbid"}


# ============== Config Sections ==============

class BaseSpec(_Section):
    kind: Optional[str] = Field(None, description="rotation or bernoulli; defaults to the cocycle's base")
    eta: Optional[AngleLiteral] = Field("sqrt2-1", description="Rotation number (rotation bases only)")

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in ("rotation", "bernoulli"):
            raise ValueError("base.kind must be 'rotation' or 'bernoulli'")
        return v

    @field_validator("eta", mode="before")
    @classmethod
    def validate_eta(cls, v):
        return _literal(v)


class TableRow(_Section):
    lo: AngleLiteral
    hi: AngleLiteral
    element: str = Field(..., description="rotation or reflection")
    angle: AngleLiteral

    @field_validator("lo", "hi", "angle", mode="before")
    @classmethod
    def validate_literals(cls, v):
        return _literal(v)

    @field_validator("element")
    @classmethod
    def validate_element(cls, v: str) -> str:
        if v not in ("rotation", "reflection"):
            raise ValueError("table element must be 'rotation' or 'reflection'")
        return v


class CocycleSpec(_Section):
    kind: str = Field("example1", description="example1 | example2 | example3 | cex1 | cex2 | table")
    alpha: Optional[AngleLiteral] = Field("sqrt3-1", description="Rotation angle for example2 / example3")
    table: List[TableRow] = Field(default_factory=list)

    @field_validator("kind")
    @classmethod
    def validate_kind(cls, v: str) -> str:
        allowed = ("example1", "example2", "example3", "cex1", "cex2", "table")
        if v not in allowed:
            raise ValueError(f"cocycle.kind must be one of {', '.join(allowed)}")
        return v

    @field_validator("alpha", mode="before")
    @classmethod
    def validate_alpha(cls, v):
        return _literal(v)

    @property
    def base_kind(self) -> str:
        return "bernoulli" if self.kind in ("example3", "cex2") else "rotation"


class SkewSpec(_Section):
    system: str = Field("S", description="S | R | N | Z3")

    @field_validator("system")
    @classmethod
    def validate_system(cls, v: str) -> str:
        if v not in ("S", "R", "N", "Z3"):
            raise ValueError("skew.system must be one of S, R, N, Z3")
        return v


class NumericsSpec(_Section):
    n: int = Field(DEFAULT_N, ge=1, description="Orbit length N for averages and products")
    starts: int = Field(DEFAULT_STARTS, ge=MIN_STARTS, description="Independent starts per scan")
    orbit_length: int = Field(100, ge=0, description="Iterates written by the orbit command")
    lyapunov_samples: int = Field(16, ge=1, description="Random (x, v) pairs for growth checks")
    lyapunov_method: str = Field("matrix", description="matrix (float products along the orbit) or angle")
    section_samples: int = Field(10_000, ge=1)
    trajectories: bool = Field(False, description="Write per-start Birkhoff trajectories")

    @field_validator("lyapunov_method")
    @classmethod
    def validate_method(cls, v: str) -> str:
        if v not in ("angle", "matrix"):
            raise ValueError("numerics.lyapunov_method must be 'angle' or 'matrix'")
        return v


class InducingSpec(_Section):
    formula: InduceFormula = InduceFormula.ALL
    section: Optional[Tuple[AngleLiteral, AngleLiteral]] = Field(
        None, description="[a, b); defaults to [1 - eta, 1)"
    )
    orientation: str = Field("reversing", description="Section chart; reversing sends the left endpoint to 0")
    samples: int = Field(10_000, ge=1)

    @field_validator("section", mode="before")
    @classmethod
    def validate_section(cls, v):
        if v is None:
            return None
        if len(v) != 2:
            raise ValueError("inducing.section needs two endpoints")
        return tuple(_literal(e) for e in v)

    @field_validator("orientation")
    @classmethod
    def validate_orientation(cls, v: str) -> str:
        if v not in ("preserving", "reversing"):
            raise ValueError("inducing.orientation must be 'preserving' or 'reversing'")
        return v


class UlamSpec(_Section):
    enabled: bool = False
    grid: Tuple[int, int] = (60, 60)
    samples_per_cell: int = Field(64, ge=1)
    tol: float = Field(1e-6, gt=0)

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v):
        if v[0] < 2 or v[1] < 2:
            raise ValueError("ulam.grid must be at least 2 x 2")
        return v


# ============== Experiment Config ==============

class ExperimentConfig(BaseSettings):
    """
    A fully validated experiment.

    Sources, highest priority first: CLI overrides, environment
    (WORKBENCH_<SECTION>__<KEY>), the TOML file given by --config.
    """
    experiment: ExperimentKind = ExperimentKind.DIAGNOSE
    seed: int = Field(0, ge=0, lt=2 ** 64)
    threads: int = Field(1, ge=1)
    out: str = "out"
    base: BaseSpec = Field(default_factory=BaseSpec)
    cocycle: CocycleSpec = Field(default_factory=CocycleSpec)
    skew: SkewSpec = Field(default_factory=SkewSpec)
    numerics: NumericsSpec = Field(default_factory=NumericsSpec)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    inducing: InducingSpec = Field(default_factory=InducingSpec)
    ulam: UlamSpec = Field(default_factory=UlamSpec)

    model_config = SettingsConfigDict(
        env_prefix="WORKBENCH_",
        env_nested_delimiter="__",
        extra="forbid",
    )

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentConfig":
        if self.base.kind is None:
            self.base.kind = self.cocycle.base_kind
        experiment = self.experiment
        if experiment in (ExperimentKind.VERIFY_COUNTEREXAMPLES, ExperimentKind.REPRODUCE_PAPER):
            return self
        if self.cocycle.base_kind != self.base.kind:
            raise ValueError(
                f"cocycle {self.cocycle.kind} runs over a {self.cocycle.base_kind} base, "
                f"but base.kind is {self.base.kind}"
            )
        if self.base.kind == "rotation" and self.base.eta is None:
            raise ValueError("rotation bases need base.eta")
        if self.cocycle.kind in ("example2", "example3") and self.cocycle.alpha is None:
            raise ValueError(f"{self.cocycle.kind} needs cocycle.alpha")
        if self.cocycle.kind == "table" and not self.cocycle.table:
            raise ValueError("table cocycles need at least one [[cocycle.table]] row")
        if experiment == ExperimentKind.INDUCE and self.base.kind != "rotation":
            raise ValueError("induce needs a rotation base")
        return self

    def echo(self) -> Dict[str, Any]:
        """Serialized copy embedded in every report."""
        return self.model_dump(mode="json")


def load_experiment_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Build an ExperimentConfig from a TOML file, the environment and overrides.

    Raises:
        DomainError for a missing file or any validation failure
    """
    if path is not None and not Path(path).is_file():
        raise DomainError(f"config file not found: {path}")

    class _FileBackedConfig(ExperimentConfig):
        @classmethod
        def settings_customise_sources(
            cls,
            settings_cls: Type[BaseSettings],
            init_settings: PydanticBaseSettingsSource,
            env_settings: PydanticBaseSettingsSource,
            dotenv_settings: PydanticBaseSettingsSource,
            file_secret_settings: PydanticBaseSettingsSource,
        ) -> Tuple[PydanticBaseSettingsSource, ...]:
            sources = [init_settings, env_settings]
            if path is not None:
                sources.append(TomlConfigSettingsSource(settings_cls, toml_file=path))
            return tuple(sources)

    try:
        return _FileBackedConfig(**(overrides or {}))
    except ValueError as e:
        # ValidationError, TOML syntax errors and env parsing errors
        raise DomainError(f"invalid experiment config:\n{e}") from e
