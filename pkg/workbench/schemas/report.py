# Pydantic schemas for report envelopes
# Every JSON report is a RunReport wrapping one experiment's payload;
# a .schema.json generated from these models is written next to it

from typing import Any, Dict, Generic, List, Optional, TypeVar

from pydantic import BaseModel, Field

from .. import TOOL_NAME, __version__
from ..utils.constants import HEURISTIC_LABEL, REPORT_SCHEMA_VERSION
from .diagnostics import ErgodicityReport, UlamSupportReport
from .experiment import ExperimentKind
from .inducing import InducingReport
from .reducibility import ClaimRow, CounterexampleReport, DiagonalizationReport, IrreducibilityVerdict

PayloadT = TypeVar("PayloadT", bound=BaseModel)


class RunReport(BaseModel, Generic[PayloadT]):
    """Envelope: provenance first, then the experiment payload."""
    tool: str = TOOL_NAME
    version: str = __version__
    schema_version: str = REPORT_SCHEMA_VERSION
    experiment: ExperimentKind
    seed: int
    config: Dict[str, Any] = Field(..., description="Fully resolved experiment config")
    payload: PayloadT


# ============== Payloads ==============

class OrbitPayload(BaseModel):
    system: Dict[str, Any]
    start: Dict[str, str]
    steps: int
    csv: str = Field(..., description="CSV file holding one row per iterate")


class LyapunovSample(BaseModel):
    base_point: str
    vector: List[float]
    exponent: float


class LyapunovPayload(BaseModel):
    system: Dict[str, Any]
    method: str
    n: int
    samples: List[LyapunovSample]
    max_abs_exponent: float


class DiagnosePayload(BaseModel):
    scan: ErgodicityReport
    averages_csv: str
    trajectories_csv: Optional[str] = None
    ulam: Optional[UlamSupportReport] = None
    ulam_heat_csv: Optional[str] = None


class InducePayload(BaseModel):
    reports: List[InducingReport]
    notes: List[str] = Field(default_factory=list)


class ExampleSummary(BaseModel):
    """One worked example: its scans, bundle verdict and extras."""
    name: str
    report_R: ErgodicityReport
    report_S: ErgodicityReport
    verdict: IrreducibilityVerdict
    diagonalization: Optional[DiagonalizationReport] = None
    inducing: List[InducingReport] = Field(default_factory=list)


class ReproductionPayload(BaseModel):
    examples: List[ExampleSummary]
    counterexamples: CounterexampleReport
    rows: List[ClaimRow]
    label: str = HEURISTIC_LABEL
