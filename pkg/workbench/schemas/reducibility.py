# Pydantic schemas for reducibility verdicts, section checks and the
# counterexample suite

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ..utils.constants import HEURISTIC_LABEL
from .diagnostics import ComplexValue, ErgodicityReport, Thresholds, UlamSupportReport, Verdict


class BundleVerdict(str, Enum):
    IRREDUCIBLE_CONSISTENT = "irreducible-consistent"
    REDUCIBLE_WITNESSED = "reducible-witnessed"
    UNKNOWN = "unknown"


class ScalarVerdict(str, Enum):
    EXCLUDED_CONSISTENT = "excluded-consistent"
    UNKNOWN = "unknown"


class SectionChart(str, Enum):
    COMPLEX = "complexGrass"
    REAL = "realGrass"


class ClaimStatus(str, Enum):
    CONFIRMED = "confirmed"
    NOT_CONFIRMED = "not-confirmed"


# ============== Section Schemas ==============

class SectionSummary(BaseModel):
    """Serialized InvariantSection."""
    chart: SectionChart
    representation: str = Field(..., description="constant or sampled")
    coordinate: Any = Field(None, description="Constant coordinate: {re, im}, 'inf' or a torus value")
    samples: int = 0
    residual: float


class ResidualReport(BaseModel):
    chart: SectionChart
    residual: float
    samples: int
    witnessed: bool = Field(..., description="residual within the witness tolerance")
    k_dispersion: Optional[float] = None


class DiagonalizationReport(BaseModel):
    """Constant change of basis C = [v1 v2] and its check on samples."""
    basis: List[List[ComplexValue]]
    samples: int
    max_off_diagonal: float
    max_diagonal_error: float
    unit_modulus_error: float
    diagonal: bool


class InvariantSetReport(BaseModel):
    """Exact invariance of a rational interval set under exact fibre maps."""
    set: List[str]
    maps: List[str]
    invariant: bool
    measure: str = Field(..., description="Exact measure p/q")
    measure_value: float
    failing_maps: List[str] = Field(default_factory=list)


# ============== Verdict Schemas ==============

class IrreducibilityVerdict(BaseModel):
    """Bundle criteria applied in the direction ergodicity => irreducibility."""
    real_bundle: BundleVerdict
    complex_bundle: BundleVerdict
    scalar_cohomology: ScalarVerdict
    verdict_R: Verdict
    verdict_S: Verdict
    system: Dict[str, Any]
    thresholds: Thresholds
    sections: List[SectionSummary] = Field(default_factory=list)
    label: str = HEURISTIC_LABEL


class ReducibilitySearchReport(BaseModel):
    """search-reducibility output: scans, candidate sections, verdict."""
    cocycle: Dict[str, Any]
    sections: List[SectionSummary] = Field(default_factory=list)
    section_checks: List[ResidualReport] = Field(default_factory=list)
    diagonalization: Optional[DiagonalizationReport] = None
    notes: List[str] = Field(default_factory=list)
    report_R: ErgodicityReport
    report_S: ErgodicityReport
    verdict: IrreducibilityVerdict
    label: str = HEURISTIC_LABEL


# ============== Counterexample Schemas ==============

class ClaimRow(BaseModel):
    subject: str
    claim: str
    status: ClaimStatus
    detail: str = ""


class CounterexampleReport(BaseModel):
    claims: List[ClaimRow]
    invariant_sets: List[InvariantSetReport]
    scans: Dict[str, ErgodicityReport]
    ulam: Optional[UlamSupportReport] = None
    label: str = HEURISTIC_LABEL

    @property
    def all_confirmed(self) -> bool:
        return all(row.status == ClaimStatus.CONFIRMED for row in self.claims)
