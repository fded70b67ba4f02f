# Pydantic schemas for ergodicity diagnostics
# Verdicts are heuristic: the vocabulary is "-consistent" / "-detected",
# never a bare "ergodic"

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ..utils.constants import A_HI, A_LO, D_HI, D_LO, HEURISTIC_LABEL, RHO, ULAM_LABEL


class Verdict(str, Enum):
    """Outcome of an ergodicity scan."""
    ERGODIC_CONSISTENT = "ergodic-consistent"
    NON_ERGODIC_DETECTED = "non-ergodic-detected"
    INCONCLUSIVE = "inconclusive"


class ComplexValue(BaseModel):
    re: float
    im: float

    @classmethod
    def of(cls, z: complex) -> "ComplexValue":
        return cls(re=float(z.real), im=float(z.imag))

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


class Thresholds(BaseModel):
    """Verdict thresholds; all strictly positive."""
    a_lo: float = Field(A_LO, gt=0, description="Max |average| for ergodic-consistent")
    d_lo: float = Field(D_LO, gt=0, description="Max dispersion for ergodic-consistent")
    a_hi: float = Field(A_HI, gt=0, description="Deviation that flags a witness")
    d_hi: float = Field(D_HI, gt=0, description="Dispersion that flags a witness")
    rho: float = Field(RHO, gt=0, description="Max invariance residual of a witness")

    model_config = {"extra": "forbid"}


# ============== Scan Schemas ==============

class ObservableResult(BaseModel):
    """Per-observable statistics over all starts."""
    observable: str
    kind: str
    constant: bool = False
    space_average: ComplexValue
    averages: List[ComplexValue] = Field(..., description="Birkhoff average per start, in start order")
    dispersion: float = Field(..., description="Standard deviation of the averages across starts")
    deviation: float = Field(..., description="max over starts of |average - space average|")
    invariance_residual: float = Field(..., description="max |f(S p) - f(p)| over the first steps")


class ErgodicityReport(BaseModel):
    """Heuristic ergodicity evidence for one skew system."""
    system: Dict[str, Any]
    fibre: str
    n: int
    starts: int
    seed: int
    residual_steps: int
    thresholds: Thresholds
    observables: List[ObservableResult]
    verdict: Verdict
    witness: Optional[str] = None
    label: str = HEURISTIC_LABEL

    def result_for(self, name: str) -> ObservableResult:
        for result in self.observables:
            if result.observable == name:
                return result
        raise KeyError(name)


class TrajectoryPoint(BaseModel):
    """Running Birkhoff average at a block checkpoint."""
    n: int
    observable: str
    start: int
    re: float
    im: float


# ============== Ulam Schemas ==============

class UlamSupportReport(BaseModel):
    """Grid-scale invariant set found (or not) in an Ulam matrix."""
    grid: List[int]
    samples_per_cell: int
    max_row_sum_error: float
    column_sum_range: List[float]
    closed_classes: int
    support: List[int] = Field(default_factory=list, description="Cell indices ix * ny + iy")
    support_fraction: float = 0.0
    residual: Optional[float] = None
    probe: Optional[str] = None
    degenerate: bool = False
    message: str = ""
    label: str = ULAM_LABEL
