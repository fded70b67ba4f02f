# Pydantic schemas for induced-map verification
# One report per closed-form check of the inducing chain

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from ..utils.constants import HEURISTIC_LABEL


class InducedFormula(str, Enum):
    """Which closed form a report checks."""
    SECTION_MAP = "S_B"
    SQUARED_RETURN = "Q"
    Z2_SECTION_MAP = "R_B"
    RETURN_STATISTICS = "returns"


class ChartOrientation(str, Enum):
    PRESERVING = "preserving"
    REVERSING = "reversing"


class InducingReport(BaseModel):
    """Simulated induced map against its closed form."""
    formula: InducedFormula
    section: List[float] = Field(..., min_length=2, max_length=2, description="[a, b) in parent coordinates")
    chart: ChartOrientation = Field(..., description="Rescale orientation that fits best")
    beta: Optional[float] = Field(None, description="frac(1/eta)")
    zeta: Optional[float] = Field(None, description="frac(1/(2 beta))")
    fitted_k: Optional[int] = Field(None, description="Fibre multiplier on the upper branch")
    lower_multiplier: Optional[int] = None
    offsets_consistent: Optional[bool] = Field(
        None, description="Lower-branch multiplier equals fitted_k - 1"
    )
    fibre_sign: Optional[int] = None
    fibre_offset: Optional[float] = None
    max_discrepancy: float
    base_discrepancy: float
    fibre_discrepancy: float
    event_count: int
    return_time_histogram: Dict[str, int]
    return_time_support: List[int]
    kac_product: float = Field(..., description="Mean return time x section length")
    orientation_reversing_fraction: Optional[float] = None
    branch_fractions: Optional[List[float]] = None
    increments_outside: Optional[int] = None
    rotation_number: Optional[float] = None
    label: str = HEURISTIC_LABEL
