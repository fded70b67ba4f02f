# =============================================================================
# REDUCIBILITY
# Verdict criteria, invariant sections, constant diagonalization and exact
# invariant-set checks
# =============================================================================
#
# Direction of inference:
# - ergodicity evidence -> "-consistent" irreducibility verdicts
# - a verified section (residual <= SECTION_RESIDUAL_TOL) -> reducible-witnessed
# Statistics alone never witness reducibility, and a field may never be
# both witnessed and consistent.
# =============================================================================

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DomainError, InvariantBreach, PreconditionError
from ..schemas.diagnostics import ComplexValue, ErgodicityReport, Verdict
from ..schemas.reducibility import (
    BundleVerdict,
    DiagonalizationReport,
    InvariantSetReport,
    IrreducibilityVerdict,
    ResidualReport,
    ScalarVerdict,
    SectionChart,
    SectionSummary,
)
from ..utils.constants import EXACT_INVARIANCE_TOL, SECTION_RESIDUAL_TOL
from ..utils.hashing import bernoulli_symbols, derive_seed
from ..utils.intervals import RationalIntervalSet
from ..utils.torus import circular_distance, format_angle, is_exact
from .base_systems import BaseKind, BaseSystem
from .grassmannian import (
    INFINITY,
    V1,
    V2,
    ZERO,
    GrassCoordC,
    GrassCoordR,
    chordal_distance,
    k_of,
    n_fibre_map,
    perp_coord,
    perp_coord_real,
    real_fibre_map,
)
from .o2_algebra import CocycleGenerator, O2Element, generator_at, to_matrix

logger = logging.getLogger(__name__)

# Samples used to check that a generator only takes rotation values
ROTATION_CHECK_SAMPLES = 100_000
DIAGONAL_TOLERANCE = 1e-12

SectionCoordinate = Union[GrassCoordC, GrassCoordR]


# =============================================================================
# INVARIANT SECTIONS
# =============================================================================

@dataclass(frozen=True)
class InvariantSection:
    """
    A candidate equivariant line field w(x).

    constant: one coordinate for every x
    sampled:  (x, w(x)) pairs along a base orbit (x_{i+1} = T x_i)
    """
    chart: SectionChart
    constant: Optional[SectionCoordinate] = None
    sampled: Tuple[Tuple[object, SectionCoordinate], ...] = ()
    residual: float = math.inf

    def __post_init__(self):
        if self.constant is None and not self.sampled:
            raise DomainError("a section needs a constant coordinate or samples")
        if self.constant is not None and self.sampled:
            raise DomainError("a section is either constant or sampled, not both")

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    @property
    def witnessed(self) -> bool:
        return self.residual <= SECTION_RESIDUAL_TOL

    def coordinates(self) -> List[SectionCoordinate]:
        if self.is_constant:
            return [self.constant]
        return [w for _, w in self.sampled]

    def summary(self) -> SectionSummary:
        coordinate = None
        if self.is_constant:
            coordinate = self.constant.to_json() if isinstance(self.constant, GrassCoordC) else self.constant.y
        return SectionSummary(
            chart=self.chart,
            representation="constant" if self.is_constant else "sampled",
            coordinate=coordinate,
            samples=len(self.sampled),
            residual=self.residual,
        )


def constant_section(coordinate: SectionCoordinate) -> InvariantSection:
    chart = SectionChart.COMPLEX if isinstance(coordinate, GrassCoordC) else SectionChart.REAL
    return InvariantSection(chart=chart, constant=coordinate)


def _sample_elements(g: CocycleGenerator, samples: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Generator values at mu-random base points (no base orbit needed)."""
    rng = np.random.default_rng(seed)
    if g.base_kind == BaseKind.BERNOULLI:
        symbols = bernoulli_symbols(derive_seed(seed, 3), np.arange(samples, dtype=np.int64))
        return g.element_block(np.zeros(samples), symbols)
    return g.element_block(rng.random(samples))


def _require_rotations(g: CocycleGenerator, samples: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    reflect, angle = _sample_elements(g, samples, seed)
    if np.any(reflect):
        raise PreconditionError(
            f"generator {g.kind.value} takes reflection values "
            f"({int(np.sum(reflect))} of {samples} samples); rotation-only operation"
        )
    return reflect, angle


def _chordal_array(z: np.ndarray, w: complex) -> np.ndarray:
    return 2.0 * np.abs(z - w) / np.sqrt((1.0 + np.abs(z) ** 2) * (1.0 + abs(w) ** 2))


def _constant_residual(chart: SectionChart, coordinate: SectionCoordinate, reflect: np.ndarray, angle: np.ndarray) -> float:
    """max distance between A(1, x) w and w over sampled generator values."""
    if len(reflect) == 0:
        return 0.0
    if chart == SectionChart.REAL:
        y = float(coordinate.y)
        image = np.where(reflect, 4.0 * angle - y, y + 2.0 * angle)
        return float(np.max(circular_distance(image, y)))
    if coordinate.is_pole:
        # rotations fix 0 and infinity, reflections swap them
        return 2.0 if np.any(reflect) else 0.0
    w = coordinate.z
    theta = 2.0 * math.pi * angle
    image = np.where(reflect, np.exp(4j * theta) / w, np.exp(2j * theta) * w)
    return float(np.max(_chordal_array(image, w)))


def _sampled_residual(g: CocycleGenerator, sys: BaseSystem, section: InvariantSection) -> float:
    worst = 0.0
    for (x, w), (x_next, w_next) in zip(section.sampled, section.sampled[1:]):
        if sys.is_rotation and circular_distance(float(sys.step(x)), float(x_next)) > EXACT_INVARIANCE_TOL:
            raise DomainError("sampled section points must follow the base orbit")
        e = generator_at(g, x)
        if section.chart == SectionChart.REAL:
            distance = float(circular_distance(real_fibre_map(e, w.y), w_next.y))
        else:
            distance = chordal_distance(n_fibre_map(e, w), w_next)
        worst = max(worst, distance)
    return worst


def extract_rotation_sections(
    g: CocycleGenerator,
    samples: int = ROTATION_CHECK_SAMPLES,
    seed: int = 0,
) -> Tuple[InvariantSection, InvariantSection]:
    """
    The constant sections z = 0 (span v1) and z = infinity (span v2) of a
    rotation-valued cocycle.

    Raises:
        PreconditionError when any sampled generator value is a reflection
    """
    reflect, angle = _require_rotations(g, samples, seed)
    sections = []
    for coordinate in (ZERO, INFINITY):
        residual = _constant_residual(SectionChart.COMPLEX, coordinate, reflect, angle)
        sections.append(InvariantSection(chart=SectionChart.COMPLEX, constant=coordinate, residual=residual))
    logger.info("Rotation sections for %s: residuals %s", g.kind.value, [s.residual for s in sections])
    return sections[0], sections[1]


def verify_section(
    g: CocycleGenerator,
    sys: BaseSystem,
    section: InvariantSection,
    samples: int = 10_000,
    seed: int = 1,
) -> ResidualReport:
    """
    Equivariance residual max d(A(1, x) w(x), w(T x)) on fresh samples
    (constant sections) or along the stored orbit (sampled sections).
    """
    g.check_base(sys)
    if section.is_constant:
        reflect, angle = _sample_elements(g, samples, seed)
        residual = _constant_residual(section.chart, section.constant, reflect, angle)
        count = samples
    else:
        residual = _sampled_residual(g, sys, section)
        count = len(section.sampled)
    return ResidualReport(
        chart=section.chart,
        residual=residual,
        samples=count,
        witnessed=residual <= SECTION_RESIDUAL_TOL,
        k_dispersion=k_dispersion(section) if section.chart == SectionChart.COMPLEX else None,
    )


def with_residual(section: InvariantSection, report: ResidualReport) -> InvariantSection:
    return replace(section, residual=report.residual)


def perp_section(section: InvariantSection) -> InvariantSection:
    """Pointwise orthogonal complement; the residual must be re-verified."""
    perp = perp_coord if section.chart == SectionChart.COMPLEX else perp_coord_real
    if section.is_constant:
        return InvariantSection(chart=section.chart, constant=perp(section.constant))
    return InvariantSection(chart=section.chart, sampled=tuple((x, perp(w)) for x, w in section.sampled))


def k_dispersion(section: InvariantSection) -> float:
    """Standard deviation of k(w(x)) over the section's samples."""
    if section.chart != SectionChart.COMPLEX:
        raise DomainError("k is defined on the complex chart only")
    values = np.array([k_of(w) for w in section.coordinates()])
    return float(np.std(values))


# =============================================================================
# DIAGONALIZATION
# =============================================================================

BASIS = np.column_stack([V1, V2])
BASIS_INVERSE = np.linalg.inv(BASIS)


def conjugate_generator(e: O2Element) -> np.ndarray:
    """C^-1 A C for the constant basis C = [v1 v2]."""
    return BASIS_INVERSE @ to_matrix(e).astype(complex) @ BASIS


def diagonalize_rotation_cocycle(
    g: CocycleGenerator,
    samples: int = 10_000,
    seed: int = 0,
) -> Tuple[np.ndarray, DiagonalizationReport]:
    """
    Constant change of basis bringing a rotation cocycle to
    diag(e^{-i alpha_x}, e^{i alpha_x}).

    Raises:
        PreconditionError when reflections are present
    """
    _, angle = _require_rotations(g, max(samples, 1), seed)
    theta = 2.0 * math.pi * angle
    c, s = np.cos(theta), np.sin(theta)
    matrices = np.empty((len(theta), 2, 2), dtype=complex)
    matrices[:, 0, 0], matrices[:, 0, 1] = c, -s
    matrices[:, 1, 0], matrices[:, 1, 1] = s, c
    conjugated = BASIS_INVERSE[None, :, :] @ matrices @ BASIS[None, :, :]

    off_diagonal = float(np.max(np.abs(np.stack([conjugated[:, 0, 1], conjugated[:, 1, 0]]))))
    diagonal_error = float(np.max(np.maximum(
        np.abs(conjugated[:, 0, 0] - np.exp(-1j * theta)),
        np.abs(conjugated[:, 1, 1] - np.exp(1j * theta)),
    )))
    modulus_error = float(np.max(np.abs(np.abs(np.stack([conjugated[:, 0, 0], conjugated[:, 1, 1]])) - 1.0)))
    report = DiagonalizationReport(
        basis=[[ComplexValue.of(v) for v in row] for row in BASIS],
        samples=len(theta),
        max_off_diagonal=off_diagonal,
        max_diagonal_error=diagonal_error,
        unit_modulus_error=modulus_error,
        diagonal=off_diagonal <= DIAGONAL_TOLERANCE and diagonal_error <= DIAGONAL_TOLERANCE,
    )
    return BASIS.copy(), report


# =============================================================================
# EXACT INVARIANT SETS
# =============================================================================

def shift_map(c) -> O2Element:
    """The fibre map y -> y + c."""
    return O2Element.rotation(Fraction(c) / 2)


def flip_map(c) -> O2Element:
    """The fibre map y -> c - y."""
    return O2Element.reflection(Fraction(c) / 4)


def describe_fibre_map(e: O2Element) -> str:
    c = format_angle(e.fibre_shift)
    return f"y -> y + {c}" if e.is_rotation else f"y -> {c} - y"


def image_of_set(e: O2Element, interval_set: RationalIntervalSet) -> RationalIntervalSet:
    if not is_exact(e.angle):
        raise DomainError(f"exact invariance needs rational maps, got {e.describe()}")
    if e.is_rotation:
        return interval_set.translate(e.fibre_shift)
    return interval_set.reflect(e.fibre_shift)


def verify_invariant_set(fibre_maps: Sequence[O2Element], interval_set: RationalIntervalSet) -> InvariantSetReport:
    """
    image(B) == B for every fibre map, compared as normalized interval sets.

    Raises:
        DomainError for irrational map parameters
    """
    failing = [describe_fibre_map(e) for e in fibre_maps if image_of_set(e, interval_set) != interval_set]
    measure = interval_set.measure
    return InvariantSetReport(
        set=interval_set.to_strings(),
        maps=[describe_fibre_map(e) for e in fibre_maps],
        invariant=not failing,
        measure=format_angle(measure),
        measure_value=float(measure),
        failing_maps=failing,
    )


def constant_real_residuals(fibre_maps: Sequence[O2Element], candidates: Iterable[float]) -> List[float]:
    """Residual of every constant real section y = const under the exact maps."""
    residuals = []
    for y in candidates:
        worst = max(float(circular_distance(real_fibre_map(e, y), y)) for e in fibre_maps)
        residuals.append(worst)
    return residuals


# =============================================================================
# VERDICT
# =============================================================================

def _check_provenance(report_R: ErgodicityReport, report_S: ErgodicityReport) -> None:
    if report_R.fibre != "R" or report_S.fibre != "S":
        raise DomainError(f"expected reports for R and S, got {report_R.fibre} and {report_S.fibre}")
    for key in ("base", "cocycle"):
        if report_R.system.get(key) != report_S.system.get(key):
            raise DomainError(f"reports disagree on {key}: {report_R.system.get(key)} vs {report_S.system.get(key)}")


def _bundle(consistent: bool, witnessed: bool, name: str) -> BundleVerdict:
    if consistent and witnessed:
        raise InvariantBreach(f"{name} bundle would be both reducible-witnessed and irreducible-consistent")
    if witnessed:
        return BundleVerdict.REDUCIBLE_WITNESSED
    if consistent:
        return BundleVerdict.IRREDUCIBLE_CONSISTENT
    return BundleVerdict.UNKNOWN


def apply_criteria(
    report_R: ErgodicityReport,
    report_S: ErgodicityReport,
    sections: Sequence[InvariantSection] = (),
) -> IrreducibilityVerdict:
    """
    real:    irreducible-consistent iff S is ergodic-consistent
    complex: irreducible-consistent iff R and S are ergodic-consistent
    scalar:  excluded-consistent iff R or S is ergodic-consistent
    A verified section marks its bundle reducible-witnessed (a real line
    field also spans a complex one).

    Raises:
        DomainError on mismatched provenance
        InvariantBreach when a bundle is both witnessed and consistent
    """
    _check_provenance(report_R, report_S)
    s_ok = report_S.verdict == Verdict.ERGODIC_CONSISTENT
    r_ok = report_R.verdict == Verdict.ERGODIC_CONSISTENT
    witnessed = [s for s in sections if s.witnessed]
    real_witness = any(s.chart == SectionChart.REAL for s in witnessed)
    complex_witness = real_witness or any(s.chart == SectionChart.COMPLEX for s in witnessed)

    verdict = IrreducibilityVerdict(
        real_bundle=_bundle(s_ok, real_witness, "real"),
        complex_bundle=_bundle(r_ok and s_ok, complex_witness, "complex"),
        scalar_cohomology=ScalarVerdict.EXCLUDED_CONSISTENT if (r_ok or s_ok) else ScalarVerdict.UNKNOWN,
        verdict_R=report_R.verdict,
        verdict_S=report_S.verdict,
        system={"base": report_S.system.get("base"), "cocycle": report_S.system.get("cocycle")},
        thresholds=report_S.thresholds,
        sections=[s.summary() for s in sections],
    )
    logger.info(
        "Criteria: real=%s complex=%s scalar=%s",
        verdict.real_bundle.value, verdict.complex_bundle.value, verdict.scalar_cohomology.value,
    )
    return verdict
