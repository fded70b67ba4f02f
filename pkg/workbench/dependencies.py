# =============================================================================
# DEPENDENCIES
# Factories turning validated config sections into engine objects
# =============================================================================
#
# Every engine object is built here, from an ExperimentConfig that has
# already passed validation. Angle literals are parsed once, in this file.
#
# =============================================================================

from typing import Optional, Tuple

from .errors import DomainError
from .schemas.experiment import BaseSpec, CocycleSpec, ExperimentConfig
from .schemas.inducing import ChartOrientation
from .services.base_systems import BaseSystem
from .services.inducing import InducedSystem
from .services.o2_algebra import (
    CocycleGenerator,
    O2Element,
    cex1,
    cex2,
    example1,
    example2,
    example3,
    table_generator,
)
from .services.skew_systems import FibreKind, SkewSystem
from .utils.constants import IOTA_ANNULUS, RETURN_CAP
from .utils.torus import Angle, parse_angle


def build_base(spec: BaseSpec) -> BaseSystem:
    if spec.kind == "bernoulli":
        return BaseSystem.bernoulli()
    return BaseSystem.rotation(parse_angle(spec.eta))


def build_generator(spec: CocycleSpec, base: BaseSystem) -> CocycleGenerator:
    """
    Raises:
        DomainError when the cocycle needs parameters the spec lacks
    """
    alpha: Optional[Angle] = parse_angle(spec.alpha) if spec.alpha is not None else None
    if spec.kind == "example1":
        return example1()
    if spec.kind == "example2":
        if not base.is_rotation:
            raise DomainError("example2 runs over a rotation base")
        return example2(alpha, base.eta)
    if spec.kind == "example3":
        return example3(alpha)
    if spec.kind == "cex1":
        return cex1(base.eta if base.is_rotation else None)
    if spec.kind == "cex2":
        return cex2()
    rows = []
    for row in spec.table:
        angle = parse_angle(row.angle)
        element = O2Element.rotation(angle) if row.element == "rotation" else O2Element.reflection(angle)
        rows.append((parse_angle(row.lo), parse_angle(row.hi), element))
    return table_generator(rows)


def build_skew(
    config: ExperimentConfig,
    fibre: Optional[str] = None,
    iota_annulus: float = IOTA_ANNULUS,
) -> SkewSystem:
    """The configured skew system, or the same cocycle with another fibre."""
    base = build_base(config.base)
    generator = build_generator(config.cocycle, base)
    return SkewSystem(base, generator, FibreKind(fibre or config.skew.system), iota_annulus)


def build_section(config: ExperimentConfig, sys: SkewSystem) -> Tuple[float, float]:
    """Configured section, or [1 - eta, 1)."""
    if config.inducing.section is not None:
        lo, hi = (float(parse_angle(e)) for e in config.inducing.section)
        return lo, hi
    return 1.0 - float(sys.base.eta), 1.0


def build_induced(config: ExperimentConfig, return_cap: int = RETURN_CAP) -> InducedSystem:
    sys = build_skew(config, FibreKind.TORUS.value)
    return InducedSystem(
        sys,
        build_section(config, sys),
        ChartOrientation(config.inducing.orientation),
        return_cap,
    )
