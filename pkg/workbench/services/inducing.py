# =============================================================================
# INDUCING
# First-return maps on base-interval sections, rescaled to [0, 1), and the
# chain S -> S_B -> P = S_B^2 -> Q for the reflection cocycle over a rotation
# =============================================================================
#
# Parents are map-like: anything with step(p), step_arrays(x, y),
# base_rotation and base_coordinate(p). SkewSystem, InducedSystem and
# SquaredMap all qualify, so sections can be stacked.
#
# Coordinates:
# - first_return works in parent coordinates (p must lie in the section)
# - step / step_arrays work in the rescaled chart of the section
#
# =============================================================================

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from ..errors import DomainError, ResourceCapError
from ..schemas.inducing import ChartOrientation, InducedFormula, InducingReport
from ..utils.constants import RETURN_CAP
from ..utils.torus import Angle, circular_distance, frac, reduce_mod1
from .base_systems import BaseSystem
from .o2_algebra import example2
from .skew_systems import FibreKind, SkewPoint, SkewSystem

logger = logging.getLogger(__name__)

# Section lengths within this of the parent rotation count as equal
LENGTH_TOLERANCE = 1e-12
# Fibre increments within this of +alpha / -alpha count as exact
INCREMENT_TOLERANCE = 1e-8


@dataclass(frozen=True)
class ReturnEvent:
    """entry and exit in parent coordinates."""
    entry: SkewPoint
    return_time: int
    exit: SkewPoint


# =============================================================================
# INDUCED AND SQUARED MAPS
# =============================================================================

@dataclass(frozen=True)
class SquaredMap:
    """parent^power, e.g. P = S_B^2."""
    parent: object
    power: int = 2

    def __post_init__(self):
        if self.power < 1:
            raise DomainError("power must be >= 1")

    def step(self, p: SkewPoint) -> SkewPoint:
        for _ in range(self.power):
            p = self.parent.step(p)
        return p

    def step_arrays(self, x: np.ndarray, y: np.ndarray):
        for _ in range(self.power):
            x, y = self.parent.step_arrays(x, y)
        return x, y

    @property
    def base_rotation(self) -> Angle:
        return reduce_mod1(self.power * self.parent.base_rotation)

    def base_coordinate(self, p: SkewPoint) -> float:
        return self.parent.base_coordinate(p)


@dataclass(frozen=True)
class InducedSystem:
    """
    First return of parent to section x [fibre], rescaled to [0, 1).

    PRESERVING chart: u = (x - a)/(b - a)
    REVERSING chart:  u = (b - x)/(b - a) mod 1   (x = a <-> u = 0)
    """
    parent: object
    section: Tuple[float, float]
    orientation: ChartOrientation = ChartOrientation.REVERSING
    return_cap: int = RETURN_CAP

    def __post_init__(self):
        a, b = float(self.section[0]), float(self.section[1])
        if not 0.0 <= a < b <= 1.0:
            raise DomainError(f"section must satisfy 0 <= a < b <= 1, got [{a}, {b})")
        object.__setattr__(self, "section", (a, b))

    @property
    def length(self) -> float:
        return self.section[1] - self.section[0]

    @property
    def is_full(self) -> bool:
        return self.section == (0.0, 1.0)

    def in_section(self, x) -> bool:
        a, b = self.section
        return a <= float(x) < b

    # -------------------------------------------------------------------------
    # Chart
    # -------------------------------------------------------------------------

    def rescale(self, x):
        a, b = self.section
        if not isinstance(x, np.ndarray):
            x = float(x)
        if self.orientation == ChartOrientation.PRESERVING:
            return reduce_mod1((x - a) / self.length)
        return reduce_mod1((b - x) / self.length)

    def unscale(self, u):
        a, b = self.section
        if self.orientation == ChartOrientation.PRESERVING:
            x = a + self.length * np.asarray(u, dtype=float)
        else:
            # u = 0 is the left endpoint x = a
            u = np.asarray(u, dtype=float)
            x = np.where(u == 0.0, a, b - self.length * u)
        # keep rounding from pushing points out of [a, b)
        x = np.clip(x, a, np.nextafter(b, a))
        return x if x.ndim else float(x)

    # -------------------------------------------------------------------------
    # Returns
    # -------------------------------------------------------------------------

    def first_return(self, p: SkewPoint) -> ReturnEvent:
        """
        Smallest k >= 1 with parent^k(p) back in the section.

        Raises:
            DomainError if p is outside the section
            ResourceCapError after return_cap steps
        """
        if not self.in_section(self.parent.base_coordinate(p)):
            raise DomainError(f"point {p.base!r} is outside the section {list(self.section)}")
        q = p
        for k in range(1, self.return_cap + 1):
            q = self.parent.step(q)
            if self.in_section(self.parent.base_coordinate(q)):
                return ReturnEvent(entry=p, return_time=k, exit=q)
        raise ResourceCapError("first return time", self.return_cap)

    def return_arrays(self, x: np.ndarray, y: np.ndarray):
        """
        Vectorized first return for arrays of parent coordinates.

        Returns:
            (x_exit, y_exit, return_times)
        """
        x = np.asarray(x, dtype=float).copy()
        y = np.asarray(y, dtype=float).copy()
        a, b = self.section
        if np.any((x < a) | (x >= b)):
            raise DomainError(f"entry points must lie in the section {list(self.section)}")
        times = np.zeros(x.shape, dtype=np.int64)
        active = np.ones(x.shape, dtype=bool)
        k = 0
        while active.any():
            k += 1
            if k > self.return_cap:
                raise ResourceCapError("first return time", self.return_cap)
            x_next, y_next = self.parent.step_arrays(x[active], y[active])
            x[active], y[active] = x_next, y_next
            landed = (x_next >= a) & (x_next < b)
            idx = np.flatnonzero(active)
            times[idx[landed]] = k
            active[idx[landed]] = False
        return x, y, times

    def step(self, p: SkewPoint) -> SkewPoint:
        """Induced map in the rescaled chart."""
        x = self.unscale(float(p.base))
        event = self.first_return(SkewPoint(x, p.fibre))
        return SkewPoint(self.rescale(float(event.exit.base)), event.exit.fibre)

    def step_arrays(self, u: np.ndarray, y: np.ndarray):
        x_exit, y_exit, _ = self.return_arrays(self.unscale(u), y)
        return self.rescale(x_exit), y_exit

    def base_coordinate(self, p: SkewPoint) -> float:
        return float(p.base)

    @property
    def base_rotation(self) -> Angle:
        """
        Rotation of the rescaled induced base map.

        Known in closed form for the full section (rho preserving, -rho
        reversing) and for sections whose length L equals the parent
        rotation: frac(1/L) in the reversing chart, -frac(1/L) in the
        preserving one.

        Raises:
            DomainError for any other section
        """
        rho = self.parent.base_rotation
        if self.is_full:
            if self.orientation == ChartOrientation.REVERSING:
                return reduce_mod1(-rho)
            return rho
        if abs(self.length - float(rho)) > LENGTH_TOLERANCE:
            raise DomainError("induced rotation is known only for sections of length equal to the parent rotation")
        beta = frac(1.0 / self.length)
        if self.orientation == ChartOrientation.REVERSING:
            return beta
        return reduce_mod1(-beta)


def first_return(ind: InducedSystem, p: SkewPoint) -> ReturnEvent:
    return ind.first_return(p)


def induced_step(ind: InducedSystem, p: SkewPoint) -> SkewPoint:
    return ind.step(p)


def sample_entries(ind: InducedSystem, samples: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform entry points of the section (parent coordinates) and fibre values."""
    rng = np.random.default_rng(seed)
    u = rng.random(samples)
    y = rng.random(samples)
    return ind.unscale(u), y


def _histogram(times: np.ndarray) -> Dict[str, int]:
    counts = Counter(int(t) for t in times)
    return {str(t): counts[t] for t in sorted(counts)}


def _section_of(ind: InducedSystem) -> List[float]:
    return [ind.section[0], ind.section[1]]


# =============================================================================
# ROTATION NUMBER AND RETURN STATISTICS
# =============================================================================

def induced_rotation_number(ind: InducedSystem, samples: int, seed: int = 0, orbits: int = 64) -> float:
    """
    Rotation number of the rescaled induced base map, from orbit winding.

    Raises:
        DomainError when the parent base is not a rotation, or the section
        is neither full nor of length equal to the parent rotation
    """
    rho = float(ind.parent.base_rotation)
    if not ind.is_full and abs(ind.length - rho) > LENGTH_TOLERANCE:
        raise DomainError("induced rotation number needs a section of length equal to the parent rotation")
    if samples < 1:
        raise DomainError("samples must be >= 1")
    orbits = max(1, min(orbits, samples))
    steps = max(1, samples // orbits)
    rng = np.random.default_rng(seed)
    u = rng.random(orbits)
    y = rng.random(orbits)
    winding = 0.0
    for _ in range(steps):
        u_next, y = ind.step_arrays(u, y)
        winding += float(np.sum(np.mod(u_next - u, 1.0)))
        u = u_next
    return reduce_mod1(winding / (orbits * steps))


def return_statistics(ind: InducedSystem, samples: int, seed: int = 0) -> InducingReport:
    """Return-time histogram, support and the Kac product for any section."""
    x, y = sample_entries(ind, samples, seed)
    x_exit, _, times = ind.return_arrays(x, y)
    rotation = None
    try:
        rotation = float(induced_rotation_number(ind, samples, seed))
    except DomainError:
        logger.info("Section %s has no closed-form rotation; skipping rotation number", _section_of(ind))
    return InducingReport(
        formula=InducedFormula.RETURN_STATISTICS,
        section=_section_of(ind),
        chart=ind.orientation,
        max_discrepancy=0.0,
        base_discrepancy=0.0,
        fibre_discrepancy=0.0,
        event_count=int(len(times)),
        return_time_histogram=_histogram(times),
        return_time_support=sorted({int(t) for t in times}),
        kac_product=kac_product(times, ind.length),
        rotation_number=rotation,
    )


def kac_product(times: np.ndarray, section_length: float) -> float:
    """Mean return time x section length (1 for an ergodic parent)."""
    return float(np.mean(times) * section_length)


# =============================================================================
# THE REFLECTION CHAIN
# =============================================================================

def _example2_system(eta: Angle, alpha: Angle, fibre: FibreKind = FibreKind.TORUS) -> SkewSystem:
    return SkewSystem(BaseSystem.rotation(eta), example2(alpha, eta), fibre)


def _b_section(sys: SkewSystem) -> Tuple[float, float]:
    return float(sys.generator.boundary), 1.0


def section_map(
    eta: Angle,
    alpha: Angle,
    orientation: ChartOrientation = ChartOrientation.REVERSING,
    return_cap: int = RETURN_CAP,
) -> InducedSystem:
    """S_B: S induced on [1 - eta, 1) x T."""
    sys = _example2_system(eta, alpha)
    return InducedSystem(sys, _b_section(sys), orientation, return_cap)


def squared_return_map(
    eta: Angle,
    alpha: Angle,
    orientation: ChartOrientation = ChartOrientation.REVERSING,
    return_cap: int = RETURN_CAP,
) -> InducedSystem:
    """
    Q: P = S_B^2 induced on [1 - 2 beta, 1) x T.

    Raises:
        DomainError when 2 beta >= 1 (the section is empty)
    """
    s_b = section_map(eta, alpha, return_cap=return_cap)
    beta = float(s_b.base_rotation)
    if 2.0 * beta >= 1.0:
        raise DomainError(f"2*beta = {2.0 * beta!r} >= 1: the squared-return section is empty")
    return InducedSystem(SquaredMap(s_b, 2), (1.0 - 2.0 * beta, 1.0), orientation, return_cap)


def _chart_coordinates(ind: InducedSystem, orientation: ChartOrientation, x: np.ndarray) -> np.ndarray:
    return InducedSystem(ind.parent, ind.section, orientation).rescale(x)


def _best_chart(ind: InducedSystem, x_in: np.ndarray, x_out: np.ndarray, rotation: float):
    """Chart orientation whose base map is closest to u -> u + rotation."""
    best = None
    for orientation in (ChartOrientation.REVERSING, ChartOrientation.PRESERVING):
        u_in = _chart_coordinates(ind, orientation, x_in)
        u_out = _chart_coordinates(ind, orientation, x_out)
        discrepancy = float(np.max(circular_distance(u_out, u_in + rotation)))
        if best is None or discrepancy < best[1]:
            best = (orientation, discrepancy, u_in, u_out)
    return best


def _fit_multiplier(c: np.ndarray, alpha: float, max_multiplier: int) -> Tuple[int, float]:
    """Integer m minimizing max |c - m alpha| on T; ties go to the smaller m."""
    best_m, best_disc = 0, math.inf
    for m in range(max_multiplier + 1):
        disc = float(np.max(circular_distance(c, m * alpha))) if len(c) else 0.0
        if disc < best_disc - 1e-15:
            best_m, best_disc = m, disc
    return best_m, best_disc


def verify_sb_formula(
    eta: Angle,
    alpha: Angle,
    samples: int = 10_000,
    seed: int = 0,
    return_cap: int = RETURN_CAP,
) -> InducingReport:
    """
    Simulated S_B against (u, y) -> (u + beta, m - y) with one integer
    multiplier m of alpha per base branch [0, 1 - beta), [1 - beta, 1).

    The chart (base orientation) is the one that fits the base rotation by
    beta best. fitted_k is the upper-branch multiplier; the lower branch is
    expected at fitted_k - 1.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    sys = _example2_system(eta, alpha)
    ind = InducedSystem(sys, _b_section(sys), return_cap=return_cap)
    beta = frac(1.0 / ind.length)
    alpha_f = float(alpha)

    x_in, y_in = sample_entries(ind, samples, seed)
    x_out, y_out, times = ind.return_arrays(x_in, y_in)
    # form check: y -> c - y moves y + 1/4 to c - y - 1/4
    _, y_probe, _ = ind.return_arrays(x_in, reduce_mod1(y_in + 0.25))
    reversing_fibre = circular_distance(y_probe - y_out, -0.25) <= INCREMENT_TOLERANCE

    chart, base_disc, u_in, _ = _best_chart(ind, x_in, x_out, beta)
    c = reduce_mod1(y_out + y_in)
    upper = u_in >= 1.0 - beta
    max_multiplier = int(times.max())
    k_upper, disc_upper = _fit_multiplier(c[upper], alpha_f, max_multiplier)
    k_lower, disc_lower = _fit_multiplier(c[~upper], alpha_f, max_multiplier)
    fibre_disc = max(disc_upper, disc_lower)
    if not reversing_fibre.all():
        fibre_disc = max(fibre_disc, 0.25)

    logger.info(
        "S_B fit: chart=%s k=%d lower=%d base=%.3e fibre=%.3e over %d events",
        chart.value, k_upper, k_lower, base_disc, fibre_disc, samples,
    )
    return InducingReport(
        formula=InducedFormula.SECTION_MAP,
        section=_section_of(ind),
        chart=chart,
        beta=beta,
        fitted_k=k_upper,
        lower_multiplier=k_lower,
        offsets_consistent=k_lower == k_upper - 1,
        fibre_sign=-1,
        max_discrepancy=max(base_disc, fibre_disc),
        base_discrepancy=base_disc,
        fibre_discrepancy=fibre_disc,
        event_count=samples,
        return_time_histogram=_histogram(times),
        return_time_support=sorted({int(t) for t in times}),
        kac_product=kac_product(times, ind.length),
        orientation_reversing_fraction=float(np.mean(reversing_fibre)),
        branch_fractions=[float(np.mean(~upper)), float(np.mean(upper))],
    )


def _circular_mean(values: np.ndarray) -> float:
    if len(values) == 0:
        return 0.0
    mean = np.mean(np.exp(2j * math.pi * values))
    return reduce_mod1(math.atan2(mean.imag, mean.real) / (2.0 * math.pi))


def verify_q_formula(
    eta: Angle,
    alpha: Angle,
    samples: int = 10_000,
    seed: int = 0,
    return_cap: int = RETURN_CAP,
) -> InducingReport:
    """
    Simulated Q against (u, y) -> (u + zeta, y - alpha) on [0, 1/2) and
    (u + zeta, y + alpha) on [1/2, 1), zeta = frac(1/(2 beta)).

    Fits the base chart orientation and a fibre sign, then a constant
    fibre offset (circular mean of the increment residuals).

    Raises:
        DomainError when 2 beta >= 1
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    ind = squared_return_map(eta, alpha, return_cap=return_cap)
    beta = float(ind.parent.parent.base_rotation)
    zeta = frac(1.0 / (2.0 * beta))
    alpha_f = float(alpha)

    x_in, y_in = sample_entries(ind, samples, seed)
    x_out, y_out, times = ind.return_arrays(x_in, y_in)
    increments = reduce_mod1(y_out - y_in)
    outside = int(np.sum(
        (circular_distance(increments, alpha_f) > INCREMENT_TOLERANCE)
        & (circular_distance(increments, -alpha_f) > INCREMENT_TOLERANCE)
    ))

    best = None
    for orientation in (ChartOrientation.REVERSING, ChartOrientation.PRESERVING):
        u_in = _chart_coordinates(ind, orientation, x_in)
        u_out = _chart_coordinates(ind, orientation, x_out)
        base_disc = float(np.max(circular_distance(u_out, u_in + zeta)))
        expected = np.where(u_in < 0.5, -alpha_f, alpha_f)
        for sign in (1, -1):
            residual = reduce_mod1(sign * increments - expected)
            offset = _circular_mean(residual)
            fibre_disc = float(np.max(circular_distance(residual, offset)))
            score = max(base_disc, fibre_disc)
            if best is None or score < best[0]:
                best = (score, orientation, sign, offset, base_disc, fibre_disc, u_in)

    score, chart, sign, offset, base_disc, fibre_disc, u_in = best
    lower = float(np.mean(u_in < 0.5))
    logger.info(
        "Q fit: chart=%s sign=%+d offset=%.3e discrepancy=%.3e over %d events",
        chart.value, sign, offset, score, samples,
    )
    return InducingReport(
        formula=InducedFormula.SQUARED_RETURN,
        section=_section_of(ind),
        chart=chart,
        beta=beta,
        zeta=zeta,
        fibre_sign=sign,
        fibre_offset=offset,
        max_discrepancy=score,
        base_discrepancy=base_disc,
        fibre_discrepancy=fibre_disc,
        event_count=samples,
        return_time_histogram=_histogram(times),
        return_time_support=sorted({int(t) for t in times}),
        kac_product=kac_product(times, ind.length),
        branch_fractions=[lower, 1.0 - lower],
        increments_outside=outside,
    )


def verify_rb_formula(
    eta: Angle,
    alpha: Angle,
    samples: int = 10_000,
    seed: int = 0,
    return_cap: int = RETURN_CAP,
) -> InducingReport:
    """
    R induced on [1 - eta, 1) x Z2 is the rotation by (beta, 1): every
    return applies exactly one reflection.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    sys = _example2_system(eta, alpha, FibreKind.Z2)
    ind = InducedSystem(sys, _b_section(sys), ChartOrientation.REVERSING, return_cap)
    beta = frac(1.0 / ind.length)
    x_in, _ = sample_entries(ind, samples, seed)
    rng = np.random.default_rng(seed + 1)
    signs = rng.integers(0, 2, samples)

    x_out = np.empty(samples)
    times = np.empty(samples, dtype=np.int64)
    flips = np.empty(samples, dtype=bool)
    for i in range(samples):
        event = ind.first_return(SkewPoint(float(x_in[i]), int(signs[i])))
        x_out[i] = float(event.exit.base)
        times[i] = event.return_time
        flips[i] = event.exit.fibre != event.entry.fibre

    chart, base_disc, _, _ = _best_chart(ind, x_in, x_out, beta)
    fibre_disc = float(1.0 - np.mean(flips))
    return InducingReport(
        formula=InducedFormula.Z2_SECTION_MAP,
        section=_section_of(ind),
        chart=chart,
        beta=beta,
        max_discrepancy=max(base_disc, fibre_disc),
        base_discrepancy=base_disc,
        fibre_discrepancy=fibre_disc,
        event_count=samples,
        return_time_histogram=_histogram(times),
        return_time_support=sorted({int(t) for t in times}),
        kac_product=kac_product(times, ind.length),
        orientation_reversing_fraction=float(np.mean(flips)),
    )


def squared_marginal_ks(eta: Angle, alpha: Angle, samples: int = 1_000_000, seed: int = 0) -> float:
    """KS statistic of P's base marginal pushed from the uniform measure on [0, 1)."""
    s_b = section_map(eta, alpha)
    rng = np.random.default_rng(seed)
    u = rng.random(samples)
    y = rng.random(samples)
    u_next, _ = SquaredMap(s_b, 2).step_arrays(u, y)
    return float(stats.kstest(u_next, "uniform").statistic)


def expected_return_support(length: float) -> List[int]:
    """{floor(1/L), ceil(1/L)} for a rotation section of length L."""
    inverse = 1.0 / length
    return sorted({int(math.floor(inverse)), int(math.ceil(inverse))})
