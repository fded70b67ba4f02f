# =============================================================================
# DIAGNOSTICS
# Birkhoff averages of character observables along skew-product orbits,
# cross-start dispersion and the heuristic ergodicity verdict
# =============================================================================
#
# Verdict rules (per nonconstant observable, thresholds from Thresholds):
# - non-ergodic-detected: (dispersion > d_hi or deviation > a_hi) and the
#   observable is invariant along the sampled orbits (residual <= rho)
# - ergodic-consistent:   every |average - space average| <= a_lo and every
#   dispersion <= d_lo
# - inconclusive:         anything else
#
# Every start is an independent work item; each start's sums are reduced in
# block order, so results do not depend on the thread count.
# =============================================================================

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from ..errors import DomainError
from ..schemas.diagnostics import (
    ComplexValue,
    ErgodicityReport,
    ObservableResult,
    Thresholds,
    TrajectoryPoint,
    Verdict,
)
from ..utils.constants import (
    BANK_MAX_COSINE,
    BANK_MAX_FREQUENCY,
    BLOCK_LENGTH,
    DEFAULT_N,
    DEFAULT_STARTS,
    MIN_STARTS,
)
from .skew_systems import FibreKind, SkewBlock, SkewPoint, SkewSystem

logger = logging.getLogger(__name__)

# Steps over which invariance residuals are measured
RESIDUAL_STEPS = 10_000

TWO_PI_I = 2j * math.pi


class ObservableKind(str, Enum):
    TORUS_CHARACTER = "torus-character"
    Z2_CHARACTER = "z2-character"
    Z3_CHARACTER = "z3-character"
    FIBRE_COSINE = "fibre-cosine"
    CONSTANT = "constant"
    RADIAL = "radial"
    ANGULAR_CHARACTER = "angular-character"


# Fibre kinds each observable kind can be evaluated on
_SUPPORTED_FIBRES = {
    ObservableKind.TORUS_CHARACTER: {FibreKind.TORUS},
    ObservableKind.FIBRE_COSINE: {FibreKind.TORUS},
    ObservableKind.Z2_CHARACTER: {FibreKind.Z2, FibreKind.SPHERE},
    ObservableKind.Z3_CHARACTER: {FibreKind.Z3},
    ObservableKind.RADIAL: {FibreKind.SPHERE},
    ObservableKind.ANGULAR_CHARACTER: {FibreKind.SPHERE},
    ObservableKind.CONSTANT: set(FibreKind),
}


# =============================================================================
# BLOCK FEATURES
# =============================================================================

class BlockFeatures:
    """
    Cached building blocks for evaluating observables on one orbit block.

    base_character(j)  = e^{2 pi i j x}
    fibre_character(k) = e^{2 pi i k y}   (y = tau(z) on the sphere)
    parity()           = (-1)^a           (a = iota(z) on the sphere)
    """

    def __init__(self, fibre_kind: FibreKind, block: SkewBlock):
        self.fibre_kind = fibre_kind
        self.coord = block.base.coord
        self.fibre = block.fibre
        self.log_modulus = block.log_modulus
        self._base: Dict[int, np.ndarray] = {}
        self._fibre: Dict[int, np.ndarray] = {}
        self._parity: Optional[np.ndarray] = None

    def base_character(self, j: int) -> np.ndarray:
        if j not in self._base:
            if j == 0:
                self._base[j] = np.ones(self.coord.shape, dtype=complex)
            else:
                self._base[j] = np.exp(TWO_PI_I * j * self.coord)
        return self._base[j]

    def fibre_character(self, k: int) -> np.ndarray:
        if k not in self._fibre:
            self._fibre[k] = np.exp(TWO_PI_I * k * self.fibre)
        return self._fibre[k]

    def parity(self) -> np.ndarray:
        if self._parity is None:
            if self.fibre_kind == FibreKind.SPHERE:
                outside = self.log_modulus > 0.0
            else:
                outside = self.fibre % 2 == 1
            self._parity = np.where(outside, -1.0, 1.0)
        return self._parity

    def z3_character(self, chi: int) -> np.ndarray:
        return np.exp(TWO_PI_I * chi * (self.fibre % 3) / 3.0)

    def radial(self) -> np.ndarray:
        """2 k(z) - 1 with k = min(|z|, 1/|z|); -1 at the poles."""
        return 2.0 * np.exp(-np.abs(self.log_modulus)) - 1.0


# =============================================================================
# OBSERVABLES
# =============================================================================

@dataclass(frozen=True)
class Observable:
    """
    A bounded test function on the skew product.

    torus-character(j, k):   e^{2 pi i (j x + k y)}
    z2-character(j, sign):   e^{2 pi i j x} * ((-1)^a if sign < 0 else 1)
    z3-character(j, chi):    e^{2 pi i j x} * w^(chi a), w = e^{2 pi i / 3}
    fibre-cosine(k):         cos 2 pi k y
    radial:                  2 k(z) - 1
    angular-character(j, k): e^{2 pi i (j x + k tau(z))}
    constant:                1
    """
    kind: ObservableKind
    j: int = 0
    k: int = 0
    sign: int = 1
    chi: int = 0

    @property
    def name(self) -> str:
        if self.kind == ObservableKind.CONSTANT:
            return "constant"
        if self.kind == ObservableKind.RADIAL:
            return "radial"
        if self.kind == ObservableKind.FIBRE_COSINE:
            return f"fibre-cosine(k={self.k})"
        if self.kind == ObservableKind.Z2_CHARACTER:
            return f"z2-character(j={self.j},s={'+' if self.sign > 0 else '-'})"
        if self.kind == ObservableKind.Z3_CHARACTER:
            return f"z3-character(j={self.j},chi={self.chi})"
        return f"{self.kind.value}(j={self.j},k={self.k})"

    @property
    def is_constant(self) -> bool:
        if self.kind == ObservableKind.CONSTANT:
            return True
        if self.kind in (ObservableKind.TORUS_CHARACTER, ObservableKind.ANGULAR_CHARACTER):
            return self.j == 0 and self.k == 0
        if self.kind == ObservableKind.Z2_CHARACTER:
            return self.j == 0 and self.sign > 0
        if self.kind == ObservableKind.Z3_CHARACTER:
            return self.j == 0 and self.chi % 3 == 0
        if self.kind == ObservableKind.FIBRE_COSINE:
            return self.k == 0
        return False

    @property
    def space_average(self) -> complex:
        """Integral against mu x the fibre reference measure."""
        return 1.0 + 0.0j if self.is_constant else 0.0j

    def supports(self, fibre_kind: FibreKind) -> bool:
        return fibre_kind in _SUPPORTED_FIBRES[self.kind]

    def values(self, features: BlockFeatures) -> np.ndarray:
        """Observable on every entry of a block, as a complex array."""
        kind = self.kind
        if kind == ObservableKind.CONSTANT:
            return features.base_character(0)
        if kind in (ObservableKind.TORUS_CHARACTER, ObservableKind.ANGULAR_CHARACTER):
            return features.base_character(self.j) * features.fibre_character(self.k)
        if kind == ObservableKind.FIBRE_COSINE:
            return features.fibre_character(self.k).real.astype(complex)
        if kind == ObservableKind.Z2_CHARACTER:
            base = features.base_character(self.j)
            return base * features.parity() if self.sign < 0 else base
        if kind == ObservableKind.Z3_CHARACTER:
            return features.base_character(self.j) * features.z3_character(self.chi)
        return features.radial().astype(complex)


def torus_character(j: int, k: int) -> Observable:
    return Observable(ObservableKind.TORUS_CHARACTER, j=j, k=k)


def z2_character(j: int, sign: int) -> Observable:
    if sign not in (1, -1):
        raise DomainError("z2 character sign must be +1 or -1")
    return Observable(ObservableKind.Z2_CHARACTER, j=j, sign=sign)


def z3_character(j: int, chi: int) -> Observable:
    return Observable(ObservableKind.Z3_CHARACTER, j=j, chi=chi % 3)


def fibre_cosine(k: int) -> Observable:
    return Observable(ObservableKind.FIBRE_COSINE, k=k)


def angular_character(j: int, k: int) -> Observable:
    return Observable(ObservableKind.ANGULAR_CHARACTER, j=j, k=k)


CONSTANT = Observable(ObservableKind.CONSTANT)
RADIAL = Observable(ObservableKind.RADIAL)


def _half_plane(max_frequency: int):
    """(j, k) with k > 0, or k = 0 and j > 0; conjugates are left out."""
    for k in range(max_frequency + 1):
        for j in range(-max_frequency, max_frequency + 1):
            if k == 0 and j <= 0:
                continue
            yield j, k


def default_bank(
    fibre_kind: FibreKind,
    max_frequency: int = BANK_MAX_FREQUENCY,
    max_cosine: int = BANK_MAX_COSINE,
) -> List[Observable]:
    """
    Default observables for a fibre kind, constant first.

    Characters whose conjugate is already present are omitted: the
    conjugate's averages are the complex conjugates.
    """
    bank = [CONSTANT]
    if fibre_kind == FibreKind.TORUS:
        bank += [torus_character(j, k) for j, k in _half_plane(max_frequency)]
        bank += [fibre_cosine(k) for k in range(1, max_cosine + 1)]
    elif fibre_kind == FibreKind.Z2:
        bank += [z2_character(j, -1) for j in range(0, max_frequency + 1)]
        bank += [z2_character(j, 1) for j in range(1, max_frequency + 1)]
    elif fibre_kind == FibreKind.Z3:
        bank += [z3_character(j, 1) for j in range(-max_frequency, max_frequency + 1)]
        bank += [z3_character(j, 0) for j in range(1, max_frequency + 1)]
    else:
        bank.append(RADIAL)
        bank += [z2_character(j, -1) for j in range(0, max_frequency + 1)]
        bank += [angular_character(j, k) for j, k in _half_plane(max_frequency)]
    return bank


# =============================================================================
# BIRKHOFF SUMS
# =============================================================================

@dataclass
class _StartResult:
    sums: np.ndarray
    residuals: np.ndarray
    trajectory: List[TrajectoryPoint] = field(default_factory=list)


def _check_bank(sys: SkewSystem, bank: List[Observable]) -> None:
    for obs in bank:
        if not obs.supports(sys.fibre_kind):
            raise DomainError(f"observable {obs.name} cannot be evaluated on fibre {sys.fibre_kind.value}")


def _run_start(
    sys: SkewSystem,
    bank: List[Observable],
    start: SkewPoint,
    start_index: int,
    n: int,
    residual_steps: int,
    block_length: int,
    record_trajectory: bool,
) -> _StartResult:
    sums = np.zeros(len(bank), dtype=complex)
    residuals = np.zeros(len(bank))
    previous: List[Optional[complex]] = [None] * len(bank)
    trajectory: List[TrajectoryPoint] = []
    done = 0
    for block in sys.orbit_blocks([start], n, block_length):
        features = BlockFeatures(sys.fibre_kind, block)
        length = block.fibre.shape[0]
        take = min(length, residual_steps + 1 - done)
        for i, obs in enumerate(bank):
            values = obs.values(features)[:, 0]
            sums[i] += values.sum()
            if take > 0:
                head = values[:take]
                if previous[i] is not None:
                    head = np.concatenate([[previous[i]], head])
                if len(head) > 1:
                    residuals[i] = max(residuals[i], float(np.max(np.abs(np.diff(head)))))
                previous[i] = values[take - 1]
        done += length
        if record_trajectory:
            for i, obs in enumerate(bank):
                average = sums[i] / done
                trajectory.append(TrajectoryPoint(
                    n=done, observable=obs.name, start=start_index,
                    re=float(average.real), im=float(average.imag),
                ))
    return _StartResult(sums=sums, residuals=residuals, trajectory=trajectory)


def birkhoff_average(sys: SkewSystem, obs: Observable, start: SkewPoint, n: int) -> complex:
    """
    (1/n) sum_{m<n} obs(S^m start).

    Raises:
        DomainError for n < 1 or an observable foreign to the fibre
    """
    if n < 1:
        raise DomainError("Birkhoff averages need N >= 1")
    _check_bank(sys, [obs])
    result = _run_start(sys, [obs], start, 0, n, 0, BLOCK_LENGTH, False)
    return complex(result.sums[0] / n)


def birkhoff_averages(
    sys: SkewSystem,
    bank: List[Observable],
    starts: List[SkewPoint],
    n: int,
    threads: int = 1,
) -> np.ndarray:
    """(len(starts), len(bank)) array of Birkhoff averages."""
    if n < 1:
        raise DomainError("Birkhoff averages need N >= 1")
    _check_bank(sys, bank)
    results = _map_starts(sys, bank, starts, n, 0, threads, False)
    return np.array([r.sums / n for r in results])


def _map_starts(sys, bank, starts, n, residual_steps, threads, record_trajectory) -> List[_StartResult]:
    def work(index: int) -> _StartResult:
        return _run_start(sys, bank, starts[index], index, n, residual_steps, BLOCK_LENGTH, record_trajectory)

    if threads <= 1:
        return [work(i) for i in range(len(starts))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, range(len(starts))))


# =============================================================================
# SCAN
# =============================================================================

def _dispersion(averages: np.ndarray) -> float:
    """Standard deviation of complex averages across starts."""
    centered = averages - averages.mean()
    return float(math.sqrt(np.mean(np.abs(centered) ** 2)))


def decide_verdict(results: List[ObservableResult], thresholds: Thresholds):
    """
    Pure function of the per-observable numbers and the thresholds.

    Returns:
        (verdict, witness name or None); the witness is the first flagged
        observable in bank order
    """
    nonconstant = [r for r in results if not r.constant]
    for r in nonconstant:
        flagged = r.dispersion > thresholds.d_hi or r.deviation > thresholds.a_hi
        if flagged and r.invariance_residual <= thresholds.rho:
            return Verdict.NON_ERGODIC_DETECTED, r.observable
    if all(r.deviation <= thresholds.a_lo and r.dispersion <= thresholds.d_lo for r in nonconstant):
        return Verdict.ERGODIC_CONSISTENT, None
    return Verdict.INCONCLUSIVE, None


def ergodicity_scan(
    sys: SkewSystem,
    bank: Optional[List[Observable]] = None,
    starts: int = DEFAULT_STARTS,
    n: int = DEFAULT_N,
    seed: int = 0,
    thresholds: Optional[Thresholds] = None,
    threads: int = 1,
    residual_steps: int = RESIDUAL_STEPS,
    trajectory_sink: Optional[List[TrajectoryPoint]] = None,
) -> ErgodicityReport:
    """
    Birkhoff averages of every bank observable from `starts` independent
    starts, with dispersion, deviation, invariance residual and verdict.

    Raises:
        DomainError for starts < MIN_STARTS or n < 1
    """
    if starts < MIN_STARTS:
        raise DomainError(f"ergodicity scan needs at least {MIN_STARTS} starts, got {starts}")
    if n < 1:
        raise DomainError("ergodicity scan needs N >= 1")
    bank = default_bank(sys.fibre_kind) if bank is None else list(bank)
    _check_bank(sys, bank)
    thresholds = thresholds or Thresholds()
    residual_steps = min(residual_steps, n - 1)

    logger.info(
        "Scanning %s over %d starts x %d steps with %d observables",
        sys.fibre_kind.value, starts, n, len(bank),
    )
    points = sys.sample_starts(seed, starts)
    per_start = _map_starts(sys, bank, points, n, residual_steps, threads, trajectory_sink is not None)

    results = []
    for i, obs in enumerate(bank):
        averages = np.array([r.sums[i] / n for r in per_start])
        space = obs.space_average
        results.append(ObservableResult(
            observable=obs.name,
            kind=obs.kind.value,
            constant=obs.is_constant,
            space_average=ComplexValue.of(space),
            averages=[ComplexValue.of(a) for a in averages],
            dispersion=_dispersion(averages),
            deviation=float(np.max(np.abs(averages - space))),
            invariance_residual=float(max(r.residuals[i] for r in per_start)),
        ))

    verdict, witness = decide_verdict(results, thresholds)
    if trajectory_sink is not None:
        for r in per_start:
            trajectory_sink.extend(r.trajectory)
    logger.info("Verdict for %s: %s%s", sys.fibre_kind.value, verdict.value, f" (witness {witness})" if witness else "")
    return ErgodicityReport(
        system=sys.describe(),
        fibre=sys.fibre_kind.value,
        n=n,
        starts=starts,
        seed=seed,
        residual_steps=residual_steps,
        thresholds=thresholds,
        observables=results,
        verdict=verdict,
        witness=witness,
    )
