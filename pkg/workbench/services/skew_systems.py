# =============================================================================
# SKEW SYSTEMS
# Skew products over the base driven by the generator:
#   S  on X x T      fibre map f_x
#   R  on X x Z2     fibre map g_x
#   N  on X x C-bar  Grassmannian action
#   Z3 on X x Z3     factor of S through pi_3(y) = floor(3y)
# plus the factor maps iota, tau, pi_3
# =============================================================================
#
# Fibre maps take the O2 element, never the base point: generator_at is the
# single seam between base and fibre.
#
# Vectorized orbits (many starts, one block at a time) use the prefix-sign
# identity for affine maps y -> eps*y + c:
#   z_{n+1} = z_n + S_{n+1} c_n,  y_n = S_n z_n,  S_n = eps_0 ... eps_{n-1}
# =============================================================================

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, List, Optional, Union

import numpy as np
from scipy import stats

from ..errors import DomainError
from ..utils.constants import BLOCK_LENGTH, IOTA_ANNULUS
from ..utils.hashing import bernoulli_symbols, derive_seed
from ..utils.torus import Angle, is_exact, reduce_mod1
from .base_systems import BasePoint, BaseSystem, OrbitBlock
from .grassmannian import INFINITY, ZERO, GrassCoordC, n_fibre_map, real_fibre_map
from .o2_algebra import CocycleGenerator, O2Element, generator_at

logger = logging.getLogger(__name__)


class FibreKind(str, Enum):
    """Fibre of the skew product, named by the system it carries."""
    TORUS = "S"
    Z2 = "R"
    SPHERE = "N"
    Z3 = "Z3"


FibrePoint = Union[float, Fraction, int, GrassCoordC]


@dataclass(frozen=True)
class SkewPoint:
    base: BasePoint
    fibre: FibrePoint


# =============================================================================
# FIBRE MAPS
# =============================================================================

def f_step(e: O2Element, y: Angle) -> Angle:
    """rotation t: y + 2t; reflection b: 4b - y (mod 1)."""
    return real_fibre_map(e, y)


def g_step(e: O2Element, a: int) -> int:
    """rotation: a; reflection: a + 1 (mod 2)."""
    return a % 2 if e.is_rotation else (a + 1) % 2


def n_step(e: O2Element, z: GrassCoordC) -> GrassCoordC:
    """rotation: e^{2i alpha} z; reflection: e^{4i beta}/z; poles exact."""
    return n_fibre_map(e, z)


def _thirds_integer(c: Angle) -> int:
    """3c as an integer, when c is a multiple of 1/3."""
    if isinstance(c, Fraction) or is_exact(c):
        scaled = Fraction(c) * 3
        if scaled.denominator != 1:
            raise DomainError(f"Z3 factor needs fibre shifts in thirds, got {c}")
        return int(scaled)
    scaled = 3.0 * float(c)
    nearest = round(scaled)
    if abs(scaled - nearest) > 1e-9:
        raise DomainError(f"Z3 factor needs fibre shifts in thirds, got {c}")
    return int(nearest)


def z3_step(e: O2Element, a: int) -> int:
    """
    The map on Z3 making pi_3 a factor of f off the boundary points.

    rotation  y -> y + c:  a -> a + 3c
    reflection y -> c - y: a -> 3c - 1 - a    (c = 0 gives a -> 2 - a)

    Raises:
        DomainError when c is not a multiple of 1/3
    """
    m = _thirds_integer(e.fibre_shift)
    if e.is_rotation:
        return (a + m) % 3
    return (m - 1 - a) % 3


def iota(z: GrassCoordC, annulus: float = IOTA_ANNULUS) -> int:
    """
    0 inside the unit circle, 1 outside.

    Raises:
        DomainError within annulus of the unit circle
    """
    if z.is_infinite:
        return 1
    modulus = abs(z.z)
    if abs(modulus - 1.0) <= annulus:
        raise DomainError(f"iota is undefined on the unit circle (|z| = {modulus!r})")
    return 0 if modulus < 1.0 else 1


def tau(z: GrassCoordC) -> float:
    """arg(z)/2pi in [0, 1); undefined at the poles."""
    if z.is_pole:
        raise DomainError("tau is undefined at 0 and infinity")
    return reduce_mod1(cmath.phase(z.z) / (2.0 * math.pi))


def is_thirds_boundary(y: Angle) -> bool:
    return reduce_mod1(3 * y) == 0


def project_thirds(y: Angle) -> int:
    """pi_3(y) = floor(3y); boundary points go by the floor."""
    if is_thirds_boundary(y):
        logger.debug("pi_3 evaluated at boundary point %s", y)
    return int(math.floor(3 * y)) % 3


# =============================================================================
# SKEW SYSTEM
# =============================================================================

@dataclass(frozen=True)
class SkewBlock:
    """One block of a vectorized orbit for m starts over L steps."""
    base: OrbitBlock
    reflect: np.ndarray
    angle: np.ndarray
    fibre: np.ndarray
    log_modulus: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SkewSystem:
    """(x, v) -> (T x, h_x(v)) with h given by the generator and fibre kind."""
    base: BaseSystem
    generator: CocycleGenerator
    fibre_kind: FibreKind
    iota_annulus: float = IOTA_ANNULUS

    def __post_init__(self):
        self.generator.check_base(self.base)

    # -------------------------------------------------------------------------
    # Scalar dynamics
    # -------------------------------------------------------------------------

    def fibre_map(self, e: O2Element, v: FibrePoint) -> FibrePoint:
        if self.fibre_kind == FibreKind.TORUS:
            return f_step(e, v)
        if self.fibre_kind == FibreKind.Z2:
            return g_step(e, v)
        if self.fibre_kind == FibreKind.Z3:
            return z3_step(e, v)
        return n_step(e, v)

    def check_fibre(self, v: FibrePoint) -> None:
        if self.fibre_kind == FibreKind.SPHERE:
            if not isinstance(v, GrassCoordC):
                raise DomainError("N fibre points are GrassCoordC values")
        elif isinstance(v, GrassCoordC):
            raise DomainError(f"{self.fibre_kind.value} fibre expects a number")
        elif self.fibre_kind == FibreKind.Z2 and v not in (0, 1):
            raise DomainError(f"Z2 fibre values are 0 or 1, got {v!r}")
        elif self.fibre_kind == FibreKind.Z3 and v not in (0, 1, 2):
            raise DomainError(f"Z3 fibre values are 0, 1 or 2, got {v!r}")

    def step(self, p: SkewPoint) -> SkewPoint:
        e = generator_at(self.generator, p.base)
        return SkewPoint(self.base.step(p.base), self.fibre_map(e, p.fibre))

    def orbit(self, p: SkewPoint, n: int) -> Iterator[SkewPoint]:
        """p, S p, ..., S^n p."""
        yield p
        for _ in range(n):
            p = self.step(p)
            yield p

    @property
    def base_rotation(self) -> Angle:
        if not self.base.is_rotation:
            raise DomainError("base is not a rotation")
        return self.base.eta

    def base_coordinate(self, p: SkewPoint) -> float:
        return self.base.coordinate(p.base)

    def describe(self) -> dict:
        base = {"kind": self.base.kind.value}
        if self.base.is_rotation:
            base["eta"] = repr(float(self.base.eta))
        return {
            "fibre": self.fibre_kind.value,
            "base": base,
            "cocycle": self.generator.describe(),
        }

    def hemisphere(self, z: GrassCoordC) -> Optional[int]:
        """iota(z) with this system's annulus; None on the unit circle."""
        try:
            return iota(z, self.iota_annulus)
        except DomainError:
            return None

    def describe_fibre(self, v: FibrePoint) -> str:
        if isinstance(v, GrassCoordC):
            return v.describe()
        if isinstance(v, Fraction):
            return f"{v.numerator}/{v.denominator}"
        return repr(v) if isinstance(v, float) else str(v)

    # -------------------------------------------------------------------------
    # Sampling
    # -------------------------------------------------------------------------

    def sample_start(self, rng_seed: int) -> SkewPoint:
        return self.sample_starts(rng_seed, 1)[0]

    def sample_starts(self, rng_seed: int, count: int) -> List[SkewPoint]:
        """Independent starts from the product of mu and the fibre reference measure."""
        bases = self.base.sample_points(rng_seed, count)
        rng = np.random.default_rng(derive_seed(rng_seed, 1))
        if self.fibre_kind == FibreKind.TORUS:
            fibres = [float(y) for y in rng.random(count)]
        elif self.fibre_kind == FibreKind.Z2:
            fibres = [int(a) for a in rng.integers(0, 2, count)]
        elif self.fibre_kind == FibreKind.Z3:
            fibres = [int(a) for a in rng.integers(0, 3, count)]
        else:
            k = rng.random(count)
            theta = rng.random(count)
            outside = rng.integers(0, 2, count)
            fibres = []
            for kk, th, out in zip(k, theta, outside):
                modulus = 1.0 / kk if out else kk
                fibres.append(GrassCoordC.finite(modulus * cmath.exp(2j * math.pi * th)))
        return [SkewPoint(b, f) for b, f in zip(bases, fibres)]

    # -------------------------------------------------------------------------
    # Vectorized dynamics
    # -------------------------------------------------------------------------

    def _initial_fibre_arrays(self, starts: List[SkewPoint]):
        if self.fibre_kind == FibreKind.SPHERE:
            theta, logmod = [], []
            for p in starts:
                z = p.fibre
                if z.is_infinite:
                    theta.append(0.0)
                    logmod.append(math.inf)
                elif z.z == 0:
                    theta.append(0.0)
                    logmod.append(-math.inf)
                else:
                    theta.append(tau(z))
                    logmod.append(math.log(abs(z.z)))
            return np.array(theta, dtype=float), np.array(logmod, dtype=float)
        if self.fibre_kind == FibreKind.TORUS:
            return np.array([float(p.fibre) for p in starts], dtype=float), None
        return np.array([int(p.fibre) for p in starts], dtype=np.int64), None

    def _integer_shifts(self, reflect: np.ndarray, angle: np.ndarray) -> np.ndarray:
        """Z3 increments: 3c for rotations, 3c - 1 for reflections."""
        c = np.where(reflect, 4.0 * angle, 2.0 * angle)
        scaled = 3.0 * c
        m = np.rint(scaled)
        if np.any(np.abs(scaled - m) > 1e-9):
            raise DomainError("Z3 factor needs fibre shifts in thirds")
        return (m.astype(np.int64) - reflect.astype(np.int64)) % 3

    def orbit_blocks(
        self,
        starts: List[SkewPoint],
        n_steps: int,
        block_length: int = BLOCK_LENGTH,
    ) -> Iterator[SkewBlock]:
        """
        Orbits of all starts, block by block, for n_steps iterates
        (indices 0 .. n_steps - 1).
        """
        base_states = [p.base for p in starts]
        fibre, logmod = self._initial_fibre_arrays(starts)
        done = 0
        while done < n_steps:
            length = min(block_length, n_steps - done)
            block, base_states = self.base.orbit_block(base_states, length)
            reflect, angle = self.generator.element_block(block.coord, block.symbol)
            eps = np.where(reflect, -1, 1)
            prefix = np.cumprod(eps, axis=0)
            sign_before = np.vstack([np.ones((1, len(starts)), dtype=prefix.dtype), prefix[:-1]])

            if self.fibre_kind == FibreKind.Z2:
                flips = np.cumsum(reflect, axis=0)
                before = np.vstack([np.zeros((1, len(starts)), dtype=flips.dtype), flips[:-1]])
                values = (fibre[None, :] + before) % 2
                fibre = (fibre + flips[-1]) % 2
            elif self.fibre_kind == FibreKind.Z3:
                shifts = self._integer_shifts(reflect, angle)
                sums = np.cumsum(prefix * shifts, axis=0)
                before = np.vstack([np.zeros((1, len(starts)), dtype=sums.dtype), sums[:-1]])
                values = (sign_before * (fibre[None, :] + before)) % 3
                fibre = (prefix[-1] * (fibre + sums[-1])) % 3
            else:
                c = np.where(reflect, 4.0 * angle, 2.0 * angle)
                sums = np.cumsum(np.mod(prefix * c, 1.0), axis=0)
                before = np.vstack([np.zeros((1, len(starts))), sums[:-1]])
                values = reduce_mod1(sign_before * (fibre[None, :] + before))
                fibre = reduce_mod1(prefix[-1] * (fibre + sums[-1]))

            block_logmod = None
            if self.fibre_kind == FibreKind.SPHERE:
                block_logmod = sign_before * logmod[None, :]
                logmod = prefix[-1] * logmod

            yield SkewBlock(base=block, reflect=reflect, angle=angle, fibre=values, log_modulus=block_logmod)
            done += length

    def fibre_image(self, reflect: np.ndarray, angle: np.ndarray, fibre: np.ndarray) -> np.ndarray:
        """One fibre step applied elementwise (torus, Z2, Z3 and the sphere angle)."""
        if self.fibre_kind == FibreKind.Z2:
            return (fibre + reflect) % 2
        if self.fibre_kind == FibreKind.Z3:
            shifts = self._integer_shifts(reflect, angle)
            return np.where(reflect, shifts - fibre, fibre + shifts) % 3
        c = np.where(reflect, 4.0 * angle, 2.0 * angle)
        return reduce_mod1(np.where(reflect, c - fibre, fibre + c))

    def step_arrays(self, x: np.ndarray, y: np.ndarray):
        """One step of S for arrays of (x, y); rotation base, torus fibre."""
        if not self.base.is_rotation or self.fibre_kind != FibreKind.TORUS:
            raise DomainError("array stepping needs a rotation base and a torus fibre")
        reflect, angle = self.generator.element_block(x)
        return reduce_mod1(x + float(self.base.eta)), self.fibre_image(reflect, angle, y)


def skew_step(sys: SkewSystem, p: SkewPoint) -> SkewPoint:
    """(T x, fibre_map_x(v))."""
    return sys.step(p)


def pushforward_ks(sys: SkewSystem, samples: int, seed: int) -> float:
    """
    KS statistic of the fibre marginal after one step of S, started from
    the uniform product measure.
    """
    if sys.fibre_kind != FibreKind.TORUS:
        raise DomainError("pushforward_ks applies to torus fibres")
    rng = np.random.default_rng(seed)
    y = rng.random(samples)
    if sys.base.is_rotation:
        x = rng.random(samples)
        reflect, angle = sys.generator.element_block(x)
    else:
        symbols = bernoulli_symbols(derive_seed(seed, 2), np.arange(samples, dtype=np.int64))
        reflect, angle = sys.generator.element_block(np.zeros(samples), symbols)
    image = sys.fibre_image(reflect, angle, y)
    return float(stats.kstest(image, "uniform").statistic)


# Poles, re-exported for callers that build N starts
POLES = (ZERO, INFINITY)
