# =============================================================================
# GRASSMANNIAN COORDINATES
# Gr1(C^2) ~ Riemann sphere via z <-> span{v1 + z v2}, Gr1(R^2) ~ T via
# the line angle pi*y
# =============================================================================
#
# v1 = (1, i), v2 = (1, -i)
# Infinity is an explicit value (GrassCoordC.infinity()), never a big float.
# Denominators below the pole threshold map to infinity.
#
# =============================================================================

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..errors import DomainError
from ..utils.constants import POLE_THRESHOLD
from ..utils.torus import reduce_mod1
from .o2_algebra import O2Element

V1 = np.array([1.0, 1.0j])
V2 = np.array([1.0, -1.0j])


@dataclass(frozen=True)
class GrassCoordC:
    """A point of C-bar; z=None encodes infinity."""
    z: Optional[complex] = None

    @classmethod
    def finite(cls, z) -> "GrassCoordC":
        return cls(complex(z))

    @classmethod
    def infinity(cls) -> "GrassCoordC":
        return cls(None)

    @property
    def is_infinite(self) -> bool:
        return self.z is None

    @property
    def is_pole(self) -> bool:
        """0 or infinity (the circle pair P_0)."""
        return self.z is None or self.z == 0

    def to_json(self) -> Union[dict, str]:
        if self.z is None:
            return "inf"
        return {"re": self.z.real, "im": self.z.imag}

    def describe(self) -> str:
        return "inf" if self.z is None else f"{self.z.real!r}{self.z.imag:+}j"


INFINITY = GrassCoordC.infinity()
ZERO = GrassCoordC.finite(0)


@dataclass(frozen=True)
class GrassCoordR:
    """A line in R^2 at angle pi*y."""
    y: float

    def __post_init__(self):
        object.__setattr__(self, "y", reduce_mod1(self.y))


@dataclass(frozen=True)
class CirclePair:
    """P_C = {|z| = C} u {|z| = 1/C}, C in [0, 1]."""
    c: float

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise DomainError(f"circle pair parameter must lie in [0, 1], got {self.c}")


def coord_of(value) -> GrassCoordC:
    """Coerce a complex number, None or GrassCoordC."""
    if isinstance(value, GrassCoordC):
        return value
    if value is None:
        return INFINITY
    return GrassCoordC.finite(value)


# =============================================================================
# COMPLEX CHART
# =============================================================================

def _basis_coefficients(w: np.ndarray) -> tuple[complex, complex]:
    """w = a v1 + b v2."""
    a = (w[0] - 1j * w[1]) / 2.0
    b = (w[0] + 1j * w[1]) / 2.0
    return complex(a), complex(b)


def coordC_of_span(v) -> GrassCoordC:
    """
    Coordinate of span{v} for a nonzero v in C^2.

    Raises:
        DomainError for the zero vector
    """
    v = np.asarray(v, dtype=complex)
    scale = float(np.linalg.norm(v))
    if scale == 0.0:
        raise DomainError("span of the zero vector has no coordinate")
    a, b = _basis_coefficients(v)
    if abs(a) < POLE_THRESHOLD * scale:
        return INFINITY
    return GrassCoordC.finite(b / a)


def span_of_coordC(z: GrassCoordC) -> np.ndarray:
    """A spanning vector: v1 + z v2, or v2 at infinity."""
    if z.is_infinite:
        return V2.copy()
    return V1 + z.z * V2


def mobius(p: complex, q: complex, r: complex, s: complex, z: GrassCoordC) -> GrassCoordC:
    """(q + s z) / (p + r z) with the infinity conventions."""
    if z.is_infinite:
        num, den = s, r
    else:
        num, den = q + s * z.z, p + r * z.z
    if abs(den) < POLE_THRESHOLD:
        return INFINITY
    return GrassCoordC.finite(num / den)


def matrix_action_coordC(M, z: GrassCoordC) -> GrassCoordC:
    """
    Action of an invertible 2x2 matrix on C-bar.

    M v1 = p v1 + q v2,  M v2 = r v1 + s v2  =>  z -> (q + s z)/(p + r z)

    Raises:
        DomainError for a singular M
    """
    M = np.asarray(M, dtype=complex)
    if abs(np.linalg.det(M)) < POLE_THRESHOLD:
        raise DomainError("matrix action needs an invertible matrix")
    p, q = _basis_coefficients(M @ V1)
    r, s = _basis_coefficients(M @ V2)
    return mobius(p, q, r, s, z)


def k_of(z: GrassCoordC) -> float:
    """min(|z|, 1/|z|); 0 at the poles."""
    if z.is_infinite:
        return 0.0
    modulus = abs(z.z)
    if modulus == 0.0:
        return 0.0
    return min(modulus, 1.0 / modulus)


def in_circle_pair(z: GrassCoordC, pair: CirclePair, tol: float) -> bool:
    if tol < 0:
        raise DomainError("tolerance must be nonnegative")
    return abs(k_of(z) - pair.c) <= tol


def perp_coord(z: GrassCoordC) -> GrassCoordC:
    """Hermitian orthogonal complement: z -> -1/conj(z), 0 <-> infinity."""
    if z.is_infinite:
        return ZERO
    if z.z == 0:
        return INFINITY
    return GrassCoordC.finite(-1.0 / z.z.conjugate())


def chordal_distance(z: GrassCoordC, w: GrassCoordC) -> float:
    """Chordal metric on the Riemann sphere, in [0, 2]."""
    if z.is_infinite and w.is_infinite:
        return 0.0
    if z.is_infinite or w.is_infinite:
        finite = w.z if z.is_infinite else z.z
        return 2.0 / math.sqrt(1.0 + abs(finite) ** 2)
    return 2.0 * abs(z.z - w.z) / math.sqrt((1.0 + abs(z.z) ** 2) * (1.0 + abs(w.z) ** 2))


def n_fibre_map(e: O2Element, z: GrassCoordC) -> GrassCoordC:
    """
    Closed form of the action of e on C-bar.

    rotation alpha: z -> e^{2i alpha} z   (0 and infinity fixed)
    reflection beta: z -> e^{4i beta} / z (0 and infinity swapped)
    """
    phase = cmath.exp(2j * e.radians) if e.is_rotation else cmath.exp(4j * e.radians)
    if e.is_rotation:
        return z if z.is_pole else GrassCoordC.finite(phase * z.z)
    if z.is_infinite:
        return ZERO
    if z.z == 0:
        return INFINITY
    return GrassCoordC.finite(phase / z.z)


# =============================================================================
# REAL CHART
# =============================================================================

def direction(y: GrassCoordR) -> np.ndarray:
    theta = math.pi * y.y
    return np.array([math.cos(theta), math.sin(theta)])


def coordR_of_span(v) -> GrassCoordR:
    v = np.asarray(v, dtype=float)
    if float(np.linalg.norm(v)) == 0.0:
        raise DomainError("span of the zero vector has no coordinate")
    return GrassCoordR(math.atan2(v[1], v[0]) / math.pi)


def matrix_action_coordR(e: O2Element, y: GrassCoordR) -> GrassCoordR:
    """rotation t: y + 2t; reflection b: 4b - y (all mod 1)."""
    return GrassCoordR(real_fibre_map(e, y.y))


def real_fibre_map(e: O2Element, y):
    """The torus fibre map on a bare TorusValue (exact for Fractions)."""
    c = e.fibre_shift
    if e.is_rotation:
        return reduce_mod1(y + c)
    return reduce_mod1(c - y)


def perp_coord_real(y: GrassCoordR) -> GrassCoordR:
    return GrassCoordR(y.y + 0.5)
