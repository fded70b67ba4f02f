# =============================================================================
# O2 ALGEBRA
# Exact angle-form algebra of O2(R), generators A(1, x), cocycle products
# =============================================================================
#
# Conventions:
# - angles in turns: rotation t in [0, 1) is the angle 2*pi*t,
#   reflection b in [0, 1/2) is the axis at angle 2*pi*b
# - compose(first, second) returns second o first (first argument applied first)
# - Fractions in, Fractions out: rational inputs stay exact
#
# Products along orbits are folded through the affine action on line
# directions: rotation t acts as phi -> phi + t, reflection b as
# phi -> 2b - phi, so a block of generators reduces with cumulative sums.
# =============================================================================

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

import numpy as np

from ..errors import DomainError, ResourceCapError
from ..utils.constants import BLOCK_LENGTH, EXACT_PRODUCT_LENGTH, PRODUCT_CAP
from ..utils.torus import Angle, format_angle, is_exact, reduce_mod, reduce_mod1
from .base_systems import BaseKind, BasePoint, BaseSystem, BinaryBiSequence

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
SIXTH = Fraction(1, 6)


class O2Kind(str, Enum):
    ROTATION = "rotation"
    REFLECTION = "reflection"


@dataclass(frozen=True)
class O2Element:
    """A rotation by 2*pi*t or a reflection in the line at angle 2*pi*b."""
    kind: O2Kind
    angle: Angle

    def __post_init__(self):
        if isinstance(self.angle, int) and not isinstance(self.angle, bool):
            object.__setattr__(self, "angle", Fraction(self.angle))
        if self.kind == O2Kind.ROTATION:
            object.__setattr__(self, "angle", reduce_mod1(self.angle))
        else:
            period = HALF if isinstance(self.angle, Fraction) else 0.5
            object.__setattr__(self, "angle", reduce_mod(self.angle, period))

    @classmethod
    def rotation(cls, t: Angle) -> "O2Element":
        return cls(O2Kind.ROTATION, t)

    @classmethod
    def reflection(cls, b: Angle) -> "O2Element":
        return cls(O2Kind.REFLECTION, b)

    @property
    def is_rotation(self) -> bool:
        return self.kind == O2Kind.ROTATION

    @property
    def radians(self) -> float:
        """alpha_x = 2*pi*t for rotations, beta_x = 2*pi*b for reflections."""
        return 2.0 * math.pi * float(self.angle)

    @property
    def fibre_shift(self) -> Angle:
        """The constant c of the torus fibre map: y + c (rotation) or c - y (reflection)."""
        return 2 * self.angle if self.is_rotation else 4 * self.angle

    @property
    def determinant(self) -> int:
        return 1 if self.is_rotation else -1

    def then(self, other: "O2Element") -> "O2Element":
        """self first, then other."""
        return compose(self, other)

    def describe(self) -> str:
        prefix = "rot" if self.is_rotation else "ref"
        return f"{prefix} {format_angle(self.angle)}"


IDENTITY = O2Element.rotation(Fraction(0))


def _half(value: Angle) -> Angle:
    return value / 2 if isinstance(value, Fraction) else float(value) / 2.0


def _mixed(a: Angle, b: Angle):
    """Keep exact arithmetic only when both operands are exact."""
    if is_exact(a, b):
        return Fraction(a), Fraction(b)
    return float(a), float(b)


def compose(first_applied: O2Element, second_applied: O2Element) -> O2Element:
    """
    second_applied o first_applied in angle form.

    rot(t2) o rot(t1) = rot(t1 + t2)
    ref(b2) o ref(b1) = rot(2(b2 - b1))
    rot(t)  o ref(b)  = ref(b + t/2)
    ref(b)  o rot(t)  = ref(b - t/2)
    """
    a, b = _mixed(first_applied.angle, second_applied.angle)
    if first_applied.is_rotation and second_applied.is_rotation:
        return O2Element.rotation(a + b)
    if not first_applied.is_rotation and not second_applied.is_rotation:
        return O2Element.rotation(2 * (b - a))
    if not first_applied.is_rotation:
        return O2Element.reflection(a + _half(b))
    return O2Element.reflection(b - _half(a))


def inverse(e: O2Element) -> O2Element:
    if e.is_rotation:
        return O2Element.rotation(-e.angle)
    return e


def to_matrix(e: O2Element) -> np.ndarray:
    """2x2 real orthogonal matrix of e."""
    if e.is_rotation:
        theta = 2.0 * math.pi * float(e.angle)
        c, s = math.cos(theta), math.sin(theta)
        return np.array([[c, -s], [s, c]])
    theta = 4.0 * math.pi * float(e.angle)
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [s, -c]])


# =============================================================================
# GENERATORS
# =============================================================================

class GeneratorKind(str, Enum):
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"
    EXAMPLE3 = "example3"
    CEX1 = "cex1"
    CEX2 = "cex2"
    TABLE = "table"


@dataclass(frozen=True)
class TableEntry:
    """Generator value on the base interval [lo, hi)."""
    lo: Angle
    hi: Angle
    element: O2Element


@dataclass(frozen=True)
class CocycleGenerator:
    """
    A_0 = A(1, .), a pure function of the base point.

    example1:  rotation t = x/2                             (rotation base)
    example2:  rotation alpha/2 on [0, 1-eta), ref 0 after  (rotation base)
    example3:  rotation alpha/2 if x_0 = 0, ref 0 if x_0 = 1 (shift base)
    cex1:      rotation 1/6                                 (rotation base)
    cex2:      rotation 1/6 if x_0 = 0, ref 0 if x_0 = 1    (shift base)
    table:     a partition of [0, 1) into half-open intervals (rotation base)
    """
    kind: GeneratorKind
    alpha: Optional[Angle] = None
    eta: Optional[Angle] = None
    table: Tuple[TableEntry, ...] = ()

    def __post_init__(self):
        if self.kind in (GeneratorKind.EXAMPLE2, GeneratorKind.EXAMPLE3) and self.alpha is None:
            raise DomainError(f"{self.kind.value} requires alpha")
        if self.kind == GeneratorKind.EXAMPLE2 and self.eta is None:
            raise DomainError("example2 requires eta")
        if self.kind == GeneratorKind.TABLE:
            _check_partition(self.table)

    @property
    def base_kind(self) -> BaseKind:
        if self.kind in (GeneratorKind.EXAMPLE3, GeneratorKind.CEX2):
            return BaseKind.BERNOULLI
        return BaseKind.ROTATION

    @property
    def boundary(self) -> Angle:
        """1 - eta for example2."""
        return reduce_mod1(1 - self.eta) if is_exact(self.eta) else 1.0 - float(self.eta)

    def check_base(self, sys: BaseSystem) -> None:
        if sys.kind != self.base_kind:
            raise DomainError(
                f"generator {self.kind.value} runs over a {self.base_kind.value} base, "
                f"got {sys.kind.value}"
            )
        if self.kind == GeneratorKind.EXAMPLE2 and abs(float(sys.eta) - float(self.eta)) > 1e-15:
            raise DomainError("example2 generator eta must match the base rotation")

    def describe(self) -> dict:
        info = {"kind": self.kind.value}
        if self.alpha is not None:
            info["alpha"] = format_angle(self.alpha)
        if self.eta is not None:
            info["eta"] = format_angle(self.eta)
        if self.table:
            info["table"] = [
                f"[{format_angle(e.lo)}, {format_angle(e.hi)}): {e.element.describe()}" for e in self.table
            ]
        return info

    def element_block(self, coord: np.ndarray, symbol: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Vectorized generator over a block of base iterates.

        Returns:
            (reflect, angle): boolean reflection mask and the float angle
            (t for rotations, b for reflections) for every entry
        """
        if self.kind == GeneratorKind.EXAMPLE1:
            return np.zeros(coord.shape, dtype=bool), coord / 2.0
        if self.kind == GeneratorKind.CEX1:
            return np.zeros(coord.shape, dtype=bool), np.full(coord.shape, 1.0 / 6.0)
        if self.kind == GeneratorKind.EXAMPLE2:
            reflect = coord >= float(self.boundary)
            return reflect, np.where(reflect, 0.0, float(self.alpha) / 2.0)
        if self.kind in (GeneratorKind.EXAMPLE3, GeneratorKind.CEX2):
            if symbol is None:
                raise DomainError("shift-based generators need symbols")
            rot = float(self.alpha) / 2.0 if self.kind == GeneratorKind.EXAMPLE3 else 1.0 / 6.0
            reflect = symbol == 1
            return reflect, np.where(reflect, 0.0, rot)
        # table
        reflect = np.zeros(coord.shape, dtype=bool)
        angle = np.zeros(coord.shape, dtype=float)
        for entry in self.table:
            inside = (coord >= float(entry.lo)) & (coord < float(entry.hi))
            reflect[inside] = not entry.element.is_rotation
            angle[inside] = float(entry.element.angle)
        return reflect, angle


def _check_partition(table: Tuple[TableEntry, ...]) -> None:
    if not table:
        raise DomainError("table generator needs at least one interval")
    entries = sorted(table, key=lambda e: float(e.lo))
    if float(entries[0].lo) != 0.0 or float(entries[-1].hi) != 1.0:
        raise DomainError("table intervals must cover [0, 1)")
    for left, right in zip(entries, entries[1:]):
        if left.hi != right.lo:
            raise DomainError(
                f"table intervals must partition [0, 1): gap or overlap at {format_angle(left.hi)}"
            )
    for entry in entries:
        if not float(entry.lo) < float(entry.hi):
            raise DomainError("table intervals must be non-empty [lo, hi)")


def example1() -> CocycleGenerator:
    return CocycleGenerator(GeneratorKind.EXAMPLE1)


def example2(alpha: Angle, eta: Angle) -> CocycleGenerator:
    return CocycleGenerator(GeneratorKind.EXAMPLE2, alpha=alpha, eta=eta)


def example3(alpha: Angle) -> CocycleGenerator:
    return CocycleGenerator(GeneratorKind.EXAMPLE3, alpha=alpha)


def cex1(eta: Optional[Angle] = None) -> CocycleGenerator:
    return CocycleGenerator(GeneratorKind.CEX1, eta=eta)


def cex2() -> CocycleGenerator:
    return CocycleGenerator(GeneratorKind.CEX2)


def table_generator(entries) -> CocycleGenerator:
    """entries: iterable of (lo, hi, O2Element)."""
    return CocycleGenerator(
        GeneratorKind.TABLE,
        table=tuple(TableEntry(lo, hi, element) for lo, hi, element in entries),
    )


def generator_at(g: CocycleGenerator, x: BasePoint) -> O2Element:
    """A(1, x)."""
    if g.kind == GeneratorKind.EXAMPLE1:
        _require_torus_point(x)
        return O2Element.rotation(_half(x))
    if g.kind == GeneratorKind.CEX1:
        _require_torus_point(x)
        return O2Element.rotation(SIXTH)
    if g.kind == GeneratorKind.EXAMPLE2:
        _require_torus_point(x)
        if x >= g.boundary:
            return O2Element.reflection(Fraction(0))
        return O2Element.rotation(_half(g.alpha))
    if g.kind in (GeneratorKind.EXAMPLE3, GeneratorKind.CEX2):
        if not isinstance(x, BinaryBiSequence):
            raise DomainError(f"{g.kind.value} expects a BinaryBiSequence")
        if x.symbol(0) == 1:
            return O2Element.reflection(Fraction(0))
        return O2Element.rotation(_half(g.alpha) if g.kind == GeneratorKind.EXAMPLE3 else SIXTH)
    _require_torus_point(x)
    for entry in g.table:
        if entry.lo <= x < entry.hi:
            return entry.element
    raise DomainError(f"point {x!r} outside the table partition")


def _require_torus_point(x) -> None:
    if isinstance(x, BinaryBiSequence):
        raise DomainError("generator expects a torus value, got a symbol sequence")


def exact_fibre_maps(g: CocycleGenerator) -> List[O2Element]:
    """
    The distinct generator values, when all of them are exact rationals.

    Raises:
        DomainError for generators with irrational or continuous angles
    """
    if g.kind == GeneratorKind.CEX1:
        return [O2Element.rotation(SIXTH)]
    if g.kind == GeneratorKind.CEX2:
        return [O2Element.rotation(SIXTH), O2Element.reflection(Fraction(0))]
    if g.kind == GeneratorKind.TABLE and all(is_exact(e.element.angle) for e in g.table):
        unique = []
        for entry in g.table:
            if entry.element not in unique:
                unique.append(entry.element)
        return unique
    if g.kind in (GeneratorKind.EXAMPLE2, GeneratorKind.EXAMPLE3) and is_exact(g.alpha):
        rot = O2Element.rotation(Fraction(g.alpha) / 2)
        return [rot, O2Element.reflection(Fraction(0))]
    raise DomainError(
        f"generator {g.kind.value} has no exact finite set of fibre maps; use diagnostics instead"
    )


# =============================================================================
# COCYCLE PRODUCTS
# =============================================================================

def _fold_exact(elements) -> O2Element:
    result = IDENTITY
    for e in elements:
        result = compose(result, e)
    return result


def _fold_block(reflect: np.ndarray, angle: np.ndarray) -> Tuple[bool, float]:
    """
    Fold a 1-d block of generator values (in application order) into
    the affine direction map phi -> s*phi + d.

    Returns:
        (is_reflection, d mod 1)
    """
    eps = np.where(reflect, -1.0, 1.0)
    c = np.where(reflect, 2.0 * angle, angle)
    # prefix signs S_j = eps_0 ... eps_j
    prefix = np.cumprod(eps)
    total_sign = prefix[-1]
    d = total_sign * float(np.sum(np.mod(c * prefix, 1.0)))
    return bool(total_sign < 0), float(np.mod(d, 1.0))


def _direction_map_to_element(is_reflection: bool, d: float) -> O2Element:
    if is_reflection:
        return O2Element.reflection(d / 2.0)
    return O2Element.rotation(d)


def cocycle_product(
    g: CocycleGenerator,
    sys: BaseSystem,
    x: BasePoint,
    n: int,
    cap: int = PRODUCT_CAP,
    exact: Optional[bool] = None,
) -> O2Element:
    """
    A(n, x) in angle form.

    A(0, x) = I
    A(n, x) = A_0(T^{n-1} x) ... A_0(x)                 n > 0
    A(n, x) = A_0(T^n x)^-1 ... A_0(T^-1 x)^-1          n < 0

    Exact (Fraction) folding is used when the point and every angle are
    rational and |n| <= EXACT_PRODUCT_LENGTH; otherwise generators are
    folded in vectorized float blocks. Pass exact=True to force the
    Fraction fold at any length.

    Raises:
        ResourceCapError if |n| > cap
    """
    if abs(n) > cap:
        raise ResourceCapError("cocycle product length", cap)
    g.check_base(sys)
    sys.check_point(x)
    if n == 0:
        return IDENTITY

    if exact is None:
        exact = abs(n) <= EXACT_PRODUCT_LENGTH and _exact_inputs(g, sys, x)
    if exact or abs(n) < 64:
        return _cocycle_product_scalar(g, sys, x, n)

    backward = n < 0
    remaining = abs(n)
    logger.debug("Folding %d generator values in blocks of %d", remaining, BLOCK_LENGTH)
    state = [x]
    is_reflection, d = False, 0.0
    while remaining > 0:
        length = min(BLOCK_LENGTH, remaining)
        block, state = sys.orbit_block(state, length, backward=backward)
        reflect, angle = g.element_block(block.coord[:, 0], None if block.symbol is None else block.symbol[:, 0])
        if backward:
            # inverse rotations negate t; reflections are involutions
            angle = np.where(reflect, angle, -angle)
        block_reflect, block_d = _fold_block(reflect, angle)
        # compose accumulated map with block map: phi -> s_b*(s_a*phi + d_a) + d_b
        if block_reflect:
            d = block_d - d
        else:
            d = d + block_d
        d = float(np.mod(d, 1.0))
        is_reflection = is_reflection != block_reflect
        remaining -= length
    return _direction_map_to_element(is_reflection, d)


def _exact_inputs(g: CocycleGenerator, sys: BaseSystem, x: BasePoint) -> bool:
    if g.kind in (GeneratorKind.CEX1, GeneratorKind.CEX2):
        return sys.kind == BaseKind.BERNOULLI or is_exact(sys.eta, x)
    if g.kind == GeneratorKind.EXAMPLE3:
        return is_exact(g.alpha)
    if g.kind == GeneratorKind.EXAMPLE1:
        return is_exact(sys.eta, x)
    if g.kind == GeneratorKind.EXAMPLE2:
        return is_exact(sys.eta, x, g.alpha)
    return is_exact(sys.eta, x) and all(is_exact(e.element.angle, e.lo, e.hi) for e in g.table)


def _cocycle_product_scalar(g: CocycleGenerator, sys: BaseSystem, x: BasePoint, n: int) -> O2Element:
    result = IDENTITY
    if n > 0:
        for _ in range(n):
            result = compose(result, generator_at(g, x))
            x = sys.step(x)
        return result
    for _ in range(-n):
        x = sys.step_inverse(x)
        result = compose(result, inverse(generator_at(g, x)))
    return result


def _block_matrix(reflect: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Float product M_{L-1} ... M_0 of a block of generator values, reduced pairwise."""
    theta = np.where(reflect, 4.0, 2.0) * np.pi * angle
    c, s = np.cos(theta), np.sin(theta)
    mats = np.empty((len(theta), 2, 2))
    mats[:, 0, 0] = c
    mats[:, 1, 0] = s
    mats[:, 0, 1] = np.where(reflect, s, -s)
    mats[:, 1, 1] = np.where(reflect, -c, c)
    while len(mats) > 1:
        even = len(mats) - len(mats) % 2
        # later factors act on the left
        paired = np.matmul(mats[1:even:2], mats[0:even:2])
        mats = np.concatenate([paired, mats[even:]])
    return mats[0]


def _matrix_blocks(g: CocycleGenerator, sys: BaseSystem, x: BasePoint, n: int, cap: int) -> Iterator[np.ndarray]:
    """Float block products along the forward orbit, in application order."""
    if n > cap:
        raise ResourceCapError("cocycle product length", cap)
    g.check_base(sys)
    sys.check_point(x)
    state = [x]
    remaining = n
    while remaining > 0:
        length = min(BLOCK_LENGTH, remaining)
        block, state = sys.orbit_block(state, length)
        reflect, angle = g.element_block(block.coord[:, 0], None if block.symbol is None else block.symbol[:, 0])
        yield _block_matrix(reflect, angle)
        remaining -= length


def product_matrix(
    g: CocycleGenerator,
    sys: BaseSystem,
    x: BasePoint,
    n: int,
    cap: int = PRODUCT_CAP,
) -> np.ndarray:
    """
    A(n, x) for n >= 0 as a float 2x2 matrix, multiplied block by block
    along the orbit without passing through angle form.

    Raises:
        ResourceCapError if n > cap
    """
    if n < 0:
        raise DomainError("product_matrix needs n >= 0")
    result = np.eye(2)
    for m in _matrix_blocks(g, sys, x, n, cap):
        result = m @ result
    return result


def growth_check(
    g: CocycleGenerator,
    sys: BaseSystem,
    x: BasePoint,
    v,
    n: int,
    method: str = "matrix",
    cap: int = PRODUCT_CAP,
) -> float:
    """
    (1/n) log(|A(n, x) v| / |v|).

    method="matrix" (default) multiplies float matrices along the orbit one
    block at a time, renormalizing the tracked vector after each block and
    accumulating log norms. Rounding in the products shows up here.
    method="angle" folds the product in angle form first, which is
    orthogonal by construction.

    Raises:
        DomainError for a zero vector, n < 1 or an unknown method
        ResourceCapError if n > cap
    """
    v = np.asarray(v, dtype=float)
    norm_v = float(np.linalg.norm(v))
    if norm_v == 0.0:
        raise DomainError("growth_check needs a nonzero vector")
    if n < 1:
        raise DomainError("growth_check needs n >= 1")

    if method == "angle":
        product = cocycle_product(g, sys, x, n, cap=cap)
        return math.log(float(np.linalg.norm(to_matrix(product) @ v)) / norm_v) / n

    if method != "matrix":
        raise DomainError(f"unknown growth method: {method}")
    w = v / norm_v
    log_growth = 0.0
    for m in _matrix_blocks(g, sys, x, n, cap):
        w = m @ w
        r = float(np.linalg.norm(w))
        log_growth += math.log(r)
        w = w / r
    return log_growth / n
