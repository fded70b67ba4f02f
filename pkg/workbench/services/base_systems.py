# =============================================================================
# BASE SYSTEMS
# Invertible ergodic base dynamics: circle rotations and the two-sided
# Bernoulli shift on two fair symbols
# =============================================================================
#
# Points:
# - rotation: a TorusValue (float or Fraction in [0, 1))
# - bernoulli: a BinaryBiSequence, symbols hashed lazily from (seed, index)
#
# Everything here is immutable; stepping returns new points.
# =============================================================================

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np

from ..errors import DomainError
from ..utils.constants import BINARY_COORDINATE_BITS
from ..utils.hashing import bernoulli_symbol, bernoulli_symbols, derive_seed
from ..utils.torus import Angle, reduce_mod1


class BaseKind(str, Enum):
    """Supported base transformations."""
    ROTATION = "rotation"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class BinaryBiSequence:
    """
    A point of {0,1}^Z named by a hash stream and an offset.

    symbol(i) is a pure function of (seed, i + offset), hashed on demand,
    so a point holds no state beyond its two integers.
    """
    seed: int
    offset: int = 0

    def symbol(self, i: int) -> int:
        return bernoulli_symbol(self.seed, i + self.offset)

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Symbols at relative indices lo..hi-1."""
        return bernoulli_symbols(self.seed, np.arange(lo, hi, dtype=np.int64) + self.offset)

    def shifted(self, n: int = 1) -> "BinaryBiSequence":
        """Left shift by n: symbol(i) of the result is symbol(i+n) of self."""
        return BinaryBiSequence(seed=self.seed, offset=self.offset + n)

    def binary_coordinate(self, bits: int = BINARY_COORDINATE_BITS) -> float:
        """x = sum_{i<bits} symbol(i) 2^-(i+1), a point of [0, 1)."""
        weights = 0.5 ** np.arange(1, bits + 1)
        return float(np.dot(self.window(0, bits), weights))

    def describe(self, length: int = 8) -> str:
        past = "".join(str(self.symbol(i)) for i in range(-length, 0))
        future = "".join(str(self.symbol(i)) for i in range(0, length))
        return f"seed={self.seed}:off={self.offset}:...{past}.{future}..."


BasePoint = Union[float, Fraction, BinaryBiSequence]


@dataclass(frozen=True)
class OrbitBlock:
    """
    A stretch of base orbit for many starts at once.

    coord:  (L, m) float array, the T-coordinate of each iterate
            (x itself for rotations, the binary coordinate for shifts)
    symbol: (L, m) int array of x_0 for shifts, None for rotations
    """
    coord: np.ndarray
    symbol: Optional[np.ndarray] = None


@dataclass(frozen=True)
class BaseSystem:
    """
    Invertible base (X, mu, T).

    Irrationality of eta is assumed, not checked: configs carry eta as a
    symbolic constant or a literal documented as irrational.
    """
    kind: BaseKind
    eta: Optional[Angle] = None

    def __post_init__(self):
        if self.kind == BaseKind.ROTATION:
            if self.eta is None:
                raise DomainError("rotation base requires eta")
            object.__setattr__(self, "eta", reduce_mod1(self.eta))
        elif self.eta is not None:
            raise DomainError("bernoulli base takes no eta")

    @classmethod
    def rotation(cls, eta: Angle) -> "BaseSystem":
        return cls(BaseKind.ROTATION, eta)

    @classmethod
    def bernoulli(cls) -> "BaseSystem":
        return cls(BaseKind.BERNOULLI)

    @property
    def is_rotation(self) -> bool:
        return self.kind == BaseKind.ROTATION

    # -------------------------------------------------------------------------
    # Point maps
    # -------------------------------------------------------------------------

    def check_point(self, x: BasePoint) -> None:
        if self.is_rotation:
            if isinstance(x, BinaryBiSequence):
                raise DomainError("rotation base expects a torus value")
        elif not isinstance(x, BinaryBiSequence):
            raise DomainError("bernoulli base expects a BinaryBiSequence")

    def step(self, x: BasePoint) -> BasePoint:
        """T(x): x + eta mod 1, or the left shift."""
        if self.is_rotation:
            if isinstance(x, Fraction) and isinstance(self.eta, Fraction):
                return reduce_mod1(x + self.eta)
            return reduce_mod1(float(x) + float(self.eta))
        return x.shifted(1)

    def step_inverse(self, x: BasePoint) -> BasePoint:
        """T^-1(x)."""
        if self.is_rotation:
            if isinstance(x, Fraction) and isinstance(self.eta, Fraction):
                return reduce_mod1(x - self.eta)
            return reduce_mod1(float(x) - float(self.eta))
        return x.shifted(-1)

    def iterate(self, x: BasePoint, n: int) -> BasePoint:
        """T^n(x) for any integer n, by repeated stepping."""
        step = self.step if n >= 0 else self.step_inverse
        for _ in range(abs(n)):
            x = step(x)
        return x

    def coordinate(self, x: BasePoint) -> float:
        """Position of x on T (binary coordinate for shifts)."""
        if self.is_rotation:
            return float(x)
        return x.binary_coordinate()

    def leading_symbol(self, x: BasePoint) -> int:
        """x_0 for shifts."""
        if self.is_rotation:
            raise DomainError("rotation points have no symbols")
        return x.symbol(0)

    def describe_point(self, x: BasePoint) -> str:
        if self.is_rotation:
            return repr(float(x)) if not isinstance(x, Fraction) else f"{x.numerator}/{x.denominator}"
        return x.describe()

    # -------------------------------------------------------------------------
    # Sampling
    # -------------------------------------------------------------------------

    def sample_point(self, rng_seed: int) -> BasePoint:
        """Deterministic sample from mu for a given seed."""
        if self.is_rotation:
            return float(np.random.default_rng(rng_seed).random())
        return BinaryBiSequence(seed=derive_seed(rng_seed, 0))

    def sample_points(self, rng_seed: int, count: int) -> list:
        """count independent samples; stream i depends on (rng_seed, i) only."""
        if self.is_rotation:
            return [float(v) for v in np.random.default_rng(rng_seed).random(count)]
        return [BinaryBiSequence(seed=derive_seed(rng_seed, i)) for i in range(count)]

    # -------------------------------------------------------------------------
    # Vectorized orbits
    # -------------------------------------------------------------------------

    def orbit_block(self, states: list, length: int, backward: bool = False) -> Tuple[OrbitBlock, list]:
        """
        Base orbit for many starts.

        Forward: iterates T^0 x .. T^(length-1) x, next states T^length x.
        Backward: iterates T^-1 x .. T^-length x, next states T^-length x.
        """
        if self.is_rotation:
            x0 = np.array([float(x) for x in states], dtype=float)
            eta = float(self.eta)
            if backward:
                steps = -np.arange(1, length + 1, dtype=float)
            else:
                steps = np.arange(length, dtype=float)
            coord = reduce_mod1(x0[None, :] + steps[:, None] * eta)
            shift = -length if backward else length
            next_states = [reduce_mod1(x + shift * eta) for x in x0]
            return OrbitBlock(coord=coord), next_states

        bits = BINARY_COORDINATE_BITS
        if backward:
            rel = -np.arange(1, length + 1, dtype=np.int64)
        else:
            rel = np.arange(length, dtype=np.int64)
        symbols = np.empty((length, len(states)), dtype=np.int8)
        coord = np.empty((length, len(states)), dtype=float)
        weights = 0.5 ** np.arange(1, bits + 1)
        for s, seq in enumerate(states):
            lo = int(rel.min())
            tape = bernoulli_symbols(seq.seed, np.arange(lo, int(rel.max()) + bits, dtype=np.int64) + seq.offset)
            positions = rel - lo
            symbols[:, s] = tape[positions]
            windows = np.lib.stride_tricks.sliding_window_view(tape.astype(float), bits)
            coord[:, s] = windows[positions] @ weights
        shift = -length if backward else length
        next_states = [seq.shifted(shift) for seq in states]
        return OrbitBlock(coord=coord, symbol=symbols), next_states
