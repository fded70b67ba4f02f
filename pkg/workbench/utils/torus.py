# =============================================================================
# TORUS ARITHMETIC
# Mod-1 reduction and angle literal parsing
# =============================================================================
#
# Values on T = R/Z are kept in [0, 1) after every operation.
# Rational literals stay exact (Fraction); decimals and symbolic constants
# become floats.
#
# =============================================================================

import math
from fractions import Fraction
from typing import Union

import numpy as np

Angle = Union[float, Fraction]

# Symbolic constants accepted in configs (all assumed irrational)
SYMBOLIC_CONSTANTS = {
    "sqrt2-1": math.sqrt(2.0) - 1.0,
    "sqrt3-1": math.sqrt(3.0) - 1.0,
    "golden": (math.sqrt(5.0) - 1.0) / 2.0,
}


def reduce_mod1(value):
    """
    Reduce to the representative in [0, 1).

    Works for floats, Fractions and numpy arrays. Float results that round
    up to 1.0 are folded back to 0.0.
    """
    if isinstance(value, Fraction):
        return value - math.floor(value)
    if isinstance(value, np.ndarray):
        reduced = np.mod(value, 1.0)
        reduced[reduced >= 1.0] = 0.0
        return reduced
    reduced = float(value) % 1.0
    if reduced >= 1.0:
        return 0.0
    return reduced


def reduce_mod(value, period):
    """Reduce to [0, period) for scalar floats or Fractions."""
    if isinstance(value, Fraction) and isinstance(period, Fraction):
        return value - period * math.floor(value / period)
    reduced = float(value) % float(period)
    if reduced >= float(period):
        return 0.0
    return reduced


def circular_distance(a, b):
    """Distance on T between a and b (scalar or array), in [0, 1/2]."""
    d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), 1.0)
    return np.minimum(d, 1.0 - d)


def frac(value: float) -> float:
    """Fractional part."""
    return reduce_mod1(value)


def is_exact(*values) -> bool:
    """True when every value is an exact rational."""
    return all(isinstance(v, (Fraction, int)) and not isinstance(v, bool) for v in values)


def parse_angle(text) -> Angle:
    """
    Parse an angle or rotation literal.

    Accepted forms:
        "1/3"      -> Fraction(1, 3)
        "0.7"      -> 0.7
        "sqrt2-1"  -> sqrt(2) - 1
        3          -> Fraction(3)

    Raises:
        ValueError on anything else (no expression evaluation)
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise ValueError(f"Not an angle literal: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return text

    literal = str(text).strip().lower().replace("−", "-")
    if literal in SYMBOLIC_CONSTANTS:
        return SYMBOLIC_CONSTANTS[literal]
    if "/" in literal:
        numerator, _, denominator = literal.partition("/")
        try:
            value = Fraction(int(numerator.strip()), int(denominator.strip()))
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Invalid rational literal: {text!r}") from e
        return value
    try:
        return float(literal)
    except ValueError as e:
        raise ValueError(
            f"Invalid angle literal: {text!r}. "
            f"Use a decimal, p/q, or one of {sorted(SYMBOLIC_CONSTANTS)}"
        ) from e


def format_angle(value: Angle) -> str:
    """Render an angle for reports: exact rationals as p/q, floats by repr."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))
