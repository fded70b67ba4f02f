# =============================================================================
# RATIONAL INTERVAL SETS
# Finite unions of half-open subintervals of T with exact rational endpoints
# =============================================================================
#
# Boundary points are measure zero: (a, b) and [a, b) describe the same set.
# Normal form: sorted, disjoint, adjacent intervals merged, empty dropped.
#
# =============================================================================

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Tuple

from ..errors import DomainError

Interval = Tuple[Fraction, Fraction]


def _as_fraction(value) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (Fraction, int, str)):
        raise DomainError(f"Interval endpoints must be exact rationals, got {value!r}")
    return Fraction(value)


def _union_overlapping(intervals: Iterable[Interval]) -> List[Interval]:
    """Merge overlapping or touching intervals of [0, 1]."""
    ordered = sorted((lo, hi) for lo, hi in intervals if hi > lo)
    merged: List[Interval] = []
    for lo, hi in ordered:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _wrap(lo: Fraction, hi: Fraction) -> List[Interval]:
    """Split an interval of length <= 1 placed anywhere on R into pieces of [0, 1)."""
    if hi - lo >= 1:
        return [(Fraction(0), Fraction(1))]
    shift = Fraction(lo.numerator // lo.denominator)
    lo, hi = lo - shift, hi - shift
    if hi <= 1:
        return [(lo, hi)]
    return [(lo, Fraction(1)), (Fraction(0), hi - 1)]


@dataclass(frozen=True)
class RationalIntervalSet:
    """Normalized finite union of [p/q, r/s) inside [0, 1)."""

    intervals: Tuple[Interval, ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[object, object]]) -> "RationalIntervalSet":
        """Build from (lo, hi) pairs with 0 <= lo <= hi <= 1."""
        pieces = []
        for lo, hi in pairs:
            lo, hi = _as_fraction(lo), _as_fraction(hi)
            if not (0 <= lo <= hi <= 1):
                raise DomainError(f"Interval [{lo}, {hi}) is not inside [0, 1]")
            pieces.append((lo, hi))
        return cls(tuple(_union_overlapping(pieces)))

    @classmethod
    def empty(cls) -> "RationalIntervalSet":
        return cls(())

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, y) -> bool:
        y = Fraction(y) if not isinstance(y, float) else y
        return any(lo <= y < hi for lo, hi in self.intervals)

    def translate(self, shift) -> "RationalIntervalSet":
        """Image under y -> y + shift mod 1."""
        shift = _as_fraction(shift)
        pieces: List[Interval] = []
        for lo, hi in self.intervals:
            pieces.extend(_wrap(lo + shift, hi + shift))
        return RationalIntervalSet(tuple(_union_overlapping(pieces)))

    def reflect(self, center) -> "RationalIntervalSet":
        """Image under y -> center - y mod 1."""
        center = _as_fraction(center)
        pieces: List[Interval] = []
        for lo, hi in self.intervals:
            pieces.extend(_wrap(center - hi, center - lo))
        return RationalIntervalSet(tuple(_union_overlapping(pieces)))

    def complement(self) -> "RationalIntervalSet":
        pieces: List[Interval] = []
        cursor = Fraction(0)
        for lo, hi in self.intervals:
            if lo > cursor:
                pieces.append((cursor, lo))
            cursor = hi
        if cursor < 1:
            pieces.append((cursor, Fraction(1)))
        return RationalIntervalSet(tuple(pieces))

    def grid_cells(self, n: int) -> frozenset:
        """Indices j of the cells [j/n, (j+1)/n) contained in the set."""
        cells = set()
        for lo, hi in self.intervals:
            first = math.ceil(lo * n)
            last = math.floor(hi * n)
            cells.update(range(int(first), int(last)))
        return frozenset(cells)

    def to_strings(self) -> List[str]:
        return [f"[{lo}, {hi})" for lo, hi in self.intervals]
