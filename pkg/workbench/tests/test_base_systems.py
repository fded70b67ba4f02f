# Base system tests
# Rotations and the two-sided Bernoulli shift: stepping, inverses, blocks

import dataclasses
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from workbench.errors import DomainError
from workbench.services.base_systems import BaseSystem, BinaryBiSequence
from workbench.utils.hashing import bernoulli_symbol, bernoulli_symbols
from workbench.utils.intervals import RationalIntervalSet
from workbench.utils.torus import circular_distance, parse_angle


# =============================================================================
# ROTATIONS
# =============================================================================

def test_exact_rotation_stays_rational():
    base = BaseSystem.rotation(Fraction(1, 3))
    x = base.step(Fraction(5, 6))
    assert x == Fraction(1, 6)
    assert base.step_inverse(x) == Fraction(5, 6)


def test_rotation_iterate_matches_closed_form(rotation, eta):
    x = rotation.iterate(0.25, 1000)
    assert circular_distance(x, 0.25 + 1000 * eta) < 1e-9
    assert circular_distance(rotation.iterate(x, -1000), 0.25) < 1e-9


def test_float_round_trip_stays_close(rotation, eta):
    for n in (1, 10, 100, 1000):
        x = 0.123456789
        for _ in range(n):
            x = rotation.step(x)
        for _ in range(n):
            x = rotation.step_inverse(x)
        assert circular_distance(x, 0.123456789) <= 1e-12


def test_rotation_orbits_equidistribute(rotation):
    block, _ = rotation.orbit_block([0.3], 100_000)
    orbit = block.coord[:, 0]
    for j in (1, 2, 5, 13):
        weyl_sum = np.mean(np.exp(2j * np.pi * j * orbit))
        assert abs(weyl_sum) <= 1e-3
    counts, _ = np.histogram(orbit, bins=20, range=(0.0, 1.0))
    assert np.max(np.abs(counts / len(orbit) - 0.05)) <= 1e-3


def test_rotation_samples_are_uniform(rotation):
    points = rotation.sample_points(17, 20_000)
    assert all(0.0 <= p < 1.0 for p in points)
    assert stats.kstest(points, "uniform").pvalue > 1e-3


def test_rotation_rejects_symbol_sequences(rotation):
    with pytest.raises(DomainError):
        rotation.check_point(BinaryBiSequence(seed=1))


def test_bernoulli_takes_no_eta():
    with pytest.raises(DomainError):
        BaseSystem(BaseSystem.bernoulli().kind, 0.5)


def test_rotation_block_matches_scalar_steps(rotation):
    block, next_states = rotation.orbit_block([0.1, 0.7], 50)
    x = 0.1
    for i in range(50):
        assert circular_distance(block.coord[i, 0], x) < 1e-12
        x = rotation.step(x)
    assert circular_distance(next_states[0], x) < 1e-12


# =============================================================================
# BERNOULLI SHIFT
# =============================================================================

def test_shift_moves_symbols_left(shift):
    x = BinaryBiSequence(seed=42)
    y = shift.step(x)
    assert [y.symbol(i) for i in range(-5, 5)] == [x.symbol(i + 1) for i in range(-5, 5)]
    assert shift.step_inverse(y).offset == x.offset


def test_symbols_are_pure_functions_of_seed_and_index():
    indices = np.arange(-20, 20, dtype=np.int64)
    vectorized = bernoulli_symbols(7, indices)
    assert [int(s) for s in vectorized] == [bernoulli_symbol(7, int(i)) for i in indices]


def test_symbols_are_roughly_fair():
    symbols = bernoulli_symbols(3, np.arange(100_000, dtype=np.int64))
    assert abs(float(symbols.mean()) - 0.5) < 0.01


def test_shift_block_matches_scalar_symbols(shift):
    x = BinaryBiSequence(seed=9)
    block, next_states = shift.orbit_block([x], 40)
    point = x
    for i in range(40):
        assert block.symbol[i, 0] == point.symbol(0)
        assert block.coord[i, 0] == pytest.approx(point.binary_coordinate(), abs=1e-15)
        point = shift.step(point)
    assert next_states[0].offset == point.offset


def test_shifted_points_are_plain_values(shift):
    x = BinaryBiSequence(seed=42)
    far = shift.iterate(x, 10_000)
    assert [f.name for f in dataclasses.fields(far)] == ["seed", "offset"]
    assert far == BinaryBiSequence(seed=42, offset=10_000)
    assert hash(far) == hash(BinaryBiSequence(seed=42, offset=10_000))
    assert far.symbol(-10_000) == x.symbol(0)


def test_shift_backward_block(shift):
    x = BinaryBiSequence(seed=5)
    block, _ = shift.orbit_block([x], 10, backward=True)
    for i in range(10):
        assert block.symbol[i, 0] == x.symbol(-(i + 1))


def test_sample_points_depend_on_seed_only(shift):
    first = shift.sample_points(11, 4)
    again = shift.sample_points(11, 4)
    assert [p.seed for p in first] == [p.seed for p in again]
    assert len({p.seed for p in first}) == 4


# =============================================================================
# ANGLE LITERALS AND INTERVAL SETS
# =============================================================================

@pytest.mark.parametrize("text,expected", [
    ("1/3", Fraction(1, 3)),
    ("0.7", 0.7),
    ("sqrt2-1", 2 ** 0.5 - 1),
])
def test_parse_angle(text, expected):
    assert parse_angle(text) == pytest.approx(expected)


def test_parse_angle_rejects_expressions():
    with pytest.raises(ValueError):
        parse_angle("1/3 + 1/6")


def test_interval_set_normal_form():
    s = RationalIntervalSet.from_pairs([(Fraction(1, 2), Fraction(2, 3)), (0, Fraction(1, 4)), (Fraction(1, 4), Fraction(1, 3))])
    assert s.intervals == ((0, Fraction(1, 3)), (Fraction(1, 2), Fraction(2, 3)))
    assert s.measure == Fraction(1, 2)


def test_interval_set_wraps_on_translation():
    s = RationalIntervalSet.from_pairs([(Fraction(5, 6), 1)])
    moved = s.translate(Fraction(1, 3))
    assert moved.intervals == ((Fraction(1, 6), Fraction(1, 3)),)
    assert s.complement().measure == Fraction(5, 6)


def test_interval_set_rejects_floats():
    with pytest.raises(DomainError):
        RationalIntervalSet.from_pairs([(0.1, 0.2)])
