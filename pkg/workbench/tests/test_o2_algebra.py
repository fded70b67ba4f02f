# O2 algebra tests
# Group law against matrices, generators, cocycle products and growth

import math
from fractions import Fraction

import numpy as np
import pytest

from workbench.errors import DomainError, ResourceCapError
from workbench.services.base_systems import BinaryBiSequence
from workbench.services.o2_algebra import (
    O2Element,
    cex1,
    cex2,
    cocycle_product,
    compose,
    example1,
    example2,
    example3,
    exact_fibre_maps,
    generator_at,
    growth_check,
    inverse,
    product_matrix,
    table_generator,
    to_matrix,
)

from .conftest import random_element


# =============================================================================
# GROUP LAW
# =============================================================================

def test_compose_matches_matrix_products(rng):
    for _ in range(2000):
        first, second = random_element(rng), random_element(rng)
        expected = to_matrix(second) @ to_matrix(first)
        assert np.max(np.abs(to_matrix(compose(first, second)) - expected)) <= 1e-12


def test_exact_compose_stays_exact(rng):
    for _ in range(200):
        first, second = random_element(rng, exact=True), random_element(rng, exact=True)
        assert isinstance(compose(first, second).angle, Fraction)


def test_inverse(rng):
    for _ in range(200):
        e = random_element(rng)
        product = to_matrix(compose(e, inverse(e)))
        assert np.max(np.abs(product - np.eye(2))) <= 1e-12


def test_reflections_are_involutions():
    e = O2Element.reflection(Fraction(1, 7))
    assert compose(e, e) == O2Element.rotation(0)
    assert to_matrix(e) @ to_matrix(e) == pytest.approx(np.eye(2))


def test_fibre_shift():
    assert O2Element.rotation(Fraction(1, 4)).fibre_shift == Fraction(1, 2)
    assert O2Element.reflection(Fraction(1, 8)).fibre_shift == Fraction(1, 2)


# =============================================================================
# GENERATORS
# =============================================================================

def test_example1_generator():
    assert generator_at(example1(), Fraction(1, 2)) == O2Element.rotation(Fraction(1, 4))


def test_example2_generator(eta, alpha):
    g = example2(alpha, eta)
    assert generator_at(g, 0.99) == O2Element.reflection(0)
    assert generator_at(g, 0.1).angle == pytest.approx(alpha / 2)


def test_shift_generators_read_the_leading_symbol(alpha):
    for seed in range(20):
        x = BinaryBiSequence(seed=seed)
        e3 = generator_at(example3(alpha), x)
        e_cex = generator_at(cex2(), x)
        assert e3.is_rotation == (x.symbol(0) == 0)
        assert e_cex.is_rotation == (x.symbol(0) == 0)
        if e_cex.is_rotation:
            assert e_cex.angle == Fraction(1, 6)


def test_table_generator_must_partition():
    rot = O2Element.rotation(Fraction(1, 6))
    with pytest.raises(DomainError):
        table_generator([(0, Fraction(1, 3), rot), (Fraction(1, 2), 1, rot)])
    g = table_generator([(0, Fraction(1, 2), rot), (Fraction(1, 2), 1, O2Element.reflection(0))])
    assert generator_at(g, Fraction(3, 4)).is_rotation is False


def test_exact_fibre_maps():
    assert exact_fibre_maps(cex1()) == [O2Element.rotation(Fraction(1, 6))]
    assert len(exact_fibre_maps(cex2())) == 2
    with pytest.raises(DomainError):
        exact_fibre_maps(example1())


def test_generator_checks_its_base(shift):
    with pytest.raises(DomainError):
        example1().check_base(shift)


# =============================================================================
# COCYCLE PRODUCTS
# =============================================================================

def test_two_step_product(rotation, eta):
    product = cocycle_product(example1(), rotation, Fraction(0), 2)
    assert product.is_rotation
    assert float(product.angle) == pytest.approx(eta / 2, abs=1e-12)


def test_zero_length_product_is_identity(rotation):
    assert cocycle_product(example1(), rotation, 0.3, 0) == O2Element.rotation(0)


def _identity_gap(g, base, x, n, m) -> float:
    left = cocycle_product(g, base, x, n + m)
    right = compose(cocycle_product(g, base, x, n), cocycle_product(g, base, base.iterate(x, n), m))
    return float(np.max(np.abs(to_matrix(left) - to_matrix(right))))


def test_cocycle_identity_over_rotation(rotation, eta, alpha, rng):
    for g in (example1(), example2(alpha, eta), cex1(eta)):
        for _ in range(20):
            x = rng.random()
            n, m = rng.randint(-300, 300), rng.randint(-300, 300)
            assert _identity_gap(g, rotation, x, n, m) <= 1e-9


def test_cocycle_identity_over_shift(shift, alpha, rng):
    for g in (example3(alpha), cex2()):
        for _ in range(10):
            x = BinaryBiSequence(seed=rng.randrange(1 << 32))
            n, m = rng.randint(-200, 200), rng.randint(-200, 200)
            assert _identity_gap(g, shift, x, n, m) <= 1e-9


def test_block_product_matches_scalar_fold(rotation, eta, alpha):
    g = example2(alpha, eta)
    blocked = cocycle_product(g, rotation, 0.3, 5000, exact=False)
    scalar = O2Element.rotation(0)
    x = 0.3
    for _ in range(5000):
        scalar = compose(scalar, generator_at(g, x))
        x = rotation.step(x)
    assert np.max(np.abs(to_matrix(blocked) - to_matrix(scalar))) <= 1e-9


def test_short_shift_products_stay_exact(shift):
    product = cocycle_product(cex2(), shift, BinaryBiSequence(seed=3), 100)
    assert isinstance(product.angle, Fraction)


def test_long_shift_products_fold_in_blocks(shift):
    x = BinaryBiSequence(seed=3)
    blocked = cocycle_product(cex2(), shift, x, 20_000)
    assert not isinstance(blocked.angle, Fraction)
    exact = cocycle_product(cex2(), shift, x, 20_000, exact=True)
    assert isinstance(exact.angle, Fraction)
    assert np.max(np.abs(to_matrix(blocked) - to_matrix(exact))) <= 1e-9


def test_product_matrix_matches_angle_form(rotation, shift, eta, alpha):
    cases = ((example2(alpha, eta), rotation, 0.3), (cex2(), shift, BinaryBiSequence(seed=4)))
    for g, base, x in cases:
        for n in (0, 1, 7, 5000):
            gap = product_matrix(g, base, x, n) - to_matrix(cocycle_product(g, base, x, n))
            assert np.max(np.abs(gap)) <= 1e-9
    with pytest.raises(DomainError):
        product_matrix(example1(), rotation, 0.3, -1)


def test_product_cap(rotation):
    with pytest.raises(ResourceCapError):
        cocycle_product(example1(), rotation, 0.3, 11, cap=10)


# =============================================================================
# GROWTH
# =============================================================================

def test_growth_is_zero_for_orthogonal_cocycles(rotation, shift, alpha):
    assert abs(growth_check(example1(), rotation, 0.3, [1.0, 2.0], 100_000)) <= 1e-7
    x = BinaryBiSequence(seed=3)
    assert abs(growth_check(example3(alpha), shift, x, [0.5, -1.0], 100_000)) <= 1e-7


def test_matrix_growth_is_the_default(rotation, shift):
    x = BinaryBiSequence(seed=8)
    default = growth_check(cex2(), shift, x, [1.0, 0.0], 100_000)
    assert default == growth_check(cex2(), shift, x, [1.0, 0.0], 100_000, method="matrix")
    assert abs(default) <= 1e-9
    assert abs(growth_check(example1(), rotation, 0.3, [1.0, 0.0], 20_000, method="angle")) <= 1e-9
    with pytest.raises(DomainError):
        growth_check(example1(), rotation, 0.3, [1.0, 0.0], 10, method="svd")


def test_growth_rejects_zero_vector(rotation):
    with pytest.raises(DomainError):
        growth_check(example1(), rotation, 0.3, [0.0, 0.0], 10)


def test_growth_cap(rotation):
    with pytest.raises(ResourceCapError):
        growth_check(example1(), rotation, 0.3, [1.0, 0.0], 100, method="matrix", cap=50)


def test_matrix_of_rotation_quarter():
    m = to_matrix(O2Element.rotation(Fraction(1, 4)))
    assert m == pytest.approx(np.array([[0.0, -1.0], [1.0, 0.0]]), abs=1e-15)
    assert math.isclose(np.linalg.det(to_matrix(O2Element.reflection(0.2))), -1.0)
