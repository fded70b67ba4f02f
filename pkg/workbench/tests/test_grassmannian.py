# Grassmannian chart tests
# Complex chart against matrix action, perps, k and the real line chart

import cmath
import math

import numpy as np
import pytest

from workbench.errors import DomainError
from workbench.services.grassmannian import (
    INFINITY,
    V1,
    V2,
    ZERO,
    CirclePair,
    GrassCoordC,
    GrassCoordR,
    chordal_distance,
    coordC_of_span,
    coordR_of_span,
    direction,
    k_of,
    matrix_action_coordC,
    matrix_action_coordR,
    n_fibre_map,
    perp_coord,
    span_of_coordC,
)
from workbench.services.o2_algebra import O2Element, to_matrix

from .conftest import random_element


def _random_coord(rng) -> GrassCoordC:
    modulus = math.exp(rng.uniform(-3.0, 3.0))
    return GrassCoordC.finite(modulus * cmath.exp(2j * math.pi * rng.random()))


# =============================================================================
# COMPLEX CHART
# =============================================================================

def test_basis_lines_are_the_poles():
    assert coordC_of_span(V1) == ZERO
    assert coordC_of_span(V2) == INFINITY
    assert coordC_of_span(3.0 * V1 + 2.0 * V2).z == pytest.approx(2.0 / 3.0)


def test_span_round_trip(rng):
    for _ in range(100):
        z = _random_coord(rng)
        assert chordal_distance(coordC_of_span(span_of_coordC(z)), z) <= 1e-12


def test_zero_vector_has_no_line():
    with pytest.raises(DomainError):
        coordC_of_span([0.0, 0.0])


def test_matrix_action_matches_closed_form(rng):
    for _ in range(500):
        e = random_element(rng)
        z = _random_coord(rng)
        by_matrix = matrix_action_coordC(to_matrix(e), z)
        assert chordal_distance(by_matrix, n_fibre_map(e, z)) <= 1e-12


def test_poles_are_fixed_or_swapped():
    rot = O2Element.rotation(0.3)
    ref = O2Element.reflection(0.1)
    assert n_fibre_map(rot, ZERO) == ZERO
    assert n_fibre_map(rot, INFINITY) == INFINITY
    assert n_fibre_map(ref, ZERO) == INFINITY
    assert n_fibre_map(ref, INFINITY) == ZERO
    assert matrix_action_coordC(to_matrix(ref), INFINITY) == ZERO


def test_singular_matrix_is_rejected():
    with pytest.raises(DomainError):
        matrix_action_coordC(np.array([[1.0, 2.0], [2.0, 4.0]]), ZERO)


def test_k_is_invariant_under_o2(rng):
    for _ in range(200):
        e = random_element(rng)
        z = _random_coord(rng)
        assert k_of(n_fibre_map(e, z)) == pytest.approx(k_of(z), abs=1e-12)
    assert k_of(ZERO) == 0.0
    assert k_of(INFINITY) == 0.0


def test_perp_is_an_orthogonal_involution(rng):
    assert perp_coord(ZERO) == INFINITY
    assert perp_coord(INFINITY) == ZERO
    for _ in range(100):
        z = _random_coord(rng)
        w = perp_coord(z)
        assert chordal_distance(perp_coord(w), z) <= 1e-12
        assert abs(np.vdot(span_of_coordC(z), span_of_coordC(w))) <= 1e-9 * (1.0 + abs(z.z)) ** 2


def test_chordal_distance():
    assert chordal_distance(ZERO, INFINITY) == pytest.approx(2.0)
    assert chordal_distance(INFINITY, INFINITY) == 0.0
    one, i = GrassCoordC.finite(1), GrassCoordC.finite(1j)
    assert chordal_distance(one, i) == pytest.approx(chordal_distance(i, one))
    assert chordal_distance(one, i) == pytest.approx(math.sqrt(2.0))


def test_circle_pair_parameter_range():
    CirclePair(0.0)
    CirclePair(1.0)
    with pytest.raises(DomainError):
        CirclePair(1.5)


# =============================================================================
# REAL CHART
# =============================================================================

def test_real_action_is_parallel_to_matrix_action(rng):
    for _ in range(200):
        e = random_element(rng)
        y = GrassCoordR(rng.random())
        image = to_matrix(e) @ direction(y)
        chart = direction(matrix_action_coordR(e, y))
        assert abs(image[0] * chart[1] - image[1] * chart[0]) <= 1e-12


def test_real_chart_of_vertical_line():
    assert coordR_of_span([0.0, 2.0]).y == pytest.approx(0.5)
    # a line and its negative are the same point
    assert coordR_of_span([1.0, 1.0]).y == pytest.approx(coordR_of_span([-1.0, -1.0]).y)
