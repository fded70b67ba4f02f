# Ulam discretization tests
# Transition matrices of torus skew systems and grid-scale invariant sets

import numpy as np
import pytest
from scipy import sparse

from workbench.errors import DomainError
from workbench.services.counterexamples import B_HALF
from workbench.services.o2_algebra import cex1, example1
from workbench.services.skew_systems import FibreKind, SkewSystem
from workbench.services.ulam import (
    cells_of_fibre_rows,
    closed_classes,
    invariant_vector_support,
    row_sum_error,
    sample_pattern,
    support_report,
    ulam_discretize,
)

GRID = (12, 12)
SAMPLES = 16


def test_sample_pattern_is_a_square_lattice():
    u, v = sample_pattern(10)
    assert len(u) == len(v) == 16
    assert np.all((u > 0) & (u < 1) & (v > 0) & (v < 1))


def test_matrix_is_row_stochastic(rotation):
    matrix = ulam_discretize(SkewSystem(rotation, example1(), FibreKind.TORUS), GRID, SAMPLES)
    assert matrix.shape == (144, 144)
    assert row_sum_error(matrix) <= 1e-12


def test_grid_and_samples_are_checked(rotation):
    sys = SkewSystem(rotation, example1(), FibreKind.TORUS)
    with pytest.raises(DomainError):
        ulam_discretize(sys, (1, 12), SAMPLES)
    with pytest.raises(DomainError):
        ulam_discretize(sys, GRID, 0)


def test_torus_fibre_is_required(rotation):
    with pytest.raises(DomainError):
        ulam_discretize(SkewSystem(rotation, example1(), FibreKind.Z2), GRID, SAMPLES)


def test_rotation_counterexample_support(rotation, eta):
    matrix = ulam_discretize(SkewSystem(rotation, cex1(eta), FibreKind.TORUS), GRID, SAMPLES)
    support = invariant_vector_support(matrix, 1e-12, GRID)
    rows = B_HALF.grid_cells(12)
    assert rows == {0, 1, 4, 5, 8, 9}
    assert tuple(support.cells) == cells_of_fibre_rows(GRID, rows)
    assert support.probe == "sin(2pi*3*y)"
    assert support.residual == 0.0
    assert not support.degenerate

    report = support_report(matrix, support, GRID, SAMPLES)
    assert report.support_fraction == pytest.approx(0.5)
    assert report.closed_classes == 12


def test_mixing_skew_has_no_grid_invariant_set(rotation):
    matrix = ulam_discretize(SkewSystem(rotation, example1(), FibreKind.TORUS), GRID, SAMPLES)
    support = invariant_vector_support(matrix, 1e-12, GRID)
    assert support.is_empty
    assert support.closed_classes == 1
    assert support.message == "no grid-scale invariant set found"


def test_identity_matrix_is_degenerate():
    support = invariant_vector_support(sparse.identity(9, format="csr"), 1e-12)
    assert support.degenerate
    assert len(support.cells) == 1
    assert support.residual == 0.0


def test_probe_separates_two_closed_classes():
    # cells 0 <-> 1 and 2 <-> 3 on a 2 x 2 grid: the classes differ in x only
    swap = sparse.csr_matrix(np.array([
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]))
    labels, closed = closed_classes(swap)
    assert len(closed) == 2
    support = invariant_vector_support(swap, 1e-12, (2, 2))
    assert support.cells == (0, 1)
    assert support.probe == "sin(2pi*1*x)"


def test_non_stochastic_matrix_is_rejected():
    with pytest.raises(DomainError):
        invariant_vector_support(sparse.csr_matrix(np.array([[0.5, 0.0], [0.0, 1.0]])), 1e-12)


def test_fibre_rows_to_cells():
    assert cells_of_fibre_rows((2, 3), [2, 0]) == (0, 2, 3, 5)
