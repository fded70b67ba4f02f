# =============================================================================
# ULAM DISCRETIZATION
# Cell-to-cell transition matrices of torus-fibred skew systems and
# grid-scale invariant-set detection
# =============================================================================
#
# Cells are indexed ix * ny + iy. Every cell is sampled with the same local
# stratified pattern, so pure translations move whole sample sets at once.
#
# Invariant sets are read off the closed communicating classes of the
# transition graph: unions of closed classes are exactly the supports of
# invariant indicator vectors. A probe function (fibre modes first, then
# base modes) averaged over each class picks one such union.
#
# Detection only. An empty support says nothing about ergodicity.
# =============================================================================

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ..errors import DomainError
from ..schemas.diagnostics import UlamSupportReport

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-12
# Class averages closer than this count as constant
PROBE_TOLERANCE = 1e-9
MAX_PROBE_FREQUENCY = 6


@dataclass(frozen=True)
class InvariantSupport:
    """Cells of a grid-scale invariant set (empty when none was found)."""
    cells: Tuple[int, ...]
    closed_classes: int
    residual: Optional[float] = None
    probe: Optional[str] = None
    degenerate: bool = False
    message: str = ""
    heat: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @property
    def is_empty(self) -> bool:
        return len(self.cells) == 0


def sample_pattern(samples_per_cell: int) -> Tuple[np.ndarray, np.ndarray]:
    """Local offsets in [0, 1)^2: an m x m lattice, m = ceil(sqrt(samples))."""
    m = max(1, math.ceil(math.sqrt(samples_per_cell)))
    u = (np.arange(m) + 0.5) / m
    v = (np.arange(m) + 0.25) / m
    uu, vv = np.meshgrid(u, v, indexing="ij")
    return uu.ravel(), vv.ravel()


def ulam_discretize(sys, grid: Tuple[int, int], samples_per_cell: int) -> sparse.csr_matrix:
    """
    Row-stochastic matrix P with P[c, c'] = fraction of the samples of
    cell c landing in c' after one step.

    sys needs step_arrays(x, y) (rotation base, torus fibre).

    Raises:
        DomainError for grids below 2 x 2 or samples_per_cell < 1
    """
    nx, ny = int(grid[0]), int(grid[1])
    if nx < 2 or ny < 2:
        raise DomainError(f"Ulam grid must be at least 2 x 2, got {nx} x {ny}")
    if samples_per_cell < 1:
        raise DomainError("samples_per_cell must be >= 1")

    du, dv = sample_pattern(samples_per_cell)
    per_cell = len(du)
    cells = nx * ny
    ix = np.repeat(np.arange(nx), ny)
    iy = np.tile(np.arange(ny), nx)
    x = ((ix[:, None] + du[None, :]) / nx).ravel()
    y = ((iy[:, None] + dv[None, :]) / ny).ravel()
    source = np.repeat(np.arange(cells), per_cell)

    x1, y1 = sys.step_arrays(x, y)
    jx = np.minimum((np.asarray(x1) * nx).astype(np.int64), nx - 1)
    jy = np.minimum((np.asarray(y1) * ny).astype(np.int64), ny - 1)
    target = jx * ny + jy

    logger.info("Ulam matrix on %d x %d cells with %d samples per cell", nx, ny, per_cell)
    weights = np.full(len(source), 1.0 / per_cell)
    return sparse.coo_matrix((weights, (source, target)), shape=(cells, cells)).tocsr()


def row_sum_error(matrix) -> float:
    return float(np.max(np.abs(np.asarray(matrix.sum(axis=1)).ravel() - 1.0)))


def column_sums(matrix) -> np.ndarray:
    return np.asarray(matrix.sum(axis=0)).ravel()


# =============================================================================
# INVARIANT SETS
# =============================================================================

def closed_classes(matrix) -> Tuple[np.ndarray, List[int]]:
    """
    Strongly connected components with no edge leaving them.

    Returns:
        (labels per cell, sorted labels of the closed classes)
    """
    _, labels = csgraph.connected_components(matrix, directed=True, connection="strong")
    coo = matrix.tocoo()
    leaving = coo.data > 0
    leaving &= labels[coo.row] != labels[coo.col]
    open_labels = set(labels[coo.row[leaving]].tolist())
    closed = sorted(set(labels.tolist()) - open_labels)
    return labels, closed


def default_probes(grid: Tuple[int, int]) -> List[Tuple[str, np.ndarray]]:
    """
    Probe functions at cell centres: fibre sin / cos by increasing
    frequency, then base sin / cos.
    """
    nx, ny = grid
    xc = np.repeat((np.arange(nx) + 0.5) / nx, ny)
    yc = np.tile((np.arange(ny) + 0.5) / ny, nx)
    probes = []
    for k in range(1, MAX_PROBE_FREQUENCY + 1):
        probes.append((f"sin(2pi*{k}*y)", np.sin(2 * math.pi * k * yc)))
        probes.append((f"cos(2pi*{k}*y)", np.cos(2 * math.pi * k * yc)))
    for j in range(1, MAX_PROBE_FREQUENCY + 1):
        probes.append((f"sin(2pi*{j}*x)", np.sin(2 * math.pi * j * xc)))
        probes.append((f"cos(2pi*{j}*x)", np.cos(2 * math.pi * j * xc)))
    return probes


def _infer_grid(cells: int) -> Tuple[int, int]:
    side = math.isqrt(cells)
    if side * side != cells:
        raise DomainError("pass the grid explicitly for non-square cell counts")
    return side, side


def indicator_residual(matrix, cells) -> float:
    """||P 1_S - 1_S||_inf."""
    indicator = np.zeros(matrix.shape[0])
    indicator[list(cells)] = 1.0
    return float(np.max(np.abs(matrix @ indicator - indicator)))


def invariant_vector_support(
    matrix,
    tol: float,
    grid: Optional[Tuple[int, int]] = None,
    probes: Optional[List[Tuple[str, np.ndarray]]] = None,
) -> InvariantSupport:
    """
    Support of an invariant indicator vector other than the constant one.

    Raises:
        DomainError if the matrix is not row-stochastic
    """
    matrix = sparse.csr_matrix(matrix)
    if row_sum_error(matrix) > ROW_SUM_TOLERANCE:
        raise DomainError("invariant_vector_support needs a row-stochastic matrix")
    cells = matrix.shape[0]
    labels, closed = closed_classes(matrix)

    if len(closed) <= 1:
        logger.warning("No grid-scale invariant set: %d closed class", len(closed))
        return InvariantSupport(cells=(), closed_classes=len(closed), message="no grid-scale invariant set found")

    sizes = np.bincount(labels)
    if all(sizes[c] == 1 for c in closed):
        first = int(np.flatnonzero(labels == closed[0])[0])
        logger.warning("Every closed class is a single cell (identity-like matrix)")
        return InvariantSupport(
            cells=(first,),
            closed_classes=len(closed),
            residual=indicator_residual(matrix, [first]),
            degenerate=True,
            message="degenerate: every cell is invariant, any single cell qualifies",
        )

    grid = grid or _infer_grid(cells)
    probes = probes if probes is not None else default_probes(grid)
    in_closed = np.isin(labels, closed)
    for name, values in probes:
        class_mean = np.bincount(labels, weights=values) / sizes
        h = np.where(in_closed, class_mean[labels], np.nan)
        spread = np.nanmax(h) - np.nanmin(h)
        if spread <= PROBE_TOLERANCE:
            continue
        level = np.nanmean(h)
        support = tuple(int(c) for c in np.flatnonzero(in_closed & (h > level + PROBE_TOLERANCE)))
        residual = indicator_residual(matrix, support)
        if residual > tol:
            logger.warning("Probe %s gave a set with residual %.3e > %.1e", name, residual, tol)
            continue
        logger.info("Invariant set of %d cells from probe %s", len(support), name)
        return InvariantSupport(
            cells=support,
            closed_classes=len(closed),
            residual=residual,
            probe=name,
            heat=np.nan_to_num(h),
            message=f"grid-scale invariant set of {len(support)} cells",
        )

    logger.warning("%d closed classes, but no probe separated them", len(closed))
    return InvariantSupport(
        cells=(),
        closed_classes=len(closed),
        message="no grid-scale invariant set found (closed classes not separated by any probe)",
    )


def cells_of_fibre_rows(grid: Tuple[int, int], rows: Iterable[int]) -> Tuple[int, ...]:
    """Cells T x B for the fibre rows iy covered by B."""
    nx, ny = grid
    rows = sorted(rows)
    return tuple(sorted(int(ix * ny + iy) for ix in range(nx) for iy in rows))


def support_report(matrix, support: InvariantSupport, grid: Tuple[int, int], samples_per_cell: int) -> UlamSupportReport:
    sums = column_sums(matrix)
    return UlamSupportReport(
        grid=[int(grid[0]), int(grid[1])],
        samples_per_cell=len(sample_pattern(samples_per_cell)[0]),
        max_row_sum_error=row_sum_error(matrix),
        column_sum_range=[float(sums.min()), float(sums.max())],
        closed_classes=support.closed_classes,
        support=list(support.cells),
        support_fraction=len(support.cells) / matrix.shape[0],
        residual=support.residual,
        probe=support.probe,
        degenerate=support.degenerate,
        message=support.message,
    )
