# =============================================================================
# COUNTEREXAMPLE SUITE
# The two cocycles whose S is not ergodic although the bundle criteria
# are only sufficient: exact invariant sets, scans and the Ulam cross-check
# =============================================================================

import logging
from fractions import Fraction
from typing import List, Optional

import numpy as np

from ..schemas.diagnostics import ErgodicityReport, Thresholds, Verdict
from ..schemas.reducibility import ClaimRow, ClaimStatus, CounterexampleReport
from ..utils.constants import DEFAULT_N, DEFAULT_STARTS
from ..utils.intervals import RationalIntervalSet
from ..utils.torus import SYMBOLIC_CONSTANTS, Angle
from .base_systems import BaseSystem
from .diagnostics import ergodicity_scan, fibre_cosine, torus_character, z2_character
from .o2_algebra import cex1, cex2, exact_fibre_maps
from .reducibility import constant_real_residuals, verify_invariant_set
from .skew_systems import FibreKind, SkewSystem
from .ulam import cells_of_fibre_rows, invariant_vector_support, support_report, ulam_discretize

logger = logging.getLogger(__name__)

# (0, 1/6) u (1/3, 1/2) u (2/3, 5/6)
B_HALF = RationalIntervalSet.from_pairs([
    (0, Fraction(1, 6)), (Fraction(1, 3), Fraction(1, 2)), (Fraction(2, 3), Fraction(5, 6)),
])
# (1/9, 2/9) u (4/9, 5/9) u (7/9, 8/9)
B_THIRD = RationalIntervalSet.from_pairs([
    (Fraction(1, 9), Fraction(2, 9)), (Fraction(4, 9), Fraction(5, 9)), (Fraction(7, 9), Fraction(8, 9)),
])

DEFAULT_ETA = SYMBOLIC_CONSTANTS["sqrt2-1"]
ULAM_GRID = 60
ULAM_SAMPLES = 64
ULAM_TOLERANCE = 1e-12


def _claim(subject: str, claim: str, ok: bool, detail: str = "") -> ClaimRow:
    return ClaimRow(
        subject=subject,
        claim=claim,
        status=ClaimStatus.CONFIRMED if ok else ClaimStatus.NOT_CONFIRMED,
        detail=detail,
    )


def _scan_detail(report: ErgodicityReport) -> str:
    detail = f"verdict={report.verdict.value}"
    if report.witness:
        detail += f", witness={report.witness}"
    return detail


def run_counterexample_suite(
    eta: Angle = DEFAULT_ETA,
    n: int = DEFAULT_N,
    starts: int = DEFAULT_STARTS,
    seed: int = 0,
    thresholds: Optional[Thresholds] = None,
    threads: int = 1,
    ulam_grid: int = ULAM_GRID,
    ulam_samples: int = ULAM_SAMPLES,
) -> CounterexampleReport:
    """
    cex1: S has the invariant set T x B_HALF (measure 1/2), R conserves a,
          yet the Z3 factor is ergodic-consistent
    cex2: S has the invariant set T x B_THIRD (measure 1/3), R and the Z3
          factor are ergodic-consistent
    """
    claims: List[ClaimRow] = []
    scans = {}

    def scan(name: str, sys: SkewSystem) -> ErgodicityReport:
        report = ergodicity_scan(sys, starts=starts, n=n, seed=seed, thresholds=thresholds, threads=threads)
        scans[name] = report
        return report

    # -------------------------------------------------------------------------
    # cex1: constant rotation by 1/6 over a rotation base
    # -------------------------------------------------------------------------
    logger.info("Counterexample 1 over rotation eta=%r", float(eta))
    base = BaseSystem.rotation(eta)
    g1 = cex1(eta)
    maps1 = exact_fibre_maps(g1)

    set1 = verify_invariant_set(maps1, B_HALF)
    claims.append(_claim(
        "cex1", "T x B_HALF is S-invariant with measure 1/2",
        set1.invariant and B_HALF.measure == Fraction(1, 2),
        f"measure={set1.measure}",
    ))

    s1 = scan("cex1/S", SkewSystem(base, g1, FibreKind.TORUS))
    claims.append(_claim(
        "cex1", "S non-ergodic-detected via the fibre character k=3",
        s1.verdict == Verdict.NON_ERGODIC_DETECTED and s1.witness == torus_character(0, 3).name,
        _scan_detail(s1),
    ))

    r1 = scan("cex1/R", SkewSystem(base, g1, FibreKind.Z2))
    claims.append(_claim(
        "cex1", "R conserves a: non-ergodic-detected via (-1)^a",
        r1.verdict == Verdict.NON_ERGODIC_DETECTED and r1.witness == z2_character(0, -1).name,
        _scan_detail(r1),
    ))

    z1 = scan("cex1/Z3", SkewSystem(base, g1, FibreKind.Z3))
    claims.append(_claim(
        "cex1", "Z3 factor (x + eta, a + 1) ergodic-consistent",
        z1.verdict == Verdict.ERGODIC_CONSISTENT,
        _scan_detail(z1),
    ))

    candidates = np.arange(720) / 720.0
    residuals = constant_real_residuals(maps1, candidates)
    claims.append(_claim(
        "cex1", "no constant real line field is equivariant",
        min(residuals) > 1e-9,
        f"min residual over {len(candidates)} constant lines={min(residuals):.6f}",
    ))

    grid = (ulam_grid, ulam_grid)
    matrix = ulam_discretize(SkewSystem(base, g1, FibreKind.TORUS), grid, ulam_samples)
    support = invariant_vector_support(matrix, ULAM_TOLERANCE, grid)
    expected = cells_of_fibre_rows(grid, B_HALF.grid_cells(ulam_grid))
    ulam = support_report(matrix, support, grid, ulam_samples)
    claims.append(_claim(
        "cex1", "Ulam invariant support equals the grid cells of T x B_HALF",
        tuple(support.cells) == expected,
        f"support={len(support.cells)} cells, expected={len(expected)}, probe={support.probe}",
    ))

    # -------------------------------------------------------------------------
    # cex2: rotation by 1/6 or reflection, chosen by x_0 on the shift
    # -------------------------------------------------------------------------
    logger.info("Counterexample 2 over the Bernoulli shift")
    shift = BaseSystem.bernoulli()
    g2 = cex2()
    maps2 = exact_fibre_maps(g2)

    set2 = verify_invariant_set(maps2, B_THIRD)
    claims.append(_claim(
        "cex2", "T x B_THIRD is S-invariant with measure 1/3",
        set2.invariant and B_THIRD.measure == Fraction(1, 3),
        f"measure={set2.measure}",
    ))
    set_half = verify_invariant_set(maps2, B_HALF)
    claims.append(_claim(
        "cex2", "B_HALF is not invariant once the reflection is present",
        not set_half.invariant,
        f"failing maps={set_half.failing_maps}",
    ))

    r2 = scan("cex2/R", SkewSystem(shift, g2, FibreKind.Z2))
    claims.append(_claim("cex2", "R ergodic-consistent", r2.verdict == Verdict.ERGODIC_CONSISTENT, _scan_detail(r2)))

    s2 = scan("cex2/S", SkewSystem(shift, g2, FibreKind.TORUS))
    claims.append(_claim(
        "cex2", "S non-ergodic-detected via the fibre cosine k=3",
        s2.verdict == Verdict.NON_ERGODIC_DETECTED and s2.witness == fibre_cosine(3).name,
        _scan_detail(s2),
    ))

    z2 = scan("cex2/Z3", SkewSystem(shift, g2, FibreKind.Z3))
    claims.append(_claim("cex2", "Z3 factor ergodic-consistent", z2.verdict == Verdict.ERGODIC_CONSISTENT, _scan_detail(z2)))

    report = CounterexampleReport(
        claims=claims,
        invariant_sets=[set1, set2, set_half],
        scans=scans,
        ulam=ulam,
    )
    confirmed = sum(row.status == ClaimStatus.CONFIRMED for row in claims)
    logger.info("Counterexample suite: %d/%d claims confirmed", confirmed, len(claims))
    return report
