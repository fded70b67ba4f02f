# =============================================================================
# EXPERIMENT RUNNER
# One function per subcommand; each builds engines from a validated config,
# runs them and hands the results to the ReportWriter
# =============================================================================
#
# Reports are deterministic for a fixed config and seed. Wall time goes to
# a sidecar so it never perturbs the report bytes.
#
# =============================================================================

import logging
import math
import time
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..config import Settings
from ..dependencies import build_base, build_generator, build_induced, build_skew
from ..errors import DomainError, PreconditionError
from ..schemas.diagnostics import ErgodicityReport, TrajectoryPoint, Verdict
from ..schemas.experiment import ExperimentConfig, ExperimentKind, InduceFormula
from ..schemas.inducing import ChartOrientation, InducingReport
from ..schemas.reducibility import (
    BundleVerdict,
    ClaimRow,
    ClaimStatus,
    ReducibilitySearchReport,
    ScalarVerdict,
)
from ..schemas.report import (
    DiagnosePayload,
    ExampleSummary,
    InducePayload,
    LyapunovPayload,
    LyapunovSample,
    OrbitPayload,
    ReproductionPayload,
    RunReport,
)
from ..utils.hashing import derive_seed
from ..utils.torus import Angle, frac, parse_angle
from .base_systems import BaseSystem
from .counterexamples import run_counterexample_suite
from .diagnostics import ergodicity_scan
from .grassmannian import GrassCoordC
from .inducing import (
    InducedSystem,
    expected_return_support,
    return_statistics,
    verify_q_formula,
    verify_rb_formula,
    verify_sb_formula,
)
from .o2_algebra import CocycleGenerator, example1, example2, example3, growth_check
from .reducibility import (
    apply_criteria,
    diagonalize_rotation_cocycle,
    extract_rotation_sections,
    k_dispersion,
    perp_section,
    verify_section,
    with_residual,
)
from .report_writer import ReportWriter
from .skew_systems import FibreKind, SkewSystem
from .ulam import invariant_vector_support, support_report, ulam_discretize

logger = logging.getLogger(__name__)

LAMBDA_TOLERANCE = 1e-6
SB_TOLERANCE = 1e-9
Q_TOLERANCE = 1e-8
ROTATION_NUMBER_TOLERANCE = 1e-9
KAC_TOLERANCE = 0.01
PERP_TOLERANCE = 1e-9


def _envelope(config: ExperimentConfig, payload) -> RunReport:
    return RunReport[type(payload)](
        experiment=config.experiment,
        seed=config.seed,
        config=config.echo(),
        payload=payload,
    )


def _scan(config: ExperimentConfig, sys: SkewSystem, trajectory_sink=None) -> ErgodicityReport:
    return ergodicity_scan(
        sys,
        starts=config.numerics.starts,
        n=config.numerics.n,
        seed=config.seed,
        thresholds=config.thresholds,
        threads=config.threads,
        trajectory_sink=trajectory_sink,
    )


# =============================================================================
# SUBCOMMANDS
# =============================================================================

def run_orbit(config: ExperimentConfig, settings: Settings, writer: ReportWriter) -> RunReport:
    sys = build_skew(config, iota_annulus=settings.iota_annulus)
    start = sys.sample_start(config.seed)

    def fibre_repr(v) -> str:
        text = sys.describe_fibre(v)
        if isinstance(v, GrassCoordC):
            sheet = sys.hemisphere(v)
            text += f" [iota={'undefined' if sheet is None else sheet}]"
        return text

    rows = (
        (n, sys.base.describe_point(p.base), fibre_repr(p.fibre))
        for n, p in enumerate(sys.orbit(start, config.numerics.orbit_length))
    )
    csv_path = writer.write_orbit("orbit.csv", rows)
    return _envelope(config, OrbitPayload(
        system=sys.describe(),
        start={"base": sys.base.describe_point(start.base), "fibre": sys.describe_fibre(start.fibre)},
        steps=config.numerics.orbit_length,
        csv=csv_path.name,
    ))


def lyapunov_samples(
    g: CocycleGenerator,
    base: BaseSystem,
    samples: int,
    n: int,
    seed: int,
    method: str = "matrix",
    cap: Optional[int] = None,
) -> List[LyapunovSample]:
    """growth_check at random (x, v) pairs."""
    points = base.sample_points(derive_seed(seed, 11), samples)
    vectors = np.random.default_rng(derive_seed(seed, 12)).normal(size=(samples, 2))
    extra = {} if cap is None else {"cap": cap}
    results = []
    for x, v in zip(points, vectors):
        exponent = growth_check(g, base, x, v, n, method=method, **extra)
        results.append(LyapunovSample(base_point=base.describe_point(x), vector=[float(c) for c in v], exponent=exponent))
    return results


def run_lyapunov(config: ExperimentConfig, settings: Settings, writer: ReportWriter) -> RunReport:
    base = build_base(config.base)
    g = build_generator(config.cocycle, base)
    numerics = config.numerics
    samples = lyapunov_samples(
        g, base, numerics.lyapunov_samples, numerics.n, config.seed,
        numerics.lyapunov_method, settings.product_cap,
    )
    worst = max(abs(s.exponent) for s in samples)
    logger.info("Largest |exponent| over %d samples: %.3e", len(samples), worst)
    return _envelope(config, LyapunovPayload(
        system={k: v for k, v in SkewSystem(base, g, FibreKind.TORUS).describe().items() if k != "fibre"},
        method=numerics.lyapunov_method,
        n=numerics.n,
        samples=samples,
        max_abs_exponent=worst,
    ))


def run_diagnose(config: ExperimentConfig, settings: Settings, writer: ReportWriter) -> RunReport:
    sys = build_skew(config, iota_annulus=settings.iota_annulus)
    sink: Optional[List[TrajectoryPoint]] = [] if config.numerics.trajectories else None
    scan = _scan(config, sys, sink)
    payload = DiagnosePayload(scan=scan, averages_csv=writer.write_averages("averages.csv", scan).name)
    if sink is not None:
        payload.trajectories_csv = writer.write_trajectories("trajectories.csv", sink).name

    if config.ulam.enabled:
        grid = tuple(config.ulam.grid)
        matrix = ulam_discretize(sys, grid, config.ulam.samples_per_cell)
        support = invariant_vector_support(matrix, config.ulam.tol, grid)
        payload.ulam = support_report(matrix, support, grid, config.ulam.samples_per_cell)
        if support.heat is not None:
            payload.ulam_heat_csv = writer.write_heat("ulam_heat.csv", support.heat, grid).name
    return _envelope(config, payload)


def _example2_parameters(config: ExperimentConfig) -> Tuple[Angle, Angle]:
    return parse_angle(config.base.eta), parse_angle(config.cocycle.alpha)


def run_induce(config: ExperimentConfig, settings: Settings, writer: ReportWriter) -> RunReport:
    formula = config.inducing.formula
    samples = config.inducing.samples
    cap = settings.return_cap
    reports: List[InducingReport] = []
    notes: List[str] = []

    if formula in (InduceFormula.RETURNS, InduceFormula.ALL):
        reports.append(return_statistics(build_induced(config, cap), samples, config.seed))

    chain = {
        InduceFormula.SECTION_MAP: verify_sb_formula,
        InduceFormula.SQUARED_RETURN: verify_q_formula,
        InduceFormula.Z2_SECTION_MAP: verify_rb_formula,
    }
    wanted = list(chain) if formula == InduceFormula.ALL else [f for f in chain if f == formula]
    if wanted and config.cocycle.kind != "example2":
        if formula != InduceFormula.ALL:
            raise DomainError(f"formula {formula.value} is defined for the example2 cocycle only")
        notes.append(f"S_B, Q and R_B skipped: cocycle {config.cocycle.kind} is not example2")
        wanted = []

    for f in wanted:
        eta, alpha = _example2_parameters(config)
        try:
            reports.append(chain[f](eta, alpha, samples, config.seed, return_cap=cap))
        except DomainError as e:
            if formula != InduceFormula.ALL:
                raise
            notes.append(f"{f.value}: {e}")
            logger.warning("Skipping %s: %s", f.value, e)
    return _envelope(config, InducePayload(reports=reports, notes=notes))


def _rotation_sections(g: CocycleGenerator, base: BaseSystem, samples: int, seed: int, notes: List[str]):
    """Extract, re-verify on fresh samples, and add the perpendicular sections."""
    try:
        sections = extract_rotation_sections(g, seed=seed)
    except PreconditionError as e:
        notes.append(f"no constant rotation sections: {e}")
        return [], [], None
    verified, checks = [], []
    for section in list(sections) + [perp_section(s) for s in sections]:
        check = verify_section(g, base, section, samples, derive_seed(seed, 3))
        checks.append(check)
        verified.append(with_residual(section, check))
    _, diagonalization = diagonalize_rotation_cocycle(g, samples, seed)
    return verified, checks, diagonalization


def run_search_reducibility(config: ExperimentConfig, settings: Settings, writer: ReportWriter) -> RunReport:
    base = build_base(config.base)
    g = build_generator(config.cocycle, base)
    report_R = _scan(config, SkewSystem(base, g, FibreKind.Z2))
    report_S = _scan(config, SkewSystem(base, g, FibreKind.TORUS))
    notes: List[str] = []
    sections, checks, diagonalization = _rotation_sections(
        g, base, config.numerics.section_samples, config.seed, notes,
    )
    verdict = apply_criteria(report_R, report_S, sections)
    return _envelope(config, ReducibilitySearchReport(
        cocycle=g.describe(),
        sections=[s.summary() for s in sections],
        section_checks=checks,
        diagonalization=diagonalization,
        notes=notes,
        report_R=report_R,
        report_S=report_S,
        verdict=verdict,
    ))


def _counterexample_eta(config: ExperimentConfig) -> Dict:
    if config.base.kind == "rotation" and config.base.eta is not None:
        return {"eta": parse_angle(config.base.eta)}
    return {}


def run_verify_counterexamples(config: ExperimentConfig, settings: Settings, writer: ReportWriter) -> RunReport:
    report = run_counterexample_suite(
        n=config.numerics.n,
        starts=config.numerics.starts,
        seed=config.seed,
        thresholds=config.thresholds,
        threads=config.threads,
        ulam_grid=config.ulam.grid[0],
        ulam_samples=config.ulam.samples_per_cell,
        **_counterexample_eta(config),
    )
    if not report.all_confirmed:
        failed = [row.claim for row in report.claims if row.status != ClaimStatus.CONFIRMED]
        logger.warning("%d counterexample claims not confirmed: %s", len(failed), failed)
    return _envelope(config, report)


# =============================================================================
# REPRODUCE
# =============================================================================

def _row(subject: str, claim: str, ok: bool, detail: str = "") -> ClaimRow:
    return ClaimRow(
        subject=subject,
        claim=claim,
        status=ClaimStatus.CONFIRMED if ok else ClaimStatus.NOT_CONFIRMED,
        detail=detail,
    )


def _example_rows(summary: ExampleSummary) -> List[ClaimRow]:
    verdict = summary.verdict
    detail = f"R={verdict.verdict_R.value}, S={verdict.verdict_S.value}"
    both = verdict.verdict_R == Verdict.ERGODIC_CONSISTENT and verdict.verdict_S == Verdict.ERGODIC_CONSISTENT
    if summary.name == "example1":
        return [
            _row(summary.name, "S ergodic-consistent", verdict.verdict_S == Verdict.ERGODIC_CONSISTENT, detail),
            _row(
                summary.name, "real bundle irreducible-consistent",
                verdict.real_bundle == BundleVerdict.IRREDUCIBLE_CONSISTENT, verdict.real_bundle.value,
            ),
            _row(
                summary.name, "complex bundle reducible-witnessed by z = 0 and z = inf",
                verdict.complex_bundle == BundleVerdict.REDUCIBLE_WITNESSED, verdict.complex_bundle.value,
            ),
        ]
    return [
        _row(summary.name, "R and S ergodic-consistent", both, detail),
        _row(
            summary.name, "complex bundle irreducible-consistent",
            verdict.complex_bundle == BundleVerdict.IRREDUCIBLE_CONSISTENT, verdict.complex_bundle.value,
        ),
        _row(
            summary.name, "scalar cohomology excluded-consistent",
            verdict.scalar_cohomology == ScalarVerdict.EXCLUDED_CONSISTENT, verdict.scalar_cohomology.value,
        ),
    ]


def _inducing_rows(config: ExperimentConfig, eta: Angle, alpha: Angle, cap: int, reports: List[InducingReport]) -> List[ClaimRow]:
    subject = "inducing"
    base = BaseSystem.rotation(eta)
    sys = SkewSystem(base, example2(alpha, eta), FibreKind.TORUS)
    induced = InducedSystem(sys, (1.0 - float(eta), 1.0), ChartOrientation.REVERSING, cap)
    returns = return_statistics(induced, config.inducing.samples, config.seed)
    reports.append(returns)
    expected_support = expected_return_support(induced.length)
    beta = frac(1.0 / float(eta))
    rows = [
        _row(
            subject, f"return times on [1 - eta, 1) are exactly {expected_support}",
            returns.return_time_support == expected_support, f"support={returns.return_time_support}",
        ),
        _row(
            subject, "induced rotation number equals frac(1/eta)",
            returns.rotation_number is not None
            and math.isclose(returns.rotation_number, beta, abs_tol=ROTATION_NUMBER_TOLERANCE),
            f"rotation number={returns.rotation_number}, frac(1/eta)={beta!r}",
        ),
        _row(
            subject, "Kac identity within 1%",
            abs(returns.kac_product - 1.0) <= KAC_TOLERANCE, f"mean return x length={returns.kac_product:.6f}",
        ),
    ]

    sb = verify_sb_formula(eta, alpha, config.inducing.samples, config.seed, return_cap=cap)
    reports.append(sb)
    rows.append(_row(
        subject, "S_B matches (u + beta, k alpha - y)",
        sb.max_discrepancy <= SB_TOLERANCE and bool(sb.offsets_consistent),
        f"discrepancy={sb.max_discrepancy:.3e}, k={sb.fitted_k}, chart={sb.chart.value}",
    ))
    try:
        q = verify_q_formula(eta, alpha, config.inducing.samples, config.seed, return_cap=cap)
    except DomainError as e:
        rows.append(_row(subject, "Q matches (u + zeta, y -+ alpha)", False, str(e)))
    else:
        reports.append(q)
        rows.append(_row(
            subject, "Q matches (u + zeta, y -+ alpha)",
            q.max_discrepancy <= Q_TOLERANCE,
            f"discrepancy={q.max_discrepancy:.3e}, zeta={q.zeta!r}, chart={q.chart.value}",
        ))
    rb = verify_rb_formula(eta, alpha, config.inducing.samples, config.seed, return_cap=cap)
    reports.append(rb)
    rows.append(_row(
        subject, "R_B is the rotation by (beta, 1)",
        rb.max_discrepancy <= SB_TOLERANCE, f"discrepancy={rb.max_discrepancy:.3e}",
    ))
    return rows


def run_reproduce_paper(config: ExperimentConfig, settings: Settings, writer: ReportWriter) -> RunReport:
    """Examples 1-3, the inducing chain and both counterexamples."""
    eta = parse_angle(config.base.eta if config.base.eta is not None else "sqrt2-1")
    alpha = parse_angle(config.cocycle.alpha if config.cocycle.alpha is not None else "sqrt3-1")
    rotation, shift = BaseSystem.rotation(eta), BaseSystem.bernoulli()
    examples = [
        ("example1", rotation, example1()),
        ("example2", rotation, example2(alpha, eta)),
        ("example3", shift, example3(alpha)),
    ]

    summaries: List[ExampleSummary] = []
    rows: List[ClaimRow] = []
    for name, base, g in examples:
        logger.info("Reproducing %s", name)
        lyapunov = lyapunov_samples(
            g, base, config.numerics.lyapunov_samples, config.numerics.n, config.seed,
            config.numerics.lyapunov_method, settings.product_cap,
        )
        worst = max(abs(s.exponent) for s in lyapunov)
        rows.append(_row(name, "zero Lyapunov exponent", worst <= LAMBDA_TOLERANCE, f"max |lambda|={worst:.3e}"))

        report_R = _scan(config, SkewSystem(base, g, FibreKind.Z2))
        report_S = _scan(config, SkewSystem(base, g, FibreKind.TORUS))
        notes: List[str] = []
        sections, checks, diagonalization = _rotation_sections(
            g, base, config.numerics.section_samples, config.seed, notes,
        )
        summary = ExampleSummary(
            name=name,
            report_R=report_R,
            report_S=report_S,
            verdict=apply_criteria(report_R, report_S, sections),
            diagonalization=diagonalization,
        )
        rows.extend(_example_rows(summary))
        if name == "example1":
            rows.append(_row(
                name, "sections z = 0, z = inf and their perpendiculars verified",
                len(checks) == 4 and all(c.residual <= PERP_TOLERANCE for c in checks),
                f"residuals={[c.residual for c in checks]}",
            ))
            rows.append(_row(
                name, "k constant along every section",
                all(k_dispersion(s) <= PERP_TOLERANCE for s in sections),
            ))
            rows.append(_row(
                name, "conjugation by [v1 v2] gives diag(e^{-i pi x}, e^{i pi x})",
                diagonalization is not None and diagonalization.diagonal,
                "" if diagonalization is None else f"off-diagonal={diagonalization.max_off_diagonal:.3e}",
            ))
        if name == "example2":
            rows.extend(_inducing_rows(config, eta, alpha, settings.return_cap, summary.inducing))
        summaries.append(summary)

    counterexamples = run_counterexample_suite(
        eta=eta,
        n=config.numerics.n,
        starts=config.numerics.starts,
        seed=config.seed,
        thresholds=config.thresholds,
        threads=config.threads,
        ulam_grid=config.ulam.grid[0],
        ulam_samples=config.ulam.samples_per_cell,
    )
    rows.extend(counterexamples.claims)
    writer.write_summary("summary", rows)
    confirmed = sum(r.status == ClaimStatus.CONFIRMED for r in rows)
    logger.info("Reproduction: %d/%d claims confirmed", confirmed, len(rows))
    return _envelope(config, ReproductionPayload(examples=summaries, counterexamples=counterexamples, rows=rows))


# =============================================================================
# DISPATCH
# =============================================================================

RUNNERS: Dict[ExperimentKind, Callable[[ExperimentConfig, Settings, ReportWriter], RunReport]] = {
    ExperimentKind.ORBIT: run_orbit,
    ExperimentKind.LYAPUNOV: run_lyapunov,
    ExperimentKind.DIAGNOSE: run_diagnose,
    ExperimentKind.INDUCE: run_induce,
    ExperimentKind.SEARCH_REDUCIBILITY: run_search_reducibility,
    ExperimentKind.VERIFY_COUNTEREXAMPLES: run_verify_counterexamples,
    ExperimentKind.REPRODUCE_PAPER: run_reproduce_paper,
}


def run(config: ExperimentConfig, settings: Settings) -> ReportWriter:
    """
    Run one experiment and write its report files.

    Returns:
        the writer, listing every file written

    Raises:
        DomainError, ResourceCapError, InvariantBreach from the engines
    """
    writer = ReportWriter(config.out, settings.record_wall_time)
    name = config.experiment.value
    logger.info("Running %s (seed=%d, threads=%d)", name, config.seed, config.threads)
    started = time.perf_counter()
    report = RUNNERS[config.experiment](config, settings, writer)
    writer.write_report(name, report)
    writer.write_timing(name, time.perf_counter() - started)
    return writer
