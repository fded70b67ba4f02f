# =============================================================================
# REPORT WRITER
# Single writer for every output file of a run
# =============================================================================
#
# - <name>.json          the RunReport, checked by the language guard
# - <name>.schema.json   JSON schema of the report model
# - <name>.timing.json   wall time (kept out of the report so reruns
#                        with the same config and seed are byte-identical)
# - *.csv                plot series and summary tables
#
# =============================================================================

import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from ..schemas.diagnostics import ErgodicityReport, TrajectoryPoint
from ..schemas.reducibility import ClaimRow
from ..utils.report_guard import ensure_report_language

logger = logging.getLogger(__name__)


class ReportWriter:
    """Writes reports and series under one output directory."""

    def __init__(self, out_dir: str, record_wall_time: bool = True):
        self.out_dir = Path(out_dir)
        self.record_wall_time = record_wall_time
        self.written: List[Path] = []

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def _track(self, path: Path) -> Path:
        self.written.append(path)
        logger.info("Wrote %s", path)
        return path

    # -------------------------------------------------------------------------
    # JSON
    # -------------------------------------------------------------------------

    def write_report(self, name: str, report: BaseModel) -> Path:
        """
        Write <name>.json and <name>.schema.json.

        Raises:
            InvariantBreach if the serialized report overclaims
        """
        text = ensure_report_language(report.model_dump_json(indent=2))
        path = self._path(f"{name}.json")
        path.write_text(text + "\n", encoding="utf-8")
        schema = json.dumps(type(report).model_json_schema(), indent=2, sort_keys=True)
        self._path(f"{name}.schema.json").write_text(schema + "\n", encoding="utf-8")
        return self._track(path)

    def write_timing(self, name: str, seconds: float) -> None:
        if not self.record_wall_time:
            return
        payload = {"report": f"{name}.json", "wall_time_seconds": round(seconds, 3)}
        self._path(f"{name}.timing.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    def write_json_rows(self, name: str, rows: Sequence[BaseModel]) -> Path:
        text = ensure_report_language(json.dumps([r.model_dump(mode="json") for r in rows], indent=2))
        path = self._path(f"{name}.json")
        path.write_text(text + "\n", encoding="utf-8")
        return self._track(path)

    # -------------------------------------------------------------------------
    # CSV
    # -------------------------------------------------------------------------

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = self._path(name)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        return self._track(path)

    def write_orbit(self, name: str, rows: Iterable[Tuple[int, str, str]]) -> Path:
        return self.write_csv(name, ("n", "base_repr", "fibre_repr"), rows)

    def write_averages(self, name: str, scan: ErgodicityReport) -> Path:
        rows = (
            (result.observable, start, repr(avg.re), repr(avg.im))
            for result in scan.observables
            for start, avg in enumerate(result.averages)
        )
        return self.write_csv(name, ("observable", "start", "re", "im"), rows)

    def write_trajectories(self, name: str, points: Sequence[TrajectoryPoint]) -> Path:
        ordered = sorted(points, key=lambda p: (p.observable, p.start, p.n))
        rows = ((p.n, p.observable, p.start, repr(p.re), repr(p.im)) for p in ordered)
        return self.write_csv(name, ("n", "observable", "start", "re", "im"), rows)

    def write_heat(self, name: str, heat: np.ndarray, grid: Tuple[int, int]) -> Path:
        nx, ny = grid
        field = np.asarray(heat, dtype=float).reshape(nx, ny)
        rows = ((ix, iy, repr(float(field[ix, iy]))) for ix in range(nx) for iy in range(ny))
        return self.write_csv(name, ("ix", "iy", "value"), rows)

    def write_summary(self, name: str, rows: Sequence[ClaimRow]) -> Tuple[Path, Path]:
        """summary.csv and summary.json: one row per claim."""
        csv_path = self.write_csv(
            f"{name}.csv",
            ("subject", "claim", "status", "detail"),
            ((r.subject, r.claim, r.status.value, r.detail) for r in rows),
        )
        return csv_path, self.write_json_rows(name, rows)
