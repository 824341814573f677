from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

from app.exceptions import DataError
from app.model.report_schema import DetectionReport, SeparationTriplet, TrainLog, TrainLogRecord

logger = logging.getLogger(__name__)


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


class ReportRepository:
    """Writes every run artifact as a plain CSV file."""

    def write_rows(self, path: str | Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
        """
        Write a header line and rows; None becomes an empty cell.

        Raises:
            DataError: if the file cannot be written
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_cell(v) for v in row])
        except OSError as e:
            raise DataError(f"Failed to write {path}: {str(e)}") from e
        logger.info(f"Wrote {path}")
        return path

    def save_train_log(self, log: TrainLog, path: str | Path, append: bool = False) -> Path:
        columns = TrainLogRecord.__csv_columns__
        records = list(log.records)
        if append and Path(path).is_file():
            records = self.load_train_log(path).records + records
        rows = [[getattr(record, c) for c in columns] for record in records]
        return self.write_rows(path, columns, rows)

    def load_train_log(self, path: str | Path) -> TrainLog:
        path = Path(path)
        try:
            with path.open("r", encoding="utf-8", newline="") as handle:
                reader = csv.DictReader(handle)
                records = [
                    TrainLogRecord(**{k: (v if v != "" else None) for k, v in row.items()})
                    for row in reader
                ]
        except OSError as e:
            raise DataError(f"Failed to read train log {path}: {str(e)}") from e
        return TrainLog(records=records)

    def save_detection_reports(self, reports: Sequence[DetectionReport], path: str | Path) -> Path:
        columns = DetectionReport.__csv_columns__
        rows = [
            [report.score_kind.value if c == "score_kind" else getattr(report, c) for c in columns]
            for report in reports
        ]
        return self.write_rows(path, columns, rows)

    def save_separation(self, triplet: SeparationTriplet, path: str | Path) -> Path:
        header = ("metric", "id_mean", "ood_mean", "diff")
        return self.write_rows(path, header, [[row[h] for h in header] for row in triplet.rows()])

    def save_projection(self, populations: Sequence[str], coordinates, path: str | Path) -> Path:
        dims = coordinates.shape[1]
        header = ["population"] + [f"c{k + 1}" for k in range(dims)]
        rows = ([population] + [float(v) for v in coords] for population, coords in zip(populations, coordinates))
        return self.write_rows(path, header, rows)
