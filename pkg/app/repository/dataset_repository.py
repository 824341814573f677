from __future__ import annotations

import csv
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from app.exceptions import DataError
from app.model.dataset_schema import LabeledDataset, OutlierDataset
from app.types.generator_types import OutlierRole

logger = logging.getLogger(__name__)

OUTLIER_LABEL = -1


def _format_float(value: float) -> str:
    return f"{value:.17g}"


class DatasetRepository:
    """
    Datasets as CSV: header ``label,f0,...,f{d-1}``, one sample per line,
    label -1 marks outliers.
    """

    def load_csv(
        self,
        path: str | Path,
        role: OutlierRole = OutlierRole.TEST,
    ) -> LabeledDataset | OutlierDataset:
        """
        Parse a dataset file.

        Args:
            path: CSV file to read
            role: role given to the dataset when every label is -1

        Returns:
            LabeledDataset, or OutlierDataset when every label is -1

        Raises:
            DataError: missing file, malformed rows, inconsistent widths or mixed labels
        """
        path = Path(path)
        if not path.is_file():
            raise DataError(f"Dataset file not found: {path}")
        try:
            with path.open("r", encoding="utf-8", newline="") as handle:
                reader = csv.reader(handle)
                header = next(reader, None)
                d = self._check_header(header, path)
                labels: list[int] = []
                rows: list[list[float]] = []
                for row in reader:
                    if not row:
                        continue
                    line = reader.line_num
                    if len(row) != d + 1:
                        raise DataError(f"{path}:{line}: expected {d + 1} columns, got {len(row)}")
                    try:
                        labels.append(int(row[0]))
                    except ValueError:
                        raise DataError(f"{path}:{line}: label {row[0]!r} is not an integer") from None
                    try:
                        rows.append([float(v) for v in row[1:]])
                    except ValueError:
                        raise DataError(f"{path}:{line}: malformed feature value") from None
        except OSError as e:
            raise DataError(f"Failed to read dataset {path}: {str(e)}") from e

        if not rows:
            raise DataError(f"{path}: dataset has no samples")
        label_array = np.array(labels, dtype=np.int64)
        outliers = label_array == OUTLIER_LABEL
        try:
            if outliers.all():
                return OutlierDataset(features=np.array(rows), role=role)
            if outliers.any():
                raise DataError(f"{path}: mixes outlier rows (label -1) with labeled rows")
            if label_array.min() < 0:
                raise DataError(f"{path}: negative label other than -1")
            return LabeledDataset(
                features=np.array(rows),
                labels=label_array,
                num_classes=int(label_array.max()) + 1,
            )
        except ValidationError as e:
            raise DataError(f"{path}: invalid dataset: {str(e)}") from e

    def save_csv(self, dataset: LabeledDataset | OutlierDataset, path: str | Path) -> None:
        """
        Write a dataset with 17 significant digits per value.

        Raises:
            DataError: if the file cannot be written
        """
        path = Path(path)
        if isinstance(dataset, LabeledDataset):
            labels = dataset.labels
        else:
            labels = np.full(dataset.n, OUTLIER_LABEL)
        try:
            with path.open("w", encoding="utf-8", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["label"] + [f"f{j}" for j in range(dataset.d)])
                for label, row in zip(labels, dataset.features):
                    writer.writerow([str(int(label))] + [_format_float(v) for v in row])
        except OSError as e:
            raise DataError(f"Failed to save dataset {path}: {str(e)}") from e
        logger.info(f"Saved {dataset.n} samples to {path}")

    @staticmethod
    def _check_header(header: list[str] | None, path: Path) -> int:
        if not header or header[0] != "label" or len(header) < 2:
            raise DataError(f"{path}:1: header must be 'label,f0,...,f{{d-1}}'")
        d = len(header) - 1
        if header[1:] != [f"f{j}" for j in range(d)]:
            raise DataError(f"{path}:1: feature columns must be named f0..f{d - 1}")
        return d
