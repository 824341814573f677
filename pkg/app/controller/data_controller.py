from __future__ import annotations

import logging
from pathlib import Path

from app.config.run_config import RunConfig, extra_test_file
from app.data.generators import class_means, gen_gaussian_id, gen_outliers
from app.exceptions import ConfigurationError, DataError
from app.model.dataset_schema import LabeledDataset, OutlierDataset
from app.repository.dataset_repository import DatasetRepository
from app.types.generator_types import OutlierMode, OutlierParams, OutlierRole

logger = logging.getLogger(__name__)

TEST_SPLIT = 1


class DataController:
    """Controller for dataset generation and loading."""

    def __init__(self):
        self.repository = DatasetRepository()

    def generate(self, run_config: RunConfig, out_dir: str | Path | None = None) -> dict[str, Path]:
        """
        Write id_train, id_test, ood_aux and ood_test CSVs, plus one
        ``ood_test_<mode>.csv`` per extra test mode.

        Args:
            run_config: generator parameters and seed
            out_dir: target directory, ``run_config.data_dir`` when omitted

        Returns:
            dict: file name key -> written path

        Raises:
            ConfigurationError: if the generator parameters are invalid, or a
                test mode repeats the auxiliary mode or another test mode
            DataError: if the directory is not writable
        """
        out_dir = Path(out_dir or run_config.data_dir)
        params = run_config.id_params()
        test_modes = [run_config.test_mode, *run_config.extra_test_modes]
        if run_config.aux_mode in test_modes:
            raise ConfigurationError(
                f"auxiliary and test outliers must come from different modes, "
                f"both use {run_config.aux_mode.value}"
            )
        if len(set(test_modes)) != len(test_modes):
            raise ConfigurationError(f"test modes must be distinct, got {[m.value for m in test_modes]}")

        outlier_params = OutlierParams()
        means = class_means(params.classes, params.dim, params.mean_scale, run_config.seed)

        def outliers(m: int, mode: OutlierMode, role: OutlierRole) -> OutlierDataset:
            return gen_outliers(params.dim, m, mode, outlier_params, run_config.seed, role, id_means=means)

        datasets: dict[str, LabeledDataset | OutlierDataset] = {
            "id_train": gen_gaussian_id(
                params.classes, params.dim, params.n_per_class, params.mean_scale, params.sigma, run_config.seed
            ),
            "id_test": gen_gaussian_id(
                params.classes, params.dim, run_config.n_test_per_class, params.mean_scale, params.sigma,
                run_config.seed, split=TEST_SPLIT,
            ),
            "ood_aux": outliers(run_config.ood_count, run_config.aux_mode, OutlierRole.AUXILIARY),
            "ood_test": outliers(run_config.ood_test_count, run_config.test_mode, OutlierRole.TEST),
        }
        for mode in run_config.extra_test_modes:
            datasets[Path(extra_test_file(mode)).stem] = outliers(run_config.ood_test_count, mode, OutlierRole.TEST)
        if not out_dir.is_dir():
            try:
                out_dir.mkdir(parents=True, exist_ok=True)
            except OSError as e:
                raise DataError(f"Failed to create data directory {out_dir}: {str(e)}") from e

        written: dict[str, Path] = {}
        for name, dataset in datasets.items():
            path = out_dir / f"{name}.csv"
            self.repository.save_csv(dataset, path)
            written[name] = path
        logger.info(f"Generated {len(written)} datasets in {out_dir}")
        return written

    def load_labeled(self, path: str | Path) -> LabeledDataset:
        dataset = self.repository.load_csv(path)
        if not isinstance(dataset, LabeledDataset):
            raise DataError(f"{path}: expected labeled ID samples, found only outlier rows")
        return dataset

    def load_outliers(self, path: str | Path, role: OutlierRole) -> OutlierDataset:
        dataset = self.repository.load_csv(path, role=role)
        if not isinstance(dataset, OutlierDataset):
            raise DataError(f"{path}: expected outlier rows (label -1), found labeled samples")
        return dataset

    def load_any(self, path: str | Path) -> LabeledDataset | OutlierDataset:
        return self.repository.load_csv(path)
